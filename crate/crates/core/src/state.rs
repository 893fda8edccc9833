use std::fmt;
use std::hash::{Hash, Hasher};

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

/// Internal state of one processor.
///
/// Finite state spaces use small integers; infinite ones (counters, oil and
/// water, `Net_F`) use integers or integer vectors that are only bounded by
/// 64-bit arithmetic. A collapsed subnetwork carries the product of its
/// interior states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    Unit,
    Int(i64),
    Vector(Vec<i64>),
    Product(Vec<State>),
}

impl State {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            State::Int(q) => Some(*q),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[i64]> {
        match self {
            State::Vector(v) => Some(v),
            _ => None,
        }
    }

    /// Stable 64-bit digest (FNV-1a over the derived `Hash` stream).
    pub fn digest(&self) -> u64 {
        let mut h = FnvHasher::default();
        self.hash(&mut h);
        h.finish()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Unit => f.write_str("()"),
            State::Int(q) => write!(f, "{q}"),
            State::Vector(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            State::Product(parts) => {
                f.write_str("[")?;
                for (i, s) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        assert_eq!(State::Unit.to_string(), "()");
        assert_eq!(State::Int(-1).to_string(), "-1");
        assert_eq!(State::Vector(vec![1, 2]).to_string(), "(1,2)");
        assert_eq!(
            State::Product(vec![State::Int(0), State::Vector(vec![3])]).to_string(),
            "[0 (3)]"
        );
    }

    #[test]
    fn digest_is_stable_and_discriminating() {
        assert_eq!(State::Int(3).digest(), State::Int(3).digest());
        assert_ne!(State::Int(3).digest(), State::Int(4).digest());
        assert_ne!(State::Int(0).digest(), State::Vector(vec![0]).digest());
    }
}
