use rand::{Rng, RngCore};

use crate::processor::{check_symbol, Emission, ProcessError, Processor, Transition};
use crate::state::State;

/// Sandpile / toppling processor: unary, states `0..r`, topples (one letter
/// on every out-edge) on the transition from `r - 1` back to `0`.
///
/// With `allow_negative` the state space is enlarged by the negative
/// integers, which count upwards silently.
#[derive(Debug, Clone)]
pub struct Toppling {
    threshold: i64,
    out_degree: usize,
    allow_negative: bool,
}

impl Toppling {
    pub(crate) fn new(threshold: u64, out_degree: usize, allow_negative: bool) -> Self {
        Toppling {
            threshold: threshold as i64,
            out_degree,
            allow_negative,
        }
    }

    pub fn threshold(&self) -> u64 {
        self.threshold as u64
    }

    fn state(&self, state: &State) -> Result<i64, ProcessError> {
        match state {
            State::Int(q) if self.contains(*q) => Ok(*q),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "integer below the threshold",
            }),
        }
    }

    fn contains(&self, q: i64) -> bool {
        q < self.threshold && (q >= 0 || self.allow_negative)
    }
}

impl Processor for Toppling {
    fn family(&self) -> &str {
        "sandpile"
    }

    fn alphabet_size(&self) -> usize {
        1
    }

    fn out_degree(&self) -> usize {
        self.out_degree
    }

    fn initial_state(&self) -> State {
        State::Int(0)
    }

    fn accepts_state(&self, state: &State) -> bool {
        self.state(state).is_ok()
    }

    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError> {
        check_symbol(symbol, 1)?;
        let q = self.state(state)?;
        if q == self.threshold - 1 {
            let mut emission = Emission::none();
            for e in 0..self.out_degree {
                emission.push(e, 0, 1);
            }
            Ok(Transition {
                state: State::Int(0),
                emission,
            })
        } else {
            Ok(Transition::quiet(State::Int(q + 1)))
        }
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        let low = if self.allow_negative {
            -self.threshold
        } else {
            0
        };
        State::Int(rng.gen_range(low..self.threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topples_from_top_state() {
        let p = Toppling::new(3, 3, false);
        let t = p.process(0, &State::Int(2)).unwrap();
        assert_eq!(t.state, State::Int(0));
        assert_eq!(t.emission.total(), 3);
        let t = p.process(0, &State::Int(0)).unwrap();
        assert_eq!(t.state, State::Int(1));
        assert!(t.emission.is_empty());
    }

    #[test]
    fn negative_states_count_up_silently() {
        let p = Toppling::new(2, 1, true);
        let t = p.process(0, &State::Int(-3)).unwrap();
        assert_eq!(t.state, State::Int(-2));
        assert!(t.emission.is_empty());
        let strict = Toppling::new(2, 1, false);
        assert!(strict.process(0, &State::Int(-1)).is_err());
        assert!(strict.process(0, &State::Int(2)).is_err());
    }
}
