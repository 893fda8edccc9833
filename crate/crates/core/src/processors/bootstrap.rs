use rand::{Rng, RngCore};

use crate::processor::{check_symbol, Emission, ProcessError, Processor, Transition};
use crate::state::State;

/// Bootstrap percolation: counts infected in-neighbours up to `b`, and
/// announces infection to every out-neighbour exactly once, on the step from
/// `b - 1` to `b`.
#[derive(Debug, Clone)]
pub struct Bootstrap {
    threshold: i64,
    out_degree: usize,
}

impl Bootstrap {
    pub(crate) fn new(threshold: u64, out_degree: usize) -> Self {
        Bootstrap {
            threshold: threshold as i64,
            out_degree,
        }
    }

    fn state(&self, state: &State) -> Result<i64, ProcessError> {
        match state {
            State::Int(q) if (0..=self.threshold).contains(q) => Ok(*q),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "0..=threshold",
            }),
        }
    }
}

impl Processor for Bootstrap {
    fn family(&self) -> &str {
        "bootstrap"
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
        let mut emission = Emission::none();
        if q == self.threshold - 1 {
            for e in 0..self.out_degree {
                emission.push(e, 0, 1);
            }
        }
        Ok(Transition {
            state: State::Int((q + 1).min(self.threshold)),
            emission,
        })
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        State::Int(rng.gen_range(0..=self.threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturates_and_fires_once() {
        let p = Bootstrap::new(2, 2);
        let t = p.process(0, &State::Int(1)).unwrap();
        assert_eq!(t.state, State::Int(2));
        assert_eq!(t.emission.total(), 2);
        let t = p.process(0, &State::Int(2)).unwrap();
        assert_eq!(t.state, State::Int(2));
        assert!(t.emission.is_empty());
    }
}
