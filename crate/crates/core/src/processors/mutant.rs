use rand::{Rng, RngCore};

use crate::processor::{check_symbol, Emission, ProcessError, Processor, Transition};
use crate::state::State;

/// A deliberately non-abelian two-letter processor, used as a negative
/// control. It remembers whether the last letter was `a` (symbol 0) and
/// emits one letter on its single out-edge only when `b` (symbol 1) follows
/// an `a`. So `ab` and `ba` differ in both final state and output.
#[derive(Debug, Clone, Default)]
pub struct Mutant;

impl Mutant {
    fn state(&self, state: &State) -> Result<i64, ProcessError> {
        match state {
            State::Int(q @ (0 | 1)) => Ok(*q),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "0 or 1",
            }),
        }
    }
}

impl Processor for Mutant {
    fn family(&self) -> &str {
        "mutant"
    }

    fn alphabet_size(&self) -> usize {
        2
    }

    fn out_degree(&self) -> usize {
        1
    }

    fn initial_state(&self) -> State {
        State::Int(0)
    }

    fn accepts_state(&self, state: &State) -> bool {
        self.state(state).is_ok()
    }

    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError> {
        check_symbol(symbol, 2)?;
        let after_a = self.state(state)? == 1;
        if symbol == 0 {
            return Ok(Transition::quiet(State::Int(1)));
        }
        let emission = if after_a {
            Emission::single(0, 0)
        } else {
            Emission::none()
        };
        Ok(Transition {
            state: State::Int(0),
            emission,
        })
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        State::Int(rng.gen_range(0..2))
    }
}
