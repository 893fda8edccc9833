use rand::{Rng, RngCore};

use crate::processor::{check_symbol, ProcessError, Processor, Transition};
use crate::state::State;

/// One-state processor that swallows every letter.
#[derive(Debug, Clone)]
pub struct Sink {
    alphabet: usize,
    out_degree: usize,
}

impl Sink {
    pub(crate) fn new(alphabet: usize, out_degree: usize) -> Self {
        Sink {
            alphabet,
            out_degree,
        }
    }
}

impl Processor for Sink {
    fn family(&self) -> &str {
        "sink"
    }

    fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    fn out_degree(&self) -> usize {
        self.out_degree
    }

    fn initial_state(&self) -> State {
        State::Unit
    }

    fn accepts_state(&self, state: &State) -> bool {
        *state == State::Unit
    }

    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError> {
        check_symbol(symbol, self.alphabet)?;
        if *state != State::Unit {
            return Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "unit",
            });
        }
        Ok(Transition::quiet(State::Unit))
    }

    fn never_emits(&self) -> bool {
        true
    }
}

/// Sink that counts how many letters it has received.
#[derive(Debug, Clone)]
pub struct Counter {
    alphabet: usize,
    out_degree: usize,
}

impl Counter {
    pub(crate) fn new(alphabet: usize, out_degree: usize) -> Self {
        Counter {
            alphabet,
            out_degree,
        }
    }
}

impl Processor for Counter {
    fn family(&self) -> &str {
        "counter"
    }

    fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    fn out_degree(&self) -> usize {
        self.out_degree
    }

    fn initial_state(&self) -> State {
        State::Int(0)
    }

    fn accepts_state(&self, state: &State) -> bool {
        matches!(state, State::Int(q) if *q >= 0)
    }

    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError> {
        check_symbol(symbol, self.alphabet)?;
        match state {
            State::Int(q) if *q >= 0 => Ok(Transition::quiet(State::Int(
                q.checked_add(1).ok_or(ProcessError::Overflow)?,
            ))),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "nonnegative count",
            }),
        }
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        State::Int(rng.gen_range(0..100))
    }

    fn never_emits(&self) -> bool {
        true
    }
}
