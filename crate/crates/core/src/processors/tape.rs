use rand::{Rng, RngCore};

use crate::processor::{check_symbol, Emission, ProcessError, Processor, Transition};
use crate::state::State;

/// Unary processor reading an eventually periodic instruction tape.
///
/// State `i` is the position of the next instruction. Processing a letter
/// executes `cells[i]` (a multiset of local out-edges, one letter of symbol 0
/// per mention) and advances to `i + 1`, wrapping back to the start of the
/// periodic part.
#[derive(Debug, Clone)]
pub struct Tape {
    cells: Vec<Vec<usize>>,
    preperiod: usize,
    out_degree: usize,
}

impl Tape {
    pub(crate) fn new(cells: Vec<Vec<usize>>, preperiod: usize, out_degree: usize) -> Self {
        debug_assert!(preperiod < cells.len());
        Tape {
            cells,
            preperiod,
            out_degree,
        }
    }

    fn state(&self, state: &State) -> Result<usize, ProcessError> {
        match state {
            State::Int(q) if *q >= 0 && (*q as usize) < self.cells.len() => Ok(*q as usize),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "tape position",
            }),
        }
    }
}

impl Processor for Tape {
    fn family(&self) -> &str {
        "tape"
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
        let i = self.state(state)?;
        let mut emission = Emission::none();
        for &e in &self.cells[i] {
            emission.push(e, 0, 1);
        }
        let next = if i + 1 == self.cells.len() {
            self.preperiod
        } else {
            i + 1
        };
        Ok(Transition {
            state: State::Int(next as i64),
            emission,
        })
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        State::Int(rng.gen_range(0..self.cells.len()) as i64)
    }
}
