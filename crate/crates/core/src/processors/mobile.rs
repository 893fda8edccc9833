use rand::{Rng, RngCore};

use crate::processor::{check_symbol, Emission, ProcessError, Processor, Transition};
use crate::state::State;

/// Mobile agents compiled to message passing: an agent of type `a` arriving
/// at a vertex in state `q` sets the vertex state to `T(a,q)`, becomes type
/// `S(a,q)` and leaves along out-edge `U(a,q)`.
#[derive(Debug, Clone)]
pub struct MobileAgents {
    states: usize,
    next_state: Vec<Vec<usize>>,
    next_agent: Vec<Vec<usize>>,
    exit_edge: Vec<Vec<usize>>,
    out_degree: usize,
}

impl MobileAgents {
    /// Tables are indexed `[agent][state]`; `exit_edge` holds local out-edge
    /// positions.
    pub(crate) fn new(
        states: usize,
        next_state: Vec<Vec<usize>>,
        next_agent: Vec<Vec<usize>>,
        exit_edge: Vec<Vec<usize>>,
        out_degree: usize,
    ) -> Self {
        MobileAgents {
            states,
            next_state,
            next_agent,
            exit_edge,
            out_degree,
        }
    }

    fn state(&self, state: &State) -> Result<usize, ProcessError> {
        match state {
            State::Int(q) if *q >= 0 && (*q as usize) < self.states => Ok(*q as usize),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "vertex state index",
            }),
        }
    }
}

impl Processor for MobileAgents {
    fn family(&self) -> &str {
        "mobile"
    }

    fn alphabet_size(&self) -> usize {
        self.next_state.len()
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
        check_symbol(symbol, self.alphabet_size())?;
        let q = self.state(state)?;
        Ok(Transition {
            state: State::Int(self.next_state[symbol][q] as i64),
            emission: Emission::single(self.exit_edge[symbol][q], self.next_agent[symbol][q]),
        })
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        State::Int(rng.gen_range(0..self.states) as i64)
    }
}
