use rand::{Rng, RngCore};

use crate::processor::{check_symbol, Emission, ProcessError, Processor, Transition};
use crate::state::State;

/// Simple rotor: serves its out-edges cyclically in `order`, one letter out
/// per letter in. The absorbing variant adds a transient state `-1` that
/// moves to `0` without sending anything.
#[derive(Debug, Clone)]
pub struct Rotor {
    order: Vec<usize>,
    out_degree: usize,
    absorbing: bool,
}

impl Rotor {
    /// `order` lists local out-edge positions.
    pub(crate) fn new(order: Vec<usize>, out_degree: usize, absorbing: bool) -> Self {
        Rotor {
            order,
            out_degree,
            absorbing,
        }
    }

    fn state(&self, state: &State) -> Result<i64, ProcessError> {
        let len = self.order.len() as i64;
        match state {
            State::Int(q) if (0..len).contains(q) || (*q == -1 && self.absorbing) => Ok(*q),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "rotor position",
            }),
        }
    }
}

impl Processor for Rotor {
    fn family(&self) -> &str {
        "rotor"
    }

    fn alphabet_size(&self) -> usize {
        1
    }

    fn out_degree(&self) -> usize {
        self.out_degree
    }

    fn initial_state(&self) -> State {
        State::Int(if self.absorbing { -1 } else { 0 })
    }

    fn accepts_state(&self, state: &State) -> bool {
        self.state(state).is_ok()
    }

    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError> {
        check_symbol(symbol, 1)?;
        let q = self.state(state)?;
        if q < 0 {
            return Ok(Transition::quiet(State::Int(0)));
        }
        let next = (q + 1) % self.order.len() as i64;
        Ok(Transition {
            state: State::Int(next),
            emission: Emission::single(self.order[q as usize], 0),
        })
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        let low = if self.absorbing { -1 } else { 0 };
        State::Int(rng.gen_range(low..self.order.len() as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serves_in_order_and_wraps() {
        let p = Rotor::new(vec![2, 0, 1], 3, false);
        let mut q = State::Int(0);
        let mut served = Vec::new();
        for _ in 0..4 {
            let t = p.process(0, &q).unwrap();
            served.push(t.emission.iter().next().unwrap().edge);
            q = t.state;
        }
        assert_eq!(served, vec![2, 0, 1, 2]);
        assert_eq!(q, State::Int(1));
    }

    #[test]
    fn transient_state_absorbs() {
        let p = Rotor::new(vec![0], 1, true);
        let t = p.process(0, &State::Int(-1)).unwrap();
        assert_eq!(t.state, State::Int(0));
        assert!(t.emission.is_empty());
        assert!(!Rotor::new(vec![0], 1, false).accepts_state(&State::Int(-1)));
    }
}
