use rand::{Rng, RngCore};

use crate::processor::{check_symbol, Emission, ProcessError, Processor, Transition};
use crate::state::State;

pub const OIL: usize = 0;
pub const WATER: usize = 1;

/// Oil and water vertex. The state `(q_oil, q_water)` counts every chip
/// received; the number of topplings completed in state `q` is
/// `t(q) = min(q_oil / r_oil, q_water / r_water)`. Each toppling sends one
/// oil letter along every oil edge and one water letter along every water
/// edge.
#[derive(Debug, Clone)]
pub struct OilWater {
    oil_edges: Vec<usize>,
    water_edges: Vec<usize>,
    r_oil: i64,
    r_water: i64,
    out_degree: usize,
}

impl OilWater {
    pub(crate) fn new(
        oil_edges: Vec<usize>,
        water_edges: Vec<usize>,
        r_oil: u64,
        r_water: u64,
        out_degree: usize,
    ) -> Self {
        OilWater {
            oil_edges,
            water_edges,
            r_oil: r_oil as i64,
            r_water: r_water as i64,
            out_degree,
        }
    }

    /// Topplings completed after reaching `(oil, water)`.
    pub fn topplings(&self, oil: i64, water: i64) -> i64 {
        (oil / self.r_oil).min(water / self.r_water)
    }

    fn state(&self, state: &State) -> Result<(i64, i64), ProcessError> {
        match state.as_vector() {
            Some(&[o, w]) if o >= 0 && w >= 0 => Ok((o, w)),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "pair of nonnegative totals",
            }),
        }
    }
}

impl Processor for OilWater {
    fn family(&self) -> &str {
        "oil-water"
    }

    fn alphabet_size(&self) -> usize {
        2
    }

    fn out_degree(&self) -> usize {
        self.out_degree
    }

    fn initial_state(&self) -> State {
        State::Vector(vec![0, 0])
    }

    fn accepts_state(&self, state: &State) -> bool {
        self.state(state).is_ok()
    }

    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError> {
        check_symbol(symbol, 2)?;
        let (o, w) = self.state(state)?;
        let (o2, w2) = if symbol == OIL {
            (o.checked_add(1).ok_or(ProcessError::Overflow)?, w)
        } else {
            (o, w.checked_add(1).ok_or(ProcessError::Overflow)?)
        };
        let fired = (self.topplings(o2, w2) - self.topplings(o, w)) as u64;
        let mut emission = Emission::none();
        for &e in &self.oil_edges {
            emission.push(e, OIL, fired);
        }
        for &e in &self.water_edges {
            emission.push(e, WATER, fired);
        }
        Ok(Transition {
            state: State::Vector(vec![o2, w2]),
            emission,
        })
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        State::Vector(vec![
            rng.gen_range(0..3 * self.r_oil),
            rng.gen_range(0..3 * self.r_water),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oil_in_state_one_two_crosses_a_threshold() {
        // oil edges 0,1; water edges 0,2 (both types may share an edge)
        let p = OilWater::new(vec![0, 1], vec![0, 2], 2, 2, 3);
        let t = p.process(OIL, &State::Vector(vec![1, 2])).unwrap();
        assert_eq!(t.state, State::Vector(vec![2, 2]));
        assert_eq!(t.emission.total(), 4);
        let t = p.process(WATER, &State::Vector(vec![1, 2])).unwrap();
        assert_eq!(t.state, State::Vector(vec![1, 3]));
        assert!(t.emission.is_empty());
    }
}
