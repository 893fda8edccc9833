//! The per-vertex automaton: alphabet `A_v`, state space `Q_v`, transition
//! `T_v` and the per-edge message functions `T_(v,u)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::State;

/// `count` copies of symbol `symbol` sent along local out-edge `edge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emit {
    pub edge: usize,
    pub symbol: usize,
    pub count: u64,
}

/// Letters produced by one processing step, as counts per
/// (out-edge, target symbol). Only the multiset is observable, so no order
/// is recorded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Emission {
    items: Vec<Emit>,
}

impl Emission {
    pub fn none() -> Self {
        Emission::default()
    }

    pub fn single(edge: usize, symbol: usize) -> Self {
        let mut e = Emission::none();
        e.push(edge, symbol, 1);
        e
    }

    pub fn push(&mut self, edge: usize, symbol: usize, count: u64) {
        if count == 0 {
            return;
        }
        if let Some(existing) = self
            .items
            .iter_mut()
            .find(|e| e.edge == edge && e.symbol == symbol)
        {
            existing.count += count;
        } else {
            self.items.push(Emit {
                edge,
                symbol,
                count,
            });
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Emit> {
        self.items.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.items.iter().map(|e| e.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub state: State,
    pub emission: Emission,
}

impl Transition {
    pub fn quiet(state: State) -> Self {
        Transition {
            state,
            emission: Emission::none(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProcessError {
    #[error("symbol {symbol} is outside the alphabet of size {size}")]
    UnknownSymbol { symbol: usize, size: usize },

    #[error("state {state} is not in the state space ({expected})")]
    InvalidState { state: State, expected: &'static str },

    #[error("local out-edge {0} does not exist")]
    UnknownEdge(usize),

    #[error("state overflow")]
    Overflow,

    #[error("point {point:?} is outside the domain of the monotone map")]
    OutsideDomain { point: Vec<u64> },

    #[error("map decreases between {lower:?} and {upper:?}")]
    NonMonotone { lower: Vec<u64>, upper: Vec<u64> },

    #[error("interior run exceeded {budget} steps; the subnetwork may not halt")]
    InteriorBudget { budget: u64 },

    #[error("interior vertex {vertex}: {message}")]
    Interior { vertex: String, message: String },
}

/// One vertex's automaton.
///
/// Implementations must be deterministic: the same `(symbol, state)` always
/// yields the same transition.
pub trait Processor: fmt::Debug + Send + Sync {
    /// Short family tag, e.g. `"sandpile"`.
    fn family(&self) -> &str;

    fn alphabet_size(&self) -> usize;

    /// Number of out-edges the emissions refer to.
    fn out_degree(&self) -> usize;

    fn initial_state(&self) -> State;

    fn accepts_state(&self, state: &State) -> bool;

    /// `T_v(a, q)` together with every `T_(v,u)(a, q)`.
    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError>;

    /// Draws a state for statistical checks. Defaults to the start state.
    fn sample_state(&self, rng: &mut dyn RngCore) -> State {
        let _ = rng;
        self.initial_state()
    }

    /// True when the processor never sends a message from any state.
    fn never_emits(&self) -> bool {
        false
    }
}

pub type Behavior = Arc<dyn Processor>;

/// Per-(edge, symbol) emission totals for a whole word.
pub type Tally = BTreeMap<(usize, usize), u64>;

/// Processes `word` from `state`, returning the final state and the emitted
/// totals per (edge, symbol).
pub fn run_word(
    p: &dyn Processor,
    state: &State,
    word: &[usize],
) -> Result<(State, Tally), ProcessError> {
    let mut q = state.clone();
    let mut tally = Tally::new();
    for &a in word {
        let t = p.process(a, &q)?;
        for e in t.emission.iter() {
            *tally.entry((e.edge, e.symbol)).or_default() += e.count;
        }
        q = t.state;
    }
    Ok((q, tally))
}

pub(crate) fn check_symbol(symbol: usize, size: usize) -> Result<(), ProcessError> {
    if symbol < size {
        Ok(())
    } else {
        Err(ProcessError::UnknownSymbol { symbol, size })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emission_merges_and_skips_zero() {
        let mut e = Emission::none();
        e.push(0, 0, 2);
        e.push(1, 0, 0);
        e.push(0, 0, 1);
        e.push(0, 1, 1);
        assert_eq!(e.iter().count(), 2);
        assert_eq!(e.total(), 4);
    }
}
