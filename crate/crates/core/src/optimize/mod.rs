//! Least feasible vectors of monotone integer programs.
//!
//! For a nondecreasing `F: ℕ^k → ℕ^k`, the program
//!
//! ```text
//! minimize cᵀu  subject to  u ∈ ℕ^k,  F(u) ≤ u
//! ```
//!
//! has a unique minimizer for every positive `c` (the coordinatewise least
//! feasible vector) when it is feasible at all. [`build_net_f`] constructs a
//! one-vertex network whose odometer is that vector, and [`solve_monotone`]
//! runs it. [`toppling`] specialises this to `L v ≥ b` with a Laplacian `L`.

pub mod toppling;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{run, NonHaltingCertificate, Policy, RunOptions, RunOutcome};
use crate::error::Error;
use crate::network::{Network, Topology};
use crate::processor::{check_symbol, Behavior, Emission, ProcessError, Processor, Transition};
use crate::state::State;
use crate::Result;

pub use toppling::{solve_toppling_ip, TopplingSolution, TopplingSystem};

/// `F` tabulated on the box `0 ≤ u ≤ bound` (inclusive), values in row-major
/// order with the last coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxTable {
    pub bound: Vec<u64>,
    pub values: Vec<Vec<u64>>,
}

impl BoxTable {
    pub fn new(bound: Vec<u64>, values: Vec<Vec<u64>>) -> Result<Self> {
        let cells = box_size(&bound)?;
        if values.len() != cells {
            return Err(Error::Shape {
                what: "table rows",
                expected: cells,
                got: values.len(),
            });
        }
        if let Some(row) = values.iter().find(|r| r.len() != bound.len()) {
            return Err(Error::Shape {
                what: "table columns",
                expected: bound.len(),
                got: row.len(),
            });
        }
        Ok(BoxTable { bound, values })
    }

    /// Tabulates `f` on the box.
    pub fn tabulate(bound: Vec<u64>, f: impl Fn(&[u64]) -> Vec<u64>) -> Result<Self> {
        let values = BoxPoints::new(&bound).map(|u| f(&u)).collect();
        BoxTable::new(bound, values)
    }

    pub fn contains(&self, u: &[u64]) -> bool {
        u.len() == self.bound.len() && u.iter().zip(&self.bound).all(|(a, b)| a <= b)
    }

    pub fn offset(&self, u: &[u64]) -> Option<usize> {
        if !self.contains(u) {
            return None;
        }
        let mut i = 0usize;
        for (x, b) in u.iter().zip(&self.bound) {
            i = i * (*b as usize + 1) + *x as usize;
        }
        Some(i)
    }

    pub fn get(&self, u: &[u64]) -> Option<&[u64]> {
        self.offset(u).map(|i| self.values[i].as_slice())
    }
}

fn box_size(bound: &[u64]) -> Result<usize> {
    bound.iter().try_fold(1usize, |acc, &b| {
        usize::try_from(b)
            .ok()
            .and_then(|b| b.checked_add(1))
            .and_then(|b| acc.checked_mul(b))
            .ok_or_else(|| Error::InvalidProgram(format!("box {bound:?} is too large")))
    })
}

/// Every point of `0 ≤ u ≤ bound` in row-major order.
pub struct BoxPoints {
    bound: Vec<u64>,
    next: Option<Vec<u64>>,
}

impl BoxPoints {
    pub fn new(bound: &[u64]) -> Self {
        BoxPoints {
            bound: bound.to_vec(),
            next: Some(vec![0; bound.len()]),
        }
    }
}

impl Iterator for BoxPoints {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let cur = self.next.take()?;
        let mut n = cur.clone();
        for i in (0..n.len()).rev() {
            if n[i] < self.bound[i] {
                n[i] += 1;
                self.next = Some(n);
                return Some(cur);
            }
            n[i] = 0;
        }
        Some(cur)
    }
}

pub type MapFn = dyn Fn(&[u64]) -> Vec<u64> + Send + Sync;

#[derive(Clone)]
pub enum MonotoneMap {
    Table(BoxTable),
    /// A black box; `bound`, when given, limits its domain to a box.
    Function {
        f: Arc<MapFn>,
        bound: Option<Vec<u64>>,
    },
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonotoneMap::Table(t) => f.debug_tuple("Table").field(&t.bound).finish(),
            MonotoneMap::Function { bound, .. } => {
                f.debug_struct("Function").field("bound", bound).finish()
            }
        }
    }
}

/// `(F, c)` with `F: ℕ^k → ℕ^k` nondecreasing and `c > 0`.
#[derive(Debug, Clone)]
pub struct MonotoneProgram {
    dim: usize,
    map: MonotoneMap,
    cost: Option<Vec<u64>>,
}

impl MonotoneProgram {
    pub fn from_table(table: BoxTable) -> Self {
        MonotoneProgram {
            dim: table.bound.len(),
            map: MonotoneMap::Table(table),
            cost: None,
        }
    }

    pub fn from_fn(
        dim: usize,
        bound: Option<Vec<u64>>,
        f: impl Fn(&[u64]) -> Vec<u64> + Send + Sync + 'static,
    ) -> Self {
        MonotoneProgram {
            dim,
            map: MonotoneMap::Function {
                f: Arc::new(f),
                bound,
            },
            cost: None,
        }
    }

    /// Sets the cost vector, which must be positive.
    pub fn with_cost(mut self, cost: Vec<u64>) -> Result<Self> {
        if cost.len() != self.dim {
            return Err(Error::Shape {
                what: "cost entries",
                expected: self.dim,
                got: cost.len(),
            });
        }
        if cost.contains(&0) {
            return Err(Error::InvalidProgram("cost vector must be positive".into()));
        }
        self.cost = Some(cost);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn map(&self) -> &MonotoneMap {
        &self.map
    }

    pub fn cost(&self) -> Option<&[u64]> {
        self.cost.as_deref()
    }

    pub fn bound(&self) -> Option<&[u64]> {
        match &self.map {
            MonotoneMap::Table(t) => Some(&t.bound),
            MonotoneMap::Function { bound, .. } => bound.as_deref(),
        }
    }

    pub fn in_domain(&self, u: &[u64]) -> bool {
        u.len() == self.dim && self.bound().is_none_or(|b| u.iter().zip(b).all(|(x, y)| x <= y))
    }

    /// `F(u)`, or `None` outside the domain.
    pub fn eval(&self, u: &[u64]) -> Option<Vec<u64>> {
        if !self.in_domain(u) {
            return None;
        }
        let v = match &self.map {
            MonotoneMap::Table(t) => t.get(u)?.to_vec(),
            MonotoneMap::Function { f, .. } => f(u),
        };
        (v.len() == self.dim).then_some(v)
    }

    pub fn is_feasible(&self, u: &[u64]) -> bool {
        self.eval(u).is_some_and(|f| le(&f, u))
    }

    /// `cᵀu`, with `c = 1` when no cost was given.
    pub fn objective(&self, u: &[u64]) -> u64 {
        match &self.cost {
            Some(c) => c.iter().zip(u).map(|(a, b)| a * b).sum(),
            None => u.iter().sum(),
        }
    }

    /// Checks `F(u) ≤ F(u + 1_a)` on comparable pairs: every adjacent pair of
    /// a table (which implies monotonicity on the whole box), or `samples`
    /// random pairs of a black box.
    pub fn check_monotone(&self, samples: usize, seed: u64) -> Result<()> {
        let violation = |u: &[u64], v: &[u64]| Error::NonMonotone {
            lower: u.to_vec(),
            upper: v.to_vec(),
        };
        let check_pair = |u: &[u64], v: &[u64]| -> Result<()> {
            match (self.eval(u), self.eval(v)) {
                (Some(fu), Some(fv)) if !le(&fu, &fv) => Err(violation(u, v)),
                _ => Ok(()),
            }
        };
        match &self.map {
            MonotoneMap::Table(t) => {
                for u in BoxPoints::new(&t.bound) {
                    for a in 0..self.dim {
                        if u[a] < t.bound[a] {
                            let mut v = u.clone();
                            v[a] += 1;
                            check_pair(&u, &v)?;
                        }
                    }
                }
                Ok(())
            }
            MonotoneMap::Function { bound, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let cap: Vec<u64> = match bound {
                    Some(b) => b.clone(),
                    None => vec![64; self.dim],
                };
                for _ in 0..samples {
                    let u: Vec<u64> = cap.iter().map(|&b| rng.gen_range(0..=b)).collect();
                    let v: Vec<u64> = u
                        .iter()
                        .zip(&cap)
                        .map(|(&x, &b)| rng.gen_range(x..=b))
                        .collect();
                    check_pair(&u, &v)?;
                }
                Ok(())
            }
        }
    }
}

fn le(a: &[u64], b: &[u64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

/// The single processor of `Net_F`: state `q ∈ ℕ^k`, `T(a, q) = q + 1_a`, and
/// the loop carries `F(q + 1_a) − F(q)`.
#[derive(Debug, Clone)]
pub struct NetFProcessor {
    program: MonotoneProgram,
}

impl NetFProcessor {
    fn image(&self, q: &[u64]) -> std::result::Result<Vec<u64>, ProcessError> {
        self.program.eval(q).ok_or_else(|| ProcessError::OutsideDomain { point: q.to_vec() })
    }
}

fn to_point(state: &State, dim: usize) -> Option<Vec<u64>> {
    let v = state.as_vector()?;
    if v.len() != dim || v.iter().any(|&x| x < 0) {
        return None;
    }
    Some(v.iter().map(|&x| x as u64).collect())
}

impl Processor for NetFProcessor {
    fn family(&self) -> &str {
        "net-f"
    }

    fn alphabet_size(&self) -> usize {
        self.program.dim
    }

    fn out_degree(&self) -> usize {
        1
    }

    fn initial_state(&self) -> State {
        State::Vector(vec![0; self.program.dim])
    }

    fn accepts_state(&self, state: &State) -> bool {
        to_point(state, self.program.dim).is_some()
    }

    fn process(&self, symbol: usize, state: &State) -> std::result::Result<Transition, ProcessError> {
        check_symbol(symbol, self.program.dim)?;
        let q = to_point(state, self.program.dim).ok_or_else(|| ProcessError::InvalidState {
            state: state.clone(),
            expected: "a vector in ℕ^k",
        })?;
        let mut next = q.clone();
        next[symbol] = next[symbol].checked_add(1).ok_or(ProcessError::Overflow)?;
        let before = self.image(&q)?;
        let after = self.image(&next)?;
        let mut emission = Emission::none();
        for (b, (lo, hi)) in before.iter().zip(&after).enumerate() {
            if hi < lo {
                return Err(ProcessError::NonMonotone {
                    lower: q.clone(),
                    upper: next.clone(),
                });
            }
            emission.push(0, b, hi - lo);
        }
        let next = next
            .into_iter()
            .map(|x| i64::try_from(x).map_err(|_| ProcessError::Overflow))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Transition {
            state: State::Vector(next),
            emission,
        })
    }

    fn sample_state(&self, rng: &mut dyn rand::RngCore) -> State {
        let cap = self.program.bound().map(|b| b.to_vec()).unwrap_or(vec![16; self.program.dim]);
        State::Vector(cap.iter().map(|&b| rng.gen_range(0..b.max(1)) as i64).collect())
    }
}

/// `Net_F` with its start: input `x = F(0)` and state `q = 0`.
#[derive(Debug, Clone)]
pub struct NetF {
    pub network: Network,
    pub input: Vec<u64>,
    pub states: Vec<State>,
}

/// Random pairs sampled when checking a black-box map.
pub const MONOTONE_SAMPLES: usize = 2_000;

/// Builds `Net_F`, rejecting the program if a monotonicity violation is found.
pub fn build_net_f(prog: &MonotoneProgram) -> Result<NetF> {
    if prog.dim == 0 {
        return Err(Error::InvalidProgram("dimension must be at least 1".into()));
    }
    prog.check_monotone(MONOTONE_SAMPLES, 0)?;
    let zero = vec![0; prog.dim];
    let input = prog
        .eval(&zero)
        .ok_or_else(|| Error::InvalidProgram("F(0) is undefined".into()))?;
    let mut topo = Topology::new();
    topo.add_vertex("F")?;
    topo.add_edge("loop", 0, 0)?;
    let p: Behavior = Arc::new(NetFProcessor {
        program: prog.clone(),
    });
    let network = Network::new(topo, vec![p])?;
    let states = network.initial_states();
    Ok(NetF {
        network,
        input,
        states,
    })
}

/// Why a program has no feasible vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infeasibility {
    /// The network has an infinite legal execution.
    Recurrence(NonHaltingCertificate),
    /// A legal execution processed the letter counts `point`, which lie
    /// outside the box. Every feasible `u` dominates every legal execution,
    /// so none lies inside the box.
    BoxEscape { point: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Solution {
    Feasible {
        minimizer: Vec<u64>,
        /// `F(minimizer)`, which is `≤ minimizer`.
        image: Vec<u64>,
        objective: u64,
        steps: u64,
    },
    Infeasible {
        certificate: Infeasibility,
        steps: u64,
    },
    /// The budget ran out first; nothing is claimed.
    Unknown { steps: u64 },
}

impl Solution {
    pub fn minimizer(&self) -> Option<&[u64]> {
        match self {
            Solution::Feasible { minimizer, .. } => Some(minimizer),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Solution::Feasible { .. } => "feasible",
            Solution::Infeasible { .. } => "infeasible",
            Solution::Unknown { .. } => "unknown",
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            Solution::Feasible { steps, .. }
            | Solution::Infeasible { steps, .. }
            | Solution::Unknown { steps } => *steps,
        }
    }
}

/// Runs `Net_F` from `F(0).0`. The odometer of a halting run is the least
/// feasible vector.
pub fn solve_monotone(prog: &MonotoneProgram, budget: u64) -> Result<Solution> {
    let net = build_net_f(prog)?;
    // The state strictly increases with every step, so configurations never
    // recur and recurrence detection would only cost memory.
    let opts = RunOptions {
        detect_recurrence: false,
        ..RunOptions::new(Policy::Fifo, budget)
    };
    match run(&net.network, &net.input, &net.states, &opts) {
        Ok(RunOutcome::Halted(h)) => {
            let minimizer = h.odometer.0;
            let image = prog.eval(&minimizer).ok_or_else(|| {
                Error::InvalidProgram(format!("F is undefined at the minimizer {minimizer:?}"))
            })?;
            debug_assert!(le(&image, &minimizer));
            Ok(Solution::Feasible {
                objective: prog.objective(&minimizer),
                minimizer,
                image,
                steps: h.steps,
            })
        }
        Ok(RunOutcome::NonHalting(c)) => Ok(Solution::Infeasible {
            steps: c.repeat_step,
            certificate: Infeasibility::Recurrence(c),
        }),
        Ok(RunOutcome::BudgetExhausted(e)) => Ok(Solution::Unknown { steps: e.steps }),
        Err(Error::Processor {
            source: ProcessError::OutsideDomain { point },
            ..
        }) => Ok(Solution::Infeasible {
            steps: point.iter().sum::<u64>().saturating_sub(1),
            certificate: Infeasibility::BoxEscape { point },
        }),
        Err(Error::Processor {
            source: ProcessError::NonMonotone { lower, upper },
            ..
        }) => Err(Error::NonMonotone { lower, upper }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum KleeneResult {
    Least(Vec<u64>),
    /// The iteration left `0 ≤ u ≤ bound` at `point`.
    EscapesBox { point: Vec<u64> },
}

/// Iterates `u ← max(u, F(u))` from `0` inside `0 ≤ u ≤ bound`. The sequence
/// is nondecreasing and stops at the least feasible vector if one exists in
/// the box.
pub fn kleene_oracle(prog: &MonotoneProgram, bound: &[u64]) -> Result<KleeneResult> {
    if bound.len() != prog.dim {
        return Err(Error::Shape {
            what: "bound entries",
            expected: prog.dim,
            got: bound.len(),
        });
    }
    let mut u = vec![0u64; prog.dim];
    loop {
        let inside = u.iter().zip(bound).all(|(x, b)| x <= b);
        let image = if inside { prog.eval(&u) } else { None };
        let Some(f) = image else {
            return Ok(KleeneResult::EscapesBox { point: u });
        };
        if le(&f, &u) {
            return Ok(KleeneResult::Least(u));
        }
        for (x, y) in u.iter_mut().zip(f) {
            *x = (*x).max(y);
        }
    }
}
