//! Linear integer programs `L v ≥ b` solved by toppling networks.
//!
//! With thresholds `r`, `D = diag(r)` and `D − L ≥ 0`, the toppling network
//! has `(D − L)_uv` edges from `v` to `u`. Started from `x = b + r − 1`
//! chips, its odometer `u` is the least vector with `F(u) ≤ u` for
//! `F(u) = x + (D − L)⌊D⁻¹u⌋`, and `v = ⌊D⁻¹u⌋` (topplings per vertex) is
//! the least nonnegative integer solution of `L v ≥ b`.

use serde::{Deserialize, Serialize};

use super::MonotoneProgram;
use crate::engine::{run, NonHaltingCertificate, Policy, RunOptions, RunOutcome};
use crate::error::Error;
use crate::network::{Network, Topology};
use crate::processors::ProcessorSpec;
use crate::state::State;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopplingSystem {
    /// `L[u][v]`; column `v` describes the out-edges of `v`.
    pub laplacian: Vec<Vec<i64>>,
    pub thresholds: Vec<u64>,
    pub input: Vec<u64>,
}

impl TopplingSystem {
    /// From a chip input `x`.
    pub fn from_input(laplacian: Vec<Vec<i64>>, thresholds: Vec<u64>, input: Vec<u64>) -> Result<Self> {
        let sys = TopplingSystem {
            laplacian,
            thresholds,
            input,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// From a right-hand side `b`, with `x = b + r − 1` (which must be `≥ 0`).
    pub fn from_bound(laplacian: Vec<Vec<i64>>, thresholds: Vec<u64>, b: Vec<i64>) -> Result<Self> {
        if b.len() != thresholds.len() {
            return Err(Error::Shape {
                what: "entries of b",
                expected: thresholds.len(),
                got: b.len(),
            });
        }
        let input = b
            .iter()
            .zip(&thresholds)
            .enumerate()
            .map(|(v, (&b, &r))| {
                let x = b + r as i64 - 1;
                u64::try_from(x).map_err(|_| {
                    Error::InvalidProgram(format!(
                        "b[{v}] = {b} needs a negative chip count x = b + r − 1 = {x}"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_input(laplacian, thresholds, input)
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let n = self.thresholds.len();
        for (what, got) in [("Laplacian rows", self.laplacian.len()), ("inputs", self.input.len())] {
            if got != n {
                return Err(Error::Shape {
                    what,
                    expected: n,
                    got,
                });
            }
        }
        if let Some(row) = self.laplacian.iter().find(|r| r.len() != n) {
            return Err(Error::Shape {
                what: "Laplacian columns",
                expected: n,
                got: row.len(),
            });
        }
        if let Some(v) = self.thresholds.iter().position(|&r| r == 0) {
            return Err(Error::InvalidProgram(format!("threshold r[{v}] must be positive")));
        }
        for u in 0..n {
            for v in 0..n {
                if self.edges(u, v) < 0 {
                    return Err(Error::InvalidProgram(format!(
                        "(D − L)[{u}][{v}] = {} is negative",
                        self.edges(u, v)
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(D − L)[u][v]`: the number of edges from `v` to `u`.
    pub fn edges(&self, u: usize, v: usize) -> i64 {
        let d = if u == v { self.thresholds[v] as i64 } else { 0 };
        d - self.laplacian[u][v]
    }

    /// `b = x − r + 1`.
    pub fn bound(&self) -> Vec<i64> {
        self.input
            .iter()
            .zip(&self.thresholds)
            .map(|(&x, &r)| x as i64 - r as i64 + 1)
            .collect()
    }

    pub fn apply_laplacian(&self, v: &[u64]) -> Vec<i64> {
        self.laplacian
            .iter()
            .map(|row| row.iter().zip(v).map(|(l, &x)| l * x as i64).sum())
            .collect()
    }

    /// `L v ≥ b`.
    pub fn satisfies(&self, v: &[u64]) -> bool {
        self.apply_laplacian(v).iter().zip(self.bound()).all(|(lv, b)| *lv >= b)
    }

    /// `u = x + (D − L) v`.
    pub fn odometer_of(&self, v: &[u64]) -> Vec<u64> {
        (0..self.len())
            .map(|u| {
                let s: i64 = (0..self.len()).map(|w| self.edges(u, w) * v[w] as i64).sum();
                self.input[u] + s as u64
            })
            .collect()
    }

    /// The toppling network: vertex `v{i}` with threshold `r_i`, and
    /// `(D − L)[u][v]` edges `v → u` (loops included).
    pub fn network(&self) -> Result<Network> {
        let n = self.len();
        let mut topo = Topology::with_vertices(n);
        for v in 0..n {
            for u in 0..n {
                for k in 0..self.edges(u, v) {
                    topo.add_edge(format!("v{v}-v{u}-{k}"), v, u)?;
                }
            }
        }
        let processors = (0..n)
            .map(|v| {
                ProcessorSpec::toppling(self.thresholds[v])
                    .build(&topo, v)
                    .map_err(|source| Error::Spec {
                        vertex: topo.vertex_name(v).to_string(),
                        source,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(topo, processors)
    }

    /// The monotone program `F(u) = x + (D − L)⌊D⁻¹u⌋`.
    pub fn monotone_program(&self) -> MonotoneProgram {
        let sys = self.clone();
        MonotoneProgram::from_fn(self.len(), None, move |u| {
            let v: Vec<u64> = u.iter().zip(&sys.thresholds).map(|(a, r)| a / r).collect();
            sys.odometer_of(&v)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopplingSolution {
    Feasible {
        /// Topplings per vertex.
        v: Vec<u64>,
        /// Chips processed per vertex.
        odometer: Vec<u64>,
        laplacian_v: Vec<i64>,
        b: Vec<i64>,
        /// Whether `L v ≥ b` held when checked on return.
        verified: bool,
        steps: u64,
    },
    Infeasible {
        certificate: NonHaltingCertificate,
    },
    Unknown {
        steps: u64,
    },
}

impl TopplingSolution {
    pub fn topplings(&self) -> Option<&[u64]> {
        match self {
            TopplingSolution::Feasible { v, .. } => Some(v),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            TopplingSolution::Feasible { .. } => "feasible",
            TopplingSolution::Infeasible { .. } => "infeasible",
            TopplingSolution::Unknown { .. } => "unknown",
        }
    }
}

/// Runs the toppling network from `x` and reads off `v = ⌊odometer / r⌋`.
pub fn solve_toppling_ip(sys: &TopplingSystem, budget: u64) -> Result<TopplingSolution> {
    let net = sys.network()?;
    let states: Vec<State> = net.initial_states();
    match run(&net, &sys.input, &states, &RunOptions::new(Policy::Fifo, budget))? {
        RunOutcome::Halted(h) => {
            let odometer = h.odometer.0;
            let v: Vec<u64> = odometer.iter().zip(&sys.thresholds).map(|(u, r)| u / r).collect();
            let laplacian_v = sys.apply_laplacian(&v);
            let b = sys.bound();
            let verified = laplacian_v.iter().zip(&b).all(|(l, b)| l >= b);
            Ok(TopplingSolution::Feasible {
                v,
                odometer,
                laplacian_v,
                b,
                verified,
                steps: h.steps,
            })
        }
        RunOutcome::NonHalting(certificate) => Ok(TopplingSolution::Infeasible { certificate }),
        RunOutcome::BudgetExhausted(e) => Ok(TopplingSolution::Unknown { steps: e.steps }),
    }
}
