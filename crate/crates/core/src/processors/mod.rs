//! Builtin processor families, each built from a small declarative spec.
//!
//! Specs name edges and vertices by their topology names so they can be
//! written in network files; [`ProcessorSpec::build`] resolves them against
//! the vertex's out-edges.

mod bootstrap;
mod mobile;
mod mutant;
mod oil_water;
mod rotor;
mod sink;
mod tape;
mod toppling;

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bootstrap::Bootstrap;
pub use mobile::MobileAgents;
pub use mutant::Mutant;
pub use oil_water::{OilWater, OIL, WATER};
pub use rotor::Rotor;
pub use sink::{Counter, Sink};
pub use tape::Tape;
pub use toppling::Toppling;

use crate::network::Topology;
use crate::processor::Behavior;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("{family} threshold must be positive")]
    NonPositiveThreshold { family: &'static str },

    #[error("rotor has no out-edges to serve")]
    EmptyRotorOrder,

    #[error("rotor order must list every out-edge exactly once: {0}")]
    RotorOrder(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("edge `{0}` does not leave this vertex")]
    NotOutgoing(String),

    #[error("oil and water edges must partition the out-edges: {0}")]
    OilWaterPartition(String),

    #[error("`{0}` is not an out-neighbour of this vertex")]
    NonNeighbor(String),

    #[error("malformed table: {0}")]
    Table(String),

    #[error("instruction tape needs a nonempty periodic part")]
    EmptyPeriod,

    #[error("alphabet must contain at least one letter")]
    EmptyAlphabet,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn one() -> usize {
    1
}

fn is_one(n: &usize) -> bool {
    *n == 1
}

/// Sandpile vertex; a threshold different from the out-degree makes it a
/// general toppling vertex, and `allow_negative` adds the silent negative
/// states.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandpileSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_negative: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorSpec {
    /// Out-edge names in service order; defaults to declaration order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub absorbing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSpec {
    pub threshold: u64,
}

/// Eventually periodic instruction tape. Each cell lists out-edge names, one
/// letter per mention.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnaryTapeSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preperiod: Vec<Vec<String>>,
    pub period: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OilWaterSpec {
    pub oil: Vec<String>,
    pub water: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_oil: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_water: Option<u64>,
}

/// Mobile agent tables, indexed `[agent type][vertex state]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobileAgentSpec {
    pub states: usize,
    pub next_state: Vec<Vec<usize>>,
    pub next_agent: Vec<Vec<usize>>,
    /// Out-neighbour names.
    pub destination: Vec<Vec<String>>,
}

impl MobileAgentSpec {
    /// Agents of each type drive their own rotor over `neighbors`; an agent
    /// switches to the next type whenever its rotor wraps around. Each type
    /// only touches its own rotor, so the processor is abelian.
    pub fn per_type_rotors(neighbors: &[String], agents: usize) -> Self {
        let d = neighbors.len().max(1);
        let states = d.pow(agents as u32);
        let mut spec = MobileAgentSpec {
            states,
            next_state: vec![Vec::with_capacity(states); agents],
            next_agent: vec![Vec::with_capacity(states); agents],
            destination: vec![Vec::with_capacity(states); agents],
        };
        for a in 0..agents {
            let place = d.pow(a as u32);
            for q in 0..states {
                let pos = (q / place) % d;
                let bumped = q - pos * place + ((pos + 1) % d) * place;
                spec.next_state[a].push(bumped);
                spec.next_agent[a].push(if pos + 1 == d { (a + 1) % agents } else { a });
                spec.destination[a].push(neighbors.get(pos).cloned().unwrap_or_default());
            }
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinkCounterSpec {
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub alphabet: usize,
}

impl Default for SinkCounterSpec {
    fn default() -> Self {
        SinkCounterSpec { alphabet: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProcessorSpec {
    Sandpile(SandpileSpec),
    Rotor(RotorSpec),
    Bootstrap(BootstrapSpec),
    Tape(UnaryTapeSpec),
    OilWater(OilWaterSpec),
    Mobile(MobileAgentSpec),
    Sink(SinkCounterSpec),
    Counter(SinkCounterSpec),
    Mutant,
}

impl ProcessorSpec {
    pub const FAMILIES: [&'static str; 9] = [
        "sandpile",
        "rotor",
        "bootstrap",
        "tape",
        "oil-water",
        "mobile",
        "sink",
        "counter",
        "mutant",
    ];

    pub fn sandpile() -> Self {
        ProcessorSpec::Sandpile(SandpileSpec::default())
    }

    pub fn toppling(threshold: u64) -> Self {
        ProcessorSpec::Sandpile(SandpileSpec {
            threshold: Some(threshold),
            allow_negative: false,
        })
    }

    pub fn rotor() -> Self {
        ProcessorSpec::Rotor(RotorSpec::default())
    }

    pub fn sink() -> Self {
        ProcessorSpec::Sink(SinkCounterSpec::default())
    }

    pub fn counter() -> Self {
        ProcessorSpec::Counter(SinkCounterSpec::default())
    }

    pub fn family(&self) -> &'static str {
        match self {
            ProcessorSpec::Sandpile(_) => "sandpile",
            ProcessorSpec::Rotor(_) => "rotor",
            ProcessorSpec::Bootstrap(_) => "bootstrap",
            ProcessorSpec::Tape(_) => "tape",
            ProcessorSpec::OilWater(_) => "oil-water",
            ProcessorSpec::Mobile(_) => "mobile",
            ProcessorSpec::Sink(_) => "sink",
            ProcessorSpec::Counter(_) => "counter",
            ProcessorSpec::Mutant => "mutant",
        }
    }

    /// Builds the processor for vertex `v` of `topo`.
    pub fn build(&self, topo: &Topology, v: usize) -> Result<Behavior, SpecError> {
        let degree = topo.out_degree(v);
        let local = |name: &str| local_edge(topo, v, name);
        Ok(match self {
            ProcessorSpec::Sandpile(s) => {
                let threshold = s.threshold.unwrap_or(degree as u64);
                if threshold == 0 {
                    return Err(SpecError::NonPositiveThreshold { family: "sandpile" });
                }
                Arc::new(Toppling::new(threshold, degree, s.allow_negative))
            }
            ProcessorSpec::Rotor(s) => {
                if degree == 0 {
                    return Err(SpecError::EmptyRotorOrder);
                }
                let order = match &s.order {
                    None => (0..degree).collect(),
                    Some(names) => {
                        let order = names
                            .iter()
                            .map(|n| local(n))
                            .collect::<Result<Vec<_>, _>>()?;
                        let distinct: HashSet<_> = order.iter().collect();
                        if order.len() != degree || distinct.len() != degree {
                            return Err(SpecError::RotorOrder(format!(
                                "{} entries for {} out-edges",
                                order.len(),
                                degree
                            )));
                        }
                        order
                    }
                };
                Arc::new(Rotor::new(order, degree, s.absorbing))
            }
            ProcessorSpec::Bootstrap(s) => {
                if s.threshold == 0 {
                    return Err(SpecError::NonPositiveThreshold { family: "bootstrap" });
                }
                Arc::new(Bootstrap::new(s.threshold, degree))
            }
            ProcessorSpec::Tape(s) => {
                if s.period.is_empty() {
                    return Err(SpecError::EmptyPeriod);
                }
                let cells = s
                    .preperiod
                    .iter()
                    .chain(&s.period)
                    .map(|cell| cell.iter().map(|n| local(n)).collect())
                    .collect::<Result<Vec<Vec<usize>>, _>>()?;
                Arc::new(Tape::new(cells, s.preperiod.len(), degree))
            }
            ProcessorSpec::OilWater(s) => {
                let oil = s.oil.iter().map(|n| local(n)).collect::<Result<Vec<_>, _>>()?;
                let water = s.water.iter().map(|n| local(n)).collect::<Result<Vec<_>, _>>()?;
                let mut seen = vec![0usize; degree];
                for &e in oil.iter().chain(&water) {
                    seen[e] += 1;
                }
                if let Some(e) = seen.iter().position(|&c| c != 1) {
                    let name = &topo.edge(topo.out_edges(v)[e]).name;
                    return Err(SpecError::OilWaterPartition(format!(
                        "edge `{name}` is listed {} times",
                        seen[e]
                    )));
                }
                let r_oil = s.r_oil.unwrap_or(oil.len() as u64);
                let r_water = s.r_water.unwrap_or(water.len() as u64);
                if r_oil == 0 || r_water == 0 {
                    return Err(SpecError::NonPositiveThreshold { family: "oil-water" });
                }
                Arc::new(OilWater::new(oil, water, r_oil, r_water, degree))
            }
            ProcessorSpec::Mobile(s) => {
                let agents = s.next_state.len();
                if agents == 0 {
                    return Err(SpecError::EmptyAlphabet);
                }
                if s.states == 0 {
                    return Err(SpecError::Table("state space is empty".into()));
                }
                if s.next_agent.len() != agents || s.destination.len() != agents {
                    return Err(SpecError::Table("tables disagree on the number of agent types".into()));
                }
                let mut exits = Vec::with_capacity(agents);
                for a in 0..agents {
                    let rows = [s.next_state[a].len(), s.next_agent[a].len(), s.destination[a].len()];
                    if rows.iter().any(|&r| r != s.states) {
                        return Err(SpecError::Table(format!(
                            "agent {a}: every row needs {} entries",
                            s.states
                        )));
                    }
                    if let Some(q) = s.next_state[a].iter().find(|&&q| q >= s.states) {
                        return Err(SpecError::Table(format!("state {q} out of range")));
                    }
                    let row = s.destination[a]
                        .iter()
                        .map(|u| {
                            topo.out_edges(v)
                                .iter()
                                .position(|&e| topo.vertex_name(topo.edge(e).dst) == u)
                                .ok_or_else(|| SpecError::NonNeighbor(u.clone()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    exits.push(row);
                }
                Arc::new(MobileAgents::new(
                    s.states,
                    s.next_state.clone(),
                    s.next_agent.clone(),
                    exits,
                    degree,
                ))
            }
            ProcessorSpec::Sink(s) => {
                if s.alphabet == 0 {
                    return Err(SpecError::EmptyAlphabet);
                }
                Arc::new(Sink::new(s.alphabet, degree))
            }
            ProcessorSpec::Counter(s) => {
                if s.alphabet == 0 {
                    return Err(SpecError::EmptyAlphabet);
                }
                Arc::new(Counter::new(s.alphabet, degree))
            }
            ProcessorSpec::Mutant => {
                if degree != 1 {
                    return Err(SpecError::Table(format!(
                        "mutant needs exactly one out-edge, found {degree}"
                    )));
                }
                nonabelian_mutant()
            }
        })
    }
}

fn local_edge(topo: &Topology, v: usize, name: &str) -> Result<usize, SpecError> {
    let e = topo
        .edge_index(name)
        .ok_or_else(|| SpecError::UnknownEdge(name.to_string()))?;
    if topo.edge(e).src != v {
        return Err(SpecError::NotOutgoing(name.to_string()));
    }
    Ok(topo.local_position(e))
}

/// Negative control for the abelianness checker: output depends on whether
/// `b` arrives right after `a`.
pub fn nonabelian_mutant() -> Behavior {
    Arc::new(Mutant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processor::run_word;
    use crate::state::State;

    fn star(out: usize) -> Topology {
        let mut t = Topology::with_vertices(out + 1);
        for u in 1..=out {
            t.connect(0, u);
        }
        t
    }

    #[test]
    fn sandpile_three_neighbours_topples_from_two() {
        let t = star(3);
        let p = ProcessorSpec::toppling(3).build(&t, 0).unwrap();
        let tr = p.process(0, &State::Int(2)).unwrap();
        assert_eq!(tr.state, State::Int(0));
        let edges: Vec<_> = tr.emission.iter().map(|e| (e.edge, e.count)).collect();
        assert_eq!(edges, vec![(0, 1), (1, 1), (2, 1)]);
    }

    #[test]
    fn sandpile_threshold_defaults_to_outdegree() {
        let t = star(2);
        let p = ProcessorSpec::sandpile().build(&t, 0).unwrap();
        assert!(p.accepts_state(&State::Int(1)));
        assert!(!p.accepts_state(&State::Int(2)));
        assert_eq!(
            ProcessorSpec::sandpile().build(&t, 1).unwrap_err(),
            SpecError::NonPositiveThreshold { family: "sandpile" }
        );
    }

    #[test]
    fn rotor_serves_first_neighbour_first() {
        let t = star(3);
        let p = ProcessorSpec::rotor().build(&t, 0).unwrap();
        let tr = p.process(0, &State::Int(0)).unwrap();
        assert_eq!(tr.state, State::Int(1));
        assert_eq!(tr.emission, crate::processor::Emission::single(0, 0));
    }

    #[test]
    fn rotor_order_validation() {
        let t = star(2);
        assert_eq!(
            ProcessorSpec::rotor().build(&t, 1).unwrap_err(),
            SpecError::EmptyRotorOrder
        );
        let bad = ProcessorSpec::Rotor(RotorSpec {
            order: Some(vec!["e0".into(), "e0".into()]),
            absorbing: false,
        });
        assert!(matches!(bad.build(&t, 0), Err(SpecError::RotorOrder(_))));
        let custom = ProcessorSpec::Rotor(RotorSpec {
            order: Some(vec!["e1".into(), "e0".into()]),
            absorbing: false,
        });
        let p = custom.build(&t, 0).unwrap();
        let tr = p.process(0, &State::Int(0)).unwrap();
        assert_eq!(tr.emission, crate::processor::Emission::single(1, 0));
    }

    #[test]
    fn oil_water_requires_partition() {
        let mut t = Topology::with_vertices(2);
        t.connect(0, 1);
        t.connect(0, 1);
        let overlap = ProcessorSpec::OilWater(OilWaterSpec {
            oil: vec!["e0".into()],
            water: vec!["e0".into()],
            ..Default::default()
        });
        assert!(matches!(overlap.build(&t, 0), Err(SpecError::OilWaterPartition(_))));
        let ok = ProcessorSpec::OilWater(OilWaterSpec {
            oil: vec!["e0".into()],
            water: vec!["e1".into()],
            r_oil: Some(2),
            r_water: Some(2),
        });
        let p = ok.build(&t, 0).unwrap();
        let tr = p.process(OIL, &State::Vector(vec![1, 2])).unwrap();
        assert_eq!(tr.state, State::Vector(vec![2, 2]));
        assert_eq!(tr.emission.total(), 2);
    }

    #[test]
    fn bootstrap_saturated_state_is_silent() {
        let t = star(2);
        let p = ProcessorSpec::Bootstrap(BootstrapSpec { threshold: 2 })
            .build(&t, 0)
            .unwrap();
        let tr = p.process(0, &State::Int(2)).unwrap();
        assert_eq!(tr.state, State::Int(2));
        assert!(tr.emission.is_empty());
    }

    #[test]
    fn mobile_agent_destination_must_be_neighbour() {
        let t = star(2);
        let mut spec = MobileAgentSpec::per_type_rotors(&["v1".into(), "v2".into()], 2);
        assert_eq!(spec.states, 4);
        ProcessorSpec::Mobile(spec.clone()).build(&t, 0).unwrap();
        spec.destination[1][3] = "v0".into();
        assert_eq!(
            ProcessorSpec::Mobile(spec).build(&t, 0).unwrap_err(),
            SpecError::NonNeighbor("v0".into())
        );
    }

    #[test]
    fn per_type_rotors_change_type_on_wrap() {
        let t = star(2);
        let spec = MobileAgentSpec::per_type_rotors(&["v1".into(), "v2".into()], 2);
        let p = ProcessorSpec::Mobile(spec).build(&t, 0).unwrap();
        // two agents of type 0: first exits on edge 0 as type 0, second wraps
        let (q, tally) = run_word(p.as_ref(), &State::Int(0), &[0, 0]).unwrap();
        assert_eq!(q, State::Int(0));
        assert_eq!(tally.get(&(0, 0)), Some(&1));
        assert_eq!(tally.get(&(1, 1)), Some(&1));
    }

    #[test]
    fn tape_mentions_must_be_out_edges() {
        let t = star(1);
        let spec = ProcessorSpec::Tape(UnaryTapeSpec {
            preperiod: vec![],
            period: vec![vec!["e9".into()]],
        });
        assert_eq!(spec.build(&t, 0).unwrap_err(), SpecError::UnknownEdge("e9".into()));
        let empty = ProcessorSpec::Tape(UnaryTapeSpec::default());
        assert_eq!(empty.build(&t, 0).unwrap_err(), SpecError::EmptyPeriod);
    }

    #[test]
    fn mutant_distinguishes_ab_from_ba() {
        let m = nonabelian_mutant();
        let (qa, ta) = run_word(m.as_ref(), &State::Int(0), &[0, 1]).unwrap();
        let (qb, tb) = run_word(m.as_ref(), &State::Int(0), &[1, 0]).unwrap();
        assert_ne!(qa, qb);
        assert_ne!(ta, tb);
        let (q1, t1) = run_word(m.as_ref(), &State::Int(0), &[0]).unwrap();
        assert_eq!(q1, State::Int(1));
        assert!(t1.is_empty());
    }
}
