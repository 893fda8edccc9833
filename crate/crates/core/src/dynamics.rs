//! The whole network viewed as one automaton over configurations `x.q`.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::network::{LetterId, Network, Topology};
use crate::processor::{Behavior, Emission, ProcessError, Processor, Transition};
use crate::state::State;
use crate::Result;

/// Letter counts `x ∈ ℤ^A` (dense, indexed by the global alphabet) plus the
/// product state `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub counts: Vec<i64>,
    pub states: Vec<State>,
}

impl Configuration {
    /// Checks shape and state membership against `net`.
    pub fn new(net: &Network, counts: Vec<i64>, states: Vec<State>) -> Result<Self> {
        if counts.len() != net.alphabet().len() {
            return Err(Error::Shape {
                what: "letter counts",
                expected: net.alphabet().len(),
                got: counts.len(),
            });
        }
        net.validate_states(&states)?;
        Ok(Configuration { counts, states })
    }

    /// Zero counts, every processor in its start state.
    pub fn initial(net: &Network) -> Self {
        Configuration {
            counts: vec![0; net.alphabet().len()],
            states: net.initial_states(),
        }
    }

    pub fn count(&self, net: &Network, a: LetterId) -> Result<i64> {
        Ok(self.counts[net.letter_index(a)?])
    }

    /// `a` is a legal move iff `x_a ≥ 1`.
    pub fn is_legal(&self, net: &Network, a: LetterId) -> Result<bool> {
        Ok(self.count(net, a)? >= 1)
    }

    /// Complete iff every count is `≤ 0`.
    pub fn is_complete(&self) -> bool {
        self.counts.iter().all(|&x| x <= 0)
    }

    /// Sum of the positive counts.
    pub fn pending(&self) -> i64 {
        self.counts.iter().filter(|&&x| x > 0).sum()
    }
}

/// `N(w, q)`: letters produced by message passing, per global letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MessageCount(pub Vec<u64>);

impl MessageCount {
    pub fn zero(len: usize) -> Self {
        MessageCount(vec![0; len])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le(&self, other: &MessageCount) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MessageCount) -> MessageCount {
        MessageCount(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Applies `π_a` in place and returns the emission, for callers that track
/// counts themselves.
pub(crate) fn apply_in_place(
    net: &Network,
    cfg: &mut Configuration,
    index: usize,
) -> Result<Transition> {
    let v = net.alphabet().owner(index);
    let t = net.fire(index, &cfg.states[v])?;
    cfg.counts[index] = cfg.counts[index]
        .checked_sub(1)
        .ok_or(Error::Overflow(index))?;
    let counts = &mut cfg.counts;
    net.deliver(v, &t.emission, |b, k| {
        let k = i64::try_from(k).map_err(|_| Error::Overflow(b))?;
        counts[b] = counts[b].checked_add(k).ok_or(Error::Overflow(b))?;
        Ok(())
    })?;
    cfg.states[v] = t.state.clone();
    Ok(t)
}

/// `π_a(x.q) = (x − 1_a + N(a, q_v)).t_a(q)`. Defined on all of `ℤ^A × Q`;
/// legality is not required.
pub fn step(net: &Network, cfg: &Configuration, a: LetterId) -> Result<Configuration> {
    let index = net.letter_index(a)?;
    let mut next = cfg.clone();
    apply_in_place(net, &mut next, index)?;
    Ok(next)
}

/// `π_w`: left-to-right composition of [`step`].
pub fn apply_word(net: &Network, cfg: &Configuration, word: &[LetterId]) -> Result<Configuration> {
    let mut next = cfg.clone();
    for &a in word {
        let index = net.letter_index(a)?;
        apply_in_place(net, &mut next, index)?;
    }
    Ok(next)
}

/// `N(w, q) = Σ_i N(w_i, q^{i-1}_{v(i)})`.
pub fn message_count(net: &Network, states: &[State], word: &[LetterId]) -> Result<MessageCount> {
    let mut q = states.to_vec();
    let mut n = MessageCount::zero(net.alphabet().len());
    for &a in word {
        let index = net.letter_index(a)?;
        let v = a.vertex;
        let t = net.fire(index, &q[v])?;
        let acc = &mut n.0;
        net.deliver(v, &t.emission, |b, k| {
            acc[b] = acc[b].checked_add(k).ok_or(Error::Overflow(b))?;
            Ok(())
        })?;
        q[v] = t.state;
    }
    Ok(n)
}

/// `|w|` as a dense vector over the global alphabet.
pub fn word_counts(net: &Network, word: &[LetterId]) -> Result<Vec<u64>> {
    let mut c = vec![0u64; net.alphabet().len()];
    for &a in word {
        c[net.letter_index(a)?] += 1;
    }
    Ok(c)
}

/// Where an interior vertex's local out-edge leads inside a collapsed
/// subnetwork.
#[derive(Debug, Clone, Copy)]
enum Route {
    /// Local interior vertex index.
    Interior(usize),
    /// Crossing edge index (the collapsed processor's out-edge).
    Output(usize),
}

/// An induced subnetwork `I` run to completion as a single processor `Proc_I`
/// with alphabet `⊔_{v∈I} A_v`, state `∏_{v∈I} Q_v`, and one out-edge per
/// edge from `I` to its complement.
#[derive(Debug, Clone)]
pub struct CollapsedProcessor {
    vertices: Vec<usize>,
    names: Vec<String>,
    processors: Vec<Behavior>,
    routes: Vec<Vec<Route>>,
    /// Alphabet size at the target of each crossing edge.
    crossing_targets: Vec<usize>,
    offsets: Vec<usize>,
    budget: u64,
}

impl CollapsedProcessor {
    /// Interior vertex indices (in the original network), in order.
    pub fn interior(&self) -> &[usize] {
        &self.vertices
    }

    pub fn crossing_edges(&self) -> usize {
        self.crossing_targets.len()
    }

    fn locate(&self, symbol: usize) -> (usize, usize) {
        let v = self.offsets.partition_point(|&o| o <= symbol) - 1;
        (v, symbol - self.offsets[v])
    }

    fn unpack<'a>(&self, state: &'a State) -> Result<&'a [State], ProcessError> {
        match state {
            State::Product(parts) if parts.len() == self.vertices.len() => Ok(parts),
            _ => Err(ProcessError::InvalidState {
                state: state.clone(),
                expected: "product of interior states",
            }),
        }
    }
}

impl Processor for CollapsedProcessor {
    fn family(&self) -> &str {
        "collapsed"
    }

    fn alphabet_size(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn out_degree(&self) -> usize {
        self.crossing_targets.len()
    }

    fn initial_state(&self) -> State {
        State::Product(self.processors.iter().map(|p| p.initial_state()).collect())
    }

    fn accepts_state(&self, state: &State) -> bool {
        self.unpack(state).is_ok_and(|parts| {
            parts
                .iter()
                .zip(&self.processors)
                .all(|(s, p)| p.accepts_state(s))
        })
    }

    fn process(&self, symbol: usize, state: &State) -> Result<Transition, ProcessError> {
        crate::processor::check_symbol(symbol, self.alphabet_size())?;
        let mut states = self.unpack(state)?.to_vec();
        // Interior letters only; FIFO by local letter index.
        let mut pending: HashMap<(usize, usize), u64> = HashMap::new();
        let mut queue: BTreeSet<(usize, usize)> = BTreeSet::new();
        let start = self.locate(symbol);
        pending.insert(start, 1);
        queue.insert(start);
        let mut emission = Emission::none();
        let mut steps = 0u64;
        while let Some(&(v, a)) = queue.iter().next() {
            if steps >= self.budget {
                return Err(ProcessError::InteriorBudget {
                    budget: self.budget,
                });
            }
            steps += 1;
            let left = pending.get_mut(&(v, a)).expect("queued letters are pending");
            *left -= 1;
            if *left == 0 {
                pending.remove(&(v, a));
                queue.remove(&(v, a));
            }
            let t = self.processors[v]
                .process(a, &states[v])
                .map_err(|e| ProcessError::Interior {
                    vertex: self.names[v].clone(),
                    message: e.to_string(),
                })?;
            for emit in t.emission.iter() {
                match self.routes[v].get(emit.edge) {
                    Some(Route::Interior(u)) => {
                        if emit.symbol >= self.processors[*u].alphabet_size() {
                            return Err(ProcessError::Interior {
                                vertex: self.names[v].clone(),
                                message: format!("symbol {} unknown at target", emit.symbol),
                            });
                        }
                        *pending.entry((*u, emit.symbol)).or_default() += emit.count;
                        queue.insert((*u, emit.symbol));
                    }
                    Some(Route::Output(c)) => {
                        if emit.symbol >= self.crossing_targets[*c] {
                            return Err(ProcessError::Interior {
                                vertex: self.names[v].clone(),
                                message: format!("symbol {} unknown at target", emit.symbol),
                            });
                        }
                        emission.push(*c, emit.symbol, emit.count);
                    }
                    None => return Err(ProcessError::UnknownEdge(emit.edge)),
                }
            }
            states[v] = t.state;
        }
        Ok(Transition {
            state: State::Product(states),
            emission,
        })
    }

    fn sample_state(&self, rng: &mut dyn rand::RngCore) -> State {
        State::Product(self.processors.iter().map(|p| p.sample_state(rng)).collect())
    }
}

/// Collapses the interior vertex set into one processor. Every vertex outside
/// `interior` must be silent (a sink, a counter, or without out-edges).
/// `budget` caps the number of interior steps per processed letter.
pub fn collapse_subnetwork(
    net: &Network,
    interior: &[usize],
    budget: u64,
) -> Result<CollapsedProcessor> {
    let topo = net.topology();
    let mut vertices: Vec<usize> = interior.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    if let Some(&v) = vertices.iter().find(|&&v| v >= net.vertex_count()) {
        return Err(Error::UnknownVertex(v));
    }
    let local: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for v in 0..net.vertex_count() {
        if !local.contains_key(&v) && topo.out_degree(v) > 0 && !net.processor(v).never_emits() {
            return Err(Error::EmittingOutput(topo.vertex_name(v).to_string()));
        }
    }
    let mut routes = Vec::with_capacity(vertices.len());
    let mut crossing_targets = Vec::new();
    for &v in &vertices {
        let row = topo
            .out_edges(v)
            .iter()
            .map(|&e| {
                let dst = topo.edge(e).dst;
                match local.get(&dst) {
                    Some(&u) => Route::Interior(u),
                    None => {
                        crossing_targets.push(net.alphabet().size_of(dst));
                        Route::Output(crossing_targets.len() - 1)
                    }
                }
            })
            .collect();
        routes.push(row);
    }
    let mut offsets = vec![0];
    for &v in &vertices {
        offsets.push(offsets.last().unwrap() + net.alphabet().size_of(v));
    }
    Ok(CollapsedProcessor {
        names: vertices.iter().map(|&v| topo.vertex_name(v).to_string()).collect(),
        processors: vertices.iter().map(|&v| net.processor(v).clone()).collect(),
        vertices,
        routes,
        crossing_targets,
        offsets,
        budget,
    })
}

/// The quotient network in which `interior` is replaced by a single vertex
/// running its [`CollapsedProcessor`]. The collapsed vertex comes first
/// (named `name`), followed by the remaining vertices in order; returns the
/// network and the map from old vertex index to new index.
pub fn collapse_network(
    net: &Network,
    interior: &[usize],
    name: &str,
    budget: u64,
) -> Result<(Network, Vec<usize>)> {
    let collapsed = collapse_subnetwork(net, interior, budget)?;
    let topo = net.topology();
    let inside: BTreeSet<usize> = collapsed.interior().iter().copied().collect();
    let mut quotient = Topology::new();
    quotient.add_vertex(name)?;
    let mut map = vec![0usize; net.vertex_count()];
    let mut processors: Vec<Behavior> = vec![Arc::new(collapsed.clone())];
    for (v, slot) in map.iter_mut().enumerate() {
        if !inside.contains(&v) {
            *slot = quotient.add_vertex(topo.vertex_name(v))?;
            processors.push(net.processor(v).clone());
        }
    }
    // Crossing edges first, in the collapsed processor's order.
    for &v in collapsed.interior() {
        for &e in topo.out_edges(v) {
            let edge = topo.edge(e);
            if !inside.contains(&edge.dst) {
                quotient.add_edge(edge.name.clone(), 0, map[edge.dst])?;
            }
        }
    }
    for v in (0..net.vertex_count()).filter(|v| !inside.contains(v)) {
        for &e in topo.out_edges(v) {
            let edge = topo.edge(e);
            quotient.add_edge(edge.name.clone(), map[v], map[edge.dst])?;
        }
    }
    Ok((Network::new(quotient, processors)?, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processors::ProcessorSpec;

    /// v0 → v1 → sink(v2), all sandpiles with threshold `r`.
    fn chain(r: u64) -> Network {
        let mut t = Topology::with_vertices(3);
        t.connect(0, 1);
        t.connect(1, 2);
        let specs = [ProcessorSpec::toppling(r), ProcessorSpec::toppling(r), ProcessorSpec::sink()];
        let procs = specs.iter().enumerate().map(|(v, s)| s.build(&t, v).unwrap()).collect();
        Network::new(t, procs).unwrap()
    }

    #[test]
    fn counter_step_increments_state() {
        let mut t = Topology::with_vertices(1);
        let _ = &mut t;
        let p = ProcessorSpec::counter().build(&t, 0).unwrap();
        let net = Network::new(t, vec![p]).unwrap();
        let cfg = Configuration::new(&net, vec![1], vec![State::Int(5)]).unwrap();
        let next = step(&net, &cfg, LetterId::new(0, 0)).unwrap();
        assert_eq!(next.counts, vec![0]);
        assert_eq!(next.states, vec![State::Int(6)]);
    }

    #[test]
    fn sandpile_latent_chip_then_topple() {
        let net = chain(2);
        let a = LetterId::new(0, 0);
        let cfg = Configuration::new(&net, vec![1, 0, 0], net.initial_states()).unwrap();
        let one = step(&net, &cfg, a).unwrap();
        assert_eq!(one.counts, vec![0, 0, 0]);
        assert_eq!(one.states[0], State::Int(1));
        let mut again = one.clone();
        again.counts[0] = 1;
        let two = step(&net, &again, a).unwrap();
        assert_eq!(two.states[0], State::Int(0));
        assert_eq!(two.counts, vec![0, 1, 0]);
    }

    #[test]
    fn step_allows_negative_counts() {
        let net = chain(2);
        let cfg = Configuration::initial(&net);
        let next = step(&net, &cfg, LetterId::new(0, 0)).unwrap();
        assert_eq!(next.counts[0], -1);
    }

    #[test]
    fn unknown_letter_is_a_domain_error() {
        let net = chain(1);
        let cfg = Configuration::initial(&net);
        assert!(matches!(
            step(&net, &cfg, LetterId::new(0, 1)),
            Err(Error::UnknownLetter { .. })
        ));
        assert!(cfg.is_legal(&net, LetterId::new(7, 0)).is_err());
    }

    #[test]
    fn legality_and_completeness() {
        let net = chain(1);
        let a = LetterId::new(0, 0);
        let mut cfg = Configuration::initial(&net);
        for (x, legal) in [(1, true), (0, false), (-3, false)] {
            cfg.counts[0] = x;
            assert_eq!(cfg.is_legal(&net, a).unwrap(), legal);
        }
        cfg.counts = vec![0, 0, 0];
        assert!(cfg.is_complete());
        cfg.counts = vec![0, 1, 0];
        assert!(!cfg.is_complete());
        cfg.counts = vec![-2, -2, -2];
        assert!(cfg.is_complete());
    }

    #[test]
    fn empty_word_is_identity() {
        let net = chain(2);
        let cfg = Configuration::new(&net, vec![3, 1, 0], net.initial_states()).unwrap();
        assert_eq!(apply_word(&net, &cfg, &[]).unwrap(), cfg);
        assert_eq!(
            message_count(&net, &cfg.states, &[]).unwrap(),
            MessageCount::zero(3)
        );
    }

    #[test]
    fn chain_full_execution_matches_stepwise() {
        let net = chain(1);
        let cfg = Configuration::new(&net, vec![2, 0, 0], net.initial_states()).unwrap();
        let l = |v| LetterId::new(v, 0);
        let w = [l(0), l(1), l(0), l(2), l(1), l(2)];
        let mut manual = cfg.clone();
        for &a in &w {
            assert!(manual.is_legal(&net, a).unwrap());
            manual = step(&net, &manual, a).unwrap();
        }
        let direct = apply_word(&net, &cfg, &w).unwrap();
        assert_eq!(direct, manual);
        assert!(direct.is_complete());
        assert_eq!(direct.counts, vec![0, 0, 0]);
    }

    #[test]
    fn collapse_single_vertex_matches_processor() {
        let mut t = Topology::with_vertices(2);
        t.connect(0, 1);
        let procs = vec![
            ProcessorSpec::toppling(2).build(&t, 0).unwrap(),
            ProcessorSpec::sink().build(&t, 1).unwrap(),
        ];
        let net = Network::new(t, procs).unwrap();
        let c = collapse_subnetwork(&net, &[0], 100).unwrap();
        let p = net.processor(0);
        for q in 0..2 {
            let direct = p.process(0, &State::Int(q)).unwrap();
            let col = c.process(0, &State::Product(vec![State::Int(q)])).unwrap();
            assert_eq!(col.state, State::Product(vec![direct.state]));
            assert_eq!(col.emission, direct.emission);
        }
    }

    #[test]
    fn collapse_rejects_emitting_outputs() {
        let net = chain(1);
        assert!(matches!(
            collapse_subnetwork(&net, &[1], 10),
            Err(Error::EmittingOutput(_))
        ));
    }

    #[test]
    fn collapse_reports_interior_budget() {
        // two unit-threshold sandpiles feeding each other never halt
        let mut t = Topology::with_vertices(2);
        t.connect(0, 1);
        t.connect(1, 0);
        let procs = (0..2)
            .map(|v| ProcessorSpec::toppling(1).build(&t, v).unwrap())
            .collect();
        let net = Network::new(t, procs).unwrap();
        let c = collapse_subnetwork(&net, &[0, 1], 50).unwrap();
        let err = c.process(0, &c.initial_state()).unwrap_err();
        assert_eq!(err, ProcessError::InteriorBudget { budget: 50 });
    }
}
