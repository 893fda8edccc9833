//! Directed multigraph, global alphabet, and the network that binds a
//! processor to every vertex.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::processor::{Behavior, Emission, Transition};
use crate::state::State;
use crate::Result;

/// A letter of the global alphabet: symbol `symbol` of vertex `vertex`'s
/// alphabet `A_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LetterId {
    pub vertex: usize,
    pub symbol: usize,
}

impl LetterId {
    pub fn new(vertex: usize, symbol: usize) -> Self {
        LetterId { vertex, symbol }
    }
}

impl fmt::Display for LetterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.vertex, self.symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub src: usize,
    pub dst: usize,
}

/// Directed graph with self-loops and parallel edges. Vertices and edges keep
/// their declaration order; each vertex's out-edges are numbered locally
/// `0..out_degree` in that order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Topology {
    names: Vec<String>,
    by_name: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_names: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Vertices named `v0..v{n-1}`.
    pub fn with_vertices(n: usize) -> Self {
        let mut t = Topology::new();
        for i in 0..n {
            t.add_vertex(format!("v{i}")).expect("fresh names");
        }
        t
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::DuplicateVertex(name));
        }
        let idx = self.names.len();
        self.by_name.insert(name.clone(), idx);
        self.names.push(name);
        self.out.push(Vec::new());
        Ok(idx)
    }

    pub fn add_edge(&mut self, name: impl Into<String>, src: usize, dst: usize) -> Result<usize> {
        let name = name.into();
        for v in [src, dst] {
            if v >= self.names.len() {
                return Err(Error::DanglingEdge {
                    edge: name,
                    vertex: format!("#{v}"),
                });
            }
        }
        if self.edge_names.contains_key(&name) {
            return Err(Error::DuplicateEdge(name));
        }
        let idx = self.edges.len();
        self.edge_names.insert(name.clone(), idx);
        self.edges.push(Edge { name, src, dst });
        self.out[src].push(idx);
        Ok(idx)
    }

    /// Adds an edge with an automatically generated name `e{index}`.
    pub fn connect(&mut self, src: usize, dst: usize) -> usize {
        let mut name = format!("e{}", self.edges.len());
        while self.edge_names.contains_key(&name) {
            name.push('\'');
        }
        self.add_edge(name, src, dst).expect("endpoints checked by caller")
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edge_names.get(name).copied()
    }

    /// Global edge indices of `v`'s out-edges, in local order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    /// Position of global edge `e` among its source's out-edges.
    pub fn local_position(&self, e: usize) -> usize {
        let src = self.edges[e].src;
        self.out[src]
            .iter()
            .position(|&x| x == e)
            .expect("edge listed at its source")
    }

    /// `d_uv`: the number of edges from `v` to `u`.
    pub fn multiplicity(&self, from: usize, to: usize) -> usize {
        self.out[from]
            .iter()
            .filter(|&&e| self.edges[e].dst == to)
            .count()
    }
}

/// Dense indexing of the global alphabet `A = ⊔ A_v`: vertex order first,
/// then symbol order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    offsets: Vec<usize>,
    owner: Vec<usize>,
}

impl Alphabet {
    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut offsets = vec![0];
        let mut owner = Vec::new();
        for (v, k) in sizes.into_iter().enumerate() {
            let last = *offsets.last().unwrap();
            offsets.push(last + k);
            owner.extend(std::iter::repeat_n(v, k));
        }
        Alphabet { offsets, owner }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn size_of(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn range(&self, v: usize) -> Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn index(&self, letter: LetterId) -> Result<usize> {
        if letter.vertex + 1 >= self.offsets.len() {
            return Err(Error::UnknownVertex(letter.vertex));
        }
        if letter.symbol >= self.size_of(letter.vertex) {
            return Err(Error::UnknownLetter {
                vertex: letter.vertex,
                symbol: letter.symbol,
            });
        }
        Ok(self.offsets[letter.vertex] + letter.symbol)
    }

    pub fn letter(&self, index: usize) -> LetterId {
        let vertex = self.owner[index];
        LetterId {
            vertex,
            symbol: index - self.offsets[vertex],
        }
    }

    pub fn owner(&self, index: usize) -> usize {
        self.owner[index]
    }
}

/// A topology with one processor per vertex.
#[derive(Debug, Clone)]
pub struct Network {
    topology: Topology,
    processors: Vec<Behavior>,
    alphabet: Alphabet,
}

impl Network {
    pub fn new(topology: Topology, processors: Vec<Behavior>) -> Result<Self> {
        if processors.len() != topology.vertex_count() {
            return Err(Error::Shape {
                what: "processors",
                expected: topology.vertex_count(),
                got: processors.len(),
            });
        }
        for (v, p) in processors.iter().enumerate() {
            if p.out_degree() != topology.out_degree(v) {
                return Err(Error::DegreeMismatch {
                    vertex: topology.vertex_name(v).to_string(),
                    processor: p.out_degree(),
                    graph: topology.out_degree(v),
                });
            }
        }
        let alphabet = Alphabet::from_sizes(processors.iter().map(|p| p.alphabet_size()));
        Ok(Network {
            topology,
            processors,
            alphabet,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn processor(&self, v: usize) -> &Behavior {
        &self.processors[v]
    }

    pub fn processors(&self) -> &[Behavior] {
        &self.processors
    }

    pub fn vertex_count(&self) -> usize {
        self.topology.vertex_count()
    }

    pub fn letter_index(&self, letter: LetterId) -> Result<usize> {
        self.alphabet.index(letter)
    }

    /// Natural start state of every processor.
    pub fn initial_states(&self) -> Vec<State> {
        self.processors.iter().map(|p| p.initial_state()).collect()
    }

    pub fn validate_states(&self, states: &[State]) -> Result<()> {
        if states.len() != self.vertex_count() {
            return Err(Error::Shape {
                what: "states",
                expected: self.vertex_count(),
                got: states.len(),
            });
        }
        for (v, s) in states.iter().enumerate() {
            if !self.processors[v].accepts_state(s) {
                return Err(Error::InvalidState {
                    vertex: self.topology.vertex_name(v).to_string(),
                    state: s.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Runs the processor owning letter `index` on `state`.
    pub(crate) fn fire(&self, index: usize, state: &State) -> Result<Transition> {
        let v = self.alphabet.owner(index);
        let symbol = index - self.alphabet.range(v).start;
        self.processors[v]
            .process(symbol, state)
            .map_err(|source| Error::Processor {
                vertex: self.topology.vertex_name(v).to_string(),
                source,
            })
    }

    /// Resolves an emission of vertex `v` to global letter indices.
    pub(crate) fn deliver(
        &self,
        v: usize,
        emission: &Emission,
        mut sink: impl FnMut(usize, u64) -> Result<()>,
    ) -> Result<()> {
        let out = self.topology.out_edges(v);
        for emit in emission.iter() {
            let Some(&e) = out.get(emit.edge) else {
                return Err(Error::Processor {
                    vertex: self.topology.vertex_name(v).to_string(),
                    source: crate::processor::ProcessError::UnknownEdge(emit.edge),
                });
            };
            let dst = self.topology.edge(e).dst;
            let letter = self.alphabet.index(LetterId::new(dst, emit.symbol))?;
            sink(letter, emit.count)?;
        }
        Ok(())
    }
}
