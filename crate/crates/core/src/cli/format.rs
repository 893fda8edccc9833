//! Network files.
//!
//! ```toml
//! [[vertex]]
//! name = "a"
//! processor = { family = "sandpile", threshold = 2 }
//! state = 1            # optional; defaults to the family's start state
//! input = 3            # optional; a count for symbol 0, or one per symbol
//!
//! [[vertex]]
//! name = "s"
//! processor = { family = "sink" }
//!
//! [[edge]]
//! name = "a-s"         # optional; defaults to "e<index>"
//! from = "a"
//! to = "s"
//! ```
//!
//! Edges leave each vertex in declaration order, which is the order used by
//! rotors and by per-edge output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::CliError;
use crate::error::Error;
use crate::network::{Network, Topology};
use crate::processors::ProcessorSpec;
use crate::state::State;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, expecting = "an integer state or a list of integers")]
pub enum StateValue {
    Int(i64),
    Vector(Vec<i64>),
}

impl StateValue {
    fn to_state(&self) -> State {
        match self {
            StateValue::Int(q) => State::Int(*q),
            StateValue::Vector(v) => State::Vector(v.clone()),
        }
    }

    fn from_state(s: &State) -> Option<Self> {
        match s {
            State::Int(q) => Some(StateValue::Int(*q)),
            State::Vector(v) => Some(StateValue::Vector(v.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, expecting = "a letter count or a list of counts per symbol")]
pub enum InputValue {
    Count(u64),
    PerSymbol(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDecl {
    pub name: String,
    pub processor: ProcessorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub from: String,
    pub to: String,
}

/// A network file as written.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertex: Vec<VertexDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge: Vec<EdgeDecl>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    name: String,
    processor: Spanned<toml::Table>,
    #[serde(default)]
    state: Option<StateValue>,
    #[serde(default)]
    input: Option<InputValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    vertex: Vec<RawVertex>,
    #[serde(default)]
    edge: Vec<EdgeDecl>,
}

/// Line and column (both 1-based) of a byte offset.
pub fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn syntax(text: &str, span: Option<std::ops::Range<usize>>, message: &str) -> CliError {
    let (line, column) = line_column(text, span.map_or(0, |s| s.start));
    CliError::Syntax {
        line,
        column,
        message: message.trim().to_string(),
    }
}

/// Parses TOML text into `T`, mapping errors to line/column diagnostics.
pub(crate) fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| syntax(text, e.span(), e.message()))
}

impl NetworkDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawDocument = parse_toml(text)?;
        let mut vertex = Vec::with_capacity(raw.vertex.len());
        for v in raw.vertex {
            let span = v.processor.span();
            let table = v.processor.into_inner();
            let family = match table.get("family") {
                Some(toml::Value::String(f)) => f.clone(),
                Some(_) => return Err(syntax(text, Some(span), "`family` must be a string")),
                None => return Err(syntax(text, Some(span), "processor is missing `family`")),
            };
            if !ProcessorSpec::FAMILIES.contains(&family.as_str()) {
                return Err(CliError::UnknownFamily {
                    vertex: v.name,
                    family,
                });
            }
            let processor: ProcessorSpec = toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| {
                    syntax(text, Some(span.clone()), &format!("vertex `{}`: {}", v.name, e.message()))
                })?;
            vertex.push(VertexDecl {
                name: v.name,
                processor,
                state: v.state,
                input: v.input,
            });
        }
        Ok(NetworkDocument {
            vertex,
            edge: raw.edge,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("network documents always serialize")
    }

    /// Builds the network, its initial states and input.
    pub fn build(&self) -> Result<NetworkBundle, CliError> {
        let mut topo = Topology::new();
        for v in &self.vertex {
            topo.add_vertex(v.name.clone())?;
        }
        for (k, e) in self.edge.iter().enumerate() {
            let name = e.name.clone().unwrap_or_else(|| format!("e{k}"));
            let endpoint = |vertex: &str| {
                topo.vertex_index(vertex).ok_or_else(|| Error::DanglingEdge {
                    edge: name.clone(),
                    vertex: vertex.to_string(),
                })
            };
            let (src, dst) = (endpoint(&e.from)?, endpoint(&e.to)?);
            topo.add_edge(name.clone(), src, dst)?;
        }
        let processors = self
            .vertex
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.processor.build(&topo, i).map_err(|source| Error::Spec {
                    vertex: v.name.clone(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let network = Network::new(topo, processors)?;

        let mut states = network.initial_states();
        let mut input = vec![0u64; network.alphabet().len()];
        for (i, v) in self.vertex.iter().enumerate() {
            if let Some(s) = &v.state {
                states[i] = s.to_state();
            }
            let range = network.alphabet().range(i);
            match &v.input {
                None => {}
                Some(InputValue::Count(n)) => {
                    if range.is_empty() {
                        return Err(CliError::Invalid(format!(
                            "vertex `{}` has an empty alphabet and cannot take input",
                            v.name
                        )));
                    }
                    input[range.start] = *n;
                }
                Some(InputValue::PerSymbol(counts)) => {
                    if counts.len() != range.len() {
                        return Err(CliError::Invalid(format!(
                            "vertex `{}`: input lists {} counts but the alphabet has {} letters",
                            v.name,
                            counts.len(),
                            range.len()
                        )));
                    }
                    input[range].copy_from_slice(counts);
                }
            }
        }
        network.validate_states(&states)?;
        Ok(NetworkBundle {
            network,
            specs: self.vertex.iter().map(|v| v.processor.clone()).collect(),
            states,
            input,
        })
    }
}

/// A parsed network file: the network plus the configuration it declares.
#[derive(Debug, Clone)]
pub struct NetworkBundle {
    pub network: Network,
    pub specs: Vec<ProcessorSpec>,
    pub states: Vec<State>,
    pub input: Vec<u64>,
}

impl NetworkBundle {
    /// Canonical document: every edge named, inputs and states omitted when
    /// they equal the defaults, single-letter inputs written as a count.
    pub fn to_document(&self) -> NetworkDocument {
        let net = &self.network;
        let topo = net.topology();
        let initial = net.initial_states();
        let vertex = (0..net.vertex_count())
            .map(|v| {
                let range = net.alphabet().range(v);
                let counts = &self.input[range];
                let input = if counts.iter().all(|&c| c == 0) {
                    None
                } else if counts.len() == 1 {
                    Some(InputValue::Count(counts[0]))
                } else {
                    Some(InputValue::PerSymbol(counts.to_vec()))
                };
                let state = (self.states[v] != initial[v])
                    .then(|| StateValue::from_state(&self.states[v]))
                    .flatten();
                VertexDecl {
                    name: topo.vertex_name(v).to_string(),
                    processor: self.specs[v].clone(),
                    state,
                    input,
                }
            })
            .collect();
        let edge = topo
            .edges()
            .iter()
            .map(|e| EdgeDecl {
                name: Some(e.name.clone()),
                from: topo.vertex_name(e.src).to_string(),
                to: topo.vertex_name(e.dst).to_string(),
            })
            .collect();
        NetworkDocument { vertex, edge }
    }

    pub fn to_toml(&self) -> String {
        self.to_document().to_toml()
    }
}

pub fn parse_network(text: &str) -> Result<NetworkBundle, CliError> {
    NetworkDocument::parse(text)?.build()
}

pub fn load_network(path: &Path) -> Result<NetworkBundle, CliError> {
    parse_network(&super::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = r#"
[[vertex]]
name = "a"
processor = { family = "sandpile", threshold = 1 }
input = 2

[[vertex]]
name = "b"
processor = { family = "rotor" }

[[vertex]]
name = "s"
processor = { family = "counter" }
state = 4

[[edge]]
from = "a"
to = "b"

[[edge]]
from = "b"
to = "s"
"#;

    #[test]
    fn parses_and_round_trips() {
        let b = parse_network(CHAIN).unwrap();
        assert_eq!(b.network.vertex_count(), 3);
        assert_eq!(b.input, vec![2, 0, 0]);
        assert_eq!(b.states[2], State::Int(4));
        let text = b.to_toml();
        let again = parse_network(&text).unwrap();
        assert_eq!(again.to_document(), b.to_document());
        assert_eq!(again.to_toml(), text);
        assert_eq!(again.network.topology().edge(0).name, "e0");
    }

    #[test]
    fn dangling_edge() {
        let text = "[[vertex]]\nname = \"a\"\nprocessor = { family = \"sink\" }\n\n[[edge]]\nfrom = \"a\"\nto = \"zz\"\n";
        let err = parse_network(text).unwrap_err();
        assert!(matches!(err, CliError::Network(Error::DanglingEdge { ref vertex, .. }) if vertex == "zz"), "{err}");
    }

    #[test]
    fn unknown_family() {
        let text = "[[vertex]]\nname = \"a\"\nprocessor = { family = \"teleporter\" }\n";
        assert!(matches!(parse_network(text), Err(CliError::UnknownFamily { .. })));
    }

    #[test]
    fn syntax_error_has_position() {
        let text = "[[vertex]]\nname = \"a\"\nprocessor = { family = \"sink\" \n";
        match parse_network(text) {
            Err(CliError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "[[vertex]]\nname = \"a\"\nprocessor = { family = \"sandpile\", thresh = 2 }\n";
        match parse_network(text) {
            Err(CliError::Syntax { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("thresh"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }
}
