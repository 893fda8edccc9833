//! Program files for `solve`.
//!
//! A tabulated monotone map on the box `0 ≤ u ≤ bound`, row-major with the
//! last coordinate fastest (one-dimensional tables may list plain numbers):
//!
//! ```toml
//! kind = "table"
//! bound = [4]
//! values = [1, 1, 2, 2, 3]
//! cost = [1]           # optional, positive
//! ```
//!
//! A toppling system, given either the chip input `x` or the right-hand side
//! `b` of `L v ≥ b`:
//!
//! ```toml
//! kind = "toppling"
//! laplacian = [[1, 0], [-1, 1]]
//! thresholds = [1, 1]
//! x = [2, 0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::format::parse_toml;
use super::CliError;
use crate::optimize::{BoxTable, MonotoneProgram, TopplingSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableValues {
    Scalars(Vec<u64>),
    Vectors(Vec<Vec<u64>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProgramFile {
    Table {
        bound: Vec<u64>,
        values: TableValues,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cost: Option<Vec<u64>>,
    },
    Toppling {
        laplacian: Vec<Vec<i64>>,
        thresholds: Vec<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<Vec<u64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<i64>>,
    },
}

#[derive(Debug, Clone)]
pub enum Program {
    Monotone(MonotoneProgram),
    Toppling(TopplingSystem),
}

impl ProgramFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        parse_toml(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("program files always serialize")
    }

    pub fn build(&self) -> Result<Program, CliError> {
        match self {
            ProgramFile::Table {
                bound,
                values,
                cost,
            } => {
                let values = match values {
                    TableValues::Vectors(v) => v.clone(),
                    TableValues::Scalars(v) if bound.len() == 1 => v.iter().map(|&x| vec![x]).collect(),
                    TableValues::Scalars(_) => {
                        return Err(CliError::Invalid(
                            "plain-number values are only allowed for one-dimensional tables".into(),
                        ))
                    }
                };
                let mut prog = MonotoneProgram::from_table(BoxTable::new(bound.clone(), values)?);
                if let Some(c) = cost {
                    prog = prog.with_cost(c.clone())?;
                }
                Ok(Program::Monotone(prog))
            }
            ProgramFile::Toppling {
                laplacian,
                thresholds,
                x,
                b,
            } => {
                let sys = match (x, b) {
                    (Some(x), None) => {
                        TopplingSystem::from_input(laplacian.clone(), thresholds.clone(), x.clone())?
                    }
                    (None, Some(b)) => {
                        TopplingSystem::from_bound(laplacian.clone(), thresholds.clone(), b.clone())?
                    }
                    _ => {
                        return Err(CliError::Invalid(
                            "a toppling program needs exactly one of `x` and `b`".into(),
                        ))
                    }
                };
                Ok(Program::Toppling(sys))
            }
        }
    }
}

pub fn load_program(path: &Path) -> Result<Program, CliError> {
    ProgramFile::parse(&super::read(path)?)?.build()
}
