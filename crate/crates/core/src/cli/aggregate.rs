//! Rotor aggregation on a bounded piece of `ℤ²`.
//!
//! Every site strictly inside the radius runs an absorbing rotor: its first
//! letter is absorbed (the site becomes visited) and later letters are routed
//! to the four neighbours in the configured cyclic order. Sites with
//! `max(|x|, |y|) = radius` are sinks; a chip reaching one means the grid
//! was too small and the run is rejected rather than truncated.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pgm::Graymap;
use super::CliError;
use crate::engine::{run, Policy, RunOptions, RunOutcome};
use crate::network::{Network, Topology};
use crate::processors::ProcessorSpec;
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    fn offset(self) -> (i64, i64) {
        match self {
            Direction::North => (0, 1),
            Direction::East => (1, 0),
            Direction::South => (0, -1),
            Direction::West => (-1, 0),
        }
    }

    fn letter(self) -> char {
        match self {
            Direction::North => 'N',
            Direction::East => 'E',
            Direction::South => 'S',
            Direction::West => 'W',
        }
    }
}

/// Cyclic service order of the four neighbours, written like `NESW`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotorOrder(pub [Direction; 4]);

impl Default for RotorOrder {
    fn default() -> Self {
        RotorOrder([Direction::North, Direction::East, Direction::South, Direction::West])
    }
}

impl fmt::Display for RotorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|d| write!(f, "{}", d.letter()))
    }
}

impl FromStr for RotorOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let dirs: Vec<Direction> = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'N' => Ok(Direction::North),
                'E' => Ok(Direction::East),
                'S' => Ok(Direction::South),
                'W' => Ok(Direction::West),
                _ => Err(format!("`{c}` is not one of N, E, S, W")),
            })
            .collect::<Result<_, _>>()?;
        let all = [Direction::North, Direction::East, Direction::South, Direction::West];
        if dirs.len() != 4 || !all.iter().all(|d| dirs.contains(d)) {
            return Err(format!("`{s}` must list each of N, E, S, W exactly once"));
        }
        Ok(RotorOrder([dirs[0], dirs[1], dirs[2], dirs[3]]))
    }
}

#[derive(Debug, Clone)]
pub struct AggregateOptions {
    pub chips: u64,
    /// Grid radius; `None` picks one from the chip count.
    pub radius: Option<u32>,
    pub order: RotorOrder,
    pub policy: Policy,
    pub budget: u64,
}

impl AggregateOptions {
    pub fn new(chips: u64) -> Self {
        AggregateOptions {
            chips,
            radius: None,
            order: RotorOrder::default(),
            policy: Policy::Fifo,
            budget: u64::MAX,
        }
    }
}

/// A radius comfortably larger than the disk of area `chips`.
pub fn default_radius(chips: u64) -> u32 {
    ((chips as f64 / PI).sqrt() * 1.25).ceil() as u32 + 3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Unvisited,
    /// Visited, never routed a chip.
    Absorbed,
    /// Visited; the rotor's next service position.
    Rotor(u8),
}

impl Cell {
    pub fn shade(self) -> u16 {
        match self {
            Cell::Unvisited => 255,
            Cell::Absorbed => 200,
            Cell::Rotor(s) => s as u16 * 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub radius: u32,
    pub order: RotorOrder,
    pub chips: u64,
    pub visited: u64,
    /// Distance from the origin to the nearest unvisited site.
    pub inradius: f64,
    /// Distance from the origin to the farthest visited site.
    pub outradius: f64,
    pub steps: u64,
    /// `(2·radius + 1)²` cells, row-major from the north-west corner.
    pub cells: Vec<Cell>,
}

impl Aggregate {
    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    /// Cell at `(x, y)`, both within `±radius`.
    pub fn cell(&self, x: i64, y: i64) -> Cell {
        let r = self.radius as i64;
        self.cells[((r - y) * (2 * r + 1) + (x + r)) as usize]
    }

    pub fn ratio(&self) -> Option<f64> {
        (self.inradius > 0.0).then(|| self.outradius / self.inradius)
    }

    /// The visited bounding box as a graymap with a legend in its comments.
    pub fn to_pgm(&self) -> Graymap {
        let r = self.radius as i64;
        let visited: Vec<(i64, i64)> = (-r..=r)
            .flat_map(|y| (-r..=r).map(move |x| (x, y)))
            .filter(|&(x, y)| self.cell(x, y) != Cell::Unvisited)
            .collect();
        let comments = vec![
            format!("rotor aggregation of {} chips, rotor order {}", self.chips, self.order),
            "shades: 255 unvisited, 200 absorbed only, 60*s rotor at position s".to_string(),
        ];
        if visited.is_empty() {
            return Graymap {
                width: 0,
                height: 0,
                maxval: 255,
                comments,
                pixels: Vec::new(),
            };
        }
        let (x0, x1) = (
            visited.iter().map(|p| p.0).min().unwrap(),
            visited.iter().map(|p| p.0).max().unwrap(),
        );
        let (y0, y1) = (
            visited.iter().map(|p| p.1).min().unwrap(),
            visited.iter().map(|p| p.1).max().unwrap(),
        );
        let pixels = (y0..=y1)
            .rev()
            .flat_map(|y| (x0..=x1).map(move |x| (x, y)))
            .map(|(x, y)| self.cell(x, y).shade())
            .collect();
        let mut comments = comments;
        comments.push(format!("window x {x0}..={x1}, y {y0}..={y1}, north up"));
        Graymap {
            width: (x1 - x0 + 1) as usize,
            height: (y1 - y0 + 1) as usize,
            maxval: 255,
            comments,
            pixels,
        }
    }
}

/// The grid network and the index of each site's vertex.
pub fn grid_network(radius: u32, order: RotorOrder) -> Result<Network, CliError> {
    let r = radius as i64;
    let side = 2 * r + 1;
    let index = |x: i64, y: i64| ((r - y) * side + (x + r)) as usize;
    let mut topo = Topology::new();
    for y in (-r..=r).rev() {
        for x in -r..=r {
            topo.add_vertex(format!("{x},{y}"))?;
        }
    }
    let mut specs = Vec::with_capacity((side * side) as usize);
    for y in (-r..=r).rev() {
        for x in -r..=r {
            if x.abs().max(y.abs()) == r {
                specs.push(ProcessorSpec::sink());
                continue;
            }
            for d in order.0 {
                let (dx, dy) = d.offset();
                topo.add_edge(format!("{x},{y}:{}", d.letter()), index(x, y), index(x + dx, y + dy))?;
            }
            specs.push(ProcessorSpec::Rotor(crate::processors::RotorSpec {
                order: None,
                absorbing: true,
            }));
        }
    }
    let processors = specs
        .iter()
        .enumerate()
        .map(|(v, s)| {
            s.build(&topo, v).map_err(|source| crate::Error::Spec {
                vertex: topo.vertex_name(v).to_string(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Network::new(topo, processors)?)
}

pub fn rotor_aggregate(opts: &AggregateOptions) -> Result<Aggregate, CliError> {
    let radius = opts.radius.unwrap_or_else(|| default_radius(opts.chips));
    if radius == 0 {
        return Err(CliError::Invalid("radius must be at least 1".into()));
    }
    let net = grid_network(radius, opts.order)?;
    let r = radius as i64;
    let origin = (r * (2 * r + 1) + r) as usize;
    let mut input = vec![0u64; net.alphabet().len()];
    input[net.alphabet().range(origin).start] = opts.chips;
    let run_opts = RunOptions {
        detect_recurrence: false,
        ..RunOptions::new(opts.policy, opts.budget)
    };
    let halted = match run(&net, &input, &net.initial_states(), &run_opts)? {
        RunOutcome::Halted(h) => h,
        other => {
            return Err(CliError::Invalid(format!(
                "aggregation did not finish ({})",
                other.kind()
            )))
        }
    };
    let side = 2 * r + 1;
    let mut cells = Vec::with_capacity((side * side) as usize);
    let mut visited = 0u64;
    let mut inradius = f64::INFINITY;
    let mut outradius = 0f64;
    for y in (-r..=r).rev() {
        for x in -r..=r {
            let v = ((r - y) * side + (x + r)) as usize;
            let dist = ((x * x + y * y) as f64).sqrt();
            let processed = halted.odometer.0[net.alphabet().range(v).start];
            if x.abs().max(y.abs()) == r {
                if processed > 0 {
                    return Err(CliError::Invalid(format!(
                        "a chip reached the boundary at ({x}, {y}); rerun with a radius larger than {radius}"
                    )));
                }
                inradius = inradius.min(dist);
                cells.push(Cell::Unvisited);
                continue;
            }
            let cell = match (&halted.states[v], processed) {
                (State::Int(-1), _) => Cell::Unvisited,
                (_, 1) => Cell::Absorbed,
                (State::Int(s), _) => Cell::Rotor(*s as u8),
                _ => Cell::Unvisited,
            };
            if cell == Cell::Unvisited {
                inradius = inradius.min(dist);
            } else {
                visited += 1;
                outradius = outradius.max(dist);
            }
            cells.push(cell);
        }
    }
    Ok(Aggregate {
        radius,
        order: opts.order,
        chips: opts.chips,
        visited,
        inradius,
        outradius,
        steps: halted.steps,
        cells,
    })
}
