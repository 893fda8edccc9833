#![allow(dead_code)]

use abelnet::network::{LetterId, Network, Topology};
use abelnet::processors::{
    BootstrapSpec, MobileAgentSpec, OilWaterSpec, ProcessorSpec, RotorSpec, SandpileSpec, SinkCounterSpec,
    UnaryTapeSpec,
};
use abelnet::engine::start_config;
use abelnet::optimize::toppling::TopplingSystem;
use abelnet::optimize::{BoxPoints, BoxTable, MonotoneProgram};
use abelnet::{step, Behavior, State};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A network with an input and a starting product state.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: &'static str,
    pub net: Network,
    pub specs: Vec<ProcessorSpec>,
    pub input: Vec<u64>,
    pub states: Vec<State>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn build(topo: Topology, specs: Vec<ProcessorSpec>) -> (Network, Vec<ProcessorSpec>) {
    let procs = specs
        .iter()
        .enumerate()
        .map(|(v, s)| s.build(&topo, v).unwrap_or_else(|e| panic!("vertex {v}: {e}")))
        .collect();
    (Network::new(topo, procs).unwrap(), specs)
}

fn edge_names(topo: &Topology, v: usize) -> Vec<String> {
    topo.out_edges(v).iter().map(|&e| topo.edge(e).name.clone()).collect()
}

/// Random out-edges for vertices `0..active`; each also gets an edge to a
/// silent vertex with probability `leak`, which biases towards halting.
fn random_edges(rng: &mut ChaCha8Rng, topo: &mut Topology, active: usize, leak: f64, min: usize) {
    let n = topo.vertex_count();
    for v in 0..active {
        let d = rng.gen_range(min..=3);
        for _ in 0..d {
            let u = rng.gen_range(0..n);
            topo.connect(v, u);
        }
        if rng.gen_bool(leak) {
            let u = rng.gen_range(active..n);
            topo.connect(v, u);
        }
    }
}

fn random_input(rng: &mut ChaCha8Rng, net: &Network, letters: std::ops::Range<usize>) -> Vec<u64> {
    let mut x = vec![0u64; net.alphabet().len()];
    if letters.is_empty() {
        return x;
    }
    let total = rng.gen_range(0..=20);
    for _ in 0..total {
        x[rng.gen_range(letters.clone())] += 1;
    }
    x
}

fn random_states(rng: &mut ChaCha8Rng, net: &Network) -> Vec<State> {
    if rng.gen_bool(0.5) {
        return net.initial_states();
    }
    net.processors().iter().map(|p| p.sample_state(rng)).collect()
}

fn unary_spec(rng: &mut ChaCha8Rng, topo: &Topology, v: usize) -> ProcessorSpec {
    let names = edge_names(topo, v);
    let d = names.len();
    match rng.gen_range(0..6) {
        0 if d > 0 => ProcessorSpec::sandpile(),
        1 => ProcessorSpec::Sandpile(SandpileSpec {
            threshold: Some(rng.gen_range(1..=4)),
            allow_negative: rng.gen_bool(0.5),
        }),
        2 if d > 0 => {
            let mut order = names.clone();
            order.shuffle(rng);
            ProcessorSpec::Rotor(RotorSpec {
                order: Some(order),
                absorbing: rng.gen_bool(0.3),
            })
        }
        3 => ProcessorSpec::Bootstrap(BootstrapSpec {
            threshold: rng.gen_range(1..=3),
        }),
        4 if d > 0 => {
            let cell = |rng: &mut ChaCha8Rng| -> Vec<String> {
                (0..rng.gen_range(0..=2))
                    .map(|_| names[rng.gen_range(0..d)].clone())
                    .collect()
            };
            let preperiod = (0..rng.gen_range(0..=2)).map(|_| cell(rng)).collect();
            let period = (0..rng.gen_range(1..=4)).map(|_| cell(rng)).collect();
            ProcessorSpec::Tape(UnaryTapeSpec { preperiod, period })
        }
        _ => ProcessorSpec::toppling(rng.gen_range(1..=3)),
    }
}

/// Sandpiles, toppling vertices, rotors, bootstrap vertices and instruction
/// tapes, with one or two sinks or counters.
pub fn unary_instance(rng: &mut ChaCha8Rng) -> Instance {
    let active = rng.gen_range(1..=6);
    let silent = rng.gen_range(1..=2);
    let mut topo = Topology::with_vertices(active + silent);
    random_edges(rng, &mut topo, active, 0.7, 1);
    let mut specs: Vec<ProcessorSpec> = (0..active).map(|v| unary_spec(rng, &topo, v)).collect();
    for _ in 0..silent {
        specs.push(if rng.gen_bool(0.5) {
            ProcessorSpec::sink()
        } else {
            ProcessorSpec::counter()
        });
    }
    let (net, specs) = build(topo, specs);
    let input = random_input(rng, &net, 0..net.alphabet().len());
    let states = random_states(rng, &net);
    Instance {
        label: "unary",
        net,
        specs,
        input,
        states,
    }
}

/// Oil and water vertices feeding each other and two-letter sinks.
pub fn oil_water_instance(rng: &mut ChaCha8Rng) -> Instance {
    let active = rng.gen_range(1..=5);
    let silent = rng.gen_range(1..=2);
    let mut topo = Topology::with_vertices(active + silent);
    random_edges(rng, &mut topo, active, 0.8, 2);
    let specs: Vec<ProcessorSpec> = (0..active)
        .map(|v| {
            let mut names = edge_names(&topo, v);
            names.shuffle(rng);
            let split = rng.gen_range(1..names.len());
            let (oil, water) = names.split_at(split);
            ProcessorSpec::OilWater(OilWaterSpec {
                oil: oil.to_vec(),
                water: water.to_vec(),
                r_oil: rng.gen_bool(0.5).then(|| rng.gen_range(1..=3)),
                r_water: rng.gen_bool(0.5).then(|| rng.gen_range(1..=3)),
            })
        })
        .chain((0..silent).map(|_| ProcessorSpec::Counter(SinkCounterSpec { alphabet: 2 })))
        .collect();
    let (net, specs) = build(topo, specs);
    let input = random_input(rng, &net, 0..net.alphabet().len());
    let states = random_states(rng, &net);
    Instance {
        label: "oil-water",
        net,
        specs,
        input,
        states,
    }
}

/// Abelian mobile agents (each agent type drives its own rotor) with sinks
/// accepting every agent type.
pub fn mobile_instance(rng: &mut ChaCha8Rng) -> Instance {
    let active = rng.gen_range(1..=5);
    let silent = rng.gen_range(1..=2);
    let agents = rng.gen_range(1..=2);
    let mut topo = Topology::with_vertices(active + silent);
    random_edges(rng, &mut topo, active, 0.8, 1);
    let specs: Vec<ProcessorSpec> = (0..active)
        .map(|v| {
            let neighbors: Vec<String> = topo
                .out_edges(v)
                .iter()
                .map(|&e| topo.vertex_name(topo.edge(e).dst).to_string())
                .collect();
            ProcessorSpec::Mobile(MobileAgentSpec::per_type_rotors(&neighbors, agents))
        })
        .chain((0..silent).map(|_| ProcessorSpec::Sink(SinkCounterSpec { alphabet: agents })))
        .collect();
    let (net, specs) = build(topo, specs);
    let input = random_input(rng, &net, 0..net.alphabet().len());
    let states = random_states(rng, &net);
    Instance {
        label: "mobile",
        net,
        specs,
        input,
        states,
    }
}

/// Cycles through the generators.
pub fn random_instance(rng: &mut ChaCha8Rng, k: usize) -> Instance {
    match k % 4 {
        0 | 1 => unary_instance(rng),
        2 => oil_water_instance(rng),
        _ => mobile_instance(rng),
    }
}

pub fn instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = rng(seed);
    (0..count).map(|k| random_instance(&mut rng, k)).collect()
}

/// `p_v`: the letters of `word` that live at vertex `v`, in order.
pub fn project(word: &[LetterId], v: usize) -> Vec<LetterId> {
    word.iter().copied().filter(|a| a.vertex == v).collect()
}

pub fn random_word(rng: &mut ChaCha8Rng, net: &Network, len: usize) -> Vec<LetterId> {
    let k = net.alphabet().len();
    (0..len).map(|_| net.alphabet().letter(rng.gen_range(0..k))).collect()
}

pub fn path_with_sink() -> Network {
    let mut t = Topology::with_vertices(3);
    t.connect(0, 1);
    t.connect(1, 2);
    build(
        t,
        vec![ProcessorSpec::toppling(1), ProcessorSpec::toppling(1), ProcessorSpec::sink()],
    )
    .0
}

pub fn two_cycle() -> Network {
    let mut t = Topology::with_vertices(2);
    t.connect(0, 1);
    t.connect(1, 0);
    build(t, vec![ProcessorSpec::toppling(1), ProcessorSpec::toppling(1)]).0
}

/// One processor of every builtin family, keyed by a short label, on a star
/// with three out-edges (the mutant gets a single edge).
pub fn builtin_processors() -> Vec<(&'static str, Behavior)> {
    let mut t = Topology::with_vertices(4);
    for u in 1..4 {
        t.connect(0, u);
    }
    let names = edge_names(&t, 0);
    let vertices: Vec<String> = (1..4).map(|u| t.vertex_name(u).to_string()).collect();
    let specs = vec![
        ("sandpile", ProcessorSpec::sandpile()),
        (
            "toppling-negative",
            ProcessorSpec::Sandpile(SandpileSpec {
                threshold: Some(2),
                allow_negative: true,
            }),
        ),
        ("rotor", ProcessorSpec::rotor()),
        (
            "rotor-absorbing",
            ProcessorSpec::Rotor(RotorSpec {
                order: Some(vec![names[2].clone(), names[0].clone(), names[1].clone()]),
                absorbing: true,
            }),
        ),
        ("bootstrap", ProcessorSpec::Bootstrap(BootstrapSpec { threshold: 2 })),
        (
            "tape",
            ProcessorSpec::Tape(UnaryTapeSpec {
                preperiod: vec![vec![names[0].clone()]],
                period: vec![vec![], vec![names[1].clone(), names[2].clone()], vec![names[1].clone()]],
            }),
        ),
        (
            "oil-water",
            ProcessorSpec::OilWater(OilWaterSpec {
                oil: vec![names[0].clone()],
                water: vec![names[1].clone(), names[2].clone()],
                r_oil: Some(2),
                r_water: Some(3),
            }),
        ),
        ("mobile", ProcessorSpec::Mobile(MobileAgentSpec::per_type_rotors(&vertices, 2))),
        ("sink", ProcessorSpec::Sink(SinkCounterSpec { alphabet: 2 })),
        ("counter", ProcessorSpec::counter()),
    ];
    specs.into_iter().map(|(k, s)| (k, s.build(&t, 0).unwrap())).collect()
}

pub fn mutant() -> Behavior {
    let mut t = Topology::with_vertices(2);
    t.connect(0, 1);
    ProcessorSpec::Mutant.build(&t, 0).unwrap()
}

/// A complete execution of `input.states` that mixes legal moves with up to
/// `pads` illegal ones at random positions. `None` if no completion was
/// found within `budget` steps.
pub fn padded_complete_execution(
    rng: &mut ChaCha8Rng,
    inst: &Instance,
    pads: usize,
    budget: usize,
) -> Option<Vec<LetterId>> {
    let net = &inst.net;
    let mut cfg = start_config(net, &inst.input, &inst.states).unwrap();
    let mut word = Vec::new();
    let mut left = pads;
    for _ in 0..budget {
        let legal: Vec<usize> = (0..cfg.counts.len()).filter(|&a| cfg.counts[a] > 0).collect();
        if legal.is_empty() && left == 0 {
            return Some(word);
        }
        let a = if left > 0 && (legal.is_empty() || rng.gen_bool(0.2)) {
            left -= 1;
            rng.gen_range(0..cfg.counts.len())
        } else {
            *legal.choose(rng).unwrap()
        };
        let letter = net.alphabet().letter(a);
        cfg = step(net, &cfg, letter).unwrap();
        word.push(letter);
    }
    None
}

/// A random nondecreasing map on `{0..=bound}^k`, built point by point in
/// row-major order so each value dominates its lower neighbours.
pub fn random_monotone_table(rng: &mut ChaCha8Rng, bound: Vec<u64>, slack: u64) -> BoxTable {
    let k = bound.len();
    let points: Vec<Vec<u64>> = BoxPoints::new(&bound).collect();
    let mut values: Vec<Vec<u64>> = Vec::with_capacity(points.len());
    let strides: Vec<usize> = (0..k)
        .map(|i| bound[i + 1..].iter().map(|&b| b as usize + 1).product())
        .collect();
    for (idx, u) in points.iter().enumerate() {
        let mut v: Vec<u64> = (0..k).map(|_| rng.gen_range(0..=slack)).collect();
        for i in 0..k {
            if u[i] > 0 {
                let below = &values[idx - strides[i]];
                for j in 0..k {
                    v[j] = v[j].max(below[j]);
                }
            }
        }
        for x in v.iter_mut() {
            if rng.gen_bool(0.15) {
                *x += rng.gen_range(1..=2);
            }
        }
        values.push(v);
    }
    BoxTable::new(bound, values).unwrap()
}

/// The least feasible point of the box by exhaustive search: the meet of all
/// feasible points, which is itself feasible for a monotone map.
pub fn brute_force_least(prog: &MonotoneProgram, bound: &[u64]) -> Option<Vec<u64>> {
    let mut meet: Option<Vec<u64>> = None;
    for u in BoxPoints::new(bound) {
        if prog.is_feasible(&u) {
            meet = Some(match meet {
                None => u,
                Some(m) => m.iter().zip(&u).map(|(a, b)| *a.min(b)).collect(),
            });
        }
    }
    if let Some(m) = &meet {
        assert!(prog.is_feasible(m), "meet {m:?} of feasible points is infeasible");
    }
    meet
}

/// A toppling system on 2 to 4 vertices where every vertex can reach a
/// vertex that leaks chips out of the system.
pub fn random_toppling_system(rng: &mut ChaCha8Rng) -> TopplingSystem {
    loop {
        let n = rng.gen_range(2..=4);
        let mut d = vec![vec![0i64; n]; n];
        let mut leak = vec![0u64; n];
        for v in 0..n {
            for row in d.iter_mut() {
                if rng.gen_bool(0.4) {
                    row[v] = rng.gen_range(1..=2);
                }
            }
            if rng.gen_bool(0.4) {
                leak[v] = rng.gen_range(1..=2);
            }
        }
        let mut reaches = leak.iter().map(|&l| l > 0).collect::<Vec<_>>();
        for _ in 0..n {
            for v in 0..n {
                if (0..n).any(|u| d[u][v] > 0 && reaches[u]) {
                    reaches[v] = true;
                }
            }
        }
        if !reaches.iter().all(|&r| r) {
            continue;
        }
        let thresholds: Vec<u64> = (0..n)
            .map(|v| (0..n).map(|u| d[u][v] as u64).sum::<u64>() + leak[v])
            .collect();
        let laplacian = (0..n)
            .map(|u| {
                (0..n)
                    .map(|v| if u == v { thresholds[v] as i64 - d[u][v] } else { -d[u][v] })
                    .collect()
            })
            .collect();
        let input = (0..n).map(|_| rng.gen_range(0..=8)).collect();
        return TopplingSystem::from_input(laplacian, thresholds, input).unwrap();
    }
}
