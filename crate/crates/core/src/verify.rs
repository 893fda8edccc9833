//! Sampling checkers for the abelian axiom and its consequences.
//!
//! A reported failure is a proof that the processor is not abelian (it can be
//! replayed). A clean report is evidence only: words are capped at
//! `max_len` letters and states at `state_cap` samples per processor.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{collapse_subnetwork, Configuration};
use crate::engine::{run_from, Policy, RunOptions, RunOutcome};
use crate::error::Error;
use crate::network::{LetterId, Network};
use crate::processor::{run_word, Processor, Tally};
use crate::state::State;
use crate::Result;

pub const DEFAULT_MAX_LEN: usize = 12;
pub const DEFAULT_STATE_CAP: usize = 64;
/// Per-letter step budget for collapsed interiors.
pub const DEFAULT_INTERIOR_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub trials: usize,
    pub max_len: usize,
    pub state_cap: usize,
    pub seed: u64,
}

impl CheckOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        CheckOptions {
            trials,
            max_len: DEFAULT_MAX_LEN,
            state_cap: DEFAULT_STATE_CAP,
            seed,
        }
    }
}

/// How two runs of the same processor differed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Divergence {
    State { left: State, right: State },
    Output { edge: usize, symbol: usize, left: u64, right: u64 },
    /// One of the words could not be processed.
    Error(String),
}

/// Equal-content words `word` and `permuted` that disagree from `state`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianFailure {
    pub state: State,
    pub word: Vec<usize>,
    pub permuted: Vec<usize>,
    pub divergence: Divergence,
}

impl AbelianFailure {
    /// Reruns both words; returns the divergence found now.
    pub fn replay(&self, p: &dyn Processor) -> Option<Divergence> {
        compare_words(p, &self.state, &self.word, &self.permuted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianCheckReport {
    pub family: String,
    /// Random trials run, not counting the exhaustive pair pass.
    pub trials: usize,
    pub pairs_checked: usize,
    pub states_sampled: usize,
    pub max_len: usize,
    pub failures: Vec<AbelianFailure>,
}

impl AbelianCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn first_difference(a: &Tally, b: &Tally) -> Option<Divergence> {
    let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter().find_map(|&(edge, symbol)| {
        let left = a.get(&(edge, symbol)).copied().unwrap_or(0);
        let right = b.get(&(edge, symbol)).copied().unwrap_or(0);
        (left != right).then_some(Divergence::Output {
            edge,
            symbol,
            left,
            right,
        })
    })
}

fn compare_words(p: &dyn Processor, q: &State, w: &[usize], w2: &[usize]) -> Option<Divergence> {
    let left = run_word(p, q, w);
    let right = run_word(p, q, w2);
    match (left, right) {
        (Ok((s1, t1)), Ok((s2, t2))) => {
            if s1 != s2 {
                Some(Divergence::State {
                    left: s1,
                    right: s2,
                })
            } else {
                first_difference(&t1, &t2)
            }
        }
        (Err(e), Ok(_)) | (Ok(_), Err(e)) => Some(Divergence::Error(e.to_string())),
        (Err(_), Err(_)) => None,
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn random_word(rng: &mut ChaCha8Rng, alphabet: usize, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.gen_range(0..alphabet)).collect()
}

/// The start state, states drawn by the processor's own sampler, and states
/// reached from the start by short random words; deduplicated, at most `cap`.
pub fn sample_states(p: &dyn Processor, cap: usize, max_len: usize, seed: u64) -> Vec<State> {
    let start = p.initial_state();
    let mut seen = BTreeSet::new();
    let mut pool = Vec::new();
    seen.insert(start.clone());
    pool.push(start.clone());
    let mut rng = trial_rng(seed, u64::MAX);
    let k = p.alphabet_size();
    for i in 0..cap.saturating_mul(2) {
        if pool.len() >= cap {
            break;
        }
        let q = if i % 2 == 0 || k == 0 {
            p.sample_state(&mut rng)
        } else {
            let len = rng.gen_range(1..=max_len.max(1) * 2);
            let w = random_word(&mut rng, k, len);
            match run_word(p, &start, &w) {
                Ok((q, _)) => q,
                Err(_) => continue,
            }
        };
        if p.accepts_state(&q) && seen.insert(q.clone()) {
            pool.push(q);
        }
    }
    pool
}

/// Compares each random word with a random permutation of itself, after an
/// exhaustive pass over every swapped pair `ab`/`ba` from every sampled state.
pub fn check_abelian(p: &dyn Processor, trials: usize, max_len: usize, seed: u64) -> AbelianCheckReport {
    check_abelian_with(
        p,
        &CheckOptions {
            trials,
            max_len,
            state_cap: DEFAULT_STATE_CAP,
            seed,
        },
    )
}

pub fn check_abelian_with(p: &dyn Processor, opts: &CheckOptions) -> AbelianCheckReport {
    let k = p.alphabet_size();
    let mut report = AbelianCheckReport {
        family: p.family().to_string(),
        trials: 0,
        pairs_checked: 0,
        states_sampled: 0,
        max_len: opts.max_len,
        failures: Vec::new(),
    };
    if k == 0 {
        return report;
    }
    let states = sample_states(p, opts.state_cap, opts.max_len, opts.seed);
    report.states_sampled = states.len();

    for q in &states {
        for a in 0..k {
            for b in a + 1..k {
                report.pairs_checked += 1;
                if let Some(d) = compare_words(p, q, &[a, b], &[b, a]) {
                    report.failures.push(AbelianFailure {
                        state: q.clone(),
                        word: vec![a, b],
                        permuted: vec![b, a],
                        divergence: d,
                    });
                }
            }
        }
    }

    let max_len = opts.max_len.max(1);
    let found: Vec<Option<AbelianFailure>> = (0..opts.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(opts.seed, t);
            let q = &states[rng.gen_range(0..states.len())];
            let len = rng.gen_range(1..=max_len);
            let w = random_word(&mut rng, k, len);
            let mut w2 = w.clone();
            w2.shuffle(&mut rng);
            compare_words(p, q, &w, &w2).map(|d| AbelianFailure {
                state: q.clone(),
                word: w,
                permuted: w2,
                divergence: d,
            })
        })
        .collect();
    report.trials = opts.trials;
    report.failures.extend(found.into_iter().flatten());
    report
}

/// `w ⊆ w'` as multisets, yet some emission count of `w` exceeds that of `w'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneFailure {
    pub state: State,
    pub inner: Vec<usize>,
    pub outer: Vec<usize>,
    pub edge: usize,
    pub symbol: usize,
    pub inner_count: u64,
    pub outer_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub family: String,
    pub trials: usize,
    pub failures: Vec<MonotoneFailure>,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random nested pairs: `w'` is a random word and `w` a random sub-multiset
/// of it, each independently shuffled.
pub fn check_monotone(p: &dyn Processor, trials: usize, seed: u64) -> MonotoneReport {
    let k = p.alphabet_size();
    let mut report = MonotoneReport {
        family: p.family().to_string(),
        trials,
        failures: Vec::new(),
    };
    if k == 0 {
        return report;
    }
    let states = sample_states(p, DEFAULT_STATE_CAP, DEFAULT_MAX_LEN, seed);
    let found: Vec<Option<MonotoneFailure>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let q = &states[rng.gen_range(0..states.len())];
            let len = rng.gen_range(0..=DEFAULT_MAX_LEN);
            let mut outer = random_word(&mut rng, k, len);
            let mut inner: Vec<usize> = outer.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            outer.shuffle(&mut rng);
            inner.shuffle(&mut rng);
            let (Ok((_, small)), Ok((_, big))) = (run_word(p, q, &inner), run_word(p, q, &outer))
            else {
                return None;
            };
            small.iter().find_map(|(&(edge, symbol), &n)| {
                let m = big.get(&(edge, symbol)).copied().unwrap_or(0);
                (n > m).then(|| MonotoneFailure {
                    state: q.clone(),
                    inner: inner.clone(),
                    outer: outer.clone(),
                    edge,
                    symbol,
                    inner_count: n,
                    outer_count: m,
                })
            })
        })
        .collect();
    report.failures = found.into_iter().flatten().collect();
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalGlobalVerdict {
    Pass,
    /// Permuted input orders disagreed, or the collapsed processor failed
    /// the abelian check.
    Fail(String),
    /// An interior run did not finish within its budget.
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalGlobalReport {
    pub collapsed: Option<AbelianCheckReport>,
    pub orders_tried: usize,
    /// Letters delivered to each output letter, from the first order.
    pub delivered: Vec<u64>,
    pub verdict: LocalGlobalVerdict,
}

/// Feeds `inputs` (letters at interior vertices) to the network one letter
/// at a time, running to completion after each, in several shuffled orders.
/// Final states and the letters delivered to the output vertices must not
/// depend on the order, and the collapsed interior must pass
/// [`check_abelian`].
pub fn check_local_to_global(
    net: &Network,
    interior: &[usize],
    inputs: &[LetterId],
    seed: u64,
) -> Result<LocalGlobalReport> {
    check_local_to_global_with(net, interior, inputs, seed, 200, 8)
}

pub fn check_local_to_global_with(
    net: &Network,
    interior: &[usize],
    inputs: &[LetterId],
    seed: u64,
    trials: usize,
    orders: usize,
) -> Result<LocalGlobalReport> {
    if interior.is_empty() {
        return Ok(LocalGlobalReport {
            collapsed: None,
            orders_tried: 0,
            delivered: Vec::new(),
            verdict: LocalGlobalVerdict::Pass,
        });
    }
    let inside: BTreeSet<usize> = interior.iter().copied().collect();
    for &a in inputs {
        net.letter_index(a)?;
        if !inside.contains(&a.vertex) {
            return Err(Error::NotInterior(a.to_string()));
        }
    }
    let collapsed = collapse_subnetwork(net, interior, DEFAULT_INTERIOR_BUDGET)?;
    let report = check_abelian(&collapsed, trials, DEFAULT_MAX_LEN, seed);
    let inconclusive = report.failures.iter().find_map(|f| match &f.divergence {
        Divergence::Error(m) => Some(m.clone()),
        _ => None,
    });
    if let Some(m) = inconclusive {
        return Ok(LocalGlobalReport {
            collapsed: Some(report),
            orders_tried: 0,
            delivered: Vec::new(),
            verdict: LocalGlobalVerdict::Inconclusive(m),
        });
    }

    let alphabet = net.alphabet();
    let outputs: Vec<usize> = (0..alphabet.len())
        .filter(|&a| !inside.contains(&alphabet.owner(a)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first: Option<(Vec<State>, Vec<u64>)> = None;
    let mut verdict = if report.passed() {
        LocalGlobalVerdict::Pass
    } else {
        LocalGlobalVerdict::Fail(format!(
            "collapsed interior failed the abelian check ({} failures)",
            report.failures.len()
        ))
    };
    let mut tried = 0;
    for i in 0..orders.max(1) {
        let mut order = inputs.to_vec();
        if i > 0 {
            order.shuffle(&mut rng);
        }
        let mut cfg = Configuration::initial(net);
        let mut delivered = vec![0u64; outputs.len()];
        for &a in &order {
            cfg.counts[net.letter_index(a)?] += 1;
            let opts = RunOptions::new(Policy::Fifo, DEFAULT_INTERIOR_BUDGET);
            match run_from(net, cfg.clone(), &opts)? {
                RunOutcome::Halted(h) => {
                    for (slot, &b) in delivered.iter_mut().zip(&outputs) {
                        *slot += h.odometer.0[b];
                    }
                    cfg = Configuration {
                        counts: h.counts,
                        states: h.states,
                    };
                }
                other => {
                    return Ok(LocalGlobalReport {
                        collapsed: Some(report),
                        orders_tried: tried,
                        delivered,
                        verdict: LocalGlobalVerdict::Inconclusive(format!(
                            "interior run after input {a} ended {}",
                            other.kind()
                        )),
                    });
                }
            }
        }
        tried += 1;
        match &first {
            None => first = Some((cfg.states, delivered)),
            Some((states, d)) => {
                if *states != cfg.states && verdict == LocalGlobalVerdict::Pass {
                    verdict = LocalGlobalVerdict::Fail(format!("final states differ for order {order:?}"));
                } else if *d != delivered && verdict == LocalGlobalVerdict::Pass {
                    verdict = LocalGlobalVerdict::Fail(format!(
                        "deliveries differ: {d:?} vs {delivered:?}"
                    ));
                }
            }
        }
    }
    Ok(LocalGlobalReport {
        collapsed: Some(report),
        orders_tried: tried,
        delivered: first.map(|f| f.1).unwrap_or_default(),
        verdict,
    })
}
