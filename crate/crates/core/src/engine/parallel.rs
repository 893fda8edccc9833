//! Round-based concurrent execution.
//!
//! Each round snapshots the letter counts. Vertices are partitioned across
//! workers (a seeded shuffle decides which worker owns which vertex); every
//! worker processes all snapshot letters at its vertices, then the outboxes
//! are summed into the next round's counts. Letters received during a round
//! wait for the next one, so every move is legal, and the concatenation of a
//! round's moves in vertex order is a legal sequential execution.
//!
//! When the rounds do not halt (a recurrence is found or the budget runs
//! out) the outcome is recomputed with the sequential FIFO engine, so the
//! certificate and partial odometer reported are the canonical ones.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{run, start_config, Halted, Odometer, Policy, RunOptions, RunOutcome};
use crate::dynamics::Configuration;
use crate::error::Error;
use crate::network::Network;
use crate::state::State;
use crate::Result;

struct WorkerResult {
    /// (vertex, new state)
    states: Vec<(usize, State)>,
    /// Letters received, dense over the alphabet.
    outbox: Vec<u64>,
    /// (letter, times processed)
    processed: Vec<(usize, u64)>,
}

fn work(net: &Network, vertices: &[usize], cfg: &Configuration) -> Result<WorkerResult> {
    let alphabet = net.alphabet();
    let mut out = WorkerResult {
        states: Vec::new(),
        outbox: vec![0; alphabet.len()],
        processed: Vec::new(),
    };
    for &v in vertices {
        let mut q = cfg.states[v].clone();
        let mut touched = false;
        for a in alphabet.range(v) {
            let n = cfg.counts[a];
            if n <= 0 {
                continue;
            }
            touched = true;
            for _ in 0..n {
                let t = net.fire(a, &q)?;
                let outbox = &mut out.outbox;
                net.deliver(v, &t.emission, |b, k| {
                    outbox[b] = outbox[b].checked_add(k).ok_or(Error::Overflow(b))?;
                    Ok(())
                })?;
                q = t.state;
            }
            out.processed.push((a, n as u64));
        }
        if touched {
            out.states.push((v, q));
        }
    }
    Ok(out)
}

/// Runs with `workers` threads. The result is identical to the sequential
/// FIFO run with the same budget.
pub fn run_parallel(
    net: &Network,
    input: &[u64],
    states: &[State],
    workers: usize,
    seed: u64,
    budget: u64,
) -> Result<RunOutcome> {
    if workers == 0 {
        return Err(Error::NoWorkers);
    }
    let mut cfg = start_config(net, input, states)?;
    let alphabet = net.alphabet();
    let sequential = || run(net, input, states, &RunOptions::new(Policy::Fifo, budget));

    let mut order: Vec<usize> = (0..net.vertex_count()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); workers];
    for (i, v) in order.into_iter().enumerate() {
        parts[i % workers].push(v);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::NoHaltingRun(format!("cannot start worker pool: {e}")))?;

    let mut odometer = vec![0u64; alphabet.len()];
    let mut steps = 0u64;
    // Configurations seen at round boundaries while the pending total sits
    // at its running minimum.
    let mut min_total = cfg.pending();
    let mut seen: HashSet<Configuration> = HashSet::new();
    seen.insert(cfg.clone());

    loop {
        let round: u64 = cfg.counts.iter().filter(|&&c| c > 0).map(|&c| c as u64).sum();
        if round == 0 {
            return Ok(RunOutcome::Halted(Halted {
                odometer: Odometer(odometer),
                states: cfg.states,
                counts: cfg.counts,
                steps,
                word: None,
            }));
        }
        if steps + round > budget {
            return sequential();
        }

        let snapshot = &cfg;
        let results: Vec<Result<WorkerResult>> =
            pool.install(|| parts.par_iter().map(|p| work(net, p, snapshot)).collect());

        let mut next = cfg.clone();
        for r in results {
            let r = r?;
            for (v, q) in r.states {
                next.states[v] = q;
            }
            for (a, n) in r.processed {
                next.counts[a] -= n as i64;
                odometer[a] += n;
            }
            for (b, k) in r.outbox.into_iter().enumerate() {
                if k > 0 {
                    let k = i64::try_from(k).map_err(|_| Error::Overflow(b))?;
                    next.counts[b] = next.counts[b].checked_add(k).ok_or(Error::Overflow(b))?;
                }
            }
        }
        steps += round;
        cfg = next;

        let total = cfg.pending();
        if total < min_total {
            min_total = total;
            seen.clear();
            seen.insert(cfg.clone());
        } else if total == min_total && !seen.insert(cfg.clone()) {
            return sequential();
        }
    }
}
