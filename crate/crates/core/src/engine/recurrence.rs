//! Exact configuration-recurrence detection for legal executions.
//!
//! A configuration hash is maintained incrementally (XOR of per-letter and
//! per-vertex terms). Configurations are recorded only while the pending
//! letter total sits at its running minimum; a new strict minimum clears the
//! record and takes a fresh snapshot. A hash hit is confirmed by replaying
//! the logged word from that snapshot, so a reported recurrence is exact.

use std::collections::HashMap;

use crate::dynamics::{apply_in_place, Configuration};
use crate::network::Network;
use crate::state::State;
use crate::Result;

/// Above this many logged letters the detector switches itself off.
const MAX_LOG: usize = 1 << 24;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn letter_term(letter: usize, count: i64) -> u64 {
    splitmix(splitmix(letter as u64 ^ 0x6c65_7474_6572) ^ count as u64)
}

pub(crate) fn state_term(vertex: usize, state: &State) -> u64 {
    splitmix(splitmix(vertex as u64 ^ 0x0073_7461_7465) ^ state.digest())
}

pub(crate) fn full_hash(counts: &[i64], states: &[State]) -> u64 {
    let mut h = 0;
    for (a, &c) in counts.iter().enumerate() {
        h ^= letter_term(a, c);
    }
    for (v, s) in states.iter().enumerate() {
        h ^= state_term(v, s);
    }
    h
}

/// A configuration that recurs after executing `word` legally from it.
pub(crate) struct Recurrence {
    pub config: Configuration,
    pub word: Vec<usize>,
    pub first_step: u64,
}

pub(crate) struct Detector {
    pub hash: u64,
    min_total: i64,
    seen: HashMap<u64, u64>,
    base: Configuration,
    base_step: u64,
    log: Vec<usize>,
    enabled: bool,
}

impl Detector {
    pub fn new(cfg: &Configuration) -> Self {
        let hash = full_hash(&cfg.counts, &cfg.states);
        let mut seen = HashMap::new();
        seen.insert(hash, 0);
        Detector {
            hash,
            min_total: cfg.pending(),
            seen,
            base: cfg.clone(),
            base_step: 0,
            log: Vec::new(),
            enabled: true,
        }
    }

    pub fn count_changed(&mut self, letter: usize, before: i64, after: i64) {
        self.hash ^= letter_term(letter, before) ^ letter_term(letter, after);
    }

    pub fn state_changed(&mut self, vertex: usize, before: &State, after: &State) {
        self.hash ^= state_term(vertex, before) ^ state_term(vertex, after);
    }

    /// Called after step `step` (1-based) executed `letter` and produced
    /// `current` with `total` pending letters.
    pub fn observe(
        &mut self,
        net: &Network,
        step: u64,
        letter: usize,
        current: &Configuration,
        total: i64,
    ) -> Result<Option<Recurrence>> {
        if !self.enabled {
            return Ok(None);
        }
        self.log.push(letter);
        if self.log.len() > MAX_LOG {
            self.enabled = false;
            self.log = Vec::new();
            self.seen = HashMap::new();
            return Ok(None);
        }
        if total < self.min_total {
            self.min_total = total;
            self.seen.clear();
            self.seen.insert(self.hash, step);
            self.base = current.clone();
            self.base_step = step;
            self.log.clear();
            return Ok(None);
        }
        if total > self.min_total {
            return Ok(None);
        }
        if let Some(&earlier) = self.seen.get(&self.hash) {
            let offset = (earlier - self.base_step) as usize;
            let mut then = self.base.clone();
            for &a in &self.log[..offset] {
                apply_in_place(net, &mut then, a)?;
            }
            if then == *current {
                return Ok(Some(Recurrence {
                    config: then,
                    word: self.log[offset..].to_vec(),
                    first_step: earlier,
                }));
            }
        }
        self.seen.insert(self.hash, step);
        Ok(None)
    }
}
