//! Drives legal executions to completion.
//!
//! [`run`] processes legal moves in the order chosen by a [`Policy`] until the
//! configuration is complete (halted), an exact configuration recurrence
//! proves that an infinite legal execution exists (non-halting), or the step
//! budget runs out (unknown). For an abelian network the halted odometer and
//! final states do not depend on the policy; [`run_all_schedulers`] and
//! [`run_parallel`] check exactly that.

mod parallel;
mod recurrence;
mod scheduler;

use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

pub use parallel::run_parallel;
pub use scheduler::Policy;

use crate::dynamics::{apply_in_place, word_counts, Configuration};
use crate::error::Error;
use crate::network::{LetterId, Network};
use crate::state::State;
use crate::Result;

/// Number of times each letter was processed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Odometer(pub Vec<u64>);

impl Odometer {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn get(&self, net: &Network, letter: LetterId) -> Result<u64> {
        Ok(self.0[net.letter_index(letter)?])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le(&self, other: &[u64]) -> bool {
        self.0.len() == other.len() && self.0.iter().zip(other).all(|(a, b)| a <= b)
    }
}

/// 64-bit FNV-1a over the little-endian bytes of every count.
pub fn counts_digest(counts: &[i64]) -> u64 {
    let mut h = FnvHasher::default();
    for c in counts {
        h.write(&c.to_le_bytes());
    }
    h.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TraceMode {
    #[default]
    Off,
    /// Step index, letter and a digest of the post-step counts.
    Digest,
    /// As `Digest`, plus the full post-step counts vector.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub letter: LetterId,
    pub digest: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<i64>>,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub policy: Policy,
    /// Maximum number of letters processed.
    pub budget: u64,
    pub trace: TraceMode,
    /// Keep the executed word in the outcome.
    pub record_word: bool,
    pub detect_recurrence: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            policy: Policy::Fifo,
            budget: 1_000_000,
            trace: TraceMode::Off,
            record_word: false,
            detect_recurrence: true,
        }
    }
}

impl RunOptions {
    pub fn new(policy: Policy, budget: u64) -> Self {
        RunOptions {
            policy,
            budget,
            ..Default::default()
        }
    }

    pub fn recording(mut self) -> Self {
        self.record_word = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Halted {
    pub odometer: Odometer,
    pub states: Vec<State>,
    /// Final letter counts; all zero for a legal run from a nonnegative input.
    pub counts: Vec<i64>,
    pub steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<Vec<LetterId>>,
}

/// Executing `word` legally from `config` returns to `config` exactly, so an
/// infinite legal execution exists and the network does not halt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonHaltingCertificate {
    pub config: Configuration,
    pub word: Vec<LetterId>,
    /// Step at which `config` was first reached.
    pub first_step: u64,
    /// Step at which it was reached again.
    pub repeat_step: u64,
}

impl NonHaltingCertificate {
    /// Replays the word checking every move is legal; true iff it ends in
    /// exactly the starting configuration.
    pub fn replay(&self, net: &Network) -> Result<bool> {
        if self.word.is_empty() {
            return Ok(false);
        }
        let mut cfg = self.config.clone();
        for &a in &self.word {
            if !cfg.is_legal(net, a)? {
                return Ok(false);
            }
            let index = net.letter_index(a)?;
            apply_in_place(net, &mut cfg, index)?;
        }
        Ok(cfg == self.config)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exhausted {
    pub odometer: Odometer,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunOutcome {
    Halted(Halted),
    NonHalting(NonHaltingCertificate),
    BudgetExhausted(Exhausted),
}

impl RunOutcome {
    pub fn halted(&self) -> Option<&Halted> {
        match self {
            RunOutcome::Halted(h) => Some(h),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunOutcome::Halted(_) => "halted",
            RunOutcome::NonHalting(_) => "non-halting",
            RunOutcome::BudgetExhausted(_) => "budget-exhausted",
        }
    }
}

/// Builds the starting configuration `x.q` for a run, checking `x ≥ 0`.
pub fn start_config(net: &Network, input: &[u64], states: &[State]) -> Result<Configuration> {
    let counts = input
        .iter()
        .enumerate()
        .map(|(a, &x)| i64::try_from(x).map_err(|_| Error::Overflow(a)))
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(net, counts, states.to_vec())
}

/// Runs legal moves from `input.states` under `opts.policy`.
pub fn run(net: &Network, input: &[u64], states: &[State], opts: &RunOptions) -> Result<RunOutcome> {
    let cfg = start_config(net, input, states)?;
    run_from(net, cfg, opts)
}

/// Like [`run`], also returning one record per executed step (empty when
/// `opts.trace` is off).
pub fn run_traced(
    net: &Network,
    input: &[u64],
    states: &[State],
    opts: &RunOptions,
) -> Result<(RunOutcome, Vec<TraceRecord>)> {
    let cfg = start_config(net, input, states)?;
    drive(net, cfg, opts)
}

/// Like [`run`] but starting from an explicit configuration whose counts
/// must be nonnegative.
pub fn run_from(net: &Network, cfg: Configuration, opts: &RunOptions) -> Result<RunOutcome> {
    drive(net, cfg, opts).map(|(outcome, _)| outcome)
}

fn drive(
    net: &Network,
    mut cfg: Configuration,
    opts: &RunOptions,
) -> Result<(RunOutcome, Vec<TraceRecord>)> {
    if let Some(a) = cfg.counts.iter().position(|&c| c < 0) {
        return Err(Error::NegativeInput(a));
    }
    let alphabet = net.alphabet();
    let mut sched = scheduler::make(opts.policy, alphabet, &cfg.counts);
    let mut detector = opts
        .detect_recurrence
        .then(|| recurrence::Detector::new(&cfg));
    let mut odometer = vec![0u64; alphabet.len()];
    let mut total: i64 = cfg.pending();
    let mut steps = 0u64;
    let mut word = opts.record_word.then(Vec::new);
    let mut trace = Vec::new();

    loop {
        let Some(a) = sched.next(&cfg.counts) else {
            let halted = Halted {
                odometer: Odometer(odometer),
                states: cfg.states,
                counts: cfg.counts,
                steps,
                word: word.map(|w: Vec<usize>| w.into_iter().map(|a| alphabet.letter(a)).collect()),
            };
            return Ok((RunOutcome::Halted(halted), trace));
        };
        if steps >= opts.budget {
            let exhausted = Exhausted {
                odometer: Odometer(odometer),
                steps,
            };
            return Ok((RunOutcome::BudgetExhausted(exhausted), trace));
        }
        debug_assert!(cfg.counts[a] >= 1, "scheduler picked an illegal move");

        let v = alphabet.owner(a);
        let t = net.fire(a, &cfg.states[v])?;
        let before = cfg.counts[a];
        cfg.counts[a] -= 1;
        total -= 1;
        sched.consumed(a, cfg.counts[a]);
        if let Some(d) = detector.as_mut() {
            d.count_changed(a, before, cfg.counts[a]);
        }
        let counts = &mut cfg.counts;
        let det = &mut detector;
        let sch = &mut sched;
        let tot = &mut total;
        net.deliver(v, &t.emission, |b, k| {
            let k_signed = i64::try_from(k).map_err(|_| Error::Overflow(b))?;
            let old = counts[b];
            counts[b] = old.checked_add(k_signed).ok_or(Error::Overflow(b))?;
            *tot = tot.checked_add(k_signed).ok_or(Error::Overflow(b))?;
            sch.received(b, k, counts[b]);
            if let Some(d) = det.as_mut() {
                d.count_changed(b, old, counts[b]);
            }
            Ok(())
        })?;
        if let Some(d) = detector.as_mut() {
            d.state_changed(v, &cfg.states[v], &t.state);
        }
        cfg.states[v] = t.state;
        odometer[a] += 1;
        steps += 1;
        if let Some(w) = word.as_mut() {
            w.push(a);
        }
        if opts.trace != TraceMode::Off {
            trace.push(TraceRecord {
                step: steps - 1,
                letter: alphabet.letter(a),
                digest: counts_digest(&cfg.counts),
                counts: (opts.trace == TraceMode::Full).then(|| cfg.counts.clone()),
            });
        }
        if let Some(d) = detector.as_mut() {
            if let Some(rec) = d.observe(net, steps, a, &cfg, total)? {
                let cert = NonHaltingCertificate {
                    config: rec.config,
                    word: rec.word.into_iter().map(|a| alphabet.letter(a)).collect(),
                    first_step: rec.first_step,
                    repeat_step: steps,
                };
                return Ok((RunOutcome::NonHalting(cert), trace));
            }
        }
    }
}

/// What each policy produced, and whether they agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchedulerComparison {
    pub outcomes: Vec<(Policy, RunOutcome)>,
    pub agree: bool,
    pub disagreement: Option<Disagreement>,
}

/// Two policies that produced different halting status, odometer or final
/// states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Disagreement {
    pub first: Policy,
    pub second: Policy,
    pub reason: String,
}

fn compare(a: &RunOutcome, b: &RunOutcome) -> Option<String> {
    match (a.halted(), b.halted()) {
        (Some(x), Some(y)) => {
            if x.odometer != y.odometer {
                Some(format!(
                    "odometers differ: {:?} vs {:?}",
                    x.odometer.0, y.odometer.0
                ))
            } else if x.states != y.states {
                Some("final states differ".into())
            } else {
                None
            }
        }
        (None, None) => None,
        _ => Some(format!("halting status differs: {} vs {}", a.kind(), b.kind())),
    }
}

/// Runs every [`Policy`] (the random one with `Policy::DEFAULT_SEED`).
pub fn run_all_schedulers(
    net: &Network,
    input: &[u64],
    states: &[State],
    budget: u64,
) -> Result<SchedulerComparison> {
    compare_policies(net, input, states, budget, &Policy::all(Policy::DEFAULT_SEED))
}

/// Runs each policy and reports the first disagreement against the first
/// policy. Runs that do not halt agree with each other whether they ended in
/// a certificate or in budget exhaustion.
pub fn compare_policies(
    net: &Network,
    input: &[u64],
    states: &[State],
    budget: u64,
    policies: &[Policy],
) -> Result<SchedulerComparison> {
    let mut outcomes = Vec::with_capacity(policies.len());
    for &p in policies {
        outcomes.push((p, run(net, input, states, &RunOptions::new(p, budget))?));
    }
    let disagreement = outcomes.iter().skip(1).find_map(|(p, o)| {
        compare(&outcomes[0].1, o).map(|reason| Disagreement {
            first: outcomes[0].0,
            second: *p,
            reason,
        })
    });
    Ok(SchedulerComparison {
        agree: disagreement.is_none(),
        outcomes,
        disagreement,
    })
}

/// Result of comparing a complete execution against the legal run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeastActionVerdict {
    pub odometer: Vec<u64>,
    pub word_counts: Vec<u64>,
    /// `|w'| − odometer`, coordinatewise.
    pub margin: Vec<i64>,
    /// Length of the legal run (`r`).
    pub run_length: u64,
    /// Length of the complete word (`s`).
    pub word_length: u64,
    pub holds: bool,
}

/// Checks `odometer ≤ |w'|` and `r ≤ s` for a complete (not necessarily
/// legal) execution `w'` of `input.states`.
pub fn check_least_action(
    net: &Network,
    input: &[u64],
    states: &[State],
    complete: &[LetterId],
    budget: u64,
) -> Result<LeastActionVerdict> {
    let cfg = start_config(net, input, states)?;
    let end = crate::dynamics::apply_word(net, &cfg, complete)?;
    if let Some((letter, &count)) = end.counts.iter().enumerate().find(|(_, &c)| c > 0) {
        return Err(Error::NotComplete { letter, count });
    }
    let outcome = run_from(net, cfg, &RunOptions::new(Policy::Fifo, budget))?;
    let halted = outcome
        .halted()
        .ok_or_else(|| Error::NoHaltingRun(outcome.kind().to_string()))?;
    let word_counts = word_counts(net, complete)?;
    let margin: Vec<i64> = word_counts
        .iter()
        .zip(&halted.odometer.0)
        .map(|(&w, &o)| w as i64 - o as i64)
        .collect();
    let holds = margin.iter().all(|&m| m >= 0) && halted.steps <= complete.len() as u64;
    Ok(LeastActionVerdict {
        odometer: halted.odometer.0.clone(),
        word_counts,
        margin,
        run_length: halted.steps,
        word_length: complete.len() as u64,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Topology;
    use crate::processors::ProcessorSpec;

    fn build(t: Topology, specs: &[ProcessorSpec]) -> Network {
        let procs = specs
            .iter()
            .enumerate()
            .map(|(v, s)| s.build(&t, v).unwrap())
            .collect();
        Network::new(t, procs).unwrap()
    }

    fn path_to_sink() -> Network {
        let mut t = Topology::with_vertices(3);
        t.connect(0, 1);
        t.connect(1, 2);
        build(
            t,
            &[ProcessorSpec::toppling(1), ProcessorSpec::toppling(1), ProcessorSpec::sink()],
        )
    }

    fn two_cycle() -> Network {
        let mut t = Topology::with_vertices(2);
        t.connect(0, 1);
        t.connect(1, 0);
        build(t, &[ProcessorSpec::toppling(1), ProcessorSpec::toppling(1)])
    }

    #[test]
    fn zero_input_halts_immediately() {
        let net = path_to_sink();
        let out = run(&net, &[0, 0, 0], &net.initial_states(), &RunOptions::new(Policy::Fifo, 0)).unwrap();
        let h = out.halted().unwrap();
        assert_eq!(h.odometer.0, vec![0, 0, 0]);
        assert_eq!(h.states, net.initial_states());
        assert_eq!(h.steps, 0);
    }

    #[test]
    fn path_with_sink_absorbs_the_chip() {
        let net = path_to_sink();
        let out = run(&net, &[1, 0, 0], &net.initial_states(), &RunOptions::default()).unwrap();
        let h = out.halted().unwrap();
        assert_eq!(h.odometer.0, vec![1, 1, 1]);
        assert_eq!(h.counts, vec![0, 0, 0]);
        assert_eq!(h.steps, 3);
    }

    #[test]
    fn two_cycle_yields_replayable_certificate() {
        let net = two_cycle();
        let out = run(&net, &[1, 0], &net.initial_states(), &RunOptions::new(Policy::Fifo, 10)).unwrap();
        let RunOutcome::NonHalting(cert) = out else {
            panic!("expected a certificate, got {}", out.kind());
        };
        assert_eq!(cert.repeat_step, 2);
        assert_eq!(cert.config.counts, vec![1, 0]);
        assert_eq!(cert.word.len(), 2);
        assert!(cert.replay(&net).unwrap());
    }

    #[test]
    fn budget_zero_with_input_is_exhausted() {
        let net = path_to_sink();
        let out = run(&net, &[1, 0, 0], &net.initial_states(), &RunOptions::new(Policy::Fifo, 0)).unwrap();
        assert_eq!(out.kind(), "budget-exhausted");
    }

    #[test]
    fn trace_records_every_step() {
        let net = path_to_sink();
        let opts = RunOptions {
            trace: TraceMode::Full,
            ..RunOptions::default()
        };
        let (out, trace) = run_traced(&net, &[1, 0, 0], &net.initial_states(), &opts).unwrap();
        assert_eq!(out.kind(), "halted");
        assert_eq!(trace.len(), 3);
        assert_eq!(trace[0].counts.as_deref(), Some(&[0, 1, 0][..]));
        assert_eq!(trace[2].digest, counts_digest(&[0, 0, 0]));
    }

    #[test]
    fn mutant_network_disagrees_across_policies() {
        let mut t = Topology::with_vertices(2);
        t.connect(0, 1);
        let net = build(t, &[ProcessorSpec::Mutant, ProcessorSpec::counter()]);
        let cmp = run_all_schedulers(&net, &[1, 1, 0], &net.initial_states(), 100).unwrap();
        assert!(!cmp.agree);
        assert!(cmp.disagreement.is_some());
    }

    #[test]
    fn least_action_margins() {
        let net = path_to_sink();
        let l = |v| LetterId::new(v, 0);
        let q = net.initial_states();
        let exact = check_least_action(&net, &[1, 0, 0], &q, &[l(0), l(1), l(2)], 100).unwrap();
        assert!(exact.holds);
        assert_eq!(exact.margin, vec![0, 0, 0]);
        let padded =
            check_least_action(&net, &[1, 0, 0], &q, &[l(0), l(1), l(2), l(2), l(0), l(1), l(2)], 100)
                .unwrap();
        assert!(padded.holds);
        assert!(padded.margin.iter().any(|&m| m > 0));
        let empty = check_least_action(&net, &[0, 0, 0], &q, &[], 100).unwrap();
        assert!(empty.holds);
        assert!(matches!(
            check_least_action(&net, &[1, 0, 0], &q, &[l(0)], 100),
            Err(Error::NotComplete { .. })
        ));
    }
}
