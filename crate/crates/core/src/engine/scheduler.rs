use std::cmp::Reverse;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::network::Alphabet;

/// Order in which pending letters are processed.
///
/// `SeededRandom` draws uniformly among letters with positive count using
/// ChaCha8 (`rand_chacha` 0.3) seeded with `seed_from_u64` and
/// `gen_range` from `rand` 0.8, so a seed reproduces the same execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    /// Oldest letter instance first; the initial input is enqueued in
    /// alphabet order.
    Fifo,
    /// Newest letter instance first.
    Lifo,
    /// Cycles over vertices with pending letters; within a vertex the
    /// lowest symbol goes first.
    RoundRobin,
    /// Letter with the largest count, ties to the lowest alphabet index.
    GreedyMaxCount,
    SeededRandom(u64),
}

impl Policy {
    pub const DEFAULT_SEED: u64 = 0x5eed;

    pub fn all(seed: u64) -> [Policy; 5] {
        [
            Policy::Fifo,
            Policy::Lifo,
            Policy::RoundRobin,
            Policy::GreedyMaxCount,
            Policy::SeededRandom(seed),
        ]
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Fifo => f.write_str("fifo"),
            Policy::Lifo => f.write_str("lifo"),
            Policy::RoundRobin => f.write_str("rr"),
            Policy::GreedyMaxCount => f.write_str("greedy"),
            Policy::SeededRandom(s) => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(Policy::Fifo),
            "lifo" => Ok(Policy::Lifo),
            "rr" | "round-robin" => Ok(Policy::RoundRobin),
            "greedy" => Ok(Policy::GreedyMaxCount),
            "random" => Ok(Policy::SeededRandom(Policy::DEFAULT_SEED)),
            _ => match s.strip_prefix("random:") {
                Some(seed) => seed
                    .parse()
                    .map(Policy::SeededRandom)
                    .map_err(|_| format!("invalid seed in `{s}`")),
                None => Err(format!(
                    "unknown scheduler `{s}` (expected fifo, lifo, rr, greedy or random:SEED)"
                )),
            },
        }
    }
}

/// Picks the next legal move. The engine calls `next`, then reports the
/// consumption of that letter and every delivery it caused.
pub(crate) trait Schedule {
    fn next(&mut self, counts: &[i64]) -> Option<usize>;
    fn consumed(&mut self, letter: usize, now: i64);
    fn received(&mut self, letter: usize, amount: u64, now: i64);
}

pub(crate) fn make(policy: Policy, alphabet: &Alphabet, counts: &[i64]) -> Box<dyn Schedule> {
    match policy {
        Policy::Fifo => Box::new(Queue::new(counts, true)),
        Policy::Lifo => Box::new(Queue::new(counts, false)),
        Policy::RoundRobin => Box::new(RoundRobin::new(alphabet, counts)),
        Policy::GreedyMaxCount => Box::new(Greedy::new(counts)),
        Policy::SeededRandom(seed) => Box::new(Random::new(seed, counts)),
    }
}

/// Runs of identical letters, consumed from the front (FIFO) or the back
/// (LIFO).
struct Queue {
    runs: VecDeque<(usize, u64)>,
    fifo: bool,
}

impl Queue {
    fn new(counts: &[i64], fifo: bool) -> Self {
        let mut q = Queue {
            runs: VecDeque::new(),
            fifo,
        };
        for (a, &c) in counts.iter().enumerate() {
            if c > 0 {
                q.push(a, c as u64);
            }
        }
        q
    }

    fn push(&mut self, letter: usize, amount: u64) {
        match self.runs.back_mut() {
            Some((a, n)) if *a == letter => *n += amount,
            _ => self.runs.push_back((letter, amount)),
        }
    }
}

impl Schedule for Queue {
    fn next(&mut self, _counts: &[i64]) -> Option<usize> {
        if self.fifo {
            self.runs.front().map(|r| r.0)
        } else {
            self.runs.back().map(|r| r.0)
        }
    }

    fn consumed(&mut self, _letter: usize, _now: i64) {
        let run = if self.fifo {
            self.runs.front_mut()
        } else {
            self.runs.back_mut()
        };
        let run = run.expect("consumed letter was scheduled");
        run.1 -= 1;
        if run.1 == 0 {
            if self.fifo {
                self.runs.pop_front();
            } else {
                self.runs.pop_back();
            }
        }
    }

    fn received(&mut self, letter: usize, amount: u64, _now: i64) {
        if amount > 0 {
            self.push(letter, amount);
        }
    }
}

struct RoundRobin {
    owner: Vec<usize>,
    ranges: Vec<(usize, usize)>,
    pending: Vec<u64>,
    active: BTreeSet<usize>,
    cursor: usize,
}

impl RoundRobin {
    fn new(alphabet: &Alphabet, counts: &[i64]) -> Self {
        let vertices = (0..alphabet.len())
            .map(|a| alphabet.owner(a) + 1)
            .max()
            .unwrap_or(0);
        let owner: Vec<usize> = (0..alphabet.len()).map(|a| alphabet.owner(a)).collect();
        let ranges = (0..vertices)
            .map(|v| {
                let r = alphabet.range(v);
                (r.start, r.end)
            })
            .collect();
        let mut pending = vec![0u64; vertices];
        for (a, &c) in counts.iter().enumerate() {
            if c > 0 {
                pending[owner[a]] += c as u64;
            }
        }
        let active = (0..vertices).filter(|&v| pending[v] > 0).collect();
        RoundRobin {
            owner,
            ranges,
            pending,
            active,
            cursor: 0,
        }
    }
}

impl Schedule for RoundRobin {
    fn next(&mut self, counts: &[i64]) -> Option<usize> {
        let v = *self
            .active
            .range(self.cursor..)
            .next()
            .or_else(|| self.active.iter().next())?;
        self.cursor = v + 1;
        let (lo, hi) = self.ranges[v];
        (lo..hi).find(|&a| counts[a] > 0)
    }

    fn consumed(&mut self, letter: usize, _now: i64) {
        let v = self.owner[letter];
        self.pending[v] -= 1;
        if self.pending[v] == 0 {
            self.active.remove(&v);
        }
    }

    fn received(&mut self, letter: usize, amount: u64, _now: i64) {
        let v = self.owner[letter];
        self.pending[v] += amount;
        if amount > 0 {
            self.active.insert(v);
        }
    }
}

struct Greedy {
    order: BTreeSet<(Reverse<i64>, usize)>,
}

impl Greedy {
    fn new(counts: &[i64]) -> Self {
        Greedy {
            order: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(a, &c)| (Reverse(c), a))
                .collect(),
        }
    }
}

impl Schedule for Greedy {
    fn next(&mut self, _counts: &[i64]) -> Option<usize> {
        self.order.iter().next().map(|&(_, a)| a)
    }

    fn consumed(&mut self, letter: usize, now: i64) {
        self.order.remove(&(Reverse(now + 1), letter));
        if now > 0 {
            self.order.insert((Reverse(now), letter));
        }
    }

    fn received(&mut self, letter: usize, amount: u64, now: i64) {
        let before = now - amount as i64;
        if before > 0 {
            self.order.remove(&(Reverse(before), letter));
        }
        if now > 0 {
            self.order.insert((Reverse(now), letter));
        }
    }
}

struct Random {
    rng: ChaCha8Rng,
    active: Vec<usize>,
    slot: Vec<usize>,
}

impl Random {
    const ABSENT: usize = usize::MAX;

    fn new(seed: u64, counts: &[i64]) -> Self {
        let mut r = Random {
            rng: ChaCha8Rng::seed_from_u64(seed),
            active: Vec::new(),
            slot: vec![Self::ABSENT; counts.len()],
        };
        for (a, &c) in counts.iter().enumerate() {
            if c > 0 {
                r.insert(a);
            }
        }
        r
    }

    fn insert(&mut self, a: usize) {
        if self.slot[a] == Self::ABSENT {
            self.slot[a] = self.active.len();
            self.active.push(a);
        }
    }

    fn remove(&mut self, a: usize) {
        let i = self.slot[a];
        if i == Self::ABSENT {
            return;
        }
        self.active.swap_remove(i);
        if let Some(&moved) = self.active.get(i) {
            self.slot[moved] = i;
        }
        self.slot[a] = Self::ABSENT;
    }
}

impl Schedule for Random {
    fn next(&mut self, _counts: &[i64]) -> Option<usize> {
        if self.active.is_empty() {
            return None;
        }
        let i = self.rng.gen_range(0..self.active.len());
        Some(self.active[i])
    }

    fn consumed(&mut self, letter: usize, now: i64) {
        if now <= 0 {
            self.remove(letter);
        }
    }

    fn received(&mut self, letter: usize, _amount: u64, now: i64) {
        if now > 0 {
            self.insert(letter);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_round_trips_through_strings() {
        for p in Policy::all(42) {
            assert_eq!(p.to_string().parse::<Policy>().unwrap(), p);
        }
        assert!("bogus".parse::<Policy>().is_err());
        assert!("random:x".parse::<Policy>().is_err());
    }

    fn drain(mut s: Box<dyn Schedule>, mut counts: Vec<i64>) -> Vec<usize> {
        let mut order = Vec::new();
        while let Some(a) = s.next(&counts) {
            counts[a] -= 1;
            s.consumed(a, counts[a]);
            order.push(a);
        }
        order
    }

    #[test]
    fn queues_and_greedy_orders() {
        let alphabet = Alphabet::from_sizes([1, 1, 1]);
        let counts = vec![1, 3, 2];
        let fifo = drain(make(Policy::Fifo, &alphabet, &counts), counts.clone());
        assert_eq!(fifo, vec![0, 1, 1, 1, 2, 2]);
        let lifo = drain(make(Policy::Lifo, &alphabet, &counts), counts.clone());
        assert_eq!(lifo, vec![2, 2, 1, 1, 1, 0]);
        let greedy = drain(make(Policy::GreedyMaxCount, &alphabet, &counts), counts.clone());
        assert_eq!(greedy, vec![1, 1, 2, 0, 1, 2]);
        let rr = drain(make(Policy::RoundRobin, &alphabet, &counts), counts.clone());
        assert_eq!(rr, vec![0, 1, 2, 1, 2, 1]);
    }

    #[test]
    fn random_is_reproducible() {
        let alphabet = Alphabet::from_sizes([2, 2]);
        let counts = vec![3, 1, 4, 1];
        let a = drain(make(Policy::SeededRandom(7), &alphabet, &counts), counts.clone());
        let b = drain(make(Policy::SeededRandom(7), &alphabet, &counts), counts.clone());
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
    }
}
