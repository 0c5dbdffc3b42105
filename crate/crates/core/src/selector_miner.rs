//! Brute-force search for a function name whose selector matches a target.
//!
//! Candidates are enumerated by name length, then lexicographically in the
//! order of the caller's alphabet. Enumeration index `i` maps to exactly one
//! name, so the space can be cut into contiguous ranges and scanned by any
//! number of workers; the match with the smallest index always wins, which
//! makes the result independent of the worker count.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::eth_primitives::{
    canonical_type, keccak256_prefix4_short, FunctionHeader, PrimitiveError, Selector,
};

// Candidates handed to a worker at a time.
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiningError {
    #[error("match_bits must be in 1..=32, got {0}")]
    MatchBits(u32),
    #[error("alphabet must be non-empty")]
    EmptyAlphabet,
    #[error("alphabet character {0:?} is not an ASCII identifier character")]
    AlphabetChar(char),
    #[error("alphabet repeats {0:?}")]
    DuplicateChar(char),
    #[error("name_length_max must be positive")]
    NameLength,
    #[error("argument signature: {0}")]
    Signature(#[from] PrimitiveError),
    #[error("candidate headers of length {0} do not fit in one hash block")]
    TooLong(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiningTask {
    pub target: Selector,
    pub match_bits: u32,
    pub alphabet: Vec<u8>,
    pub name_length_max: usize,
    /// Canonical parenthesized argument list, e.g. `(uint256)`.
    pub arg_signature: String,
    pub budget: u64,
}

impl MiningTask {
    /// Builds a task, canonicalizing the argument list (`(uint)` becomes
    /// `(uint256)`).
    pub fn new(
        target: Selector,
        match_bits: u32,
        alphabet: &str,
        name_length_max: usize,
        arg_signature: &str,
        budget: u64,
    ) -> Result<Self, MiningError> {
        let probe = FunctionHeader::parse(&format!("x{arg_signature}"))?;
        let arg_signature = format!("({})", probe.arg_types().join(","));
        let task = MiningTask {
            target,
            match_bits,
            alphabet: alphabet.as_bytes().to_vec(),
            name_length_max,
            arg_signature,
            budget,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<(), MiningError> {
        if !(1..=32).contains(&self.match_bits) {
            return Err(MiningError::MatchBits(self.match_bits));
        }
        if self.alphabet.is_empty() {
            return Err(MiningError::EmptyAlphabet);
        }
        for (i, &b) in self.alphabet.iter().enumerate() {
            if !(b.is_ascii_alphanumeric() || b == b'_' || b == b'$') {
                return Err(MiningError::AlphabetChar(b as char));
            }
            if self.alphabet[..i].contains(&b) {
                return Err(MiningError::DuplicateChar(b as char));
            }
        }
        if self.name_length_max == 0 {
            return Err(MiningError::NameLength);
        }
        let inner = self
            .arg_signature
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| PrimitiveError::MalformedHeader(self.arg_signature.clone()))?;
        if !inner.is_empty() {
            for ty in inner.split(',') {
                if canonical_type(ty)? != ty {
                    return Err(PrimitiveError::MalformedHeader(self.arg_signature.clone()).into());
                }
            }
        }
        let longest = self.name_length_max + self.arg_signature.len();
        if longest >= 136 {
            return Err(MiningError::TooLong(longest));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MiningResult {
    pub found: Option<FunctionHeader>,
    pub candidates_tried: u64,
    pub elapsed: Duration,
}

/// Index arithmetic over the candidate name space.
#[derive(Debug, Clone)]
struct NameSpace {
    alphabet: Vec<u8>,
    // Alphabet positions allowed as the first character (no digits), in
    // alphabet order.
    first: Vec<u8>,
    // Number of names of each length 1..=max, saturating.
    counts: Vec<u64>,
}

impl NameSpace {
    fn new(alphabet: &[u8], max_len: usize) -> Self {
        let first: Vec<u8> = alphabet.iter().copied().filter(|b| !b.is_ascii_digit()).collect();
        let mut counts = Vec::with_capacity(max_len);
        let mut n = first.len() as u64;
        for _ in 0..max_len {
            counts.push(n);
            n = n.saturating_mul(alphabet.len() as u64);
        }
        NameSpace {
            alphabet: alphabet.to_vec(),
            first,
            counts,
        }
    }

    fn size(&self) -> u64 {
        self.counts.iter().fold(0u64, |acc, &c| acc.saturating_add(c))
    }

    /// Writes the name at `index` into `out`, returning its length.
    fn name_at(&self, mut index: u64, out: &mut [u8]) -> usize {
        let mut len = 1;
        for &c in &self.counts {
            if index < c {
                break;
            }
            index -= c;
            len += 1;
        }
        let base = self.alphabet.len() as u64;
        for pos in (1..len).rev() {
            out[pos] = self.alphabet[(index % base) as usize];
            index /= base;
        }
        out[0] = self.first[index as usize];
        len
    }

    /// Advances the name in `out[..len]` to its successor in place. Returns
    /// the new length (length grows when the current length class ends).
    fn advance(&self, out: &mut [u8], len: usize, positions: &mut [usize]) -> usize {
        let base = self.alphabet.len();
        for pos in (1..len).rev() {
            positions[pos] += 1;
            if positions[pos] < base {
                out[pos] = self.alphabet[positions[pos]];
                return len;
            }
            positions[pos] = 0;
            out[pos] = self.alphabet[0];
        }
        positions[0] += 1;
        if positions[0] < self.first.len() {
            out[0] = self.first[positions[0]];
            return len;
        }
        // Length class exhausted.
        positions[0] = 0;
        out[0] = self.first[0];
        let new_len = len + 1;
        positions[new_len - 1] = 0;
        out[new_len - 1] = self.alphabet[0];
        new_len
    }

    fn positions_of(&self, name: &[u8], positions: &mut [usize]) {
        positions[0] = self.first.iter().position(|&b| b == name[0]).unwrap_or(0);
        for (i, &b) in name.iter().enumerate().skip(1) {
            positions[i] = self.alphabet.iter().position(|&a| a == b).unwrap_or(0);
        }
    }
}

/// Scans `start..end`, returning the first matching index.
fn scan_range(task: &MiningTask, space: &NameSpace, start: u64, end: u64) -> Option<u64> {
    let sig = task.arg_signature.as_bytes();
    let max = task.name_length_max;
    let mut buf = [0u8; 136];
    let mut positions = vec![0usize; max + 1];
    let mut len = space.name_at(start, &mut buf);
    space.positions_of(&buf[..len], &mut positions);
    let mut msg = [0u8; 136];
    for index in start..end {
        msg[..len].copy_from_slice(&buf[..len]);
        msg[len..len + sig.len()].copy_from_slice(sig);
        let sel = Selector(keccak256_prefix4_short(&msg[..len + sig.len()]));
        if sel.matches_prefix(&task.target, task.match_bits) {
            return Some(index);
        }
        if index + 1 < end {
            len = space.advance(&mut buf, len, &mut positions);
        }
    }
    None
}

pub fn mine(task: &MiningTask) -> Result<MiningResult, MiningError> {
    mine_parallel(task, 1, None)
}

/// Mines with `workers` threads. `progress`, when given, is bumped with the
/// number of candidates each finished chunk covered.
pub fn mine_parallel(
    task: &MiningTask,
    workers: usize,
    progress: Option<&AtomicU64>,
) -> Result<MiningResult, MiningError> {
    task.validate()?;
    let started = Instant::now();
    let space = NameSpace::new(&task.alphabet, task.name_length_max);
    let limit = space.size().min(task.budget);
    let workers = workers.max(1);

    let next_chunk = AtomicU64::new(0);
    let best = AtomicU64::new(u64::MAX);

    let work = || loop {
        let start = next_chunk.fetch_add(CHUNK, Ordering::Relaxed);
        if start >= limit || start > best.load(Ordering::Relaxed) {
            break;
        }
        let end = (start + CHUNK).min(limit);
        if let Some(hit) = scan_range(task, &space, start, end) {
            best.fetch_min(hit, Ordering::Relaxed);
        }
        if let Some(p) = progress {
            p.fetch_add(end - start, Ordering::Relaxed);
        }
    };

    if workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }

    let best = best.into_inner();
    let (found, candidates_tried) = if best == u64::MAX {
        (None, limit)
    } else {
        let mut buf = [0u8; 136];
        let len = space.name_at(best, &mut buf);
        let name = std::str::from_utf8(&buf[..len]).expect("ASCII alphabet");
        let header = FunctionHeader::parse(&format!("{name}{}", task.arg_signature))?;
        (Some(header), best + 1)
    };
    Ok(MiningResult {
        found,
        candidates_tried,
        elapsed: started.elapsed(),
    })
}

/// Number of candidates in the task's search space, ignoring the budget.
pub fn search_space_size(task: &MiningTask) -> u64 {
    NameSpace::new(&task.alphabet, task.name_length_max).size()
}

#[derive(Debug, Clone, Copy)]
pub struct ThroughputReport {
    pub candidates: u64,
    pub elapsed: Duration,
    pub per_second: f64,
}

impl ThroughputReport {
    /// Expected seconds to cover 2^bits candidates at this rate.
    pub fn expected_seconds_for_bits(&self, bits: u32) -> f64 {
        2f64.powi(bits as i32) / self.per_second
    }
}

/// Single-threaded candidate evaluation rate over a fixed synthetic task
/// whose target cannot be hit within the run.
pub fn throughput_bench(seconds: Duration) -> ThroughputReport {
    let alphabet = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
    let task = MiningTask {
        // No 8-character name reaches this in a short run; a match only ends
        // the chunk early and does not affect the rate.
        target: Selector([0, 0, 0, 0]),
        match_bits: 32,
        alphabet: alphabet.to_vec(),
        name_length_max: 12,
        arg_signature: "(uint256)".to_string(),
        budget: u64::MAX,
    };
    let space = NameSpace::new(&task.alphabet, task.name_length_max);
    let origin = space.counts[..7].iter().sum::<u64>();
    let started = Instant::now();
    let mut candidates = 0u64;
    const BATCH: u64 = 4096;
    while started.elapsed() < seconds {
        let start = origin + candidates;
        scan_range(&task, &space, start, start + BATCH);
        candidates += BATCH;
    }
    let elapsed = started.elapsed();
    ThroughputReport {
        candidates,
        elapsed,
        per_second: candidates as f64 / elapsed.as_secs_f64(),
    }
}
