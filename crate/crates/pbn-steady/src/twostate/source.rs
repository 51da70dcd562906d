//! Observation sources feeding the estimator.
//!
//! The estimator only ever sees a growing binary sequence (the subsampled
//! meta-state projections) plus its transition counts; [`MetaSource`]
//! abstracts over where that sequence comes from — a simulated network
//! ([`PbnMetaSource`]) or an exact synthetic two-state chain used by the
//! calibration experiments ([`super::SyntheticTwoStateSource`]).

use crate::model::PbnModel;
use crate::sim::{project, MetaPredicate, SimCursor};
use crate::twostate::TransitionCounts;
use crate::{Error, Result};

/// A packed, append-only bit sequence with O(words) range popcounts.
#[derive(Debug, Default, Clone)]
pub(crate) struct BitSeq {
    words: Vec<u64>,
    len: usize,
}

impl BitSeq {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().expect("just ensured") |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Number of ones among positions `[start, end)`.
    pub fn count_ones(&self, start: usize, end: usize) -> u64 {
        assert!(start <= end && end <= self.len);
        if start == end {
            return 0;
        }
        let (first_word, first_bit) = (start / 64, start % 64);
        let (last_word, last_bit) = ((end - 1) / 64, (end - 1) % 64);
        let head_mask = !0u64 << first_bit;
        let tail_mask = !0u64 >> (63 - last_bit);
        if first_word == last_word {
            return (self.words[first_word] & head_mask & tail_mask).count_ones() as u64;
        }
        let mut total = (self.words[first_word] & head_mask).count_ones() as u64;
        for w in &self.words[first_word + 1..last_word] {
            total += w.count_ones() as u64;
        }
        total + (self.words[last_word] & tail_mask).count_ones() as u64
    }
}

/// Shared bookkeeping: the observation sequence plus incrementally
/// maintained transition counts over the ENTIRE sequence.
#[derive(Debug, Default, Clone)]
pub(crate) struct ObsLog {
    bits: BitSeq,
    counts: TransitionCounts,
    last: Option<bool>,
}

impl ObsLog {
    pub fn push(&mut self, bit: bool) {
        if let Some(prev) = self.last {
            match (prev, bit) {
                (false, false) => self.counts.c00 += 1,
                (false, true) => self.counts.c01 += 1,
                (true, false) => self.counts.c10 += 1,
                (true, true) => self.counts.c11 += 1,
            }
        }
        self.bits.push(bit);
        self.last = Some(bit);
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn counts(&self) -> TransitionCounts {
        self.counts
    }

    pub fn mean_in(&self, start: usize, end: usize) -> f64 {
        assert!(start < end, "empty estimation window");
        self.bits.count_ones(start, end) as f64 / (end - start) as f64
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits.get(i) as u8
    }
}

/// A growing subsampled binary observation sequence.
///
/// The first observation costs one underlying step, every further
/// observation costs `k` steps, so `T` observations consume `1 + (T−1)·k`
/// original-chain steps — the observation `t` (1-based) is the projection of
/// the state at original time `1+(t−1)k`.
pub trait MetaSource {
    /// Appends `count` further observations.
    fn extend(&mut self, count: usize);
    /// Observations collected so far.
    fn len(&self) -> usize;
    /// True before the first observation.
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Transition counts over the entire sequence.
    fn counts(&self) -> TransitionCounts;
    /// Original-chain steps consumed so far.
    fn total_steps(&self) -> u64;
    /// Mean of observations `[start, end)` (the q̂ window).
    fn mean_in(&self, start: usize, end: usize) -> f64;
    /// Observation `i` (0-based).
    fn observation(&self, i: usize) -> u8;
}

/// [`MetaSource`] over a simulated network: projects every k-th state of a
/// [`SimCursor`] trajectory through a [`MetaPredicate`].
pub struct PbnMetaSource<'m> {
    cursor: SimCursor<'m>,
    pred: MetaPredicate,
    k: usize,
    log: ObsLog,
}

impl<'m> PbnMetaSource<'m> {
    /// Builds a source with a fresh cursor seeded by `seed` (uniform random
    /// initial state).
    pub fn new(model: &'m PbnModel, pred: MetaPredicate, k: usize, seed: u64) -> Result<Self> {
        let cursor = SimCursor::new(model, seed)?;
        Self::from_cursor(cursor, pred, k)
    }

    /// Builds a source over an existing cursor (e.g. with a pinned initial
    /// state); no steps are consumed until the first `extend`.
    pub fn from_cursor(cursor: SimCursor<'m>, pred: MetaPredicate, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("subsampling lag k must be ≥ 1".into()));
        }
        for &(node, _) in pred.literals() {
            if node as usize >= cursor.model().n() {
                return Err(Error::InvalidPredicate(format!(
                    "node {node} out of range for {} nodes",
                    cursor.model().n()
                )));
            }
        }
        Ok(Self { cursor, pred, k, log: ObsLog::default() })
    }

    /// The predicate defining meta state 1.
    pub fn predicate(&self) -> &MetaPredicate {
        &self.pred
    }
}

impl MetaSource for PbnMetaSource<'_> {
    fn extend(&mut self, count: usize) {
        for _ in 0..count {
            let advance = if self.log.len() == 0 { 1 } else { self.k as u64 };
            self.cursor.simulate(advance);
            self.log.push(project(self.cursor.state(), &self.pred) == 1);
        }
    }

    fn len(&self) -> usize {
        self.log.len()
    }

    fn counts(&self) -> TransitionCounts {
        self.log.counts()
    }

    fn total_steps(&self) -> u64 {
        self.cursor.steps()
    }

    fn mean_in(&self, start: usize, end: usize) -> f64 {
        self.log.mean_in(start, end)
    }

    fn observation(&self, i: usize) -> u8 {
        self.log.get(i)
    }
}
