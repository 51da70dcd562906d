//! An exactly specified two-state chain, for calibration and testing.
//!
//! The chain lives on {0, 1} with P(0→1) = α and P(1→0) = β. Because its
//! stationary law is known in closed form (π₁ = α/(α+β)), it provides ground
//! truth for coverage experiments that a full network cannot.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::rngutil::unit_f64;
use crate::twostate::source::{MetaSource, ObsLog};
use crate::twostate::TransitionCounts;
use crate::{Error, Result};

/// Exact simulator of the two-state chain.
///
/// Each step consumes exactly one uniform draw, whichever state it leaves
/// from.
#[derive(Debug, Clone)]
pub struct TwoStateChain {
    alpha: f64,
    beta: f64,
    state: bool,
    rng: Xoshiro256PlusPlus,
}

impl TwoStateChain {
    /// Creates a chain with transition rates `alpha` = P(0→1) and
    /// `beta` = P(1→0), starting in `initial` (false = state 0).
    ///
    /// Rates must lie in [0, 1].
    pub fn new(alpha: f64, beta: f64, initial: bool, seed: u64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(Self { alpha, beta, state: initial, rng: Xoshiro256PlusPlus::seed_from_u64(seed) })
    }

    /// P(0→1).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// P(1→0).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Current state.
    pub fn state(&self) -> bool {
        self.state
    }

    /// Advances one step and returns the new state.
    pub fn step(&mut self) -> bool {
        let u = unit_f64(&mut self.rng);
        let leave = if self.state { self.beta } else { self.alpha };
        if u < leave {
            self.state = !self.state;
        }
        self.state
    }

    /// Exact stationary probability of state 1, α/(α+β).
    pub fn stationary_one(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

/// [`MetaSource`] over a [`TwoStateChain`]: the observations are every k-th
/// state of the chain itself (the identity projection).
pub struct SyntheticTwoStateSource {
    chain: TwoStateChain,
    k: usize,
    steps: u64,
    log: ObsLog,
}

impl SyntheticTwoStateSource {
    /// Builds a source over a fresh chain. See [`TwoStateChain::new`].
    pub fn new(alpha: f64, beta: f64, initial: bool, k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("subsampling lag k must be ≥ 1".into()));
        }
        let chain = TwoStateChain::new(alpha, beta, initial, seed)?;
        Ok(Self { chain, k, steps: 0, log: ObsLog::default() })
    }

    /// The underlying chain.
    pub fn chain(&self) -> &TwoStateChain {
        &self.chain
    }
}

impl MetaSource for SyntheticTwoStateSource {
    fn extend(&mut self, count: usize) {
        for _ in 0..count {
            let advance = if self.log.len() == 0 { 1 } else { self.k as u64 };
            let mut last = self.chain.state();
            for _ in 0..advance {
                last = self.chain.step();
            }
            self.steps += advance;
            self.log.push(last);
        }
    }

    fn len(&self) -> usize {
        self.log.len()
    }

    fn counts(&self) -> TransitionCounts {
        self.log.counts()
    }

    fn total_steps(&self) -> u64 {
        self.steps
    }

    fn mean_in(&self, start: usize, end: usize) -> f64 {
        self.log.mean_in(start, end)
    }

    fn observation(&self, i: usize) -> u8 {
        self.log.get(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_rates_alternate() {
        let mut chain = TwoStateChain::new(1.0, 1.0, false, 3).unwrap();
        let seq: Vec<bool> = (0..6).map(|_| chain.step()).collect();
        assert_eq!(seq, [true, false, true, false, true, false]);
    }

    #[test]
    fn absorbing_state_stays() {
        let mut chain = TwoStateChain::new(0.0, 1.0, true, 9).unwrap();
        chain.step();
        assert!(!chain.state());
        for _ in 0..100 {
            assert!(!chain.step());
        }
    }

    #[test]
    fn occupancy_matches_stationary_law() {
        // π₁ = α/(α+β) = 0.2/0.7; binomial σ ≈ sqrt(π(1−π)/N) ignoring
        // autocorrelation, so allow a generous 6σ.
        let mut chain = TwoStateChain::new(0.2, 0.5, false, 2024).unwrap();
        let n = 200_000u64;
        let ones: u64 = (0..n).map(|_| chain.step() as u64).sum();
        let pi = 0.2 / 0.7;
        let sigma = (pi * (1.0 - pi) / n as f64).sqrt();
        assert!(
            ((ones as f64 / n as f64) - pi).abs() < 6.0 * sigma,
            "occupancy {} vs π₁ {pi}",
            ones as f64 / n as f64
        );
    }

    #[test]
    fn source_counts_match_recount_and_step_accounting() {
        let mut src = SyntheticTwoStateSource::new(0.3, 0.4, false, 2, 5).unwrap();
        src.extend(50);
        src.extend(1);
        let seq: Vec<u8> = (0..51).map(|i| src.observation(i)).collect();
        assert_eq!(src.counts(), TransitionCounts::from_sequence(&seq));
        assert_eq!(src.total_steps(), 1 + 50 * 2);
    }

    #[test]
    fn source_estimates_converge_to_rates() {
        // With k=1 the subsampled chain IS the chain, so α̂ → α, β̂ → β.
        let (alpha, beta) = (0.15, 0.55);
        let mut src = SyntheticTwoStateSource::new(alpha, beta, false, 1, 41).unwrap();
        src.extend(400_000);
        let c = src.counts();
        let (a, b) = crate::twostate::estimate_alpha_beta(&c);
        let (a, b) = (a.unwrap(), b.unwrap());
        let n0 = (c.c00 + c.c01) as f64;
        let n1 = (c.c10 + c.c11) as f64;
        let sa = (alpha * (1.0 - alpha) / n0).sqrt();
        let sb = (beta * (1.0 - beta) / n1).sqrt();
        assert!((a - alpha).abs() < 5.0 * sa, "α̂ = {a}");
        assert!((b - beta).abs() < 5.0 * sb, "β̂ = {b}");
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(TwoStateChain::new(-0.1, 0.5, false, 0).is_err());
        assert!(TwoStateChain::new(0.1, 1.5, false, 0).is_err());
        assert!(SyntheticTwoStateSource::new(0.1, 0.5, false, 0, 0).is_err());
    }
}
