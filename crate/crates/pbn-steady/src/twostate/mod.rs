//! The two-state Markov chain steady-state estimator.
//!
//! The state space is split into two meta states by a predicate; the chain's
//! visits to them form a binary sequence which (subsampled with lag `k`) is
//! treated as a first-order two-state chain with rates α = P(0→1) and
//! β = P(1→0). Closed forms on that 2×2 chain give a burn-in `t` and a
//! sample size `⌈n⌉` for the requested precision; both depend on α̂ and β̂,
//! so the algorithm iterates: estimate, compute the requirement, extend the
//! trajectory, re-estimate — until the trajectory already satisfies the
//! requirement computed from its own estimates.
//!
//! Because a pilot of size n₀ cannot see rates below 1/n₀, a badly sized
//! pilot can silently undersample (the calibration pitfall); the
//! [`Heuristic`] variants are the countermeasures.

mod chain;
mod formulas;
mod source;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use chain::{SyntheticTwoStateSource, TwoStateChain};
pub use formulas::{
    asymptotic_variance, burn_in_m, normal_quantile_two_sided, safe_n0_range, sample_size_n,
};
pub use source::{MetaSource, PbnMetaSource};

use crate::{Error, Result};

/// Hard cap on stored observations (~8.6 GB packed): beyond this the
/// requested precision is unreachable in practice and the run errors out
/// rather than exhausting memory.
pub const MAX_OBSERVATIONS: u64 = 1 << 36;

/// Transition counts of the binary observation sequence.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct TransitionCounts {
    /// 0→0 transitions.
    pub c00: u64,
    /// 0→1 transitions.
    pub c01: u64,
    /// 1→0 transitions.
    pub c10: u64,
    /// 1→1 transitions.
    pub c11: u64,
}

impl TransitionCounts {
    /// Total transitions (sequence length − 1 for a nonempty sequence).
    pub fn total(&self) -> u64 {
        self.c00 + self.c01 + self.c10 + self.c11
    }

    /// Counts the transitions of a 0/1 sequence directly.
    pub fn from_sequence(bits: &[u8]) -> Self {
        let mut c = Self::default();
        for w in bits.windows(2) {
            match (w[0], w[1]) {
                (0, 0) => c.c00 += 1,
                (0, 1) => c.c01 += 1,
                (1, 0) => c.c10 += 1,
                _ => c.c11 += 1,
            }
        }
        c
    }
}

/// Maximum-likelihood rate estimates (α̂, β̂) = (c01/(c00+c01), c10/(c10+c11)).
///
/// A zero DENOMINATOR (the meta state was never a transition source) makes
/// the estimate undefined — `None`. A zero numerator over a nonzero
/// denominator is a legitimate estimate of exactly 0.
pub fn estimate_alpha_beta(counts: &TransitionCounts) -> (Option<f64>, Option<f64>) {
    let from0 = counts.c00 + counts.c01;
    let from1 = counts.c10 + counts.c11;
    let alpha = (from0 > 0).then(|| counts.c01 as f64 / from0 as f64);
    let beta = (from1 > 0).then(|| counts.c10 as f64 / from1 as f64);
    (alpha, beta)
}

/// Initialization strategy guarding against the undersampled-pilot pitfall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// No safeguard: take m0+n0 observations and estimate. Undefined
    /// estimates are an error; resolution-floor estimates pass through
    /// unchecked (the canonical failure mode, kept for study).
    None,
    /// Clamp n₀ into [`safe_n0_range`] so a resolution-floor estimate 1/n₀
    /// still demands ≥ 2n₀ further samples; errors if the range is empty.
    PitfallAvoidance,
    /// Grow the pilot until the rarer transition rate is itself measured to
    /// within half its value at confidence s.
    Controlled,
    /// Double the trajectory until both c01 ≥ 3 and c10 ≥ 3 (default).
    #[default]
    Simple,
}

impl Heuristic {
    /// All variants, in documentation order.
    pub const ALL: [Heuristic; 4] =
        [Heuristic::None, Heuristic::PitfallAvoidance, Heuristic::Controlled, Heuristic::Simple];
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Heuristic::None => "none",
            Heuristic::PitfallAvoidance => "pitfall_avoidance",
            Heuristic::Controlled => "controlled",
            Heuristic::Simple => "simple",
        };
        f.write_str(name)
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Heuristic::None),
            "pitfall" | "pitfall_avoidance" => Ok(Heuristic::PitfallAvoidance),
            "controlled" => Ok(Heuristic::Controlled),
            "simple" => Ok(Heuristic::Simple),
            other => Err(Error::InvalidParams(format!(
                "unknown heuristic {other:?}; expected simple|controlled|pitfall|none"
            ))),
        }
    }
}

/// Parameters of a two-state estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateParams {
    /// Convergence tolerance ε of the burn-in condition. Default 1e-10.
    pub epsilon: f64,
    /// Half-width precision r of the confidence interval for q̂.
    pub r: f64,
    /// Confidence level s ∈ (0,1). Default 0.95.
    pub s: f64,
    /// Subsampling lag k ≥ 1: every k-th projection is kept. Default 1.
    pub k: usize,
    /// Initial burn-in m₀ (two-state scale) prepended to the pilot. Default 5.
    pub m0: u64,
    /// Pilot sample size n₀; `None` resolves to the upper end of
    /// [`safe_n0_range`] when nonempty, else 1000.
    pub n0: Option<u64>,
    /// Initialization safeguard. Default [`Heuristic::Simple`].
    pub heuristic: Heuristic,
    /// Cap on trajectory doublings inside heuristics (~10⁹× growth at 30):
    /// reaching it means the meta state is unreachable or vanishingly rare.
    pub doubling_cap: u32,
}

impl TwoStateParams {
    /// Defaults with the given precision `r`.
    pub fn new(r: f64) -> Self {
        Self {
            epsilon: 1e-10,
            r,
            s: 0.95,
            k: 1,
            m0: 5,
            n0: None,
            heuristic: Heuristic::Simple,
            doubling_cap: 30,
        }
    }

    /// Validates every field.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParams(format!("epsilon {} outside (0,1)", self.epsilon)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParams(format!("precision r = {} must be positive", self.r)));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParams(format!("confidence s = {} outside (0,1)", self.s)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParams("subsampling lag k must be ≥ 1".into()));
        }
        if self.m0 == 0 {
            return Err(Error::InvalidParams("initial burn-in m0 must be ≥ 1".into()));
        }
        if self.n0 == Some(0) {
            return Err(Error::InvalidParams("initial sample size n0 must be ≥ 1".into()));
        }
        Ok(())
    }

    /// The pilot size actually used: the explicit `n0`, or the AUTO rule
    /// (upper end of the safe range, else 1000).
    pub fn resolve_n0(&self) -> Result<u64> {
        self.validate()?;
        match self.n0 {
            Some(v) => Ok(v),
            None => Ok(safe_n0_range(self.r, self.s)?.map(|(_, hi)| hi).unwrap_or(1000)),
        }
    }
}

/// Everything a finished estimation run reports.
#[derive(Debug, Clone)]
pub struct TwoStateRun {
    /// Final α̂ (entire-sequence estimate).
    pub alpha_hat: f64,
    /// Final β̂.
    pub beta_hat: f64,
    /// Final transition counts.
    pub counts: TransitionCounts,
    /// Burn-in t = max(1, ⌈m(α̂,β̂,ε)⌉), in subsampled observations.
    pub burn_in_t: u64,
    /// Sample size max(1, ⌈n(α̂,β̂,r,s)⌉), in subsampled observations.
    pub sample_obs: u64,
    /// Burn-in M = 1+(t−1)k on the original step scale.
    pub burn_in_steps: u64,
    /// Sample N = 1+(⌈n⌉−1)k on the original step scale.
    pub sample_steps: u64,
    /// Original-chain steps actually consumed.
    pub total_steps: u64,
    /// Observations actually collected (≥ burn_in_t + sample_obs).
    pub observations: u64,
    /// Estimation rounds performed (initial estimate counts as 1).
    pub iterations: u32,
    /// The steady-state probability estimate: mean of observations
    /// [t, t+⌈n⌉).
    pub q_hat: f64,
    /// Pilot size after AUTO resolution and any pitfall clamping.
    pub resolved_n0: u64,
    /// Wall-clock duration of the run.
    pub wall_time: Duration,
}

/// Grows `source` to `target` observations, enforcing [`MAX_OBSERVATIONS`].
fn grow<S: MetaSource>(source: &mut S, target: u64) -> Result<()> {
    if target > MAX_OBSERVATIONS {
        return Err(Error::InvalidParams(format!(
            "run requires {target} observations, beyond the supported cap {MAX_OBSERVATIONS}; \
             relax r, s, or epsilon"
        )));
    }
    let len = source.len() as u64;
    if target > len {
        source.extend((target - len) as usize);
    }
    Ok(())
}

/// Doubles the trajectory, counting against the heuristic's doubling cap.
fn double<S: MetaSource>(source: &mut S, doublings: &mut u32, cap: u32) -> Result<()> {
    if *doublings >= cap {
        return Err(Error::DoublingCapExceeded { cap });
    }
    grow(source, source.len() as u64 * 2)?;
    *doublings += 1;
    Ok(())
}

/// Runs the initialization heuristic; returns the resolved pilot size.
fn initialize<S: MetaSource>(source: &mut S, params: &TwoStateParams) -> Result<u64> {
    let n0 = params.resolve_n0()?;
    match params.heuristic {
        Heuristic::None => {
            grow(source, params.m0 + n0)?;
            Ok(n0)
        }
        Heuristic::PitfallAvoidance => {
            let Some((lo, hi)) = safe_n0_range(params.r, params.s)? else {
                return Err(Error::EmptySafeRange { r: params.r, s: params.s });
            };
            let n0 = n0.clamp(lo, hi);
            grow(source, params.m0 + n0)?;
            Ok(n0)
        }
        Heuristic::Simple => {
            grow(source, params.m0 + n0)?;
            let mut doublings = 0u32;
            loop {
                let c = source.counts();
                if c.c01 >= 3 && c.c10 >= 3 {
                    return Ok(n0);
                }
                double(source, &mut doublings, params.doubling_cap)?;
            }
        }
        Heuristic::Controlled => controlled_init(source, params, n0),
    }
}

/// Controlled initial estimation: measure the rarer rate to within half its
/// own value at confidence s before trusting it.
fn controlled_init<S: MetaSource>(
    source: &mut S,
    params: &TwoStateParams,
    n0: u64,
) -> Result<u64> {
    grow(source, n0)?;
    let mut doublings = 0u32;
    // Phase 1: double until both estimates are defined and nonzero.
    loop {
        if let (Some(a), Some(b)) = estimate_alpha_beta(&source.counts()) {
            if a > 0.0 && b > 0.0 {
                break;
            }
        }
        double(source, &mut doublings, params.doubling_cap)?;
    }
    // Phase 2: let the smaller estimate play α with n_src transitions out of
    // its source meta state. The target interval is (α̂−α̂/2, α̂+α̂/2), so with
    // σ̂² the unbiased variance of the source-state Bernoulli, the CLT needs
    // n_{α,s} = σ̂²·(z/(α̂/2))² source transitions, inflated by the reciprocal
    // source-state occupancy (α̂+β̂)/β̂ to n_α. Extend (swapping roles whenever
    // the α̂<β̂ inequality inverts) until n_src ≥ n_α.
    let z = normal_quantile_two_sided(params.s);
    let mut rounds = 0u32;
    loop {
        let counts = source.counts();
        let (a, b) = match estimate_alpha_beta(&counts) {
            (Some(a), Some(b)) => (a, b),
            _ => unreachable!("phase 1 established both estimates; counts only grow"),
        };
        let (small, big, n_src) = if a <= b {
            (a, b, counts.c00 + counts.c01)
        } else {
            (b, a, counts.c10 + counts.c11)
        };
        if n_src < 2 {
            // Cannot form the unbiased variance from < 2 source transitions.
            double(source, &mut doublings, params.doubling_cap)?;
            continue;
        }
        let nf = n_src as f64;
        let sigma2 = small * (1.0 - small) * nf / (nf - 1.0);
        let n_alpha_s = sigma2 * (z / (small / 2.0)).powi(2);
        let n_alpha = (small + big) / big * n_alpha_s;
        if nf >= n_alpha {
            return Ok(n0);
        }
        rounds += 1;
        if rounds >= 10_000 {
            // Best effort: the main loop's stopping rule still governs the
            // final guarantee, so give up on refinement, not on the run.
            return Ok(n0);
        }
        // Expected observations per source-state transition is the
        // reciprocal occupancy (small+big)/big.
        let deficit = n_alpha - nf;
        let chunk = ((deficit * (small + big) / big).ceil() as u64).max(16);
        grow(source, source.len() as u64 + chunk)?;
    }
}

/// Executes the full iterative estimation on a fresh observation source.
///
/// Initializes per `params.heuristic`, then repeats: estimate (α̂, β̂) from
/// the ENTIRE subsampled sequence; compute t and ⌈n⌉ (each floored at 1); if
/// the sequence already holds t+⌈n⌉ observations, stop — otherwise extend to
/// exactly that many and re-estimate. The final q̂ is the mean of the ⌈n⌉
/// observations after the first t, i.e. the original-scale trajectory
/// discards M = 1+(t−1)k steps and averages over the next N = 1+(⌈n⌉−1)k.
///
/// The sought guarantee is P(q−r ≤ q̂ ≤ q+r) ≥ s, valid insofar as the
/// subsampled projection is first-order Markov; underlying ergodicity
/// (perturbation p > 0 for network sources) is the caller's responsibility.
pub fn run<S: MetaSource>(source: &mut S, params: &TwoStateParams) -> Result<TwoStateRun> {
    params.validate()?;
    if !source.is_empty() {
        return Err(Error::InvalidParams(
            "run requires a fresh source with no prior observations".into(),
        ));
    }
    let start = Instant::now();
    let resolved_n0 = initialize(source, params)?;
    let k = params.k as u64;
    let mut iterations = 0u32;
    loop {
        iterations += 1;
        let counts = source.counts();
        let (alpha_hat, beta_hat) = match estimate_alpha_beta(&counts) {
            (Some(a), Some(b)) => (a, b),
            (a, _) => {
                let missing = if a.is_none() { "meta state 0" } else { "meta state 1" };
                return Err(Error::UndefinedEstimate(format!(
                    "{missing} was never a transition source in {} observations",
                    source.len()
                )));
            }
        };
        let m = burn_in_m(alpha_hat, beta_hat, params.epsilon)?;
        let burn_in_t = (m.ceil() as u64).max(1);
        let n_real = sample_size_n(alpha_hat, beta_hat, params.r, params.s)?;
        let sample_obs = (n_real.ceil() as u64).max(1);
        let needed = burn_in_t + sample_obs;
        if source.len() as u64 >= needed {
            let q_hat = source.mean_in(burn_in_t as usize, needed as usize);
            return Ok(TwoStateRun {
                alpha_hat,
                beta_hat,
                counts,
                burn_in_t,
                sample_obs,
                burn_in_steps: 1 + (burn_in_t - 1) * k,
                sample_steps: 1 + (sample_obs - 1) * k,
                total_steps: source.total_steps(),
                observations: source.len() as u64,
                iterations,
                q_hat,
                resolved_n0,
                wall_time: start.elapsed(),
            });
        }
        grow(source, needed)?;
    }
}

#[cfg(test)]
mod tests {
    use super::source::ObsLog;
    use super::*;
    use proptest::prelude::*;

    /// Test source replaying a fixed cycle of bits (k is irrelevant: the
    /// pattern IS the subsampled sequence).
    struct CycleSource {
        pattern: Vec<u8>,
        next: usize,
        log: ObsLog,
    }

    impl CycleSource {
        fn new(pattern: &[u8]) -> Self {
            Self { pattern: pattern.to_vec(), next: 0, log: ObsLog::default() }
        }
    }

    impl MetaSource for CycleSource {
        fn extend(&mut self, count: usize) {
            for _ in 0..count {
                self.log.push(self.pattern[self.next % self.pattern.len()] == 1);
                self.next += 1;
            }
        }
        fn len(&self) -> usize {
            self.log.len()
        }
        fn counts(&self) -> TransitionCounts {
            self.log.counts()
        }
        fn total_steps(&self) -> u64 {
            self.log.len() as u64
        }
        fn mean_in(&self, start: usize, end: usize) -> f64 {
            self.log.mean_in(start, end)
        }
        fn observation(&self, i: usize) -> u8 {
            self.log.get(i)
        }
    }

    #[test]
    fn estimates_from_documented_counts() {
        // 1918 transitions out of state 0, one of them 0→1; a single 1→0.
        let c = TransitionCounts { c00: 1917, c01: 1, c10: 1, c11: 0 };
        let (a, b) = estimate_alpha_beta(&c);
        assert_eq!(a, Some(1.0 / 1918.0));
        assert_eq!(b, Some(1.0));
    }

    #[test]
    fn zero_numerator_is_a_value_zero_denominator_is_not() {
        let c = TransitionCounts { c00: 5, c01: 0, c10: 0, c11: 0 };
        let (a, b) = estimate_alpha_beta(&c);
        assert_eq!(a, Some(0.0));
        assert_eq!(b, None);
    }

    #[test]
    fn alternating_sequence_counts() {
        let bits = [0u8, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let c = TransitionCounts::from_sequence(&bits);
        assert_eq!((c.c01, c.c10), (5, 4));
        assert!(c.c01 >= 3 && c.c10 >= 3, "simple heuristic accepts without doubling");
    }

    #[test]
    fn simple_heuristic_accepts_alternation_without_doubling() {
        let mut src = CycleSource::new(&[0, 1]);
        let mut params = TwoStateParams::new(1e-2);
        params.m0 = 5;
        params.n0 = Some(10);
        let n0 = initialize(&mut src, &params).unwrap();
        assert_eq!(n0, 10);
        assert_eq!(src.len(), 15, "no doubling occurred");
    }

    #[test]
    fn simple_heuristic_hits_doubling_cap_on_constant_sequence() {
        let mut src = CycleSource::new(&[0]);
        let mut params = TwoStateParams::new(1e-2);
        params.n0 = Some(10);
        params.doubling_cap = 3;
        let err = initialize(&mut src, &params).unwrap_err();
        assert!(matches!(err, Error::DoublingCapExceeded { cap: 3 }));
        assert_eq!(src.len(), 15 * 8, "three doublings happened before the cap fired");
    }

    #[test]
    fn pitfall_clamps_n0_into_safe_range() {
        // Safe range at (r=1e-3, s=0.95) is [2,1383]; explicit n0 beyond it
        // is clamped down, n0 below it is clamped up.
        let mut params = TwoStateParams::new(1e-3);
        params.heuristic = Heuristic::PitfallAvoidance;
        params.n0 = Some(5000);
        let mut src = SyntheticTwoStateSource::new(0.3, 0.3, false, 1, 11).unwrap();
        let run = run(&mut src, &params).unwrap();
        assert_eq!(run.resolved_n0, 1383);

        params.n0 = Some(1);
        let mut src = SyntheticTwoStateSource::new(0.3, 0.3, false, 1, 11).unwrap();
        let run = super::run(&mut src, &params).unwrap();
        assert_eq!(run.resolved_n0, 2);
    }

    #[test]
    fn pitfall_errors_on_empty_safe_range() {
        let mut params = TwoStateParams::new(0.5);
        params.s = 0.5;
        params.heuristic = Heuristic::PitfallAvoidance;
        let mut src = SyntheticTwoStateSource::new(0.3, 0.3, false, 1, 11).unwrap();
        assert!(matches!(run(&mut src, &params), Err(Error::EmptySafeRange { .. })));
    }

    #[test]
    fn run_on_balanced_chain_lands_near_half() {
        // True rates α = β = 0.5 give λ = 0 (t = 1) and n = 0.25·(z/r)² ≈
        // 9604; the estimated rates land near 0.5, so λ̂ stays tiny and t
        // stays in the single digits while n keeps its scale.
        let mut params = TwoStateParams::new(1e-2);
        params.heuristic = Heuristic::None;
        let mut src = SyntheticTwoStateSource::new(0.5, 0.5, false, 1, 99).unwrap();
        let out = run(&mut src, &params).unwrap();
        assert!((1..=20).contains(&out.burn_in_t), "t = {}", out.burn_in_t);
        assert!(out.sample_obs >= 9000, "n = {}", out.sample_obs);
        assert!((out.q_hat - 0.5).abs() < 0.05, "q̂ = {}", out.q_hat);
        assert!(out.iterations >= 2, "pilot is far smaller than n");
        assert_eq!(out.observations, out.total_steps, "k = 1");
        assert!(out.observations >= out.burn_in_t + out.sample_obs);
        assert_eq!(out.burn_in_steps, out.burn_in_t);
        assert_eq!(out.sample_steps, out.sample_obs);
    }

    #[test]
    fn run_is_deterministic_for_a_seed() {
        let params = TwoStateParams::new(5e-3);
        let one = run(&mut SyntheticTwoStateSource::new(0.2, 0.6, false, 1, 7).unwrap(), &params)
            .unwrap();
        let two = run(&mut SyntheticTwoStateSource::new(0.2, 0.6, false, 1, 7).unwrap(), &params)
            .unwrap();
        assert_eq!(one.q_hat, two.q_hat);
        assert_eq!(one.alpha_hat, two.alpha_hat);
        assert_eq!(one.total_steps, two.total_steps);
        assert_eq!(one.iterations, two.iterations);
    }

    #[test]
    fn step_accounting_respects_the_lag() {
        let mut params = TwoStateParams::new(0.05);
        params.k = 3;
        let mut src = SyntheticTwoStateSource::new(0.4, 0.4, false, 3, 21).unwrap();
        let out = run(&mut src, &params).unwrap();
        assert_eq!(out.total_steps, 1 + (out.observations - 1) * 3);
        assert_eq!(out.burn_in_steps, 1 + (out.burn_in_t - 1) * 3);
        assert_eq!(out.sample_steps, 1 + (out.sample_obs - 1) * 3);
    }

    #[test]
    fn run_rejects_a_used_source() {
        let mut src = SyntheticTwoStateSource::new(0.3, 0.3, false, 1, 5).unwrap();
        src.extend(10);
        assert!(run(&mut src, &TwoStateParams::new(1e-2)).is_err());
    }

    #[test]
    fn heuristic_none_surfaces_undefined_estimates() {
        // α = 0: the chain never leaves state 0, so β̂ has no source
        // transitions and heuristic none must fail loudly.
        let mut params = TwoStateParams::new(1e-2);
        params.heuristic = Heuristic::None;
        params.n0 = Some(50);
        let mut src = SyntheticTwoStateSource::new(0.0, 1.0, false, 1, 5).unwrap();
        assert!(matches!(run(&mut src, &params), Err(Error::UndefinedEstimate(_))));
    }

    #[test]
    fn controlled_init_on_well_mixing_chain() {
        // Balanced chain, pilot 1000: phase 2's requirement is ~62 source
        // transitions, already satisfied — the estimate is trusted at once.
        let mut params = TwoStateParams::new(1e-2);
        params.heuristic = Heuristic::Controlled;
        params.n0 = Some(1000);
        let mut src = SyntheticTwoStateSource::new(0.5, 0.5, false, 1, 31).unwrap();
        let out = run(&mut src, &params).unwrap();
        assert!((out.alpha_hat - 0.5).abs() < 0.05, "α̂ = {}", out.alpha_hat);
        assert!((out.q_hat - 0.5).abs() < 0.05);
    }

    #[test]
    fn controlled_init_grows_until_rare_rate_is_trusted() {
        // A rare transition (α = 0.002) with a tiny pilot: controlled init
        // must extend far beyond n0 before phase 2's bound is met.
        let mut params = TwoStateParams::new(1e-2);
        params.heuristic = Heuristic::Controlled;
        params.n0 = Some(100);
        let mut src = SyntheticTwoStateSource::new(0.002, 0.5, false, 1, 17).unwrap();
        let mut probe = SyntheticTwoStateSource::new(0.002, 0.5, false, 1, 17).unwrap();
        let n0 = controlled_init(&mut probe, &params, 100).unwrap();
        assert_eq!(n0, 100);
        // n_{α,s} ≈ α(1−α)(z/(α/2))² ≈ 7700 source transitions required.
        assert!(probe.len() > 5_000, "init used only {} observations", probe.len());
        let out = run(&mut src, &params).unwrap();
        let truth = 0.002 / 0.502;
        assert!((out.q_hat - truth).abs() < 5.0 * 1e-2, "q̂ = {}", out.q_hat);
    }

    #[test]
    fn params_validation_and_n0_resolution() {
        assert!(TwoStateParams::new(0.0).validate().is_err());
        let mut p = TwoStateParams::new(1e-3);
        assert!(p.validate().is_ok());
        assert_eq!(p.resolve_n0().unwrap(), 1383, "AUTO picks the safe upper end");
        p.s = 0.5;
        p.r = 0.5;
        assert_eq!(p.resolve_n0().unwrap(), 1000, "AUTO falls back when the range is empty");
        p.n0 = Some(77);
        assert_eq!(p.resolve_n0().unwrap(), 77);
        p.k = 0;
        assert!(p.validate().is_err());
        p.k = 1;
        p.epsilon = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn heuristic_names_round_trip() {
        for h in Heuristic::ALL {
            assert_eq!(h.to_string().parse::<Heuristic>().unwrap(), h);
        }
        assert_eq!("pitfall".parse::<Heuristic>().unwrap(), Heuristic::PitfallAvoidance);
        assert!("bogus".parse::<Heuristic>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn run_invariants_on_random_chains(
            alpha in 0.05_f64..0.95,
            beta in 0.05_f64..0.95,
            seed in any::<u64>(),
            k in 1_usize..4,
            simple in any::<bool>(),
        ) {
            let mut params = TwoStateParams::new(0.02);
            params.k = k;
            params.heuristic = if simple { Heuristic::Simple } else { Heuristic::Controlled };
            let mut src = SyntheticTwoStateSource::new(alpha, beta, false, k, seed).unwrap();
            let out = run(&mut src, &params).unwrap();
            prop_assert!((0.0..=1.0).contains(&out.q_hat));
            prop_assert!(out.burn_in_t >= 1);
            prop_assert!(out.sample_obs >= 1);
            prop_assert!(out.observations >= out.burn_in_t + out.sample_obs);
            prop_assert_eq!(out.total_steps, 1 + (out.observations - 1) * k as u64);
            prop_assert!(out.iterations >= 1);
            prop_assert!((0.0..=1.0).contains(&out.alpha_hat));
            prop_assert!((0.0..=1.0).contains(&out.beta_hat));
        }
    }
}
