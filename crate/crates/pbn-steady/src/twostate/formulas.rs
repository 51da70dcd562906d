//! Closed-form burn-in, sample-size, and pilot-safety formulas for the
//! two-state abstraction.
//!
//! For the 2×2 chain with transition probabilities α = P(0→1), β = P(1→0),
//! the second eigenvalue is λ = 1−α−β and the stationary distribution is
//! π = (β, α)/(α+β). Every formula here is a direct evaluation of the
//! corresponding closed form; callers apply ceilings and floors.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Φ⁻¹(½(1+s)): the two-sided standard-normal quantile for confidence `s`.
pub fn normal_quantile_two_sided(s: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(0.5 * (1.0 + s))
}

/// Number of burn-in iterations (two-state scale) after which both rows of
/// Pᵗ are within ε of the stationary distribution:
///
/// m(α,β) = log(ε(α+β) / max(α,β)) / log(|1−α−β|).
///
/// Special cases: α+β = 1 means λ = 0 and the chain is stationary after one
/// step (returns 0; the caller's ceiling-and-floor produces t = 1); α+β = 2
/// means λ = −1, the abstraction is periodic and burn-in is undefined. A
/// single zero rate is legal — estimates of exactly 0 do occur — and the
/// formula degrades gracefully to ln(ε)/ln|λ|; both rates zero is an error
/// (the chain never moves).
pub fn burn_in_m(alpha: f64, beta: f64, epsilon: f64) -> Result<f64> {
    check_rate("alpha", alpha)?;
    check_rate("beta", beta)?;
    check_not_frozen(alpha, beta)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon {epsilon} outside (0,1)")));
    }
    let lambda = 1.0 - alpha - beta;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    if lambda.abs() >= 1.0 {
        // Reachable only at α = β = 1 (λ = −1): alternation never mixes.
        return Err(Error::PeriodicAbstraction);
    }
    let numerator = (epsilon * (alpha + beta) / alpha.max(beta)).ln();
    Ok(numerator / lambda.abs().ln())
}

/// Required post-burn-in sample size (two-state scale) for half-width `r` at
/// confidence `s`:
///
/// n(α,β) = [αβ(2−α−β)/(α+β)³] · [Φ⁻¹(½(1+s))]² / r².
pub fn sample_size_n(alpha: f64, beta: f64, r: f64, s: f64) -> Result<f64> {
    check_rate("alpha", alpha)?;
    check_rate("beta", beta)?;
    check_not_frozen(alpha, beta)?;
    check_precision_confidence(r, s)?;
    let z = normal_quantile_two_sided(s);
    Ok(asymptotic_variance(alpha, beta) * (z / r).powi(2))
}

/// The asymptotic variance of the two-state occupancy estimator,
/// σ²_as = αβ(2−α−β)/(α+β)³ — the CLT variance constant for the mean of the
/// dependent binary sequence. Zero when either rate is zero; NaN when both
/// are (guarded upstream).
pub fn asymptotic_variance(alpha: f64, beta: f64) -> f64 {
    // Grouping 2−(α+β) keeps the evaluation bitwise symmetric in (α, β).
    let sum = alpha + beta;
    alpha * beta * (2.0 - sum) / sum.powi(3)
}

/// The contiguous range of pilot sample sizes `n₀ ≥ 2` that can never be
/// invalidated by their own resolution floor, i.e. all integers with
///
/// n(1/n₀, 1/n₀) ≥ 2n₀  and  n(1/n₀, 1) ≥ 2n₀,
///
/// evaluated through the closed forms n(1/n₀,1/n₀) = (n₀−1)/(4c) and
/// n(1/n₀,1) = (n₀−1)n₀ / (c(1+n₀)³) with c = r²/Φ⁻¹(½(1+s))².
///
/// Intuition: a pilot of size n₀ cannot estimate a transition probability
/// smaller than 1/n₀, so if even the extreme estimates it can produce demand
/// fewer than 2n₀ further samples, the pilot can end the run while grossly
/// undersampled. The returned interval (inclusive) avoids that by
/// construction; `None` means no pilot size is safe at this (r, s).
pub fn safe_n0_range(r: f64, s: f64) -> Result<Option<(u64, u64)>> {
    check_precision_confidence(r, s)?;
    let z = normal_quantile_two_sided(s);
    let c = (r / z).powi(2);
    let safe = |n0: u64| -> bool {
        let x = n0 as f64;
        let n_equal = (x - 1.0) / (4.0 * c);
        let n_one = (x - 1.0) * x / (c * (1.0 + x).powi(3));
        n_equal >= 2.0 * x && n_one >= 2.0 * x
    };
    if !safe(2) {
        return Ok(None);
    }
    // (n₀−1)/(1+n₀)³ is maximal at n₀ = 2 and strictly decreasing beyond, so
    // the safe set is a contiguous prefix [2, upper]: exponential search for
    // the first unsafe size, then bisect the boundary.
    let mut hi = 4u64;
    while safe(hi) {
        hi = hi.saturating_mul(2);
        if hi > 1 << 40 {
            return Err(Error::InvalidParams(format!(
                "safe n0 range for r={r}, s={s} exceeds 2^40; r is too small to scan"
            )));
        }
    }
    let mut lo = 2u64; // invariant: safe(lo) && !safe(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if safe(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((2, lo)))
}

fn check_rate(label: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParams(format!("{label} = {v} outside [0,1]")));
    }
    Ok(())
}

fn check_not_frozen(alpha: f64, beta: f64) -> Result<()> {
    if alpha == 0.0 && beta == 0.0 {
        return Err(Error::InvalidParams(
            "alpha and beta are both zero: the abstraction never moves".into(),
        ));
    }
    Ok(())
}

fn check_precision_confidence(r: f64, s: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!("precision r = {r} must be positive")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParams(format!("confidence s = {s} outside (0,1)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 2×2 transition matrix power by exponentiation-by-squaring; the
    /// independent oracle for the burn-in condition.
    fn matrix_power(p: [[f64; 2]; 2], t: u64) -> [[f64; 2]; 2] {
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut c = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            c
        };
        let mut result = [[1.0, 0.0], [0.0, 1.0]];
        let mut base = p;
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                result = mul(result, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        result
    }

    fn max_deviation_from_stationary(alpha: f64, beta: f64, t: u64) -> f64 {
        let p = [[1.0 - alpha, alpha], [beta, 1.0 - beta]];
        let pt = matrix_power(p, t);
        let pi = [beta / (alpha + beta), alpha / (alpha + beta)];
        let mut worst: f64 = 0.0;
        for row in pt {
            for j in 0..2 {
                worst = worst.max((row[j] - pi[j]).abs());
            }
        }
        worst
    }

    #[test]
    fn documented_trace_values() {
        // α = 1/1918, β = 1, ε = 1e-6 → m ≈ 1.8276, so t = 2;
        // same α, β with r = 1e-3, s = 0.95 → ⌈n⌉ = 1999.
        let alpha = 1.0 / 1918.0;
        let m = burn_in_m(alpha, 1.0, 1e-6).unwrap();
        assert!((m - 1.8276).abs() < 2e-4, "m = {m}");
        assert_eq!(m.ceil() as u64, 2);
        let n = sample_size_n(alpha, 1.0, 1e-3, 0.95).unwrap();
        assert_eq!(n.ceil() as u64, 1999, "n = {n}");
    }

    #[test]
    fn one_step_convergence_when_rates_sum_to_one() {
        assert_eq!(burn_in_m(0.3, 0.7, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn periodic_abstraction_is_an_error() {
        assert!(matches!(burn_in_m(1.0, 1.0, 1e-6), Err(Error::PeriodicAbstraction)));
    }

    #[test]
    fn burn_in_satisfies_the_epsilon_condition_by_matrix_power() {
        // At t = ⌈m⌉ the deviation must be < ε; at t−1 it must be ≥ ε
        // whenever m's fractional part is well inside (0,1) — i.e. the bound
        // is tight, not merely sufficient.
        let alpha = 0.0020214;
        let beta = 0.96;
        for epsilon in [1e-6, 1e-10] {
            let m = burn_in_m(alpha, beta, epsilon).unwrap();
            let t = m.ceil().max(1.0) as u64;
            let at_t = max_deviation_from_stationary(alpha, beta, t);
            assert!(at_t < epsilon, "ε={epsilon}: deviation {at_t} at t={t}");
            if m.fract() > 0.05 && m > 1.0 {
                let at_prev = max_deviation_from_stationary(alpha, beta, t - 1);
                assert!(at_prev >= epsilon, "ε={epsilon}: deviation {at_prev} at t−1");
            }
        }
    }

    #[test]
    fn sample_size_closed_form_cases() {
        // Equal rates at the resolution floor: n(1/n₀,1/n₀) = (n₀−1)/(4c).
        let s = 0.95;
        let r = 1e-3;
        let z = normal_quantile_two_sided(s);
        let c = (r / z).powi(2);
        for n0 in [10.0_f64, 100.0, 1920.0] {
            let direct = sample_size_n(1.0 / n0, 1.0 / n0, r, s).unwrap();
            let closed = (n0 - 1.0) / (4.0 * c);
            assert!(
                ((direct - closed) / closed).abs() < 1e-12,
                "n0={n0}: {direct} vs {closed}"
            );
            // And the mixed case n(1/n₀, 1) = (n₀−1)n₀/(c(1+n₀)³).
            let direct = sample_size_n(1.0 / n0, 1.0, r, s).unwrap();
            let closed = (n0 - 1.0) * n0 / (c * (1.0 + n0).powi(3));
            assert!(
                ((direct - closed) / closed).abs() < 1e-12,
                "n0={n0}: {direct} vs {closed}"
            );
        }
    }

    #[test]
    fn sample_size_is_symmetric() {
        for (a, b) in [(0.1, 0.9), (0.01, 0.3), (0.5, 0.25), (1.0 / 1918.0, 1.0)] {
            let ab = sample_size_n(a, b, 1e-3, 0.95).unwrap();
            let ba = sample_size_n(b, a, 1e-3, 0.95).unwrap();
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn asymptotic_variance_hand_values() {
        assert!((asymptotic_variance(0.5, 0.5) - 0.25).abs() < 1e-15);
        assert_eq!(asymptotic_variance(1.0, 1.0), 0.0);
    }

    #[test]
    fn workload_is_unimodal_in_alpha_for_fixed_beta() {
        // For fixed β, n(·,β) increases up to α₁ = 2−√(β²−2β+4) and
        // decreases afterwards.
        for beta in [0.2f64, 0.5, 0.9] {
            let alpha1 = 2.0 - (beta * beta - 2.0 * beta + 4.0).sqrt();
            let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
            let values: Vec<f64> =
                grid.iter().map(|&a| sample_size_n(a, beta, 1e-3, 0.95).unwrap()).collect();
            for (a_pair, v_pair) in grid.windows(2).zip(values.windows(2)) {
                if a_pair[1] <= alpha1 {
                    assert!(v_pair[1] >= v_pair[0], "β={beta}: rise before α₁");
                } else if a_pair[0] >= alpha1 {
                    assert!(v_pair[1] <= v_pair[0], "β={beta}: fall after α₁");
                }
            }
        }
    }

    #[test]
    fn safe_ranges_match_the_documented_table() {
        let cases = [
            (0.01, 0.95, Some((2, 136))),
            (0.001, 0.9, Some((2, 1161))),
            (0.001, 0.95, Some((2, 1383))),
            (0.001, 0.975, Some((2, 1582))),
            (0.0001, 0.9, Some((2, 11628))),
            (0.0001, 0.95, Some((2, 13857))),
            (0.0001, 0.975, Some((2, 15847))),
        ];
        for (r, s, expected) in cases {
            let got = safe_n0_range(r, s).unwrap();
            assert_eq!(got, expected, "r={r}, s={s}");
        }
    }

    #[test]
    fn safe_range_re_derived_rows() {
        // Independent re-derivation finds nonempty ranges for the two (r=0.01)
        // cells sometimes quoted as empty; the closed forms give these bounds.
        assert_eq!(safe_n0_range(0.01, 0.9).unwrap(), Some((2, 114)));
        assert_eq!(safe_n0_range(0.01, 0.975).unwrap(), Some((2, 156)));
    }

    #[test]
    fn safe_range_empty_when_precision_is_loose() {
        // With r this large even n₀ = 2 fails the twice-the-pilot condition.
        assert_eq!(safe_n0_range(0.5, 0.5).unwrap(), None);
    }

    #[test]
    fn quantile_matches_reference_value() {
        // Φ⁻¹(0.975), cross-checked against an independent high-precision
        // evaluation; agreement to 1 ulp.
        let z = normal_quantile_two_sided(0.95);
        assert!((z - 1.959_963_984_540_053_8).abs() < 1e-15, "z = {z}");
    }

    #[test]
    fn parameter_validation() {
        assert!(burn_in_m(-0.1, 0.5, 1e-6).is_err());
        assert!(burn_in_m(0.5, 1.5, 1e-6).is_err());
        assert!(burn_in_m(0.0, 0.0, 1e-6).is_err());
        assert!(burn_in_m(0.5, 0.5, 0.0).is_err());
        assert!(sample_size_n(0.5, 0.5, 0.0, 0.95).is_err());
        assert!(sample_size_n(0.0, 0.0, 1e-3, 0.95).is_err());
        assert!(sample_size_n(0.5, 0.5, 1e-3, 1.0).is_err());
        assert!(safe_n0_range(0.0, 0.95).is_err());
    }

    #[test]
    fn single_zero_rate_degrades_gracefully() {
        // α = 0 reduces the burn-in to ln(ε)/ln(1−β) and the sample size
        // to 0 (the estimator is exactly degenerate).
        let m = burn_in_m(0.0, 0.5, 1e-6).unwrap();
        assert!((m - (1e-6_f64).ln() / 0.5_f64.ln()).abs() < 1e-12);
        assert_eq!(sample_size_n(0.0, 0.5, 1e-3, 0.95).unwrap(), 0.0);
        assert_eq!(asymptotic_variance(0.0, 0.5), 0.0);
    }
}
