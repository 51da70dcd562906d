//! Walker/Vose alias tables: O(K) construction, O(1) sampling.

use rand::RngCore;

use crate::rngutil::{index, unit_f64};
use crate::{Error, Result};

/// An O(1) sampler for a fixed discrete distribution over `0..K`.
///
/// Sampling consumes exactly two generator draws — one `u64` for the column,
/// one `f64` for the threshold — regardless of the outcome; the fixed draw
/// count is part of the crate's reproducibility contract.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Builds the table for `dist`, which must be entrywise ≥ 0 and sum to 1
    /// within 1e-9.
    pub fn new(dist: &[f64]) -> Result<Self> {
        if dist.is_empty() {
            return Err(Error::InvalidParams("alias table over an empty distribution".into()));
        }
        if let Some(bad) = dist.iter().find(|&&w| !(w >= 0.0)) {
            return Err(Error::InvalidParams(format!("negative probability {bad} in distribution")));
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("distribution sums to {total} ≠ 1")));
        }
        let k = dist.len();
        // Vose's method over probabilities scaled by K: columns below 1 are
        // topped up from columns above 1.
        let mut scaled: Vec<f64> = dist.iter().map(|w| w * k as f64 / total).collect();
        let mut prob = vec![1.0; k];
        let mut alias: Vec<u32> = (0..k as u32).collect();
        let mut small: Vec<usize> = (0..k).filter(|&i| scaled[i] < 1.0).collect();
        let mut large: Vec<usize> = (0..k).filter(|&i| scaled[i] >= 1.0).collect();
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Leftovers on either stack are 1.0 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        Ok(Self { prob, alias })
    }

    /// Number of outcomes K.
    pub fn len(&self) -> usize {
        self.prob.len()
    }

    /// True if the table has a single outcome.
    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Draws one outcome (always two generator draws).
    #[inline]
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> usize {
        let col = index(rng, self.prob.len());
        let u = unit_f64(rng);
        if u < self.prob[col] {
            col
        } else {
            self.alias[col] as usize
        }
    }

    /// The exact distribution the table realizes, reconstructed from its
    /// decode map — used to verify construction error bounds.
    pub fn decoded_distribution(&self) -> Vec<f64> {
        let k = self.prob.len();
        let mut out = vec![0.0; k];
        for i in 0..k {
            out[i] += self.prob[i] / k as f64;
            out[self.alias[i] as usize] += (1.0 - self.prob[i]) / k as f64;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn point_mass_always_returns_zero() {
        let t = AliasTable::new(&[1.0]).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        assert!((0..1000).all(|_| t.sample(&mut rng) == 0));
    }

    #[test]
    fn fair_coin_within_binomial_bounds() {
        let t = AliasTable::new(&[0.5, 0.5]).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
        let trials = 1_000_000;
        let zeros = (0..trials).filter(|_| t.sample(&mut rng) == 0).count();
        let freq = zeros as f64 / trials as f64;
        // 3σ for Binomial(1e6, 0.5) is ±0.0015; the pinned bound is ±0.002.
        assert!((freq - 0.5).abs() < 0.002, "freq {freq}");
    }

    #[test]
    fn three_point_distribution_within_3_sigma() {
        let dist = [0.2, 0.3, 0.5];
        let t = AliasTable::new(&dist).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let trials = 1_000_000usize;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            counts[t.sample(&mut rng)] += 1;
        }
        for (i, &p) in dist.iter().enumerate() {
            let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
            let dev = (counts[i] as f64 - trials as f64 * p).abs();
            assert!(dev < 3.0 * sigma, "outcome {i}: dev {dev}, σ {sigma}");
        }
    }

    #[test]
    fn decode_map_reproduces_input_distribution() {
        // Across a spread of sizes, total-variation error ≤ 1e-12.
        for k in [1usize, 2, 3, 7, 64] {
            let weights: Vec<f64> = (1..=k).map(|i| i as f64).collect();
            let total: f64 = weights.iter().sum();
            let dist: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let t = AliasTable::new(&dist).unwrap();
            let decoded = t.decoded_distribution();
            let tv: f64 =
                dist.iter().zip(&decoded).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            assert!(tv <= 1e-12, "K={k}: tv {tv}");
        }
    }

    #[test]
    fn zero_probability_entries_are_never_drawn() {
        let t = AliasTable::new(&[0.0, 1.0, 0.0]).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
        assert!((0..10_000).all(|_| t.sample(&mut rng) == 1));
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(AliasTable::new(&[]).is_err());
        assert!(AliasTable::new(&[-0.1, 1.1]).is_err());
        assert!(AliasTable::new(&[0.3, 0.3]).is_err());
    }
}
