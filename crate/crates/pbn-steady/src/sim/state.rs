//! Packed network states.

/// The joint value of all `n` nodes: node `i` lives at bit `i % 64` of word
/// `i / 64`. Reading the bits as an integer with node 0 least significant
/// gives the state index used by the exact module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    words: Vec<u64>,
    n: usize,
}

impl NetworkState {
    /// The all-zeros state over `n` nodes.
    pub fn zero(n: usize) -> Self {
        assert!(n > 0, "state must cover at least one node");
        Self { words: vec![0; n.div_ceil(64)], n }
    }

    /// Builds a state from explicit bits.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut state = Self::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            state.set(i, b);
        }
        state
    }

    /// Builds the state whose integer encoding is `index` (node 0 = LSB).
    pub fn from_index(index: u64, n: usize) -> Self {
        assert!(n <= 64 && (n == 64 || index < 1u64 << n));
        let mut state = Self::zero(n);
        state.words[0] = index;
        state
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Node `i`'s value.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Sets node `i`.
    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.n);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Flips node `i`.
    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// XORs a packed flip vector into the state (used by perturbation steps).
    #[inline]
    pub(crate) fn xor_words(&mut self, flips: &[u64]) {
        debug_assert_eq!(flips.len(), self.words.len());
        for (w, f) in self.words.iter_mut().zip(flips) {
            *w ^= f;
        }
    }

    /// The state's integer encoding, available for networks of ≤ 64 nodes.
    pub fn index(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.words[0])
    }

    /// All node values in index order.
    pub fn bits(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.get(i)).collect()
    }
}
