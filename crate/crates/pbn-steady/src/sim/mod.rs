//! Trajectory simulation: perturbation gating, alias-sampled realizations,
//! synchronous updates, and meta-state projection.
//!
//! # Reproducibility contract
//!
//! A cursor is driven by a Xoshiro256++ generator (period 2²⁵⁶−1) seeded with
//! a user `u64`. The draw order is fixed per release and is part of the
//! crate's contract:
//!
//! 1. at construction, `⌈n/64⌉` raw words for the uniform random initial
//!    state (none when an explicit initial state is supplied);
//! 2. per step, one `f64` for the perturbation gate;
//! 3. on a perturbation step, `n` `f64` draws per rejection round until the
//!    flip vector is nonzero;
//! 4. otherwise one alias-table sample — one `u64` plus one `f64` — per node,
//!    in node order `0..n`, regardless of the node's function count.
//!
//! Identical (model, seed, operation sequence) therefore reproduce identical
//! states and identical downstream estimates, bit for bit.

mod alias;
mod state;

pub use alias::AliasTable;
pub use state::NetworkState;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::model::PbnModel;
use crate::rngutil::unit_f64;
use crate::{Error, Result};

/// A conjunction of `node = value` literals defining meta state 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaPredicate {
    literals: Vec<(u32, bool)>,
}

impl MetaPredicate {
    /// Builds a predicate from literals; they must be non-empty, distinct,
    /// and in range for `n` nodes.
    pub fn new(literals: Vec<(u32, bool)>, n: usize) -> Result<Self> {
        if literals.is_empty() {
            return Err(Error::InvalidPredicate("empty conjunction".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &(node, _) in &literals {
            if node as usize >= n {
                return Err(Error::InvalidPredicate(format!(
                    "node {node} out of range for {n} nodes"
                )));
            }
            if !seen.insert(node) {
                return Err(Error::InvalidPredicate(format!("node {node} listed twice")));
            }
        }
        Ok(Self { literals })
    }

    /// Parses `"3=1&name=0"`: `&`-separated `node=value` literals, where the
    /// node is an index or a model node name; whitespace-insensitive.
    pub fn parse(text: &str, model: &PbnModel) -> Result<Self> {
        let mut literals = Vec::new();
        for clause in text.split('&') {
            let clause: String = clause.chars().filter(|c| !c.is_whitespace()).collect();
            let (node_text, value_text) = clause
                .split_once('=')
                .ok_or_else(|| Error::InvalidPredicate(format!("`{clause}` is not node=value")))?;
            let node = model.resolve_node(node_text)?;
            let value = match value_text {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::InvalidPredicate(format!("value `{other}` is not 0 or 1")))
                }
            };
            literals.push((node as u32, value));
        }
        Self::new(literals, model.n())
    }

    /// The conjunction's literals.
    pub fn literals(&self) -> &[(u32, bool)] {
        &self.literals
    }

    /// Evaluates the predicate against any bit source.
    #[inline]
    pub fn eval(&self, mut bit: impl FnMut(usize) -> bool) -> bool {
        self.literals.iter().all(|&(node, value)| bit(node as usize) == value)
    }

    /// Canonical text form (`index=value&...`).
    pub fn canonical_text(&self) -> String {
        self.literals
            .iter()
            .map(|&(node, value)| format!("{node}={}", u8::from(value)))
            .collect::<Vec<_>>()
            .join("&")
    }
}

/// Projects a state to its meta-state bit: 1 iff every literal is satisfied.
#[inline]
pub fn project(state: &NetworkState, pred: &MetaPredicate) -> u8 {
    pred.eval(|i| state.get(i)) as u8
}

/// Validation hook controlling the perturbation gate (see [`SimCursor::force_gate`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateForce {
    /// Normal operation: γ = 0 with probability (1−p)ⁿ.
    Off,
    /// Every step takes the function-update path (as if γ = 0).
    AlwaysFunctions,
    /// Every step takes the perturbation path (as if γ ≠ 0).
    AlwaysPerturbation,
}

/// A running simulation: one model, one generator, one current state.
///
/// Cursors are single-threaded; run many cursors with distinct seeds over one
/// shared model for parallel work.
pub struct SimCursor<'m> {
    model: &'m PbnModel,
    state: NetworkState,
    scratch: NetworkState,
    flip_words: Vec<u64>,
    tables: Vec<AliasTable>,
    rng: Xoshiro256PlusPlus,
    steps: u64,
    /// γ = 0 iff the gate draw is below this; (1−p)ⁿ in normal operation.
    gate_threshold: f64,
    gamma_zero_prob: f64,
}

impl<'m> SimCursor<'m> {
    /// Creates a cursor seeded with `seed`, starting from a uniformly random
    /// initial state drawn from the same generator.
    pub fn new(model: &'m PbnModel, seed: u64) -> Result<Self> {
        let mut cursor = Self::with_initial_state(model, seed, NetworkState::zero(model.n()))?;
        let mut words = vec![0u64; model.n().div_ceil(64)];
        for w in &mut words {
            *w = cursor.rng.next_u64();
        }
        // Mask tail bits beyond n so the packed words stay canonical.
        let tail = model.n() % 64;
        if tail != 0 {
            *words.last_mut().expect("at least one word") &= (1u64 << tail) - 1;
        }
        cursor.state.xor_words(&words);
        Ok(cursor)
    }

    /// Creates a cursor starting from an explicit initial state.
    pub fn with_initial_state(
        model: &'m PbnModel,
        seed: u64,
        state: NetworkState,
    ) -> Result<Self> {
        if state.n() != model.n() {
            return Err(Error::InvalidParams(format!(
                "initial state covers {} nodes, model has {}",
                state.n(),
                model.n()
            )));
        }
        let tables: Result<Vec<AliasTable>> = model
            .nodes()
            .iter()
            .map(|nd| {
                let dist: Vec<f64> = nd.functions().iter().map(|f| f.selection_prob()).collect();
                AliasTable::new(&dist)
            })
            .collect();
        let gamma_zero_prob = (1.0 - model.perturbation_p()).powi(model.n() as i32);
        Ok(Self {
            model,
            scratch: state.clone(),
            flip_words: vec![0; state.n().div_ceil(64)],
            state,
            tables: tables?,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            steps: 0,
            gate_threshold: gamma_zero_prob,
            gamma_zero_prob,
        })
    }

    /// The model being simulated.
    pub fn model(&self) -> &'m PbnModel {
        self.model
    }

    /// The current state.
    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    /// Number of `step` calls since construction.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Validation hook: forces the perturbation gate one way without touching
    /// the draw sequence (the gate draw is still consumed). Used by tests to
    /// exercise the two step paths separately; normal callers never need it.
    pub fn force_gate(&mut self, force: GateForce) {
        self.gate_threshold = match force {
            GateForce::Off => self.gamma_zero_prob,
            // The gate draw is uniform in [0,1): always below 1, never below 0.
            GateForce::AlwaysFunctions => 1.0,
            GateForce::AlwaysPerturbation => 0.0,
        };
    }

    /// Advances one synchronous step and returns the new state.
    ///
    /// With probability 1−(1−p)ⁿ the step is a perturbation: the state is
    /// XORed with a flip vector distributed as n independent Bernoulli(p)
    /// bits conditioned on being nonzero. Otherwise every node samples one
    /// of its predictors by selection probability and all nodes update
    /// simultaneously from the current state.
    pub fn step(&mut self) -> &NetworkState {
        let n = self.model.n();
        let gate = unit_f64(&mut self.rng);
        if gate < self.gate_threshold {
            // Function step: synchronous update into the scratch state.
            for i in 0..n {
                let f = self.tables[i].sample(&mut self.rng);
                let state = &self.state;
                let value = self.model.nodes()[i].functions()[f].eval(|j| state.get(j));
                self.scratch.set(i, value);
            }
            std::mem::swap(&mut self.state, &mut self.scratch);
        } else {
            // Perturbation step: redraw the flip vector until it is nonzero,
            // which realizes the conditional distribution exactly. Every
            // round consumes exactly n draws.
            let p = self.model.perturbation_p();
            loop {
                let mut any = 0u64;
                self.flip_words.iter_mut().for_each(|w| *w = 0);
                for i in 0..n {
                    if unit_f64(&mut self.rng) < p {
                        self.flip_words[i / 64] |= 1u64 << (i % 64);
                        any = 1;
                    }
                }
                if any != 0 {
                    break;
                }
            }
            self.state.xor_words(&self.flip_words);
        }
        self.steps += 1;
        &self.state
    }

    /// Advances `steps` steps; semantically identical to calling [`step`]
    /// that many times on the same seed and draw sequence.
    ///
    /// [`step`]: Self::step
    pub fn simulate(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }
}

/// Samples the subsampled binary sequence `Z_t^{(k)} = Z_{1+(t−1)k}` for
/// `t = 1..=count`: the projection of every k-th state of the underlying
/// trajectory. Advances the cursor by `1 + (count−1)·k` steps.
pub fn sample_binary_sequence(
    cursor: &mut SimCursor,
    pred: &MetaPredicate,
    count: usize,
    k: usize,
) -> Vec<u8> {
    assert!(k >= 1, "subsampling lag must be at least 1");
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        let advance = if t == 0 { 1 } else { k as u64 };
        cursor.simulate(advance);
        out.push(project(cursor.state(), pred));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GeneratorSpec, NodeSpec, PredictorFunction};

    fn identity_1node(p: f64) -> PbnModel {
        let f = PredictorFunction::new(1.0, vec![0], &[false, true]).unwrap();
        PbnModel::new(vec![NodeSpec::new(None, vec![f]).unwrap()], p).unwrap()
    }

    /// 2-node swap network: node0 := node1, node1 := node0.
    fn swap_2node(p: f64) -> PbnModel {
        let f0 = PredictorFunction::new(1.0, vec![1], &[false, true]).unwrap();
        let f1 = PredictorFunction::new(1.0, vec![0], &[false, true]).unwrap();
        PbnModel::new(
            vec![NodeSpec::new(None, vec![f0]).unwrap(), NodeSpec::new(None, vec![f1]).unwrap()],
            p,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_synchronous_update_at_p_zero() {
        let m = swap_2node(0.0);
        let start = NetworkState::from_bits(&[true, false]);
        let mut cursor = SimCursor::with_initial_state(&m, 1, start).unwrap();
        let next = cursor.step();
        assert_eq!(next.bits(), vec![false, true]);
        let next = cursor.step();
        assert_eq!(next.bits(), vec![true, false]);
    }

    #[test]
    fn one_node_p_half_flips_half_the_time() {
        // With n=1 every perturbation is a flip and the identity function
        // otherwise holds the state, so P(flip per step) = p = 0.5.
        let m = identity_1node(0.5);
        let mut cursor =
            SimCursor::with_initial_state(&m, 7, NetworkState::from_bits(&[false])).unwrap();
        let steps = 1_000_000;
        let mut flips = 0u64;
        let mut prev = false;
        for _ in 0..steps {
            let cur = cursor.step().get(0);
            flips += (cur != prev) as u64;
            prev = cur;
        }
        let freq = flips as f64 / steps as f64;
        let sigma = (0.25f64 / steps as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "flip frequency {freq}");
    }

    #[test]
    fn forced_function_path_matches_brute_force_supports() {
        // 3-node model with a 2-function node: conditional on γ=0, each step
        // must land in the support of the per-node function applications.
        let f0a = PredictorFunction::new(0.5, vec![1, 2], &[false, true, true, false]).unwrap();
        let f0b = PredictorFunction::new(0.5, vec![0], &[true, false]).unwrap();
        let f1 = PredictorFunction::new(1.0, vec![2], &[false, true]).unwrap();
        let f2 = PredictorFunction::new(1.0, vec![0], &[true, false]).unwrap();
        let m = PbnModel::new(
            vec![
                NodeSpec::new(None, vec![f0a, f0b]).unwrap(),
                NodeSpec::new(None, vec![f1]).unwrap(),
                NodeSpec::new(None, vec![f2]).unwrap(),
            ],
            0.3,
        )
        .unwrap();
        let mut cursor = SimCursor::new(&m, 11).unwrap();
        cursor.force_gate(GateForce::AlwaysFunctions);
        for _ in 0..500 {
            let before = cursor.state().clone();
            let after = cursor.step().clone();
            // Enumerate both realizations of node 0; nodes 1 and 2 are
            // deterministic.
            let n1 = before.get(2);
            let n2 = !before.get(0);
            let n0_options = [
                before.get(1) ^ before.get(2), // f0a: XOR of parents 1,2
                !before.get(0),                // f0b: NOT of parent 0
            ];
            assert_eq!(after.get(1), n1);
            assert_eq!(after.get(2), n2);
            assert!(n0_options.contains(&after.get(0)));
        }
    }

    #[test]
    fn forced_perturbation_path_always_flips_something() {
        let m = swap_2node(0.01);
        let mut cursor = SimCursor::new(&m, 3).unwrap();
        cursor.force_gate(GateForce::AlwaysPerturbation);
        for _ in 0..200 {
            let before = cursor.state().clone();
            let after = cursor.step().clone();
            assert_ne!(before, after, "perturbation must flip at least one node");
        }
    }

    #[test]
    fn perturbation_frequency_matches_closed_form() {
        // Over a long run, the fraction of steps that are perturbation steps
        // is 1−(1−p)ⁿ. Detect perturbation steps on the swap network by
        // forcing nothing: a function step always lands in {swap}, and when
        // the two bits are equal a swap is invisible, so instead compare on a
        // 2-node model whose function step is the identity.
        let f0 = PredictorFunction::new(1.0, vec![0], &[false, true]).unwrap();
        let f1 = PredictorFunction::new(1.0, vec![1], &[false, true]).unwrap();
        let m = PbnModel::new(
            vec![NodeSpec::new(None, vec![f0]).unwrap(), NodeSpec::new(None, vec![f1]).unwrap()],
            0.2,
        )
        .unwrap();
        let mut cursor = SimCursor::new(&m, 5).unwrap();
        let steps = 200_000;
        let mut perturbed = 0u64;
        for _ in 0..steps {
            let before = cursor.state().clone();
            let after = cursor.step().clone();
            perturbed += (before != after) as u64;
        }
        let expected = 1.0 - (1.0f64 - 0.2).powi(2); // 0.36
        let freq = perturbed as f64 / steps as f64;
        let sigma = (expected * (1.0 - expected) / steps as f64).sqrt();
        assert!((freq - expected).abs() < 3.0 * sigma, "freq {freq} vs {expected}");
    }

    #[test]
    fn simulate_equals_repeated_step() {
        let spec = GeneratorSpec {
            node_count: 40,
            min_funcs: 1,
            max_funcs: 3,
            min_parents: 1,
            max_parents: 4,
            perturbation_p: 0.05,
            seed: 9,
        };
        let m = PbnModel::generate(&spec).unwrap();
        let mut a = SimCursor::new(&m, 123).unwrap();
        let mut b = SimCursor::new(&m, 123).unwrap();
        a.simulate(1000);
        for _ in 0..1000 {
            b.step();
        }
        assert_eq!(a.state(), b.state());
        assert_eq!(a.steps(), 1000);
        // steps=0 leaves the state untouched.
        let before = a.state().clone();
        a.simulate(0);
        assert_eq!(a.state(), &before);
    }

    #[test]
    fn determinism_across_cursors() {
        let m = swap_2node(0.1);
        let mut a = SimCursor::new(&m, 42).unwrap();
        let mut b = SimCursor::new(&m, 42).unwrap();
        for _ in 0..500 {
            assert_eq!(a.step(), b.step());
        }
    }

    #[test]
    fn projection_matches_literal_check() {
        let spec = GeneratorSpec {
            node_count: 12,
            min_funcs: 1,
            max_funcs: 2,
            min_parents: 1,
            max_parents: 3,
            perturbation_p: 0.1,
            seed: 17,
        };
        let m = PbnModel::generate(&spec).unwrap();
        let pred = MetaPredicate::new(vec![(3, true), (7, false)], m.n()).unwrap();
        let mut cursor = SimCursor::new(&m, 8).unwrap();
        for _ in 0..10_000 {
            let s = cursor.step().clone();
            let expected = u8::from(s.get(3) && !s.get(7));
            assert_eq!(project(&s, &pred), expected);
        }
    }

    #[test]
    fn predicate_parsing_and_validation() {
        let m = swap_2node(0.1);
        let pred = MetaPredicate::parse(" 0 = 1 & 1 = 0 ", &m).unwrap();
        assert_eq!(pred.literals(), &[(0, true), (1, false)]);
        assert_eq!(pred.canonical_text(), "0=1&1=0");
        assert!(MetaPredicate::parse("0=1&0=0", &m).is_err());
        assert!(MetaPredicate::parse("5=1", &m).is_err());
        assert!(MetaPredicate::parse("0=2", &m).is_err());
        assert!(MetaPredicate::parse("", &m).is_err());
        let one = MetaPredicate::new(vec![(1, true)], 2).unwrap();
        let s = NetworkState::from_bits(&[false, true]);
        assert_eq!(project(&s, &one), 1);
        let pred2 = MetaPredicate::new(vec![(0, true), (1, false)], 2).unwrap();
        assert_eq!(project(&s, &pred2), 0);
    }

    #[test]
    fn subsampled_sequence_index_arithmetic() {
        // k=3, count=2 must advance by exactly 1+(2−1)·3 = 4 steps and
        // observe the states at offsets 1 and 4.
        let m = identity_1node(0.3);
        let pred = MetaPredicate::new(vec![(0, true)], 1).unwrap();
        let mut a =
            SimCursor::with_initial_state(&m, 21, NetworkState::from_bits(&[false])).unwrap();
        let mut b =
            SimCursor::with_initial_state(&m, 21, NetworkState::from_bits(&[false])).unwrap();
        let seq = sample_binary_sequence(&mut a, &pred, 2, 3);
        assert_eq!(a.steps(), 4);
        let mut states = Vec::new();
        for _ in 0..4 {
            states.push(b.step().get(0));
        }
        assert_eq!(seq, vec![u8::from(states[0]), u8::from(states[3])]);

        // k=1: five consecutive projections.
        let mut c =
            SimCursor::with_initial_state(&m, 22, NetworkState::from_bits(&[false])).unwrap();
        let seq = sample_binary_sequence(&mut c, &pred, 5, 1);
        assert_eq!(c.steps(), 5);
        assert_eq!(seq.len(), 5);
    }

    #[test]
    fn random_initial_state_is_reproducible() {
        let m = swap_2node(0.1);
        let a = SimCursor::new(&m, 99).unwrap();
        let b = SimCursor::new(&m, 99).unwrap();
        assert_eq!(a.state(), b.state());
    }
}
