//! PBN model description: validation, text format, generation, perturbations.
//!
//! A network is a list of nodes; node `i` owns a non-empty set of predictor
//! functions `f_j^{(i)}` with selection probabilities `c_j^{(i)}` summing to
//! one, plus a network-wide perturbation parameter `p`. Truth tables are
//! indexed by reading the parent values as a binary number with the FIRST
//! listed parent as the most significant bit; this convention is part of the
//! text format and is relied on by every other module.

mod generate;
mod text;

pub use generate::GeneratorSpec;

use crate::{Error, Result};

/// Hard cap on parents per function: a truth table holds 2^|parents| bits, so
/// this bounds per-function memory at 2 MiB.
pub const MAX_PARENTS: usize = 24;

/// Tolerance for the per-node selection-probability sum invariant.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// One Boolean predictor function: an ordered parent list, a packed truth
/// table of length 2^|parents|, and the probability of being selected.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorFunction {
    selection_prob: f64,
    parents: Vec<u32>,
    /// Output bits packed LSB-first: bit `j % 64` of word `j / 64` is the
    /// output for parent assignment `j`.
    table: Vec<u64>,
}

impl PredictorFunction {
    /// Builds a function from explicit output bits (`outputs[j]` is the value
    /// for parent-assignment index `j`, MSB-first over `parents`).
    pub fn new(selection_prob: f64, parents: Vec<u32>, outputs: &[bool]) -> Result<Self> {
        if parents.len() > MAX_PARENTS {
            return Err(Error::InvalidModel(format!(
                "function has {} parents; at most {MAX_PARENTS} are supported",
                parents.len()
            )));
        }
        let expected = 1usize << parents.len();
        if outputs.len() != expected {
            return Err(Error::InvalidModel(format!(
                "truth table has {} entries, expected {expected} for {} parents",
                outputs.len(),
                parents.len()
            )));
        }
        if !(0.0..=1.0).contains(&selection_prob) {
            return Err(Error::InvalidModel(format!(
                "selection probability {selection_prob} outside [0,1]"
            )));
        }
        let mut table = vec![0u64; expected.div_ceil(64)];
        for (j, &bit) in outputs.iter().enumerate() {
            if bit {
                table[j / 64] |= 1 << (j % 64);
            }
        }
        Ok(Self { selection_prob, parents, table })
    }

    /// Probability of this function being selected at a step.
    pub fn selection_prob(&self) -> f64 {
        self.selection_prob
    }

    /// Ordered parent node indices (first parent = most significant table bit).
    pub fn parents(&self) -> &[u32] {
        &self.parents
    }

    /// Number of parents.
    pub fn parent_count(&self) -> usize {
        self.parents.len()
    }

    /// Truth-table output for parent-assignment index `j`.
    pub fn output(&self, j: usize) -> bool {
        debug_assert!(j < (1 << self.parents.len()));
        self.table[j / 64] >> (j % 64) & 1 == 1
    }

    /// Evaluates the function against any bit source (a network state, an
    /// integer state, ...). `bit(i)` must return node `i`'s current value.
    #[inline]
    pub fn eval(&self, mut bit: impl FnMut(usize) -> bool) -> bool {
        let mut idx = 0usize;
        for &p in &self.parents {
            idx = (idx << 1) | bit(p as usize) as usize;
        }
        self.output(idx)
    }

    /// True if every truth-table entry equals `value`.
    pub fn is_constant(&self, value: bool) -> bool {
        (0..1 << self.parents.len()).all(|j| self.output(j) == value)
    }
}

/// One node: an optional name and its predictor-function set.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    name: Option<String>,
    functions: Vec<PredictorFunction>,
}

impl NodeSpec {
    /// Builds a node; the function set must be non-empty.
    pub fn new(name: Option<String>, functions: Vec<PredictorFunction>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidModel("node has no predictor functions".into()));
        }
        Ok(Self { name, functions })
    }

    /// Optional node name (usable in predicates in place of the index).
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// The node's predictor functions.
    pub fn functions(&self) -> &[PredictorFunction] {
        &self.functions
    }
}

/// A complete probabilistic Boolean network.
#[derive(Debug, Clone, PartialEq)]
pub struct PbnModel {
    nodes: Vec<NodeSpec>,
    perturbation_p: f64,
}

impl PbnModel {
    /// Builds and validates a model. `perturbation_p` must lie in (0,1), or
    /// be exactly 0 for deterministic-update networks (accepted only by the
    /// exact module; the estimator requires ergodicity).
    pub fn new(nodes: Vec<NodeSpec>, perturbation_p: f64) -> Result<Self> {
        let model = Self { nodes, perturbation_p };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidModel("network has no nodes".into()));
        }
        if !self.perturbation_p.is_finite()
            || self.perturbation_p < 0.0
            || self.perturbation_p >= 1.0
        {
            return Err(Error::InvalidModel(format!(
                "perturbation parameter {} outside (0,1) (or exactly 0)",
                self.perturbation_p
            )));
        }
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.functions.is_empty() {
                return Err(Error::InvalidModel(format!("node {i} has no predictor functions")));
            }
            let sum: f64 = node.functions.iter().map(|f| f.selection_prob).sum();
            if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "node {i}: selection probabilities sum to {sum} ≠ 1"
                )));
            }
            for f in &node.functions {
                let mut seen = std::collections::HashSet::new();
                for &p in &f.parents {
                    if p as usize >= n {
                        return Err(Error::InvalidModel(format!(
                            "node {i}: parent index {p} out of range for {n} nodes"
                        )));
                    }
                    if !seen.insert(p) {
                        return Err(Error::InvalidModel(format!(
                            "node {i}: duplicate parent index {p}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of nodes `n`.
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Perturbation parameter `p`.
    pub fn perturbation_p(&self) -> f64 {
        self.perturbation_p
    }

    /// All nodes in index order.
    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    /// One node by index.
    pub fn node(&self, i: usize) -> Result<&NodeSpec> {
        self.nodes
            .get(i)
            .ok_or_else(|| Error::IndexOutOfRange(format!("node {i} of {}", self.nodes.len())))
    }

    /// Resolves a predicate token to a node index: a decimal integer is an
    /// index, anything else must match a node name exactly.
    pub fn resolve_node(&self, token: &str) -> Result<usize> {
        if token.chars().all(|c| c.is_ascii_digit()) && !token.is_empty() {
            let idx: usize = token
                .parse()
                .map_err(|_| Error::InvalidPredicate(format!("bad node index `{token}`")))?;
            if idx >= self.nodes.len() {
                return Err(Error::IndexOutOfRange(format!(
                    "node {idx} of {}",
                    self.nodes.len()
                )));
            }
            return Ok(idx);
        }
        self.nodes
            .iter()
            .position(|nd| nd.name.as_deref() == Some(token))
            .ok_or_else(|| Error::InvalidPredicate(format!("unknown node name `{token}`")))
    }

    /// Network density: the mean over nodes of total parent counts across all
    /// predictor functions, `𝒟(G) = (1/n)·Σ_i Σ_j ω(f_j^{(i)})`.
    pub fn density(&self) -> f64 {
        let total: usize = self
            .nodes
            .iter()
            .flat_map(|nd| nd.functions.iter())
            .map(|f| f.parent_count())
            .sum();
        total as f64 / self.nodes.len() as f64
    }

    /// Selection-probability perturbation: sets `c_j^{(i)} := new_p` and
    /// redistributes the difference over the node's other functions in
    /// proportion to their current probabilities, so the sum stays 1.
    ///
    /// Setting a function's probability to its current value is the identity.
    /// A single-function node admits only `new_p = 1` — there is no other
    /// mass to redistribute against.
    pub fn perturb_selection_prob(&self, node: usize, func: usize, new_p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&new_p) {
            return Err(Error::InvalidParams(format!(
                "perturbed selection probability {new_p} outside [0,1]"
            )));
        }
        let nd = self.node(node)?;
        let l = nd.functions.len();
        if func >= l {
            return Err(Error::IndexOutOfRange(format!("function {func} of {l} at node {node}")));
        }
        let old = nd.functions[func].selection_prob;
        if new_p == old {
            return Ok(self.clone());
        }
        let rest: f64 = nd
            .functions
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != func)
            .map(|(_, f)| f.selection_prob)
            .sum();
        if rest == 0.0 {
            return Err(Error::NoMassToRedistribute { node });
        }
        let mut out = self.clone();
        for (k, f) in out.nodes[node].functions.iter_mut().enumerate() {
            if k == func {
                f.selection_prob = new_p;
            } else {
                // c_k + (old − new_p)·c_k/rest, algebraically c_k·(1−new_p)/rest,
                // which is nonnegative for any new_p ∈ [0,1].
                f.selection_prob += (old - new_p) * f.selection_prob / rest;
                if f.selection_prob < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "perturbation produced negative probability {} at node {node}",
                        f.selection_prob
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Permanent on/off perturbation: replaces the node's entire function set
    /// with the single zero-parent constant function `≡ value`. Random bit
    /// flips still act on the node, so its steady-state marginal is not a
    /// point mass when `p > 0`.
    pub fn force_node_constant(&self, node: usize, value: bool) -> Result<Self> {
        self.node(node)?;
        let mut out = self.clone();
        out.nodes[node].functions =
            vec![PredictorFunction::new(1.0, Vec::new(), &[value]).expect("constant function")];
        Ok(out)
    }

    /// Builds the 1-node network whose two states form an exact two-state
    /// Markov chain with transition probabilities `alpha` = P(0→1) and
    /// `beta` = P(1→0), including the perturbation contribution.
    ///
    /// Requires `p ∈ (0,1)` and `alpha, beta ∈ [p, 1]`: one step flips the
    /// node with probability `p` outright, and otherwise applies a predictor,
    /// so transition probabilities below `p` are not representable.
    pub fn two_state_chain(alpha: f64, beta: f64, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParams(format!("perturbation {p} outside (0,1)")));
        }
        for (label, v) in [("alpha", alpha), ("beta", beta)] {
            if !(p..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{label}={v} not representable with perturbation {p} (need p ≤ {label} ≤ 1)"
                )));
            }
        }
        // Conditional on no flip, a predictor drawn from this set maps
        // 0 → 1 with probability a and 1 → 0 with probability b, giving the
        // exact transitions alpha = (1−p)a + p and beta = (1−p)b + p.
        let a = (alpha - p) / (1.0 - p);
        let b = (beta - p) / (1.0 - p);
        let mut functions = Vec::with_capacity(4);
        for (t0, t1) in [(false, false), (false, true), (true, false), (true, true)] {
            let w = if t0 { a } else { 1.0 - a } * if t1 { 1.0 - b } else { b };
            functions.push(PredictorFunction::new(w, vec![0], &[t0, t1])?);
        }
        let node = NodeSpec::new(None, functions)?;
        Self::new(vec![node], p)
    }
}
