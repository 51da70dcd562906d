//! Boolean-function influences and long-run sensitivities.
//!
//! Influence measures how often toggling one input toggles a predictor's
//! output, in expectation over a reference distribution of states — uniform
//! for the combinatorial notion, the steady-state distribution for the
//! long-term notion. Long-run sensitivity measures how far the steady-state
//! law (restricted to a set of observed nodes) moves under a structural
//! perturbation of the model: a selection-probability change or a permanent
//! on/off forcing of one node.
//!
//! Estimated variants decompose every probability they need into meta-state
//! probes (full conjunctions over node literals) and answer each probe with
//! an independent two-state estimator run; probe seeds derive
//! deterministically from the caller's root seed, so results do not depend
//! on scheduling.

use crate::exact::{steady_state, StateDistribution};
use crate::model::{PbnModel, PredictorFunction};
use crate::rngutil::mix_seed;
use crate::sim::MetaPredicate;
use crate::twostate::{run, PbnMetaSource, TwoStateParams};
use crate::{Error, Result};

/// Reference distribution for influence computations.
#[derive(Debug, Clone)]
pub enum ReferenceDistribution {
    /// All parent assignments equally likely (combinatorial influence).
    Uniform,
    /// Exact steady-state distribution (small networks).
    SteadyStateExact,
    /// Steady-state probabilities estimated per probe by two-state runs.
    SteadyStateEstimated {
        /// Estimator parameters for every probe.
        params: TwoStateParams,
        /// Root seed; probe i uses a seed derived from (seed, i).
        seed: u64,
    },
}

/// An influence value plus the estimation effort it consumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Influence {
    /// The influence in [0,1].
    pub value: f64,
    /// Satisfying-set probes answered by the estimator (0 for uniform/exact
    /// modes and for the constant-derivative shortcut).
    pub probes: u64,
}

/// Influences of every node on one target node.
#[derive(Debug, Clone)]
pub struct InfluenceReport {
    /// The target node i.
    pub target: u32,
    /// values[k] = I_k(x_target); exactly 0 for nodes that parent no
    /// predictor of the target.
    pub values: Vec<f64>,
    /// Total estimator probes across all entries.
    pub probes: u64,
}

/// The partial derivative ∂f/∂x_j as a Boolean-valued function
/// x ↦ f(x with j=0) ⊕ f(x with j=1), represented over f's parents with j
/// removed (selection probability 1). If j is not a parent, f cannot depend
/// on it and the result is the parentless constant-0 function.
pub fn partial_derivative(f: &PredictorFunction, j: u32) -> PredictorFunction {
    let Some(pos) = f.parents().iter().position(|&p| p == j) else {
        return PredictorFunction::new(1.0, Vec::new(), &[false]).expect("constant function");
    };
    let remaining: Vec<u32> =
        f.parents().iter().copied().filter(|&p| p != j).collect();
    let l = f.parents().len();
    let width = l - 1;
    let mut table = Vec::with_capacity(1 << width);
    for a in 0..1usize << width {
        // Rebuild the full MSB-first truth-table index with j's bit spliced
        // back in at its original position.
        let high = a >> (width - pos) << (width - pos);
        let low = a & ((1 << (width - pos)) - 1);
        let idx0 = high << 1 | low;
        let idx1 = idx0 | 1 << (width - pos);
        table.push(f.output(idx0) != f.output(idx1));
    }
    PredictorFunction::new(1.0, remaining, &table).expect("derivative is structurally valid")
}

/// Influence of x_j on f under the uniform distribution: the fraction of
/// parent assignments where the partial derivative is 1, by direct
/// truth-table enumeration.
pub fn influence_uniform(f: &PredictorFunction, j: u32) -> f64 {
    let d = partial_derivative(f, j);
    let size = 1usize << d.parent_count();
    let ones = (0..size).filter(|&a| d.output(a)).count();
    ones as f64 / size as f64
}

/// The reference distribution, resolved once per analysis call so repeated
/// probes share the exact oracle and the probe-seed counter.
enum ResolvedReference<'a> {
    Uniform,
    Exact(StateDistribution),
    Estimated { params: &'a TwoStateParams, seed: u64 },
}

impl<'a> ResolvedReference<'a> {
    fn resolve(model: &PbnModel, mode: &'a ReferenceDistribution) -> Result<Self> {
        Ok(match mode {
            ReferenceDistribution::Uniform => Self::Uniform,
            ReferenceDistribution::SteadyStateExact => Self::Exact(steady_state(model)?),
            ReferenceDistribution::SteadyStateEstimated { params, seed } => {
                params.validate()?;
                Self::Estimated { params, seed: *seed }
            }
        })
    }

    /// P(pred = 1) under the reference; `probes` advances the seed counter.
    fn probe(&self, model: &PbnModel, pred: &MetaPredicate, probes: &mut u64) -> Result<f64> {
        match self {
            Self::Uniform => unreachable!("uniform influence never probes"),
            Self::Exact(dist) => Ok(dist.meta_probability(pred)),
            Self::Estimated { params, seed } => {
                let probe_seed = mix_seed(*seed, *probes);
                *probes += 1;
                let mut source = PbnMetaSource::new(model, pred.clone(), params.k, probe_seed)?;
                Ok(run(&mut source, params)?.q_hat)
            }
        }
    }
}

fn influence_resolved(
    model: &PbnModel,
    f: &PredictorFunction,
    j: u32,
    reference: &ResolvedReference,
    probes: &mut u64,
) -> Result<f64> {
    if let ResolvedReference::Uniform = reference {
        return Ok(influence_uniform(f, j));
    }
    let d = partial_derivative(f, j);
    // Constant derivatives have probability 0 or 1 under ANY distribution —
    // no probes needed.
    if d.is_constant(false) {
        return Ok(0.0);
    }
    if d.is_constant(true) {
        return Ok(1.0);
    }
    // Decompose the satisfying set into disjoint full conjunctions over the
    // derivative's parents and sum their meta-state probabilities.
    let parents = d.parents().to_vec();
    let width = parents.len();
    let mut total = 0.0;
    for a in 0..1usize << width {
        if !d.output(a) {
            continue;
        }
        let literals: Vec<(u32, bool)> = parents
            .iter()
            .enumerate()
            .map(|(t, &p)| (p, a >> (width - 1 - t) & 1 == 1))
            .collect();
        let pred = MetaPredicate::new(literals, model.n())?;
        total += reference.probe(model, &pred, probes)?;
    }
    Ok(total)
}

/// Influence I_j(f) of node j on one predictor function under the given
/// reference distribution.
pub fn influence_on_function(
    model: &PbnModel,
    f: &PredictorFunction,
    j: u32,
    mode: &ReferenceDistribution,
) -> Result<Influence> {
    if j as usize >= model.n() {
        return Err(Error::IndexOutOfRange(format!("node {j} of {}", model.n())));
    }
    let reference = ResolvedReference::resolve(model, mode)?;
    let mut probes = 0;
    let value = influence_resolved(model, f, j, &reference, &mut probes)?;
    Ok(Influence { value, probes })
}

/// Influence of node `source` on node `target`: the selection-probability-
/// weighted sum of per-function influences, I_k(x_i) = Σ_j I_k(f_j)·c_j.
pub fn influence_on_node(
    model: &PbnModel,
    source: u32,
    target: u32,
    mode: &ReferenceDistribution,
) -> Result<Influence> {
    if source as usize >= model.n() {
        return Err(Error::IndexOutOfRange(format!("node {source} of {}", model.n())));
    }
    let reference = ResolvedReference::resolve(model, mode)?;
    let mut probes = 0;
    let mut value = 0.0;
    for f in model.node(target as usize)?.functions() {
        value += f.selection_prob() * influence_resolved(model, f, source, &reference, &mut probes)?;
    }
    Ok(Influence { value, probes })
}

/// Influences of every node on `target` (one shared reference resolution, so
/// exact mode solves the steady state once).
pub fn influence_report(
    model: &PbnModel,
    target: u32,
    mode: &ReferenceDistribution,
) -> Result<InfluenceReport> {
    let reference = ResolvedReference::resolve(model, mode)?;
    let mut probes = 0;
    let mut values = Vec::with_capacity(model.n());
    for source in 0..model.n() as u32 {
        let mut value = 0.0;
        for f in model.node(target as usize)?.functions() {
            value +=
                f.selection_prob() * influence_resolved(model, f, source, &reference, &mut probes)?;
        }
        values.push(value);
    }
    Ok(InfluenceReport { target, values, probes })
}

/// A joint steady-state distribution over a small set of observed nodes.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    /// The observed nodes, in the caller's order.
    pub observed_nodes: Vec<u32>,
    /// 2^m outcome probabilities; the FIRST listed node is the most
    /// significant bit of the outcome index.
    pub probs: Vec<f64>,
    /// True when entries are independent estimates (raw, unnormalized).
    pub estimated: bool,
    /// Per-entry precision of the estimates (0 for exact distributions).
    pub r: f64,
}

impl JointDistribution {
    /// Norm distance between two joints over the same observed nodes.
    pub fn distance(&self, other: &Self, norm: Norm) -> Result<f64> {
        if self.observed_nodes != other.observed_nodes {
            return Err(Error::InvalidParams(
                "joint distributions observe different node sets".into(),
            ));
        }
        Ok(norm.distance(&self.probs, &other.probs))
    }
}

fn check_observed(model: &PbnModel, nodes: &[u32]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidParams("observed node set must be non-empty".into()));
    }
    if nodes.len() > 16 {
        return Err(Error::InvalidParams(format!(
            "{} observed nodes would need 2^{} runs; the ceiling is 16",
            nodes.len(),
            nodes.len()
        )));
    }
    for &nd in nodes {
        if nd as usize >= model.n() {
            return Err(Error::IndexOutOfRange(format!("node {nd} of {}", model.n())));
        }
    }
    for (i, &nd) in nodes.iter().enumerate() {
        if nodes[..i].contains(&nd) {
            return Err(Error::InvalidParams(format!("node {nd} listed twice")));
        }
    }
    Ok(())
}

fn outcome_predicate(model: &PbnModel, nodes: &[u32], outcome: usize) -> Result<MetaPredicate> {
    let m = nodes.len();
    let literals: Vec<(u32, bool)> =
        nodes.iter().enumerate().map(|(t, &nd)| (nd, outcome >> (m - 1 - t) & 1 == 1)).collect();
    MetaPredicate::new(literals, model.n())
}

/// Estimates the joint distribution of the observed nodes: one independent
/// two-state run per outcome (outcome i uses a seed derived from (seed, i)).
/// Raw estimates are reported without renormalization.
pub fn joint_distribution(
    model: &PbnModel,
    nodes: &[u32],
    params: &TwoStateParams,
    seed: u64,
) -> Result<JointDistribution> {
    check_observed(model, nodes)?;
    params.validate()?;
    let m = nodes.len();
    let mut probs = Vec::with_capacity(1 << m);
    for outcome in 0..1usize << m {
        let pred = outcome_predicate(model, nodes, outcome)?;
        let mut source =
            PbnMetaSource::new(model, pred, params.k, mix_seed(seed, outcome as u64))?;
        probs.push(run(&mut source, params)?.q_hat);
    }
    Ok(JointDistribution {
        observed_nodes: nodes.to_vec(),
        probs,
        estimated: true,
        r: params.r,
    })
}

/// Exact joint distribution of the observed nodes by marginalizing the
/// exact steady state.
pub fn joint_distribution_exact(model: &PbnModel, nodes: &[u32]) -> Result<JointDistribution> {
    check_observed(model, nodes)?;
    let pi = steady_state(model)?;
    let m = nodes.len();
    let mut probs = vec![0.0; 1 << m];
    for (state, &mass) in pi.probs().iter().enumerate() {
        let mut outcome = 0usize;
        for (t, &nd) in nodes.iter().enumerate() {
            if state >> nd & 1 == 1 {
                outcome |= 1 << (m - 1 - t);
            }
        }
        probs[outcome] += mass;
    }
    Ok(JointDistribution { observed_nodes: nodes.to_vec(), probs, estimated: false, r: 0.0 })
}

/// The ℓ-norms offered for sensitivity distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    /// Σ|dᵢ| (twice the total variation for distributions; the default).
    #[default]
    L1,
    /// √(Σdᵢ²).
    L2,
    /// max|dᵢ|.
    LInf,
}

impl Norm {
    /// ‖a − b‖ under this norm.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len(), "norm over unequal lengths");
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
            Norm::LInf => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        })
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "1" => Ok(Norm::L1),
            "l2" | "2" => Ok(Norm::L2),
            "linf" | "inf" => Ok(Norm::LInf),
            other => Err(Error::InvalidParams(format!(
                "unknown norm {other:?}; expected l1|l2|linf"
            ))),
        }
    }
}

/// How sensitivity computations obtain the two joint distributions.
#[derive(Debug, Clone)]
pub enum SensitivityMode {
    /// Both joints from the exact oracle.
    Exact,
    /// Both joints estimated with these parameters.
    Estimated {
        /// Estimator parameters shared by base and perturbed runs.
        params: TwoStateParams,
        /// Root seed.
        seed: u64,
        /// Reuse identical probe seeds for base and perturbed models
        /// (common random numbers) instead of the default independent seeds.
        paired_seeds: bool,
    },
}

fn joint_for(
    model: &PbnModel,
    nodes: &[u32],
    mode: &SensitivityMode,
    branch: u64,
) -> Result<JointDistribution> {
    match mode {
        SensitivityMode::Exact => joint_distribution_exact(model, nodes),
        SensitivityMode::Estimated { params, seed, paired_seeds } => {
            let branch_seed = if *paired_seeds { *seed } else { mix_seed(*seed, branch) };
            joint_distribution(model, nodes, params, branch_seed)
        }
    }
}

/// Long-run sensitivity to a selection-probability perturbation:
/// s_c = ‖π̃ − π‖ over the observed-node joint, where π̃ belongs to the model
/// with function `func` of node `node` reweighted to `new_p`.
pub fn sensitivity_selection_prob(
    model: &PbnModel,
    node: usize,
    func: usize,
    new_p: f64,
    observed: &[u32],
    norm: Norm,
    mode: &SensitivityMode,
) -> Result<f64> {
    let perturbed = model.perturb_selection_prob(node, func, new_p)?;
    let base = joint_for(model, observed, mode, 0)?;
    let moved = joint_for(&perturbed, observed, mode, 1)?;
    base.distance(&moved, norm)
}

/// Long-run sensitivity to permanently forcing a node:
/// s_g = max over v ∈ {0,1} of ‖π̃[x_node ≡ v] − π‖ over the observed-node
/// joint.
pub fn sensitivity_onoff(
    model: &PbnModel,
    node: usize,
    observed: &[u32],
    norm: Norm,
    mode: &SensitivityMode,
) -> Result<f64> {
    let forced_off = model.force_node_constant(node, false)?;
    let forced_on = model.force_node_constant(node, true)?;
    let base = joint_for(model, observed, mode, 0)?;
    let off = joint_for(&forced_off, observed, mode, 1)?;
    let on = joint_for(&forced_on, observed, mode, 2)?;
    Ok(base.distance(&off, norm)?.max(base.distance(&on, norm)?))
}
