use thiserror::Error;

/// All failure modes surfaced by the crate.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// `.pbn` text violated the grammar (carries a 1-based line number).
    #[error("parse error at line {line}: {message}")]
    Parse {
        /// 1-based line of the offending input.
        line: usize,
        /// What went wrong.
        message: String,
    },

    /// A structural invariant of a model failed validation.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// An index (node, function, state bit) was out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A predicate string could not be parsed or referenced unknown nodes.
    #[error("invalid predicate: {0}")]
    InvalidPredicate(String),

    /// Invalid bounds or parameters passed to the random model generator.
    #[error("invalid generator spec: {0}")]
    InvalidGeneratorSpec(String),

    /// Selection-probability perturbation had no remaining mass to
    /// redistribute (single-function node with `new_p` ≠ 1).
    #[error("no mass to redistribute: node {node} has a single predictor, its selection probability must stay 1")]
    NoMassToRedistribute {
        /// The node whose function set has a single element.
        node: usize,
    },

    /// Estimator parameters failed validation.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// α̂ + β̂ = 2: the two-state abstraction is periodic and the burn-in
    /// formula is undefined. Increasing the subsampling lag k usually breaks
    /// the alternation.
    #[error("periodic abstraction; burn-in undefined (alpha + beta = 2): increase the subsampling lag k")]
    PeriodicAbstraction,

    /// An α̂ or β̂ denominator was zero where a defined estimate was required
    /// (heuristic `none` offers no recovery path).
    #[error("undefined transition estimate after the initial sample ({0}); rerun with an initialization heuristic or a larger n0")]
    UndefinedEstimate(String),

    /// Trajectory doubling hit the cap without satisfying the heuristic's
    /// acceptance rule: the meta state is unreachable or vanishingly rare.
    #[error("doubling cap ({cap}) exceeded: meta state transitions still unobserved; the observable may be unreachable from the initial state")]
    DoublingCapExceeded {
        /// The configured cap on doublings.
        cap: u32,
    },

    /// The pitfall-avoidance heuristic found an empty safe range for n₀.
    #[error("safe n0 range is empty for r={r}, s={s}; pitfall avoidance cannot pick an initial sample size")]
    EmptySafeRange {
        /// Requested precision.
        r: f64,
        /// Requested confidence.
        s: f64,
    },

    /// Exact-module state-space cap exceeded.
    #[error("network has {nodes} nodes; the exact solver is capped at {cap}")]
    ExactCapExceeded {
        /// Nodes in the offending model.
        nodes: usize,
        /// Configured cap.
        cap: usize,
    },

    /// Power iteration failed to reach the fixed-point tolerance.
    #[error("power iteration did not converge within {max_iterations} iterations (perturbation p = 0 networks may cycle)")]
    NonConvergence {
        /// Iteration budget that was exhausted.
        max_iterations: u64,
    },

    /// Underlying I/O failure (model files, record output).
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
