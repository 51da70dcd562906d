#![warn(missing_docs)]
//! Steady-state analysis of probabilistic Boolean networks (PBNs).
//!
//! A PBN is a set of `n` binary nodes. At every (synchronous) time step each
//! node independently selects one of its Boolean predictor functions according
//! to fixed selection probabilities and applies it to the current state. In
//! addition, a perturbation parameter `p` gives every node an independent
//! chance of being flipped at each step; whenever at least one flip fires, the
//! flips replace the function update for that step. For `p ∈ (0,1)` the
//! resulting Markov chain on `{0,1}^n` is ergodic, so every conjunction of
//! node literals ("meta state 1") has a well-defined steady-state probability.
//!
//! The crate provides:
//!
//! * [`model`] — the PBN description: validation, a plain-text `.pbn` format,
//!   a seeded random generator, and the two structural perturbations used by
//!   long-run sensitivity analysis.
//! * [`sim`] — high-throughput trajectory simulation with alias-method
//!   function sampling and meta-state projection.
//! * [`twostate`] — the two-state Markov chain estimator of steady-state
//!   probabilities with precision/confidence stopping and three
//!   initialization heuristics guarding against biased pilot estimates.
//! * [`exact`] — an exact steady-state oracle for small networks (power
//!   iteration on a structured transition operator).
//! * [`analysis`] — Boolean-function influences and long-run sensitivities
//!   layered on the estimator and the exact oracle.
//!
//! # Example
//!
//! ```
//! use pbn_steady::model::PbnModel;
//! use pbn_steady::sim::MetaPredicate;
//! use pbn_steady::twostate::{PbnMetaSource, TwoStateParams, run};
//!
//! // A single self-copying node with perturbation: a symmetric two-state
//! // chain whose steady-state probability of `node 0 = 1` is exactly 1/2.
//! let text = "pbn 1\nnodes 1\nperturbation 0.3\nnode 0\nfunc 1.0 : 0 : 01\nend\n";
//! let model = PbnModel::parse(text).unwrap();
//! let pred = MetaPredicate::parse("0=1", &model).unwrap();
//! let params = TwoStateParams::new(1e-2);
//! let mut source = PbnMetaSource::new(&model, pred, params.k, 7).unwrap();
//! let run = run(&mut source, &params).unwrap();
//! assert!((run.q_hat - 0.5).abs() < 2e-2);
//! ```

pub mod analysis;
mod error;
pub mod exact;
pub mod model;
mod rngutil;
pub mod sim;
pub mod twostate;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
