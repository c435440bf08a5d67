//! Sparse signal recovery with the error-function penalty
//! `Jσ(x) = Σ ∫₀^{|xⱼ|} exp(−τ²/σ²) dτ`.
//!
//! The crate provides the penalty and its proximal operator, reweighted-L1
//! solvers with ADMM inner loops for the constrained and unconstrained
//! problems, baseline penalties, problem generators and the experiment
//! harnesses used by the `erf-sparse` command line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod format;
pub mod linalg;
pub mod problems;
pub mod regularizers;
pub mod rng;
pub mod solvers;

pub use config::{SolverConfig, SolverReport};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, Signal, SupportSet};
pub use regularizers::{erf_phi, erf_prox, erf_weight, soft_shrink, tl1_prox, Penalty};
pub use solvers::{irl1_erf_constrained, irl1_erf_unconstrained, solve_constrained, solve_unconstrained};
