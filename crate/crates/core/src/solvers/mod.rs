//! Sparse recovery solvers.
//!
//! Constrained solvers address `min J(x) s.t. Ax = b`, unconstrained ones
//! `min λJ(x) + ½‖Ax − b‖²`. Concave penalties go through reweighted-L1
//! outer loops (DCA for `‖x‖₁ − ‖x‖₂`) with ADMM inner solvers.

pub mod admm;
mod outer;

use std::time::Instant;

use crate::config::{SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::regularizers::Penalty;

pub use admm::{AdmmState, BasisPursuit, InnerSolve, Lasso, ShiftedGram};

use admm::{check_system, check_weights};
use outer::{weighted_l1, Constrained, Unconstrained};

/// Penalty choice handed to the solvers.
pub type RegularizerSpec = Penalty;

fn constrained<'a>(a: &'a DenseMatrix, b: &'a [f64], cfg: &SolverConfig) -> Result<Constrained<'a>> {
    cfg.validate()?;
    Ok(Constrained { bp: BasisPursuit::new(a, b)?, n: a.cols(), delta: cfg.bp_delta() })
}

fn unconstrained<'a>(a: &'a DenseMatrix, b: &'a [f64], cfg: &SolverConfig) -> Result<Unconstrained<'a>> {
    cfg.validate()?;
    Ok(Unconstrained { lasso: Lasso::new(a, b, cfg.lambda, cfg.lasso_delta())?, a, b })
}

fn erf_penalty(sigma: f64) -> Result<Penalty> {
    let p = Penalty::Erf { sigma };
    p.validate()?;
    Ok(p)
}

fn reweightable(penalty: &Penalty) -> Result<()> {
    penalty.validate()?;
    match penalty.weight(0.0) {
        Some(_) => Ok(()),
        None => Err(Error::UnsupportedPenalty(penalty.label().to_string())),
    }
}

/// `min Σ wⱼ|xⱼ| s.t. Ax = b` (weighted basis pursuit) by ADMM.
pub fn weighted_bp_admm(a: &DenseMatrix, b: &[f64], w: &[f64], cfg: &SolverConfig) -> Result<SolverReport> {
    let start = Instant::now();
    cfg.validate()?;
    check_weights(w, a.cols())?;
    let bp = BasisPursuit::new(a, b)?;
    let mut state = AdmmState::zeros(a.cols());
    let out = bp.solve(w, None, &mut state, cfg.bp_delta(), cfg);
    Ok(SolverReport {
        objective_trace: vec![weighted_l1(&out.x, w)],
        solution: out.x,
        outer_iters: 1,
        total_inner_iters: out.iters,
        converged: out.converged,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `min λΣ wⱼ|xⱼ| + ½‖Ax − b‖²` (weighted lasso) by ADMM.
pub fn admm_weighted_lasso(a: &DenseMatrix, b: &[f64], w: &[f64], cfg: &SolverConfig) -> Result<SolverReport> {
    let start = Instant::now();
    cfg.validate()?;
    check_system(a, b)?;
    check_weights(w, a.cols())?;
    let lasso = Lasso::new(a, b, cfg.lambda, cfg.lasso_delta())?;
    let mut state = AdmmState::zeros(a.cols());
    let out = lasso.solve(w, None, &mut state, cfg);
    Ok(SolverReport {
        objective_trace: vec![lasso.objective(&out.x, Some(w), None)],
        solution: out.x,
        outer_iters: 1,
        total_inner_iters: out.iters,
        converged: out.converged,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `min Jσ(x) s.t. Ax = b` by reweighted L1 with weights `exp(−(xⱼ/σ)²)`.
///
/// The trace holds `Jσ(xᵏ)` for every accepted iterate.
pub fn irl1_erf_constrained(a: &DenseMatrix, b: &[f64], sigma: f64, cfg: &SolverConfig) -> Result<SolverReport> {
    let p = erf_penalty(sigma)?;
    Ok(outer::run(&constrained(a, b, cfg)?, &p, cfg))
}

/// `min λJσ(x) + ½‖Ax − b‖²` by reweighted L1; every weighted lasso is
/// solved by ADMM restarted at `y = xᵏ, u = 0`.
pub fn irl1_erf_unconstrained(a: &DenseMatrix, b: &[f64], sigma: f64, cfg: &SolverConfig) -> Result<SolverReport> {
    let p = erf_penalty(sigma)?;
    Ok(outer::run(&unconstrained(a, b, cfg)?, &p, cfg))
}

/// Constrained reweighted L1 for any penalty with a reweighting rule
/// (log-sum, Lp, TL1, and also ERF or L1).
pub fn irl1_generic_constrained(a: &DenseMatrix, b: &[f64], penalty: &Penalty, cfg: &SolverConfig) -> Result<SolverReport> {
    reweightable(penalty)?;
    Ok(outer::run(&constrained(a, b, cfg)?, penalty, cfg))
}

pub fn irl1_generic_unconstrained(a: &DenseMatrix, b: &[f64], penalty: &Penalty, cfg: &SolverConfig) -> Result<SolverReport> {
    reweightable(penalty)?;
    Ok(outer::run(&unconstrained(a, b, cfg)?, penalty, cfg))
}

/// `min ‖x‖₁ − ‖x‖₂ s.t. Ax = b` by DCA. Each step solves
/// `min ‖x‖₁ − ⟨xᵏ/‖xᵏ‖₂, x⟩ s.t. Ax = b`.
pub fn dca_l1l2_constrained(a: &DenseMatrix, b: &[f64], cfg: &SolverConfig) -> Result<SolverReport> {
    Ok(outer::run(&constrained(a, b, cfg)?, &Penalty::L1MinusL2, cfg))
}

pub fn dca_l1l2_unconstrained(a: &DenseMatrix, b: &[f64], cfg: &SolverConfig) -> Result<SolverReport> {
    Ok(outer::run(&unconstrained(a, b, cfg)?, &Penalty::L1MinusL2, cfg))
}

/// Basis pursuit `min ‖x‖₁ s.t. Ax = b`.
pub fn l1_bp(a: &DenseMatrix, b: &[f64], cfg: &SolverConfig) -> Result<SolverReport> {
    weighted_bp_admm(a, b, &vec![1.0; a.cols()], cfg)
}

/// Lasso `min λ‖x‖₁ + ½‖Ax − b‖²`.
pub fn l1_lasso(a: &DenseMatrix, b: &[f64], cfg: &SolverConfig) -> Result<SolverReport> {
    admm_weighted_lasso(a, b, &vec![1.0; a.cols()], cfg)
}

/// Dispatches a constrained solve on the penalty kind.
pub fn solve_constrained(a: &DenseMatrix, b: &[f64], penalty: &Penalty, cfg: &SolverConfig) -> Result<SolverReport> {
    match penalty {
        Penalty::L1 => l1_bp(a, b, cfg),
        Penalty::Erf { sigma } => irl1_erf_constrained(a, b, *sigma, cfg),
        Penalty::L1MinusL2 => dca_l1l2_constrained(a, b, cfg),
        p => irl1_generic_constrained(a, b, p, cfg),
    }
}

/// Dispatches an unconstrained solve on the penalty kind.
pub fn solve_unconstrained(a: &DenseMatrix, b: &[f64], penalty: &Penalty, cfg: &SolverConfig) -> Result<SolverReport> {
    match penalty {
        Penalty::L1 => l1_lasso(a, b, cfg),
        Penalty::Erf { sigma } => irl1_erf_unconstrained(a, b, *sigma, cfg),
        Penalty::L1MinusL2 => dca_l1l2_unconstrained(a, b, cfg),
        p => irl1_generic_unconstrained(a, b, p, cfg),
    }
}
