//! The majorize-minimize outer loop shared by every reweighted solver.
//!
//! Each outer step linearizes the concave part of the penalty at the
//! current iterate: IRL1 turns it into weights on `|xⱼ|`, DCA for
//! `‖x‖₁ − ‖x‖₂` into a linear term `⟨x/‖x‖₂, ·⟩`. The resulting convex
//! subproblem goes to an ADMM inner solver.

use std::time::Instant;

use crate::config::{SolverConfig, SolverReport};
use crate::linalg::{dist2, norm2, DenseMatrix};
use crate::regularizers::{penalty_eval, Penalty};

use super::admm::{residual_sq, AdmmState, BasisPursuit, InnerSolve, Lasso};

/// A weighted-L1 subproblem with an ADMM solver behind it.
pub(crate) trait Subproblem {
    fn n(&self) -> usize;
    fn solve(&self, w: &[f64], linear: Option<&[f64]>, state: &mut AdmmState, cfg: &SolverConfig) -> InnerSolve;
    /// Objective of the subproblem for weights `w` and linear term `q`.
    fn surrogate(&self, x: &[f64], w: &[f64], linear: Option<&[f64]>) -> f64;
    /// Full objective for a penalty value `pen` at `x`.
    fn objective(&self, x: &[f64], pen: f64) -> f64;
    fn warm_start(&self, x: &[f64], state: &mut AdmmState, cfg: &SolverConfig);
}

pub(crate) struct Constrained<'a> {
    pub bp: BasisPursuit<'a>,
    pub n: usize,
    pub delta: f64,
}

impl Subproblem for Constrained<'_> {
    fn n(&self) -> usize {
        self.n
    }

    fn solve(&self, w: &[f64], linear: Option<&[f64]>, state: &mut AdmmState, cfg: &SolverConfig) -> InnerSolve {
        self.bp.solve(w, linear, state, self.delta, cfg)
    }

    fn surrogate(&self, x: &[f64], w: &[f64], linear: Option<&[f64]>) -> f64 {
        weighted_l1(x, w) - linear.map_or(0.0, |q| crate::linalg::dot(q, x))
    }

    fn objective(&self, _x: &[f64], pen: f64) -> f64 {
        pen
    }

    fn warm_start(&self, x: &[f64], state: &mut AdmmState, cfg: &SolverConfig) {
        state.z.copy_from_slice(x);
        if !cfg.reuse_dual {
            state.u.fill(0.0);
        }
    }
}

pub(crate) struct Unconstrained<'a> {
    pub lasso: Lasso<'a>,
    pub a: &'a DenseMatrix,
    pub b: &'a [f64],
}

impl Subproblem for Unconstrained<'_> {
    fn n(&self) -> usize {
        self.a.cols()
    }

    fn solve(&self, w: &[f64], linear: Option<&[f64]>, state: &mut AdmmState, cfg: &SolverConfig) -> InnerSolve {
        self.lasso.solve(w, linear, state, cfg)
    }

    fn surrogate(&self, x: &[f64], w: &[f64], linear: Option<&[f64]>) -> f64 {
        self.lasso.objective(x, Some(w), linear)
    }

    fn objective(&self, x: &[f64], pen: f64) -> f64 {
        self.lasso.lambda() * pen + 0.5 * residual_sq(self.a, self.b, x)
    }

    // Inner ADMM restarts at y = xᵏ, u = 0.
    fn warm_start(&self, x: &[f64], state: &mut AdmmState, _cfg: &SolverConfig) {
        state.z.copy_from_slice(x);
        state.u.fill(0.0);
    }
}

pub(crate) fn weighted_l1(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(xi, wi)| wi * xi.abs()).sum()
}

/// Weights and linear term of the convex majorizer at `x`.
fn linearize(penalty: &Penalty, x: &[f64]) -> (Vec<f64>, Option<Vec<f64>>) {
    match penalty {
        Penalty::L1MinusL2 => {
            let nx = norm2(x);
            let q = (nx > 0.0).then(|| x.iter().map(|v| v / nx).collect());
            (vec![1.0; x.len()], q)
        }
        p => (
            x.iter().map(|&v| p.weight(v).expect("penalty has a reweighting rule")).collect(),
            None,
        ),
    }
}

/// Runs the outer loop. The first step is plain L1 (unit weights, no linear
/// term); later steps re-linearize at the last accepted iterate.
///
/// A step is accepted only if it does not increase the subproblem
/// objective relative to the current iterate. Exact inner solutions always
/// pass, and by concavity such a step cannot increase the full objective.
/// A rejected step ends the loop with the current iterate.
pub(crate) fn run<S: Subproblem>(sub: &S, penalty: &Penalty, cfg: &SolverConfig) -> SolverReport {
    let start = Instant::now();
    let n = sub.n();
    let objective = |x: &[f64]| sub.objective(x, penalty_eval(x, penalty).unwrap_or(f64::NAN));

    let mut state = AdmmState::zeros(n);
    let first = sub.solve(&vec![1.0; n], None, &mut state, cfg);
    let mut x = first.x;
    let mut total_inner = first.iters;
    let mut inner_ok = first.converged;
    let mut trace = vec![objective(&x)];
    let mut outer = 1;
    let mut converged = cfg.max_outer == 1 && inner_ok;

    while outer < cfg.max_outer {
        let (w, q) = linearize(penalty, &x);
        sub.warm_start(&x, &mut state, cfg);
        let step = sub.solve(&w, q.as_deref(), &mut state, cfg);
        outer += 1;
        total_inner += step.iters;

        let before = sub.surrogate(&x, &w, q.as_deref());
        let after = sub.surrogate(&step.x, &w, q.as_deref());
        if after > before + 1e-12 * (1.0 + before.abs()) {
            converged = inner_ok;
            break;
        }
        let moved = dist2(&step.x, &x);
        let scale = 1.0 + norm2(&x);
        x = step.x;
        inner_ok = step.converged;
        trace.push(objective(&x));
        if moved <= cfg.outer_tol * scale {
            converged = inner_ok;
            break;
        }
    }

    SolverReport {
        solution: x,
        objective_trace: trace,
        outer_iters: outer,
        total_inner_iters: total_inner,
        converged,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}
