//! ADMM inner solvers for the weighted-L1 subproblems.
//!
//! Both solvers cache their factorization at construction and can be
//! re-run with new weights, which is how the outer reweighting loops use
//! them.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{dist2, factor_spd, norm2, DenseMatrix, SpdFactor};
use crate::regularizers::soft_shrink_scalar;

/// Outcome of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerSolve {
    pub x: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
}

/// Primal/dual iterates carried between inner solves.
#[derive(Debug, Clone)]
pub struct AdmmState {
    /// Splitting variable (`z` for basis pursuit, `y` for lasso).
    pub z: Vec<f64>,
    /// Scaled dual variable.
    pub u: Vec<f64>,
}

impl AdmmState {
    pub fn zeros(n: usize) -> Self {
        Self { z: vec![0.0; n], u: vec![0.0; n] }
    }
}

pub(crate) fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!("{} weights for {n} unknowns", w.len())));
    }
    if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("weights must be positive and finite".into()));
    }
    Ok(())
}

pub(crate) fn check_system(a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with {} measurements",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("measurements"));
    }
    Ok(())
}

/// `min Σ wⱼ|xⱼ| − ⟨q, x⟩  s.t.  A x = b` by ADMM on the splitting `x = z`.
///
/// The x-step projects onto the affine set with a cached Cholesky factor of
/// `A Aᵀ`; the z-step is a weighted soft shrink.
pub struct BasisPursuit<'a> {
    a: &'a DenseMatrix,
    b: &'a [f64],
    gram: SpdFactor,
    b_norm: f64,
}

impl<'a> BasisPursuit<'a> {
    pub fn new(a: &'a DenseMatrix, b: &'a [f64]) -> Result<Self> {
        check_system(a, b)?;
        // Dependent rows make A Aᵀ singular and Ax = b generically infeasible.
        let gram = factor_spd(&a.gram_rows()).map_err(|e| match e {
            Error::NotSpd { .. } => Error::RankDeficient,
            other => other,
        })?;
        Ok(Self { a, b, gram, b_norm: norm2(b) })
    }

    /// `x ← x − Aᵀ(AAᵀ)⁻¹(Ax − b)`
    fn project_in_place(&self, x: &mut [f64], r: &mut [f64], corr: &mut [f64]) {
        self.a.mul_vec_into(x, r);
        for (ri, bi) in r.iter_mut().zip(self.b) {
            *ri -= bi;
        }
        self.gram.solve_in_place(r);
        self.a.mul_t_vec_into(r, corr);
        for (o, c) in x.iter_mut().zip(corr.iter()) {
            *o -= c;
        }
    }

    /// Runs ADMM from `state`, leaving the final iterates in it.
    ///
    /// Returns the projected iterate, which satisfies `Ax = b` to rounding.
    pub fn solve(
        &self,
        w: &[f64],
        linear: Option<&[f64]>,
        state: &mut AdmmState,
        delta: f64,
        cfg: &SolverConfig,
    ) -> InnerSolve {
        let n = self.a.cols();
        let m = self.a.rows();
        let thresholds: Vec<f64> = w.iter().map(|wi| wi / delta).collect();
        let mut x = vec![0.0; n];
        let mut r = vec![0.0; m];
        let mut corr = vec![0.0; n];
        let primal_bound = cfg.inner_primal_tol * (1.0 + self.b_norm);
        let alpha = cfg.relaxation;

        let mut converged = false;
        let mut iters = 0;
        while iters < cfg.max_inner {
            iters += 1;
            for ((xi, zi), ui) in x.iter_mut().zip(&state.z).zip(&state.u) {
                *xi = zi - ui;
            }
            self.project_in_place(&mut x, &mut r, &mut corr);

            let mut primal = 0.0;
            let mut dual = 0.0;
            for j in 0..n {
                let x_hat = alpha * x[j] + (1.0 - alpha) * state.z[j];
                let mut arg = x_hat + state.u[j];
                if let Some(q) = linear {
                    arg += q[j] / delta;
                }
                let z_new = soft_shrink_scalar(arg, thresholds[j]);
                let dz = z_new - state.z[j];
                let rp = x[j] - z_new;
                dual += dz * dz;
                primal += rp * rp;
                state.u[j] += x_hat - z_new;
                state.z[j] = z_new;
            }
            if primal.sqrt() <= primal_bound && delta * dual.sqrt() <= cfg.inner_dual_tol {
                converged = true;
                break;
            }
        }
        // The projection is idempotent; a second pass removes rounding drift.
        self.project_in_place(&mut x, &mut r, &mut corr);
        InnerSolve { x, iters, converged }
    }
}

/// Solves `(AᵀA + δI) y = r`. When `A` is wide, this goes through the
/// Woodbury identity with a factor of the smaller `AAᵀ + δI`.
pub struct ShiftedGram<'a> {
    a: &'a DenseMatrix,
    delta: f64,
    factor: SpdFactor,
    wide: bool,
}

impl<'a> ShiftedGram<'a> {
    pub fn new(a: &'a DenseMatrix, delta: f64) -> Result<Self> {
        let wide = a.rows() < a.cols();
        let m = if wide { a.gram_rows() } else { a.gram_cols() };
        let factor = factor_spd(&m.shifted_diagonal(delta))?;
        Ok(Self { a, delta, factor, wide })
    }

    pub fn solve_into(&self, r: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        if self.wide {
            // (AᵀA + δI)⁻¹ r = (r − Aᵀ(AAᵀ + δI)⁻¹ A r) / δ
            self.a.mul_vec_into(r, scratch);
            self.factor.solve_in_place(scratch);
            self.a.mul_t_vec_into(scratch, out);
            for (o, ri) in out.iter_mut().zip(r) {
                *o = (ri - *o) / self.delta;
            }
        } else {
            out.copy_from_slice(r);
            self.factor.solve_in_place(out);
        }
    }
}

/// `min λΣ wⱼ|xⱼ| − λ⟨q, x⟩ + ½‖Ax − b‖²` by ADMM on the splitting `x = y`.
pub struct Lasso<'a> {
    a: &'a DenseMatrix,
    b: &'a [f64],
    atb: Vec<f64>,
    system: ShiftedGram<'a>,
    lambda: f64,
    delta: f64,
}

impl<'a> Lasso<'a> {
    pub fn new(a: &'a DenseMatrix, b: &'a [f64], lambda: f64, delta: f64) -> Result<Self> {
        check_system(a, b)?;
        if !(lambda > 0.0 && delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lasso needs lambda > 0 and delta > 0 (lambda={lambda}, delta={delta})"
            )));
        }
        Ok(Self {
            a,
            b,
            atb: a.mul_t_vec(b),
            system: ShiftedGram::new(a, delta)?,
            lambda,
            delta,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `λ Σ wⱼ|xⱼ| − λ⟨q, x⟩ + ½‖Ax − b‖²`
    pub fn objective(&self, x: &[f64], w: Option<&[f64]>, linear: Option<&[f64]>) -> f64 {
        let mut reg: f64 = match w {
            Some(w) => x.iter().zip(w).map(|(xi, wi)| wi * xi.abs()).sum(),
            None => x.iter().map(|xi| xi.abs()).sum(),
        };
        if let Some(q) = linear {
            reg -= x.iter().zip(q).map(|(xi, qi)| xi * qi).sum::<f64>();
        }
        self.lambda * reg + 0.5 * residual_sq(self.a, self.b, x)
    }

    /// Runs ADMM from `state` (`z` holds `y`). Returns the shrunk iterate.
    pub fn solve(
        &self,
        w: &[f64],
        linear: Option<&[f64]>,
        state: &mut AdmmState,
        cfg: &SolverConfig,
    ) -> InnerSolve {
        let n = self.a.cols();
        let scale = self.lambda / self.delta;
        let thresholds: Vec<f64> = w.iter().map(|wi| scale * wi).collect();
        let mut x = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut x_hat = vec![0.0; n];
        let alpha = cfg.relaxation;
        let mut scratch = vec![0.0; self.a.rows().min(n)];

        let mut converged = false;
        let mut iters = 0;
        while iters < cfg.max_inner {
            iters += 1;
            for j in 0..n {
                let mut arg = state.z[j] - state.u[j];
                if let Some(q) = linear {
                    arg += scale * q[j];
                }
                x[j] = soft_shrink_scalar(arg, thresholds[j]);
                x_hat[j] = alpha * x[j] + (1.0 - alpha) * state.z[j];
                rhs[j] = self.atb[j] + self.delta * (x_hat[j] + state.u[j]);
            }
            self.system.solve_into(&rhs, &mut y_new, &mut scratch);
            let dual = self.delta * dist2(&y_new, &state.z);
            let mut primal = 0.0;
            for j in 0..n {
                let rp = x[j] - y_new[j];
                primal += rp * rp;
                state.u[j] += x_hat[j] - y_new[j];
            }
            std::mem::swap(&mut state.z, &mut y_new);
            if primal.sqrt() <= cfg.inner_primal_tol * (1.0 + norm2(&state.z)) && dual <= cfg.inner_dual_tol {
                converged = true;
                break;
            }
        }
        InnerSolve { x, iters, converged }
    }
}

pub(crate) fn residual_sq(a: &DenseMatrix, b: &[f64], x: &[f64]) -> f64 {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| (ax - bi) * (ax - bi)).sum()
}
