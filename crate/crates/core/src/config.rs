use crate::error::{Error, Result};
use crate::linalg::Signal;

/// Iteration caps, tolerances and ADMM parameters shared by every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Outer (reweighting) iterations, counting the initial L1 solve.
    pub max_outer: usize,
    /// ADMM iterations per inner solve.
    pub max_inner: usize,
    /// Outer stop: `‖x⁺ − x‖₂ ≤ outer_tol·(1 + ‖x‖₂)`.
    pub outer_tol: f64,
    pub inner_primal_tol: f64,
    pub inner_dual_tol: f64,
    /// ADMM penalty. `None` means 1 for basis pursuit and `lambda` for lasso.
    pub delta: Option<f64>,
    /// Data-fit weight of the unconstrained models.
    pub lambda: f64,
    /// Keep the scaled dual of the constrained inner solver between outer
    /// iterations instead of resetting it to zero.
    pub reuse_dual: bool,
    /// ADMM over-relaxation factor in `(0, 2)`; 1 is plain ADMM.
    pub relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer: 20,
            max_inner: 5000,
            outer_tol: 1e-8,
            inner_primal_tol: 1e-10,
            inner_dual_tol: 1e-10,
            delta: None,
            lambda: 0.1,
            reuse_dual: true,
            relaxation: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.max_outer < 1 || self.max_inner < 1 {
            return bad("iteration caps must be at least 1");
        }
        let tols = [self.outer_tol, self.inner_primal_tol, self.inner_dual_tol];
        if tols.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("tolerances must be positive and finite");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad("delta must be positive");
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return bad("relaxation must lie in (0, 2)");
        }
        Ok(())
    }

    pub fn bp_delta(&self) -> f64 {
        self.delta.unwrap_or(1.0)
    }

    pub fn lasso_delta(&self) -> f64 {
        self.delta.unwrap_or(self.lambda)
    }

    /// Applies a `key=value` override. Unknown keys are reported back as an
    /// error so typos in config files do not pass silently.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")))
        }
        match key {
            "max_outer" => self.max_outer = num(key, value)?,
            "max_inner" => self.max_inner = num(key, value)?,
            "outer_tol" => self.outer_tol = num(key, value)?,
            "inner_primal_tol" => self.inner_primal_tol = num(key, value)?,
            "inner_dual_tol" => self.inner_dual_tol = num(key, value)?,
            "inner_tol" => {
                self.inner_primal_tol = num(key, value)?;
                self.inner_dual_tol = self.inner_primal_tol;
            }
            "delta" => self.delta = Some(num(key, value)?),
            "lambda" => self.lambda = num(key, value)?,
            "reuse_dual" => self.reuse_dual = num(key, value)?,
            "relaxation" => self.relaxation = num(key, value)?,
            _ => return Err(Error::Parse(format!("unknown solver key `{key}`"))),
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("max_outer".to_string(), self.max_outer.to_string()),
            ("max_inner".to_string(), self.max_inner.to_string()),
            ("outer_tol".to_string(), format!("{:e}", self.outer_tol)),
            ("inner_primal_tol".to_string(), format!("{:e}", self.inner_primal_tol)),
            ("inner_dual_tol".to_string(), format!("{:e}", self.inner_dual_tol)),
            ("lambda".to_string(), format!("{:e}", self.lambda)),
            ("reuse_dual".to_string(), self.reuse_dual.to_string()),
            ("relaxation".to_string(), format!("{:e}", self.relaxation)),
        ];
        if let Some(d) = self.delta {
            v.push(("delta".to_string(), format!("{d:e}")));
        }
        v
    }
}

/// Result of a solver run. `converged == false` means an iteration cap was
/// hit; the solution is still the last accepted iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solution: Signal,
    pub objective_trace: Vec<f64>,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub converged: bool,
    pub wall_seconds: f64,
}

/// Parses a flat config file: one `key = value` per line, `#` starts a
/// comment, blank lines are ignored. Pairs come back in file order.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}
