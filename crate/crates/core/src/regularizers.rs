//! Sparsity penalties, their IRL1 weights and scalar proximal operators.
//!
//! The error-function penalty is
//!
//! ```text
//! Φσ(x) = ∫₀^|x| exp(−τ²/σ²) dτ = (σ√π/2)·erf(|x|/σ),     Jσ(x) = Σⱼ Φσ(xⱼ)
//! ```
//!
//! It is concave on `[0, ∞)`, behaves like `|x|` for `σ → ∞` and like
//! `σ(√π/2)·1[x≠0]` for `σ → 0`. Its derivative `exp(−x²/σ²)` is the IRL1
//! weight.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{norm1, norm2, Signal};

const SQRT_PI_2: f64 = 0.886_226_925_452_758_f64; // √π / 2

/// `Φσ(x)`; even in `x`, with values in `[0, σ√π/2)`.
#[inline]
pub fn erf_phi(x: f64, sigma: f64) -> f64 {
    sigma * SQRT_PI_2 * libm::erf(x.abs() / sigma)
}

/// `Jσ(x) = Σ Φσ(xⱼ)`.
pub fn erf_objective(x: &[f64], sigma: f64) -> f64 {
    x.iter().map(|&v| erf_phi(v, sigma)).sum()
}

/// `Φσ'(|x|) = exp(−x²/σ²)`, floored at the smallest positive normal so
/// weights stay strictly positive.
#[inline]
pub fn erf_weight(x: f64, sigma: f64) -> f64 {
    let r = x / sigma;
    (-r * r).exp().max(f64::MIN_POSITIVE)
}

/// Lower and upper bounds `c·√(1 − e^{−a x²}) ≤ Φσ(x) ≤ c·√(1 − e^{−b x²})`
/// with `a = 1/σ²`, `b = 4/(πσ²)`, `c = σ√π/2`.
pub fn erf_bounds(x: f64, sigma: f64) -> (f64, f64) {
    let c = sigma * SQRT_PI_2;
    let x2 = x * x / (sigma * sigma);
    let lower = c * (-(-x2).exp_m1()).sqrt();
    let upper = c * (-(-(4.0 / PI) * x2).exp_m1()).sqrt();
    (lower, upper)
}

#[inline]
pub fn soft_shrink_scalar(v: f64, mu: f64) -> f64 {
    if v > mu {
        v - mu
    } else if v < -mu {
        v + mu
    } else {
        0.0
    }
}

/// Componentwise soft shrinkage with per-coordinate thresholds.
pub fn soft_shrink(v: &[f64], mu: &[f64]) -> Signal {
    debug_assert_eq!(v.len(), mu.len());
    v.iter().zip(mu).map(|(&vi, &mi)| soft_shrink_scalar(vi, mi)).collect()
}

/// Componentwise soft shrinkage with one threshold.
pub fn soft_shrink_uniform(v: &[f64], mu: f64) -> Signal {
    v.iter().map(|&vi| soft_shrink_scalar(vi, mu)).collect()
}

#[inline]
pub fn hard_threshold_scalar(v: f64, mu: f64) -> f64 {
    if v.abs() > mu {
        v
    } else {
        0.0
    }
}

pub fn hard_threshold(v: &[f64], mu: f64) -> Signal {
    v.iter().map(|&vi| hard_threshold_scalar(vi, mu)).collect()
}

/// Transformed-L1 penalty `(a+1)|x| / (a+|x|)`.
#[inline]
pub fn tl1_phi(x: f64, a: f64) -> f64 {
    let ax = x.abs();
    (a + 1.0) * ax / (a + ax)
}

/// Derivative of the TL1 penalty in `|x|`: `a(a+1)/(a+|x|)²`.
#[inline]
pub fn tl1_weight(x: f64, a: f64) -> f64 {
    let d = a + x.abs();
    a * (a + 1.0) / (d * d)
}

/// Log-sum reweighting `1/(|x|+ε)`.
#[inline]
pub fn logsum_weight(x: f64, epsilon: f64) -> f64 {
    1.0 / (x.abs() + epsilon)
}

/// `p/(|x|+ε)^{1−p}`, the derivative of `(|x|+ε)^p` in `|x|`.
#[inline]
pub fn lp_weight(x: f64, p: f64, epsilon: f64) -> f64 {
    p / (x.abs() + epsilon).powf(1.0 - p)
}

fn check_mu(mu: f64) -> Result<()> {
    if mu >= 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("prox parameter mu must be >= 0, got {mu}")))
    }
}

/// Proximal operator of the TL1 penalty,
/// `argminₓ μ·(a+1)|x|/(a+|x|) + ½(x−v)²`.
///
/// Zero below the threshold `μ(a+1)/a` (when `μ ≤ a²/(2(a+1))`) or
/// `√(2μ(a+1)) − a/2` (otherwise); above it the cubic's trigonometric root.
pub fn tl1_prox(v: f64, mu: f64, a: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(a > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("tl1_prox needs a > 0 and finite v (a={a}, v={v})")));
    }
    if mu == 0.0 {
        return Ok(v);
    }
    let av = v.abs();
    let threshold = if mu <= a * a / (2.0 * (a + 1.0)) {
        mu * (a + 1.0) / a
    } else {
        (2.0 * mu * (a + 1.0)).sqrt() - a / 2.0
    };
    if av <= threshold {
        return Ok(0.0);
    }
    let mut arg = 1.0 - 27.0 * mu * a * (a + 1.0) / (2.0 * (a + av).powi(3));
    if !(-1.0..=1.0).contains(&arg) {
        if (-1.0 - 1e-12..=1.0 + 1e-12).contains(&arg) {
            arg = arg.clamp(-1.0, 1.0);
        } else {
            return Err(Error::Domain(format!("tl1_prox arccos argument {arg}")));
        }
    }
    let phi = arg.acos();
    let mag = 2.0 / 3.0 * (a + av) * (phi / 3.0).cos() - 2.0 * a / 3.0 + av / 3.0;
    // Guard the threshold boundary against rounding: keep whichever of
    // {0, root} has the lower objective.
    let obj = |x: f64| mu * tl1_phi(x, a) + 0.5 * (x - av) * (x - av);
    let mag = if obj(mag) <= obj(0.0) { mag } else { 0.0 };
    Ok(v.signum() * mag)
}

/// Default Newton tolerance for [`erf_prox`].
pub const ERF_PROX_TOL: f64 = 1e-12;
/// Default iteration cap for [`erf_prox`].
pub const ERF_PROX_MAX_ITER: usize = 100;

/// Proximal operator of the ERF penalty,
/// `argminₓ μ·Φσ(x) + ½(x−v)²`.
///
/// Nonzero minimizers solve `x + μ·exp(−x²/σ²) = |v|` on `(0, |v|)`, and
/// `x = 0` is a local minimum whenever `|v| ≤ μ`. When `μ√2·e^{−1/2} ≤ σ`
/// the residual is monotone and the answer is 0 exactly for `|v| ≤ μ`.
/// Otherwise there can be two local minima (0 or a small root, and a root
/// near `|v|`); the one with the lower objective is returned. Each root is
/// found by Newton's method safeguarded by bisection on a bracket where
/// the residual is monotone.
pub fn erf_prox(v: f64, mu: f64, sigma: f64, tol: f64, max_iter: usize) -> Result<f64> {
    check_mu(mu)?;
    if !(sigma > 0.0) || !v.is_finite() || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "erf_prox needs sigma > 0, tol > 0 and finite v (sigma={sigma}, tol={tol}, v={v})"
        )));
    }
    let t = v.abs();
    if t == 0.0 || mu == 0.0 {
        return Ok(v);
    }
    let s2 = sigma * sigma;
    let g = |x: f64| x + mu * (-x * x / s2).exp() - t;
    let dg = |x: f64| 1.0 - 2.0 * mu * x / s2 * (-x * x / s2).exp();
    let h = |x: f64| mu * erf_phi(x, sigma) + 0.5 * (x - t) * (x - t);

    // g' vanishes where x·exp(−x²/σ²) = σ²/(2μ); the left side peaks at σ/√2.
    let peak_x = sigma / std::f64::consts::SQRT_2;
    let target = s2 / (2.0 * mu);
    let peak = peak_x * (-0.5f64).exp();
    let guess = (t - mu * (-t * t / s2).exp()).clamp(0.0, t);

    if peak <= target {
        if t <= mu {
            return Ok(0.0);
        }
        return newton_bracketed(&g, &dg, 0.0, t, guess, tol, max_iter).map(|x| v.signum() * x);
    }

    let k = |x: f64| x * (-x * x / s2).exp() - target;
    let x1 = bisect(&k, 0.0, peak_x);
    let mut hi = 2.0 * peak_x;
    while k(hi) > 0.0 {
        hi *= 2.0;
    }
    let x2 = bisect(&|x| -k(x), peak_x, hi);

    let mut best: Option<(f64, f64)> = None;
    let mut consider = |x: f64| {
        let val = h(x);
        if best.is_none_or(|(_, b)| val < b) {
            best = Some((x, val));
        }
    };
    if t <= mu {
        // g(0) ≥ 0: the left local minimum is x = 0 itself.
        consider(0.0);
    } else {
        let end1 = x1.min(t);
        if g(end1) >= 0.0 {
            consider(newton_bracketed(&g, &dg, 0.0, end1, guess.min(end1), tol, max_iter)?);
        }
    }
    if x2 < t && g(x2) <= 0.0 {
        consider(newton_bracketed(&g, &dg, x2, t, guess.max(x2), tol, max_iter)?);
    }
    // Some candidate always exists: either 0, or g(0) < 0 < g(t) puts a
    // root in one of the brackets.
    let (x, _) = best.ok_or(Error::NoConvergence(0))?;
    Ok(v.signum() * x)
}

/// Root of an increasing `f` on `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)`.
fn newton_bracketed(
    f: &impl Fn(f64) -> f64,
    df: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut x = start.clamp(lo, hi);
    for _ in 0..max_iter {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let scale = 1.0 + next.abs();
        if (next - x).abs() <= tol * scale || hi - lo <= tol * scale {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence(max_iter))
}

/// Sign change of `f` on `[lo, hi]` with `f(lo) < 0 < f(hi)`.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A sparsity penalty with its parameters.
///
/// `L1`, `Erf`, `LogSum`, `Lp`, `Tl1` and `L1MinusL2` have solvers;
/// `CappedL1`, `Scad` and `Mcp` are evaluated only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    L1,
    Erf { sigma: f64 },
    /// `Σ log(|xⱼ| + ε)`
    LogSum { epsilon: f64 },
    /// `Σ ((|xⱼ| + ε)^p − ε^p)`; equals `Σ|xⱼ|^p` at `ε = 0`.
    Lp { p: f64, epsilon: f64 },
    Tl1 { a: f64 },
    /// `‖x‖₁ − ‖x‖₂` (not separable)
    L1MinusL2,
    CappedL1 { a: f64 },
    Scad { lambda: f64, gamma: f64 },
    Mcp { lambda: f64, gamma: f64 },
}

impl Penalty {
    /// Short label used in CSV files and on the command line.
    pub fn label(&self) -> &'static str {
        match self {
            Penalty::L1 => "l1",
            Penalty::Erf { .. } => "erf",
            Penalty::LogSum { .. } => "logsum",
            Penalty::Lp { .. } => "lp-irl1",
            Penalty::Tl1 { .. } => "tl1",
            Penalty::L1MinusL2 => "l1-l2",
            Penalty::CappedL1 { .. } => "cl1",
            Penalty::Scad { .. } => "scad",
            Penalty::Mcp { .. } => "mcp",
        }
    }

    /// Parses a label plus named parameters, filling unset ones with the
    /// usual defaults (log-sum ε = 0.1, Lp p = 1/2 with ε = 0.01, TL1 a = 1).
    pub fn parse(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let p = match name.to_ascii_lowercase().as_str() {
            "l1" => Penalty::L1,
            "erf" => Penalty::Erf { sigma: get("sigma", 1.0) },
            "logsum" | "log-sum" | "l0" => Penalty::LogSum { epsilon: get("epsilon", 0.1) },
            "lp" | "lp-irl1" => Penalty::Lp { p: get("p", 0.5), epsilon: get("epsilon", 0.01) },
            "tl1" => Penalty::Tl1 { a: get("a", 1.0) },
            "l1-l2" | "l1l2" | "l1minusl2" => Penalty::L1MinusL2,
            "cl1" => Penalty::CappedL1 { a: get("a", 1.0) },
            "scad" => Penalty::Scad { lambda: get("lambda", 1.0), gamma: get("gamma", 3.7) },
            "mcp" => Penalty::Mcp { lambda: get("lambda", 1.0), gamma: get("gamma", 2.0) },
            _ => return Err(Error::UnknownPenalty(name.to_string())),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Penalty::L1 | Penalty::L1MinusL2 => true,
            Penalty::Erf { sigma } => sigma > 0.0 && sigma.is_finite(),
            Penalty::LogSum { epsilon } => epsilon > 0.0 && epsilon.is_finite(),
            Penalty::Lp { p, epsilon } => p > 0.0 && p < 1.0 && epsilon > 0.0 && epsilon.is_finite(),
            Penalty::Tl1 { a } | Penalty::CappedL1 { a } => a > 0.0 && a.is_finite(),
            Penalty::Scad { lambda, gamma } => lambda > 0.0 && gamma > 1.0,
            Penalty::Mcp { lambda, gamma } => lambda > 0.0 && gamma > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid parameters for {self}")))
        }
    }

    /// Penalty value of one coordinate; `None` for non-separable penalties.
    pub fn phi(&self, x: f64) -> Option<f64> {
        let ax = x.abs();
        Some(match *self {
            Penalty::L1 => ax,
            Penalty::Erf { sigma } => erf_phi(x, sigma),
            Penalty::LogSum { epsilon } => (ax + epsilon).ln(),
            Penalty::Lp { p, epsilon } => (ax + epsilon).powf(p) - epsilon.powf(p),
            Penalty::Tl1 { a } => tl1_phi(x, a),
            Penalty::CappedL1 { a } => ax.min(a),
            Penalty::Scad { lambda, gamma } => {
                if ax <= lambda {
                    lambda * ax
                } else if ax <= gamma * lambda {
                    (2.0 * gamma * lambda * ax - ax * ax - lambda * lambda) / (2.0 * (gamma - 1.0))
                } else {
                    (gamma + 1.0) * lambda * lambda / 2.0
                }
            }
            Penalty::Mcp { lambda, gamma } => {
                if ax <= gamma * lambda {
                    lambda * ax - ax * ax / (2.0 * gamma)
                } else {
                    0.5 * gamma * lambda * lambda
                }
            }
            Penalty::L1MinusL2 => return None,
        })
    }

    /// Reweighting rule of the IRL1 scheme, i.e. the derivative of the
    /// penalty in `|x|`. `None` for penalties without an IRL1 solver here.
    pub fn weight(&self, x: f64) -> Option<f64> {
        Some(match *self {
            Penalty::L1 => 1.0,
            Penalty::Erf { sigma } => erf_weight(x, sigma),
            Penalty::LogSum { epsilon } => logsum_weight(x, epsilon),
            Penalty::Lp { p, epsilon } => lp_weight(x, p, epsilon),
            Penalty::Tl1 { a } => tl1_weight(x, a),
            _ => return None,
        })
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Penalty::Erf { sigma } => write!(f, "erf(sigma={sigma})"),
            Penalty::LogSum { epsilon } => write!(f, "logsum(epsilon={epsilon})"),
            Penalty::Lp { p, epsilon } => write!(f, "lp-irl1(p={p}, epsilon={epsilon})"),
            Penalty::Tl1 { a } => write!(f, "tl1(a={a})"),
            Penalty::CappedL1 { a } => write!(f, "cl1(a={a})"),
            Penalty::Scad { lambda, gamma } => write!(f, "scad(lambda={lambda}, gamma={gamma})"),
            Penalty::Mcp { lambda, gamma } => write!(f, "mcp(lambda={lambda}, gamma={gamma})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Evaluates a penalty on a vector.
pub fn penalty_eval(x: &[f64], penalty: &Penalty) -> Result<f64> {
    penalty.validate()?;
    Ok(match penalty {
        Penalty::L1MinusL2 => norm1(x) - norm2(x),
        p => x.iter().map(|&v| p.phi(v).unwrap_or(0.0)).sum(),
    })
}
