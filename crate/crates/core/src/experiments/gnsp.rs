//! Refutation-only check of the generalized null space property
//! `Jσ(v_S) < Jσ(v_{S^c})` for all nonzero `v ∈ ker A` and all `|S| ≤ s`.
//!
//! Confirming the property is NP-hard, so the check samples kernel vectors
//! and reports either a concrete counterexample or `Undetermined`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix, Signal, SupportSet};
use crate::regularizers::erf_objective;
use crate::rng::RngStream;

pub const MAX_GNSP_DIM: usize = 24;
pub const MAX_GNSP_ORDER: usize = 4;

/// Scales tried along every sampled direction, as multiples of σ. The
/// penalty is not homogeneous, so the property has to hold at every scale.
pub const GNSP_SCALES: [f64; 13] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];

#[derive(Debug, Clone, PartialEq)]
pub enum GnspVerdict {
    /// `witness ∈ ker A` with `Jσ(witness_S) ≥ Jσ(witness_{S^c})`.
    Falsified { witness: Signal, support: SupportSet },
    /// No violation found. `trivial_kernel` marks `ker A = {0}`, where the
    /// property holds vacuously.
    Undetermined { candidates_checked: usize, trivial_kernel: bool },
}

impl GnspVerdict {
    pub fn is_falsified(&self) -> bool {
        matches!(self, GnspVerdict::Falsified { .. })
    }
}

/// Orthonormal basis of `ker A` from a full SVD.
pub fn kernel_basis(a: &DenseMatrix) -> Vec<Signal> {
    let (m, n) = (a.rows(), a.cols());
    // Pad to square so the SVD returns all n right singular vectors.
    let size = m.max(n);
    let padded = DMatrix::from_fn(size, n, |i, j| if i < m { a.get(i, j) } else { 0.0 });
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = size as f64 * f64::EPSILON * s_max.max(1e-300);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Support of the `s` largest magnitudes; it maximizes `Jσ(v_S)` over
/// `|S| ≤ s` because `Φσ` increases in `|x|`.
fn top_support(v: &[f64], s: usize) -> SupportSet {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    order.truncate(s);
    SupportSet::new(order, v.len()).expect("indices are distinct and in range")
}

/// Splits `v` into `(v_S, v_{S^c})` and evaluates `Jσ` on both parts.
pub fn gnsp_sides(v: &[f64], support: &SupportSet, sigma: f64) -> (f64, f64) {
    let (mut inside, mut outside) = (v.to_vec(), v.to_vec());
    for j in 0..v.len() {
        if support.contains(j) {
            outside[j] = 0.0;
        } else {
            inside[j] = 0.0;
        }
    }
    (erf_objective(&inside, sigma), erf_objective(&outside, sigma))
}

/// Samples `samples` random unit kernel directions plus every basis vector,
/// each at the scales in [`GNSP_SCALES`], and returns the first violation.
pub fn gnsp_falsifier(a: &DenseMatrix, sigma: f64, s: usize, samples: usize, rng: &mut RngStream) -> Result<GnspVerdict> {
    if a.cols() > MAX_GNSP_DIM || s > MAX_GNSP_ORDER || s == 0 {
        return Err(Error::InvalidParameter(format!(
            "gNSP check limited to n <= {MAX_GNSP_DIM} and 1 <= s <= {MAX_GNSP_ORDER} (n={}, s={s})",
            a.cols()
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    let basis = kernel_basis(a);
    if basis.is_empty() {
        return Ok(GnspVerdict::Undetermined { candidates_checked: 0, trivial_kernel: true });
    }
    let n = a.cols();
    let mut directions: Vec<Signal> = basis.clone();
    for _ in 0..samples {
        let mut v = vec![0.0; n];
        for b in &basis {
            let c: f64 = rng.sample(StandardNormal);
            crate::linalg::axpy(c, b, &mut v);
        }
        let norm = norm2(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            directions.push(v);
        }
    }

    let mut checked = 0;
    for d in &directions {
        let support = top_support(d, s);
        for scale in GNSP_SCALES {
            checked += 1;
            let v: Signal = d.iter().map(|x| x * scale * sigma).collect();
            let (inside, outside) = gnsp_sides(&v, &support, sigma);
            if inside >= outside {
                return Ok(GnspVerdict::Falsified { witness: v, support });
            }
        }
    }
    Ok(GnspVerdict::Undetermined { candidates_checked: checked, trivial_kernel: false })
}
