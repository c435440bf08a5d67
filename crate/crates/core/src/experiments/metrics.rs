use crate::error::{Error, Result};
use crate::linalg::{factor_spd, norm2, DenseMatrix, SupportSet};

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    Ok(())
}

/// `‖x̂ − x‖₂ / ‖x‖₂`.
pub fn relative_error(x_hat: &[f64], x_true: &[f64]) -> Result<f64> {
    same_len(x_hat, x_true)?;
    let denom = norm2(x_true);
    if denom == 0.0 {
        return Err(Error::ZeroTruth);
    }
    Ok(crate::linalg::dist2(x_hat, x_true) / denom)
}

/// A recovery counts as a success when its relative error is below `tol`.
pub fn success(x_hat: &[f64], x_true: &[f64], tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("success tolerance must be > 0, got {tol}")));
    }
    Ok(relative_error(x_hat, x_true)? < tol)
}

/// Total squared error `‖x̂ − x‖₂²` (not divided by the length).
pub fn squared_error(x_hat: &[f64], x_true: &[f64]) -> Result<f64> {
    same_len(x_hat, x_true)?;
    Ok(x_hat.iter().zip(x_true).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Expected squared error of least squares on the true support,
/// `σ²·tr((A_Λᵀ A_Λ)⁻¹)`.
pub fn oracle_mse(a: &DenseMatrix, support: &SupportSet, sigma_noise: f64) -> Result<f64> {
    if support.is_empty() {
        return Ok(0.0);
    }
    if support.len() > a.rows() {
        return Err(Error::RankDeficient);
    }
    let sub = a.select_columns(support.indices())?;
    let factor = factor_spd(&sub.gram_cols()).map_err(|e| match e {
        Error::NotSpd { .. } => Error::RankDeficient,
        other => other,
    })?;
    Ok(sigma_noise * sigma_noise * factor.inverse_diagonal().iter().sum::<f64>())
}
