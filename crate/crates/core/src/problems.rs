//! Sensing matrices, ground-truth signals and noise for the benchmarks.
//!
//! Everything draws from a caller-supplied [`RngStream`], so an instance is
//! a pure function of the stream state.

use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Signal, SupportSet};
use crate::rng::RngStream;

/// Shape and coherence of an over-sampled DCT matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DctSpec {
    pub m: usize,
    pub n: usize,
    /// Larger values give more coherent columns.
    pub f: f64,
}

impl DctSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.n || !(self.f > 0.0 && self.f.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "DCT spec needs 0 < m < n and F > 0 (m={}, n={}, F={})",
                self.m, self.n, self.f
            )));
        }
        Ok(())
    }
}

/// Over-sampled DCT: column `j` (1-based) is `cos(2π j w / F)/√m` with a
/// single draw `w ~ U[0,1]^m` shared by all columns.
pub fn oversampled_dct(spec: &DctSpec, rng: &mut RngStream) -> Result<DenseMatrix> {
    spec.validate()?;
    let w: Vec<f64> = (0..spec.m).map(|_| rng.random::<f64>()).collect();
    let scale = 1.0 / (spec.m as f64).sqrt();
    DenseMatrix::from_fn(spec.m, spec.n, |i, j| {
        scale * (2.0 * PI * (j + 1) as f64 * w[i] / spec.f).cos()
    })
}

/// `s` indices on a circle of length `n` whose pairwise wrap-around
/// distance is at least `min_gap`.
///
/// The circular gaps are `⌈min_gap⌉` plus a uniformly random composition of
/// the remaining slack, and the whole pattern is rotated by a uniform
/// offset, so every call yields a valid support without rejection.
pub fn min_sep_support(n: usize, s: usize, min_gap: f64, rng: &mut RngStream) -> Result<SupportSet> {
    if !(min_gap >= 0.0 && min_gap.is_finite()) {
        return Err(Error::InvalidParameter(format!("min_gap must be >= 0, got {min_gap}")));
    }
    if s as f64 * min_gap > n as f64 || s > n {
        return Err(Error::Infeasible(format!(
            "{s} indices with gap {min_gap} do not fit in {n}"
        )));
    }
    if s == 0 {
        return Ok(SupportSet::default());
    }
    let gap = (min_gap.ceil() as usize).max(1);
    if s * gap > n {
        return Err(Error::Infeasible(format!(
            "{s} indices with integer gap {gap} do not fit in {n}"
        )));
    }
    let slack = n - s * gap;
    // Stars and bars: s-1 bars among slack + s - 1 slots.
    let mut bars = index::sample(rng, slack + s - 1, s - 1).into_vec();
    bars.sort_unstable();
    let mut gaps = Vec::with_capacity(s);
    let mut prev = 0usize;
    for (k, &bar) in bars.iter().enumerate() {
        let stars = bar - k;
        gaps.push(gap + stars - prev);
        prev = stars;
    }
    gaps.push(gap + slack - prev);

    let offset = rng.random_range(0..n);
    let mut pos = offset;
    let mut indices = Vec::with_capacity(s);
    for g in &gaps {
        indices.push(pos % n);
        pos += g;
    }
    let support = SupportSet::new(indices, n)?;
    debug_assert!(support.min_circular_gap(n).is_none_or(|g| g as f64 >= min_gap));
    Ok(support)
}

/// `s` distinct indices drawn uniformly from `0..n`.
pub fn random_support(n: usize, s: usize, rng: &mut RngStream) -> Result<SupportSet> {
    if s > n {
        return Err(Error::Infeasible(format!("support of size {s} in dimension {n}")));
    }
    SupportSet::new(index::sample(rng, n, s).into_vec(), n)
}

/// Zeros off `support`, standard normal draws on it (in index order).
pub fn sparse_gaussian_signal(n: usize, support: &SupportSet, rng: &mut RngStream) -> Signal {
    let mut x = vec![0.0; n];
    for &j in support.indices() {
        x[j] = rng.sample(StandardNormal);
    }
    x
}

/// Gaussian matrix whose columns are centred and scaled to unit norm.
///
/// Centring makes the rows sum to zero, so `rank A ≤ m − 1`: suited to the
/// unconstrained models only.
pub fn gaussian_sensing_matrix(m: usize, n: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    if m < 2 || n == 0 {
        return Err(Error::InvalidParameter(format!("need m >= 2 and n >= 1 (m={m}, n={n})")));
    }
    let mut cols = Vec::with_capacity(n);
    for _ in 0..n {
        let mut c: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let mean = c.iter().sum::<f64>() / m as f64;
        c.iter_mut().for_each(|v| *v -= mean);
        let norm = crate::linalg::norm2(&c);
        c.iter_mut().for_each(|v| *v /= norm);
        cols.push(c);
    }
    DenseMatrix::from_fn(m, n, |i, j| cols[j][i])
}

/// Fine grid of `n_grid` points observed up to frequency `fc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuperResSpec {
    pub n_grid: usize,
    pub fc: usize,
}

impl SuperResSpec {
    pub fn validate(&self) -> Result<()> {
        if 2 * self.fc + 1 >= self.n_grid {
            return Err(Error::InvalidParameter(format!(
                "need 2fc+1 < N (fc={}, N={})",
                self.fc, self.n_grid
            )));
        }
        Ok(())
    }

    /// Number of real measurements, `2fc + 1`.
    pub fn measurements(&self) -> usize {
        2 * self.fc + 1
    }

    /// Minimum separation factor `MS·fc/N`.
    pub fn msf(&self, ms: f64) -> f64 {
        ms * self.fc as f64 / self.n_grid as f64
    }
}

/// Real form of the low-pass Fourier operator
/// `b_k = N^{-1/2} Σₜ xₜ e^{−2πikt/N}, |k| ≤ fc`.
///
/// For real `x`, `b_{−k} = conj(b_k)`, so rows `0..=fc` hold `Re b_k`
/// (`cos(2πkt/N)/√N`) and rows `fc+1..2fc` hold `Im b_k` for `k = 1..fc`
/// (`−sin(2πkt/N)/√N`).
pub fn partial_fourier_real(spec: &SuperResSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let n = spec.n_grid;
    let scale = 1.0 / (n as f64).sqrt();
    DenseMatrix::from_fn(spec.measurements(), n, |r, t| {
        let (k, use_cos) = if r <= spec.fc { (r, true) } else { (r - spec.fc, false) };
        // Reduce kt mod N before scaling to keep the phase exact.
        let phase = 2.0 * PI * ((k * t) % n) as f64 / n as f64;
        if use_cos {
            scale * phase.cos()
        } else {
            -scale * phase.sin()
        }
    })
}

/// Point sources on the discrete circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    pub n: usize,
    pub support: SupportSet,
    pub coefficients: Vec<f64>,
}

impl SpikeTrain {
    pub fn to_signal(&self) -> Signal {
        let mut x = vec![0.0; self.n];
        for (&j, &c) in self.support.indices().iter().zip(&self.coefficients) {
            x[j] = c;
        }
        x
    }
}

/// Packs spikes around the circle starting at a uniform offset. Gaps
/// alternate between exactly `MS` and a uniform integer in `[MS, 2·MS]`,
/// until the next spike would come closer than `MS` to the first.
/// Coefficients are standard normal.
pub fn spike_train(spec: &SuperResSpec, ms: f64, rng: &mut RngStream) -> Result<SpikeTrain> {
    spec.validate()?;
    let n = spec.n_grid;
    if !(ms >= 1.0) || ms > n as f64 {
        return Err(Error::Infeasible(format!("minimum separation {ms} on a grid of {n}")));
    }
    let gap = ms.ceil() as usize;
    let offset = rng.random_range(0..n);
    let mut steps = vec![0usize];
    let mut travelled = 0usize;
    for k in 0.. {
        let g = if k % 2 == 0 { gap } else { rng.random_range(gap..=2 * gap) };
        if travelled + g + gap > n {
            break;
        }
        travelled += g;
        steps.push(travelled);
    }
    let support = SupportSet::new(steps.iter().map(|d| (offset + d) % n).collect(), n)?;
    let coefficients = (0..support.len()).map(|_| rng.sample(StandardNormal)).collect();
    debug_assert!(support.min_circular_gap(n).is_none_or(|g| g >= gap));
    Ok(SpikeTrain { n, support, coefficients })
}

/// `b + σ·ξ` with `ξ` iid standard normal.
pub fn add_gaussian_noise(b: &[f64], sigma_noise: f64, rng: &mut RngStream) -> Result<Signal> {
    if !(sigma_noise >= 0.0 && sigma_noise.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level must be >= 0, got {sigma_noise}")));
    }
    Ok(b.iter()
        .map(|&v| v + sigma_noise * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// A recovery problem with optional ground truth.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub b: Signal,
    pub x_true: Option<Signal>,
    pub support: Option<SupportSet>,
    pub noise: f64,
}

impl ProblemInstance {
    /// Over-sampled DCT with an `s`-sparse truth separated by `2F`; noise free.
    pub fn dct(spec: &DctSpec, s: usize, rng: &mut RngStream) -> Result<Self> {
        let a = oversampled_dct(spec, rng)?;
        let support = min_sep_support(spec.n, s, 2.0 * spec.f, rng)?;
        let x = sparse_gaussian_signal(spec.n, &support, rng);
        let b = a.mul_vec(&x);
        Ok(Self { a, b, x_true: Some(x), support: Some(support), noise: 0.0 })
    }

    /// Low-pass Fourier data of a separated spike train; noise free.
    pub fn superres(spec: &SuperResSpec, ms: f64, rng: &mut RngStream) -> Result<Self> {
        let a = partial_fourier_real(spec)?;
        let train = spike_train(spec, ms, rng)?;
        let x = train.to_signal();
        let b = a.mul_vec(&x);
        Ok(Self { a, b, x_true: Some(x), support: Some(train.support), noise: 0.0 })
    }

    /// Normalized Gaussian matrix, uniformly random `s`-sparse Gaussian
    /// truth, additive Gaussian noise.
    pub fn noisy_gaussian(m: usize, n: usize, s: usize, sigma_noise: f64, rng: &mut RngStream) -> Result<Self> {
        let a = gaussian_sensing_matrix(m, n, rng)?;
        let support = random_support(n, s, rng)?;
        let x = sparse_gaussian_signal(n, &support, rng);
        let b = add_gaussian_noise(&a.mul_vec(&x), sigma_noise, rng)?;
        Ok(Self { a, b, x_true: Some(x), support: Some(support), noise: sigma_noise })
    }
}
