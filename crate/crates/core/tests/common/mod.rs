//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use erf_sparse::linalg::{DenseMatrix, SupportSet};

/// Adaptive Simpson quadrature of `∫₀^{|x|} exp(−τ²/σ²) dτ`.
pub fn quad_phi(x: f64, sigma: f64) -> f64 {
    let f = |t: f64| (-(t / sigma) * (t / sigma)).exp();
    adaptive_simpson(&f, 0.0, x.abs(), 1e-14, 50)
}

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, eps: f64, whole: f64, m: f64, fm: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, eps / 2.0, left, lm, flm, depth - 1) + rec(f, m, fm, b, fb, eps / 2.0, right, rm, frm, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, eps, whole, m, fm, depth)
}

/// Minimizes `f` on `[lo, hi]`: dense grid scan, then golden-section
/// refinement around the best grid point. Returns `(x, f(x))`.
pub fn grid_golden_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..points {
        let x = lo + h * i as f64;
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
            best_i = i;
        }
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = (lo + h * (best_i + 1) as f64).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx < best.1 {
        (x, fx)
    } else {
        best
    }
}

/// Brute-force prox: minimizer of `μ·φ(x) + ½(x − v)²`. For penalties
/// that increase in `|x|`, the minimizer lies between 0 and `v`.
pub fn prox_oracle(phi: &dyn Fn(f64) -> f64, mu: f64, v: f64) -> (f64, f64) {
    let obj = |x: f64| mu * phi(x) + 0.5 * (x - v) * (x - v);
    let (lo, hi) = if v >= 0.0 { (0.0, v) } else { (v, 0.0) };
    grid_golden_min(&obj, lo, hi, 100_001)
}

/// Solves a small dense system by Gauss-Jordan elimination with partial
/// pivoting. `None` when singular.
pub fn gauss_solve(m: &[Vec<f64>], r: &[f64]) -> Option<Vec<f64>> {
    let n = r.len();
    let mut aug: Vec<Vec<f64>> = m.iter().zip(r).map(|(row, ri)| row.iter().copied().chain([*ri]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))?;
        if aug[piv][col].abs() < 1e-13 {
            return None;
        }
        aug.swap(col, piv);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for i in 0..n {
            if i != col {
                let factor = aug[i][col];
                let pivot_row = aug[col].clone();
                for (v, pv) in aug[i].iter_mut().zip(pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n]).collect())
}

/// Explicit inverse through Gauss-Jordan on the identity columns.
pub fn explicit_inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            gauss_solve(m, &e).expect("matrix is invertible")
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

pub fn naive_matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|i| (0..a.cols()).map(|j| a.get(i, j) * x[j]).sum()).collect()
}

pub fn naive_matvec_t(a: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    (0..a.cols()).map(|j| (0..a.rows()).map(|i| a.get(i, j) * y[i]).sum()).collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Every exact solution of `Ax = b` supported on linearly independent
/// columns (the basic solutions), with supports of size ≤ `max_size`.
pub fn basic_solutions(a: &DenseMatrix, b: &[f64], max_size: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for k in 1..=max_size.min(a.cols()) {
        for s in subsets(a.cols(), k) {
            let cols: Vec<Vec<f64>> = s.iter().map(|&j| a.column(j)).collect();
            // Normal equations A_SᵀA_S x = A_Sᵀb.
            let g: Vec<Vec<f64>> = cols.iter().map(|ci| cols.iter().map(|cj| ci.iter().zip(cj).map(|(p, q)| p * q).sum()).collect()).collect();
            let r: Vec<f64> = cols.iter().map(|ci| ci.iter().zip(b).map(|(p, q)| p * q).sum()).collect();
            let Some(xs) = gauss_solve(&g, &r) else { continue };
            let mut x = vec![0.0; a.cols()];
            for (&j, v) in s.iter().zip(&xs) {
                x[j] = *v;
            }
            let res: f64 = naive_matvec(a, &x).iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            if res <= 1e-10 * (1.0 + b.iter().map(|v| v * v).sum::<f64>().sqrt()) {
                out.push(x);
            }
        }
    }
    out
}

/// Sparsest exact solution found by exhaustive support search.
pub fn sparsest_solution(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    for k in 1..=a.rows() {
        let sols = basic_solutions_of_size(a, b, k);
        if let Some(x) = sols.into_iter().next() {
            return x;
        }
    }
    panic!("no exact sparse solution");
}

fn basic_solutions_of_size(a: &DenseMatrix, b: &[f64], k: usize) -> Vec<Vec<f64>> {
    basic_solutions(a, b, k).into_iter().filter(|x| SupportSet::of(x).len() == k).collect()
}

/// Proximal-gradient (ISTA) for `λ Σ wⱼ|xⱼ| + ½‖Ax − b‖²`.
pub fn ista(a: &DenseMatrix, b: &[f64], w: &[f64], lambda: f64, steps: usize) -> Vec<f64> {
    // Lipschitz constant from power iteration on AᵀA.
    let n = a.cols();
    let mut v = vec![1.0; n];
    let mut l = 0.0;
    for _ in 0..500 {
        let av = naive_matvec(a, &v);
        let atav = naive_matvec_t(a, &av);
        let norm = atav.iter().map(|x| x * x).sum::<f64>().sqrt();
        l = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = atav.iter().map(|x| x / norm).collect();
    }
    let t = 1.0 / (1.01 * l);
    let mut x = vec![0.0; n];
    for _ in 0..steps {
        let r: Vec<f64> = naive_matvec(a, &x).iter().zip(b).map(|(p, q)| p - q).collect();
        let g = naive_matvec_t(a, &r);
        for j in 0..n {
            let z = x[j] - t * g[j];
            let th = t * lambda * w[j];
            x[j] = z.signum() * (z.abs() - th).max(0.0);
        }
    }
    x
}

pub fn lasso_objective(a: &DenseMatrix, b: &[f64], w: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let r: f64 = naive_matvec(a, x).iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    lambda * x.iter().zip(w).map(|(xi, wi)| wi * xi.abs()).sum::<f64>() + 0.5 * r
}

/// `(1/√N) Σ_t x_t e^{−i2πkt/N}` for `k = 0..=fc`, as (re, im) pairs.
pub fn complex_dft_lowpass(x: &[f64], fc: usize) -> Vec<(f64, f64)> {
    let n = x.len() as f64;
    (0..=fc)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, xt) in x.iter().enumerate() {
                let ph = -2.0 * std::f64::consts::PI * (k as f64) * (t as f64) / n;
                re += xt * ph.cos();
                im += xt * ph.sin();
            }
            (re / n.sqrt(), im / n.sqrt())
        })
        .collect()
}

/// Gaussian matrix with unit-norm (uncentred) columns; full row rank
/// almost surely.
pub fn normalized_gaussian(m: usize, n: usize, rng: &mut erf_sparse::rng::RngStream) -> DenseMatrix {
    use rand::Rng;
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let c: Vec<f64> = (0..m).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            c.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    DenseMatrix::from_fn(m, n, |i, j| cols[j][i]).unwrap()
}
