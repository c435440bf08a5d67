mod common;

use common::complex_dft_lowpass;
use erf_sparse::linalg::{dot, norm2, DenseMatrix, SupportSet};
use erf_sparse::problems::{
    add_gaussian_noise, gaussian_sensing_matrix, min_sep_support, oversampled_dct, partial_fourier_real,
    sparse_gaussian_signal, spike_train, DctSpec, ProblemInstance, SuperResSpec,
};
use erf_sparse::rng::seeded_rng;
use erf_sparse::Error;
use rand::Rng;

/// (max, mean) absolute normalized off-diagonal Gram entries.
fn coherence(a: &DenseMatrix) -> (f64, f64) {
    let cols: Vec<Vec<f64>> = (0..a.cols()).map(|j| a.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    let (mut max, mut sum, mut count) = (0.0f64, 0.0, 0usize);
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            let c = (dot(&cols[i], &cols[j]) / (norms[i] * norms[j])).abs();
            max = max.max(c);
            sum += c;
            count += 1;
        }
    }
    (max, sum / count as f64)
}

#[test]
fn dct_coherence_grows_with_f() {
    let (mut mean1, mut mean20) = (0.0, 0.0);
    for seed in 0..20 {
        let a1 = oversampled_dct(&DctSpec { m: 64, n: 256, f: 1.0 }, &mut seeded_rng(seed)).unwrap();
        let a20 = oversampled_dct(&DctSpec { m: 64, n: 256, f: 20.0 }, &mut seeded_rng(seed)).unwrap();
        mean1 += coherence(&a1).1;
        mean20 += coherence(&a20).1;
    }
    assert!(mean20 > mean1, "{mean20} <= {mean1}");

    let a = oversampled_dct(&DctSpec { m: 64, n: 1024, f: 20.0 }, &mut seeded_rng(7)).unwrap();
    assert!(coherence(&a).0 > 0.99);
    for j in 0..a.cols() {
        let norm = norm2(&a.column(j));
        assert!(norm > 0.0 && norm <= 1.0 + 1e-12);
    }
}

#[test]
fn separated_supports() {
    for seed in 0..50 {
        let s = min_sep_support(100, 2, 50.0, &mut seeded_rng(seed)).unwrap();
        assert_eq!(s.min_circular_gap(100), Some(50));
    }
    for seed in 0..1000 {
        let s = min_sep_support(1024, 20, 40.0, &mut seeded_rng(seed)).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.min_circular_gap(1024).unwrap() >= 40);
    }
    assert_eq!(min_sep_support(10, 1, 3.0, &mut seeded_rng(0)).unwrap().len(), 1);
    assert!(matches!(min_sep_support(100, 3, 50.0, &mut seeded_rng(0)), Err(Error::Infeasible(_))));
}

#[test]
fn gaussian_signal_moments() {
    let mut rng = seeded_rng(5);
    assert_eq!(sparse_gaussian_signal(7, &SupportSet::default(), &mut rng), vec![0.0; 7]);
    let all = SupportSet::new((0..10_000).collect(), 10_000).unwrap();
    let x = sparse_gaussian_signal(10_000, &all, &mut rng);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
    assert!(mean.abs() < 0.05 && (var - 1.0).abs() < 0.05);
    let support = SupportSet::new(vec![1, 4], 6).unwrap();
    assert_eq!(
        sparse_gaussian_signal(6, &support, &mut seeded_rng(1)),
        sparse_gaussian_signal(6, &support, &mut seeded_rng(1))
    );
}

#[test]
fn sensing_matrix_columns() {
    let a = gaussian_sensing_matrix(240, 512, &mut seeded_rng(3)).unwrap();
    for j in 0..512 {
        let c = a.column(j);
        assert!((norm2(&c) - 1.0).abs() < 1e-12);
        assert!(c.iter().sum::<f64>().abs() < 1e-10);
    }
    assert_eq!(a, gaussian_sensing_matrix(240, 512, &mut seeded_rng(3)).unwrap());
}

#[test]
fn fourier_rows_match_complex_oracle() {
    let spec = SuperResSpec { n_grid: 1000, fc: 31 };
    let a = partial_fourier_real(&spec).unwrap();
    assert_eq!(a.rows(), 63);

    let mut e0 = vec![0.0; 1000];
    e0[0] = 1.0;
    let y = a.mul_vec(&e0);
    let inv = 1.0 / 1000f64.sqrt();
    assert!(y[..32].iter().all(|v| (v - inv).abs() < 1e-15));
    assert!(y[32..].iter().all(|v| v.abs() < 1e-15));

    let spec = SuperResSpec { n_grid: 97, fc: 12 };
    let a = partial_fourier_real(&spec).unwrap();
    let mut rng = seeded_rng(8);
    for _ in 0..100 {
        let x: Vec<f64> = (0..97).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = a.mul_vec(&x);
        let oracle = complex_dft_lowpass(&x, 12);
        for (k, (re, im)) in oracle.iter().enumerate() {
            assert!((y[k] - re).abs() < 1e-10);
            if k > 0 {
                assert!((y[12 + k] - im).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn spike_trains_respect_separation() {
    let spec = SuperResSpec { n_grid: 1000, fc: 40 };
    for seed in 0..200 {
        let t = spike_train(&spec, 20.0, &mut seeded_rng(seed)).unwrap();
        assert!(t.support.len() <= 50 && t.support.len() >= 2);
        assert!(t.support.min_circular_gap(1000).unwrap() >= 20);
        assert_eq!(t.coefficients.len(), t.support.len());
    }
    assert_eq!(spike_train(&spec, 20.0, &mut seeded_rng(4)).unwrap(), spike_train(&spec, 20.0, &mut seeded_rng(4)).unwrap());
}

#[test]
fn noise_moments() {
    let b = vec![1.0, -2.0, 3.0];
    assert_eq!(add_gaussian_noise(&b, 0.0, &mut seeded_rng(0)).unwrap(), b);
    assert_eq!(add_gaussian_noise(&b, 0.3, &mut seeded_rng(2)).unwrap(), add_gaussian_noise(&b, 0.3, &mut seeded_rng(2)).unwrap());
    let zeros = vec![0.0; 100_000];
    let e = add_gaussian_noise(&zeros, 0.1, &mut seeded_rng(6)).unwrap();
    let var = e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64;
    assert!((var / 0.01 - 1.0).abs() < 0.02, "{var}");
    assert!(add_gaussian_noise(&b, -1.0, &mut seeded_rng(0)).is_err());
}

#[test]
fn instances_are_consistent() {
    let dct = ProblemInstance::dct(&DctSpec { m: 32, n: 128, f: 5.0 }, 4, &mut seeded_rng(1)).unwrap();
    let x = dct.x_true.as_ref().unwrap();
    assert_eq!(dct.a.mul_vec(x), dct.b);
    assert_eq!(dct.support.as_ref().unwrap(), &SupportSet::of(x));

    let sr = ProblemInstance::superres(&SuperResSpec { n_grid: 200, fc: 10 }, 10.0, &mut seeded_rng(1)).unwrap();
    assert_eq!(sr.a.rows(), 21);
    assert_eq!(sr.a.mul_vec(sr.x_true.as_ref().unwrap()), sr.b);

    let noisy = ProblemInstance::noisy_gaussian(40, 80, 5, 0.1, &mut seeded_rng(1)).unwrap();
    let clean = noisy.a.mul_vec(noisy.x_true.as_ref().unwrap());
    let diff: Vec<f64> = clean.iter().zip(&noisy.b).map(|(p, q)| p - q).collect();
    assert!(norm2(&diff) > 0.0 && norm2(&diff) < 2.0);
    assert_eq!(noisy.noise, 0.1);
}
