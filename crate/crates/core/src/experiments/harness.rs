//! Monte-Carlo harnesses for the four benchmark families.
//!
//! Every trial draws its instance from a stream keyed on
//! `(seed, grid point, trial)` and never on the method, so all methods at a
//! grid point see identical problems. Trials may run on a thread pool; the
//! results are collected in trial order, so the output does not depend on
//! `jobs`.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{factor_spd, Signal};
use crate::problems::{DctSpec, ProblemInstance, SuperResSpec};
use crate::regularizers::Penalty;
use crate::rng::{derive_seed, trial_rng};
use crate::solvers::{solve_constrained, solve_unconstrained};

use super::metrics::{oracle_mse, relative_error, squared_error};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SigmaSweep,
    SuccessRate,
    SuperRes,
    Noisy,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SigmaSweep => "sigma_sweep",
            ExperimentKind::SuccessRate => "success_rate",
            ExperimentKind::SuperRes => "superres",
            ExperimentKind::Noisy => "noisy",
        }
    }
}

/// Grid, protocol and solver settings of one benchmark run.
///
/// `sigma` is the ERF σ grid for the sweep and the per-F σ (aligned with
/// `f_list`) for the success-rate comparison; the other kinds take ERF σ
/// from the method parameters (`erf.sigma`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub f_list: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sparsity: Vec<usize>,
    pub m_list: Vec<usize>,
    pub fc_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<String>,
    pub method_params: BTreeMap<String, BTreeMap<String, f64>>,
    pub solver: SolverConfig,
    pub jobs: usize,
    pub success_tol: f64,
    pub dct_m: usize,
    pub dct_n: usize,
    pub n_grid: usize,
    pub ms: f64,
    pub noisy_n: usize,
    pub noisy_s: usize,
    pub sigma_noise: f64,
    /// λ = lambda_c · σ_noise · √(2 log n) for the noisy runs.
    pub lambda_c: f64,
}

/// Solver settings used by the noiseless benchmarks. Success only needs a
/// relative error below 1e-3, so the inner loops stop at 1e-7.
pub fn benchmark_solver_config() -> SolverConfig {
    SolverConfig {
        max_outer: 10,
        max_inner: 2000,
        outer_tol: 1e-6,
        inner_primal_tol: 1e-7,
        inner_dual_tol: 1e-7,
        delta: Some(3.0),
        ..SolverConfig::default()
    }
}

fn range(start: usize, step: usize, end: usize) -> Vec<usize> {
    (start..=end).step_by(step).collect()
}

impl ExperimentSpec {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut spec = ExperimentSpec {
            kind,
            f_list: vec![1.0, 5.0, 10.0, 20.0],
            sigma: vec![],
            sparsity: range(2, 4, 30),
            m_list: vec![],
            fc_list: vec![],
            trials: 50,
            seed: 2020,
            methods: vec![],
            method_params: BTreeMap::new(),
            solver: benchmark_solver_config(),
            jobs: 1,
            success_tol: 1e-3,
            dct_m: 64,
            dct_n: 1024,
            n_grid: 1000,
            ms: 20.0,
            noisy_n: 512,
            noisy_s: 130,
            sigma_noise: 0.1,
            lambda_c: 0.1,
        };
        match kind {
            ExperimentKind::SigmaSweep => {
                spec.sigma = vec![0.05, 0.1, 0.5, 1.0, 5.0, 100.0];
                spec.methods = vec!["erf".into()];
            }
            ExperimentKind::SuccessRate => {
                spec.sigma = vec![0.1, 0.5, 0.5, 1.0];
                spec.methods = ["logsum", "lp-irl1", "tl1", "l1-l2", "erf", "l1"].map(String::from).to_vec();
            }
            ExperimentKind::SuperRes => {
                spec.fc_list = range(31, 1, 60);
                spec.trials = 100;
                spec.success_tol = 1.5e-3;
                spec.methods = ["l1", "l1-l2", "erf"].map(String::from).to_vec();
                spec.set_param("erf", "sigma", 0.3);
            }
            ExperimentKind::Noisy => {
                spec.m_list = range(240, 10, 350);
                spec.trials = 100;
                spec.methods = ["l1", "l1-l2", "erf", "lp-irl1"].map(String::from).to_vec();
                spec.set_param("erf", "sigma", 1.0);
                spec.solver = SolverConfig { max_outer: 10, outer_tol: 1e-6, inner_primal_tol: 1e-7, inner_dual_tol: 1e-7, ..SolverConfig::default() };
            }
        }
        spec
    }

    fn set_param(&mut self, method: &str, key: &str, value: f64) {
        self.method_params.entry(method.to_string()).or_default().insert(key.to_string(), value);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        let empty = match self.kind {
            ExperimentKind::SigmaSweep => self.f_list.is_empty() || self.sigma.is_empty() || self.sparsity.is_empty(),
            ExperimentKind::SuccessRate => self.f_list.is_empty() || self.sparsity.is_empty(),
            ExperimentKind::SuperRes => self.fc_list.is_empty(),
            ExperimentKind::Noisy => self.m_list.is_empty(),
        };
        if empty {
            return bad(format!("{} grid is empty", self.kind.name()));
        }
        if self.kind == ExperimentKind::SuccessRate && self.sigma.len() != self.f_list.len() {
            return bad(format!("{} sigma values for {} F values", self.sigma.len(), self.f_list.len()));
        }
        if !(self.success_tol > 0.0) {
            return bad("success_tol must be > 0".into());
        }
        self.penalties()?;
        self.solver.validate()
    }

    /// The configured methods with their parameters applied.
    pub fn penalties(&self) -> Result<Vec<Penalty>> {
        let none = BTreeMap::new();
        self.methods
            .iter()
            .map(|m| {
                let key = Penalty::parse(m, &none)?.label();
                Penalty::parse(m, self.method_params.get(key).unwrap_or(&none))
            })
            .collect()
    }

    /// Applies a `key=value` override. Lists are comma separated and
    /// integer lists also accept `start:step:end`. Method parameters use
    /// `method.param`; unknown keys fall through to the solver settings.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "F" | "f" => self.f_list = parse_list(key, value)?,
            "sigma" => self.sigma = parse_list(key, value)?,
            "sparsity" | "s" => self.sparsity = parse_counts(key, value)?,
            "m" => self.m_list = parse_counts(key, value)?,
            "fc" => self.fc_list = parse_counts(key, value)?,
            "trials" => self.trials = parse_one(key, value)?,
            "seed" => self.seed = parse_one(key, value)?,
            "jobs" => self.jobs = parse_one(key, value)?,
            "methods" => self.methods = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            "success_tol" => self.success_tol = parse_one(key, value)?,
            "dct_m" => self.dct_m = parse_one(key, value)?,
            "dct_n" => self.dct_n = parse_one(key, value)?,
            "n_grid" => self.n_grid = parse_one(key, value)?,
            "ms" => self.ms = parse_one(key, value)?,
            "noisy_n" => self.noisy_n = parse_one(key, value)?,
            "noisy_s" => self.noisy_s = parse_one(key, value)?,
            "sigma_noise" => self.sigma_noise = parse_one(key, value)?,
            "lambda_c" => self.lambda_c = parse_one(key, value)?,
            _ => match key.split_once('.') {
                Some((method, param)) => {
                    let label = Penalty::parse(method, &BTreeMap::new())?.label();
                    let v = parse_one(key, value)?;
                    self.set_param(label, param, v);
                }
                None => self.solver.set(key, value)?,
            },
        }
        Ok(())
    }

    /// Flat `key=value` description of every setting, for run manifests.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        let mut out = vec![
            ("kind".to_string(), self.kind.name().to_string()),
            ("F".to_string(), join(&self.f_list)),
            ("sigma".to_string(), join(&self.sigma)),
            ("sparsity".to_string(), join(&self.sparsity)),
            ("m".to_string(), join(&self.m_list)),
            ("fc".to_string(), join(&self.fc_list)),
            ("trials".to_string(), self.trials.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("methods".to_string(), self.methods.join(",")),
            ("success_tol".to_string(), format!("{:e}", self.success_tol)),
            ("dct_m".to_string(), self.dct_m.to_string()),
            ("dct_n".to_string(), self.dct_n.to_string()),
            ("n_grid".to_string(), self.n_grid.to_string()),
            ("ms".to_string(), self.ms.to_string()),
            ("noisy_n".to_string(), self.noisy_n.to_string()),
            ("noisy_s".to_string(), self.noisy_s.to_string()),
            ("sigma_noise".to_string(), self.sigma_noise.to_string()),
            ("lambda_c".to_string(), self.lambda_c.to_string()),
        ];
        for (method, params) in &self.method_params {
            for (k, v) in params {
                out.push((format!("{method}.{k}"), v.to_string()));
            }
        }
        out.extend(self.solver.to_pairs());
        out
    }
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_one(key, s)).collect()
}

fn parse_counts(key: &str, v: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let [a, s, b] = [parse_one(key, parts[0])?, parse_one(key, parts[1])?, parse_one(key, parts[2])?];
        if s == 0 || a > b {
            return Err(Error::Parse(format!("bad range `{v}` for `{key}`")));
        }
        return Ok(range(a, s, b));
    }
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_one(key, s)).collect()
}

/// Outcome of one method on one trial instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub method: String,
    pub grid_key: String,
    pub relative_error: f64,
    pub success: bool,
    pub mse: f64,
    pub wall_seconds: f64,
    pub realized_sparsity: usize,
    pub converged: bool,
}

/// A CSV-serializable aggregate row.
pub trait CsvRow {
    const HEADER: &'static str;
    fn fields(&self) -> Vec<String>;
}

pub fn to_csv<R: CsvRow>(rows: &[R]) -> String {
    let mut out = String::from(R::HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.fields().join(","));
        out.push('\n');
    }
    out
}

fn rate(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        f64::NAN
    } else {
        successes as f64 / trials as f64
    }
}

/// Success count at one grid point. `trials == 0` marks an infeasible
/// point (for instance a separation that cannot be packed).
#[derive(Debug, Clone, PartialEq)]
pub struct RateCell {
    pub f: f64,
    pub sigma: f64,
    pub sparsity: usize,
    pub method: String,
    pub trials: usize,
    pub successes: usize,
}

impl RateCell {
    pub fn rate(&self) -> f64 {
        rate(self.successes, self.trials)
    }
}

/// Row of `success_rate.csv`. For methods other than ERF, `sigma` repeats
/// the ERF value chosen for that F.
pub struct SuccessRow<'a>(pub &'a RateCell);
/// Row of `sigma_sweep.csv`.
pub struct SweepRow<'a>(pub &'a RateCell);

impl CsvRow for SuccessRow<'_> {
    const HEADER: &'static str = "F,sigma,sparsity,method,trials,successes,rate";
    fn fields(&self) -> Vec<String> {
        let c = self.0;
        vec![c.f.to_string(), c.sigma.to_string(), c.sparsity.to_string(), c.method.clone(), c.trials.to_string(), c.successes.to_string(), c.rate().to_string()]
    }
}

impl CsvRow for SweepRow<'_> {
    const HEADER: &'static str = "F,sigma,sparsity,trials,successes,rate";
    fn fields(&self) -> Vec<String> {
        let c = self.0;
        vec![c.f.to_string(), c.sigma.to_string(), c.sparsity.to_string(), c.trials.to_string(), c.successes.to_string(), c.rate().to_string()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperResCell {
    pub fc: usize,
    pub msf: f64,
    pub method: String,
    pub trials: usize,
    pub successes: usize,
}

impl SuperResCell {
    pub fn rate(&self) -> f64 {
        rate(self.successes, self.trials)
    }
}

impl CsvRow for SuperResCell {
    const HEADER: &'static str = "fc,msf,method,trials,successes,rate";
    fn fields(&self) -> Vec<String> {
        vec![self.fc.to_string(), format!("{:.2}", self.msf), self.method.clone(), self.trials.to_string(), self.successes.to_string(), self.rate().to_string()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyCell {
    pub m: usize,
    pub method: String,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub time_mean_s: f64,
    pub time_std_s: f64,
}

impl CsvRow for NoisyCell {
    const HEADER: &'static str = "m,method,mse_mean,mse_std,time_mean_s,time_std_s";
    fn fields(&self) -> Vec<String> {
        vec![self.m.to_string(), self.method.clone(), format!("{:.6}", self.mse_mean), format!("{:.6}", self.mse_std), format!("{:.6}", self.time_mean_s), format!("{:.6}", self.time_std_s)]
    }
}

impl CsvRow for TrialRecord {
    const HEADER: &'static str = "trial,seed,method,grid_key,rel_err,success,mse,wall_s";
    fn fields(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.seed.to_string(),
            self.method.clone(),
            self.grid_key.clone(),
            format!("{:.6e}", self.relative_error),
            (self.success as u8).to_string(),
            format!("{:.6e}", self.mse),
            format!("{:.6}", self.wall_seconds),
        ]
    }
}

/// Aggregates plus every per-trial record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput<C> {
    pub cells: Vec<C>,
    pub trials: Vec<TrialRecord>,
}

/// Index positions of the CSV columns that hold wall-clock timings.
pub fn timing_columns(header: &str) -> Vec<usize> {
    header
        .split(',')
        .enumerate()
        .filter(|(_, h)| h.starts_with("time_") || *h == "wall_s")
        .map(|(i, _)| i)
        .collect()
}

fn run_indexed<T: Send>(jobs: usize, count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    if jobs <= 1 {
        return Ok((0..count).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
}

fn std_dev(v: &[f64], mean: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

struct Solved {
    solution: Option<Signal>,
    converged: bool,
    seconds: f64,
}

fn timed(run: impl FnOnce() -> Result<SolverReport>) -> Solved {
    let start = Instant::now();
    let out = run();
    let seconds = start.elapsed().as_secs_f64();
    match out {
        Ok(r) => Solved { solution: Some(r.solution), converged: r.converged, seconds },
        Err(_) => Solved { solution: None, converged: false, seconds },
    }
}

/// Scores a solve against the truth. Solver errors count as failures
/// with NaN errors.
#[allow(clippy::too_many_arguments)]
fn record(trial: usize, seed: u64, method: String, grid_key: &str, x_true: &[f64], solved: Solved, tol: f64, sparsity: usize) -> TrialRecord {
    let (rel, mse) = match &solved.solution {
        Some(x) => (relative_error(x, x_true).unwrap_or(f64::NAN), squared_error(x, x_true).unwrap_or(f64::NAN)),
        None => (f64::NAN, f64::NAN),
    };
    TrialRecord {
        trial,
        seed,
        method,
        grid_key: grid_key.to_string(),
        relative_error: rel,
        success: rel < tol,
        mse,
        wall_seconds: solved.seconds,
        realized_sparsity: sparsity,
        converged: solved.converged,
    }
}

fn dct_key(f: f64, s: usize) -> String {
    format!("F={f}|s={s}")
}

/// Runs `methods` (label, penalty) on every trial of every DCT grid point
/// and returns the records grouped per point, trial-major.
fn dct_trials(spec: &ExperimentSpec, points: &[(f64, usize, Vec<(String, Penalty)>)]) -> Result<Vec<Vec<TrialRecord>>> {
    let tasks: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..spec.trials).map(move |t| (p, t))).collect();
    let per_task = run_indexed(spec.jobs, tasks.len(), |i| {
        let (p, trial) = tasks[i];
        let (f, s, methods) = &points[p];
        let key = dct_key(*f, *s);
        let seed = derive_seed(spec.seed, &key, trial as u64);
        let mut rng = trial_rng(spec.seed, &key, trial as u64);
        let dct = DctSpec { m: spec.dct_m, n: spec.dct_n, f: *f };
        let inst = match ProblemInstance::dct(&dct, *s, &mut rng) {
            Ok(inst) => inst,
            Err(Error::Infeasible(_)) => return None,
            Err(e) => panic!("instance generation failed: {e}"),
        };
        let x_true = inst.x_true.as_deref().expect("generated instances carry the truth");
        Some(
            methods
                .iter()
                .map(|(label, pen)| {
                    let solved = timed(|| solve_constrained(&inst.a, &inst.b, pen, &spec.solver));
                    record(trial, seed, label.clone(), &key, x_true, solved, spec.success_tol, *s)
                })
                .collect::<Vec<_>>(),
        )
    })?;
    let mut grouped: Vec<Vec<TrialRecord>> = vec![Vec::new(); points.len()];
    for ((p, _), recs) in tasks.iter().zip(per_task) {
        if let Some(recs) = recs {
            grouped[*p].extend(recs);
        }
    }
    Ok(grouped)
}

fn count_cells(records: &[TrialRecord], method: &str) -> (usize, usize) {
    let mine = records.iter().filter(|r| r.method == method);
    let (mut trials, mut successes) = (0, 0);
    for r in mine {
        trials += 1;
        successes += r.success as usize;
    }
    (trials, successes)
}

/// ERF success rate on over-sampled DCT problems over an (F, σ, s) grid.
pub fn run_sigma_sweep(spec: &ExperimentSpec) -> Result<ExperimentOutput<RateCell>> {
    spec.validate()?;
    let mut points = Vec::new();
    for &f in &spec.f_list {
        for &s in &spec.sparsity {
            let methods = spec.sigma.iter().map(|&sigma| (Penalty::Erf { sigma }.to_string(), Penalty::Erf { sigma })).collect();
            points.push((f, s, methods));
        }
    }
    let grouped = dct_trials(spec, &points)?;
    let mut cells = Vec::new();
    for ((f, s, methods), recs) in points.iter().zip(&grouped) {
        for (label, pen) in methods {
            let (trials, successes) = count_cells(recs, label);
            let sigma = match pen {
                Penalty::Erf { sigma } => *sigma,
                _ => unreachable!(),
            };
            cells.push(RateCell { f: *f, sigma, sparsity: *s, method: label.clone(), trials, successes });
        }
    }
    // Sweep output is ordered F, σ, s.
    cells.sort_by(|a, b| a.f.total_cmp(&b.f).then(a.sigma.total_cmp(&b.sigma)).then(a.sparsity.cmp(&b.sparsity)));
    Ok(ExperimentOutput { cells, trials: grouped.into_iter().flatten().collect() })
}

/// Success rates of every configured method on over-sampled DCT problems.
pub fn run_success_rate(spec: &ExperimentSpec) -> Result<ExperimentOutput<RateCell>> {
    spec.validate()?;
    let base = spec.penalties()?;
    let mut points = Vec::new();
    for (i, &f) in spec.f_list.iter().enumerate() {
        let sigma = spec.sigma[i];
        let methods: Vec<(String, Penalty)> = base
            .iter()
            .map(|p| match p {
                Penalty::Erf { .. } => Penalty::Erf { sigma },
                other => *other,
            })
            .map(|p| (p.label().to_string(), p))
            .collect();
        for &s in &spec.sparsity {
            points.push((f, s, methods.clone()));
        }
    }
    let grouped = dct_trials(spec, &points)?;
    let mut cells = Vec::new();
    for (pi, ((f, s, methods), recs)) in points.iter().zip(&grouped).enumerate() {
        let sigma = spec.sigma[pi / spec.sparsity.len()];
        for (label, _) in methods {
            let (trials, successes) = count_cells(recs, label);
            cells.push(RateCell { f: *f, sigma, sparsity: *s, method: label.clone(), trials, successes });
        }
    }
    Ok(ExperimentOutput { cells, trials: grouped.into_iter().flatten().collect() })
}

/// Success rates on separated spike trains observed through low-pass
/// Fourier data, one grid point per cutoff `fc`.
pub fn run_superres(spec: &ExperimentSpec) -> Result<ExperimentOutput<SuperResCell>> {
    spec.validate()?;
    let methods: Vec<(String, Penalty)> = spec.penalties()?.into_iter().map(|p| (p.label().to_string(), p)).collect();
    let tasks: Vec<(usize, usize)> = (0..spec.fc_list.len()).flat_map(|p| (0..spec.trials).map(move |t| (p, t))).collect();
    let per_task = run_indexed(spec.jobs, tasks.len(), |i| -> Result<Vec<TrialRecord>> {
        let (p, trial) = tasks[i];
        let sr = SuperResSpec { n_grid: spec.n_grid, fc: spec.fc_list[p] };
        let key = format!("fc={}", sr.fc);
        let seed = derive_seed(spec.seed, &key, trial as u64);
        let mut rng = trial_rng(spec.seed, &key, trial as u64);
        let inst = ProblemInstance::superres(&sr, spec.ms, &mut rng)?;
        let x_true = inst.x_true.as_deref().expect("generated instances carry the truth");
        let s = inst.support.as_ref().map_or(0, |s| s.len());
        Ok(methods
            .iter()
            .map(|(label, pen)| {
                let solved = timed(|| solve_constrained(&inst.a, &inst.b, pen, &spec.solver));
                record(trial, seed, label.clone(), &key, x_true, solved, spec.success_tol, s)
            })
            .collect())
    })?;
    let mut grouped: Vec<Vec<TrialRecord>> = vec![Vec::new(); spec.fc_list.len()];
    for ((p, _), recs) in tasks.iter().zip(per_task) {
        grouped[*p].extend(recs?);
    }
    let mut cells = Vec::new();
    for (p, recs) in grouped.iter().enumerate() {
        let sr = SuperResSpec { n_grid: spec.n_grid, fc: spec.fc_list[p] };
        for (label, _) in &methods {
            let (trials, successes) = count_cells(recs, label);
            cells.push(SuperResCell { fc: sr.fc, msf: sr.msf(spec.ms), method: label.clone(), trials, successes });
        }
    }
    Ok(ExperimentOutput { cells, trials: grouped.into_iter().flatten().collect() })
}

/// λ rule of the noisy benchmark: `c·σ_noise·√(2 log n)`.
pub fn noisy_lambda(spec: &ExperimentSpec) -> f64 {
    spec.lambda_c * spec.sigma_noise * (2.0 * (spec.noisy_n as f64).ln()).sqrt()
}

/// Mean and spread of the squared error of unconstrained recovery from
/// noisy Gaussian measurements, plus the least-squares oracle on the true
/// support (method `oracle`, no timing).
pub fn run_noisy(spec: &ExperimentSpec) -> Result<ExperimentOutput<NoisyCell>> {
    spec.validate()?;
    let methods: Vec<(String, Penalty)> = spec.penalties()?.into_iter().map(|p| (p.label().to_string(), p)).collect();
    let mut cfg = spec.solver.clone();
    cfg.lambda = noisy_lambda(spec);
    let tasks: Vec<(usize, usize)> = (0..spec.m_list.len()).flat_map(|p| (0..spec.trials).map(move |t| (p, t))).collect();
    let per_task = run_indexed(spec.jobs, tasks.len(), |i| -> Result<Vec<TrialRecord>> {
        let (p, trial) = tasks[i];
        let m = spec.m_list[p];
        let key = format!("m={m}");
        let seed = derive_seed(spec.seed, &key, trial as u64);
        let mut rng = trial_rng(spec.seed, &key, trial as u64);
        let inst = ProblemInstance::noisy_gaussian(m, spec.noisy_n, spec.noisy_s, spec.sigma_noise, &mut rng)?;
        let x_true = inst.x_true.as_deref().expect("generated instances carry the truth");
        let support = inst.support.as_ref().expect("generated instances carry the support");
        let mut out = Vec::with_capacity(methods.len() + 1);
        let oracle = oracle_mse(&inst.a, support, spec.sigma_noise)?;
        out.push(TrialRecord {
            trial,
            seed,
            method: "oracle".into(),
            grid_key: key.clone(),
            relative_error: f64::NAN,
            success: false,
            mse: oracle,
            wall_seconds: 0.0,
            realized_sparsity: support.len(),
            converged: true,
        });
        for (label, pen) in &methods {
            let solved = timed(|| solve_unconstrained(&inst.a, &inst.b, pen, &cfg));
            out.push(record(trial, seed, label.clone(), &key, x_true, solved, spec.success_tol, support.len()));
        }
        Ok(out)
    })?;
    let mut grouped: Vec<Vec<TrialRecord>> = vec![Vec::new(); spec.m_list.len()];
    for ((p, _), recs) in tasks.iter().zip(per_task) {
        grouped[*p].extend(recs?);
    }
    let mut cells = Vec::new();
    for (p, recs) in grouped.iter().enumerate() {
        let labels = std::iter::once("oracle".to_string()).chain(methods.iter().map(|(l, _)| l.clone()));
        for label in labels {
            let mine: Vec<&TrialRecord> = recs.iter().filter(|r| r.method == label).collect();
            let mse: Vec<f64> = mine.iter().map(|r| r.mse).collect();
            let time: Vec<f64> = mine.iter().map(|r| r.wall_seconds).collect();
            let (mm, tm) = (mean(&mse), mean(&time));
            cells.push(NoisyCell { m: spec.m_list[p], method: label, mse_mean: mm, mse_std: std_dev(&mse, mm), time_mean_s: tm, time_std_s: std_dev(&time, tm) });
        }
    }
    Ok(ExperimentOutput { cells, trials: grouped.into_iter().flatten().collect() })
}

/// Least squares restricted to `support`; the estimator whose expected
/// squared error [`oracle_mse`] predicts.
pub fn support_least_squares(a: &crate::linalg::DenseMatrix, b: &[f64], support: &crate::linalg::SupportSet) -> Result<Signal> {
    let sub = a.select_columns(support.indices())?;
    let factor = factor_spd(&sub.gram_cols()).map_err(|e| match e {
        Error::NotSpd { .. } => Error::RankDeficient,
        other => other,
    })?;
    let mut coef = sub.mul_t_vec(b);
    factor.solve_in_place(&mut coef);
    let mut x = vec![0.0; a.cols()];
    for (&j, c) in support.indices().iter().zip(coef) {
        x[j] = c;
    }
    Ok(x)
}
