use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use erf_sparse::config::parse_key_values;
use erf_sparse::experiments::harness::{SuccessRow, SweepRow};
use erf_sparse::experiments::{
    gnsp_falsifier, run_noisy, run_sigma_sweep, run_success_rate, run_superres, to_csv, ExperimentKind,
    ExperimentSpec, GnspVerdict, TrialRecord,
};
use erf_sparse::format::{read_matrix, read_signal, write_matrix, write_signal};
use erf_sparse::problems::{DctSpec, ProblemInstance, SuperResSpec};
use erf_sparse::regularizers::{
    erf_prox, hard_threshold_scalar, soft_shrink_scalar, tl1_prox, ERF_PROX_MAX_ITER, ERF_PROX_TOL,
};
use erf_sparse::rng::seeded_rng;
use erf_sparse::{solve_constrained, solve_unconstrained, DenseMatrix, Error, Penalty, SolverConfig};

use crate::output::{key_values, write_atomic};
use crate::{BenchArgs, Cli, Command, GenArgs, GenKind, GnspArgs, ProxTableArgs, SolveArgs, Status};

type Res<T> = Result<T, String>;

const SEED_ENV: &str = "ERF_SPARSE_SEED";
const GEN_DEFAULT_SEED: u64 = 0;

fn err(e: Error) -> String {
    e.to_string()
}

/// Seed from the environment, if set.
fn env_seed() -> Res<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("{SEED_ENV} is not an unsigned integer: `{v}`")),
        Err(_) => Ok(None),
    }
}

fn read_text(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_matrix(path: &Path) -> Res<DenseMatrix> {
    let f = fs::File::open(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    read_matrix(BufReader::new(f)).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_signal(path: &Path) -> Res<Vec<f64>> {
    let f = fs::File::open(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    read_signal(BufReader::new(f)).map_err(|e| format!("{}: {e}", path.display()))
}

fn split_pair(s: &str) -> Res<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

fn penalty_params(params: &[String], sigma: Option<f64>) -> Res<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for p in params {
        let (k, v) = split_pair(p)?;
        let v: f64 = v.parse().map_err(|_| format!("bad value `{v}` for parameter `{k}`"))?;
        out.insert(k.to_string(), v);
    }
    if let Some(s) = sigma {
        out.insert("sigma".to_string(), s);
    }
    Ok(out)
}

pub fn run(cli: Cli) -> Res<Status> {
    let seed = match cli.seed {
        Some(s) => Some(s),
        None => env_seed()?,
    };
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => generate(a, seed.unwrap_or(GEN_DEFAULT_SEED)),
        Command::ProxTable(a) => prox_table(a),
        Command::BenchSigma(a) => bench(ExperimentKind::SigmaSweep, a, cli.seed),
        Command::BenchSuccess(a) => bench(ExperimentKind::SuccessRate, a, cli.seed),
        Command::BenchSuperres(a) => bench(ExperimentKind::SuperRes, a, cli.seed),
        Command::BenchNoisy(a) => bench(ExperimentKind::Noisy, a, cli.seed),
        Command::GnspCheck(a) => gnsp_check(a, seed.unwrap_or(GEN_DEFAULT_SEED)),
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

fn solve(args: SolveArgs) -> Res<Status> {
    let a = load_matrix(&args.matrix)?;
    let b = load_signal(&args.measurements)?;
    let penalty = Penalty::parse(&args.method, &penalty_params(&args.params, args.sigma)?).map_err(err)?;

    let mut cfg = SolverConfig::default();
    if let Some(path) = &args.config {
        for (k, v) in parse_key_values(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))? {
            cfg.set(&k, &v).map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    for s in &args.sets {
        let (k, v) = split_pair(s)?;
        cfg.set(k, v).map_err(err)?;
    }
    if let Some(l) = args.lambda {
        cfg.lambda = l;
    }

    let report = if args.constrained {
        solve_constrained(&a, &b, &penalty, &cfg)
    } else {
        solve_unconstrained(&a, &b, &penalty, &cfg)
    }
    .map_err(err)?;

    let mut sol = Vec::new();
    write_signal(&mut sol, &report.solution).map_err(|e| e.to_string())?;

    let trace: Vec<String> = report.objective_trace.iter().map(|v| fmt_f64(*v)).collect();
    let mut pairs = vec![
        ("method".to_string(), penalty.to_string()),
        ("model".to_string(), if args.constrained { "constrained" } else { "unconstrained" }.to_string()),
        ("converged".to_string(), report.converged.to_string()),
        ("outer_iters".to_string(), report.outer_iters.to_string()),
        ("total_inner_iters".to_string(), report.total_inner_iters.to_string()),
        ("objective_trace".to_string(), trace.join(",")),
    ];
    pairs.extend(cfg.to_pairs());
    // Timing last, so reports compare equal after dropping one line.
    pairs.push(("wall_seconds".to_string(), format!("{:.6}", report.wall_seconds)));
    let report_text = key_values(&pairs);

    match &args.out {
        Some(path) => write_atomic(path, &sol)?,
        None => print!("{}", String::from_utf8_lossy(&sol)),
    }
    match (&args.report, &args.out) {
        (Some(path), _) => write_atomic(path, report_text.as_bytes())?,
        (None, Some(_)) => print!("{report_text}"),
        (None, None) => {}
    }
    Ok(if report.converged { Status::Ok } else { Status::NotConverged })
}

fn generate(args: GenArgs, seed: u64) -> Res<Status> {
    let mut rng = seeded_rng(seed);
    let inst = match args.kind {
        GenKind::Dct => ProblemInstance::dct(&DctSpec { m: args.m, n: args.n, f: args.f }, args.s, &mut rng),
        GenKind::Superres => {
            ProblemInstance::superres(&SuperResSpec { n_grid: args.n_grid, fc: args.fc }, args.ms, &mut rng)
        }
        GenKind::Noisy => ProblemInstance::noisy_gaussian(args.m, args.n, args.s, args.sigma_noise, &mut rng),
    }
    .map_err(err)?;
    let mut buf = Vec::new();
    write_matrix(&mut buf, &inst.a).map_err(|e| e.to_string())?;
    write_atomic(&args.out_dir.join("A.txt"), &buf)?;
    buf.clear();
    write_signal(&mut buf, &inst.b).map_err(|e| e.to_string())?;
    write_atomic(&args.out_dir.join("b.txt"), &buf)?;
    if let Some(x) = &inst.x_true {
        buf.clear();
        write_signal(&mut buf, x).map_err(|e| e.to_string())?;
        write_atomic(&args.out_dir.join("x.txt"), &buf)?;
    }
    Ok(Status::Ok)
}

fn prox_table(args: ProxTableArgs) -> Res<Status> {
    if args.points < 2 || !(args.vmax > args.vmin) {
        return Err("need --points >= 2 and --vmax > --vmin".into());
    }
    let params = penalty_params(&args.params, args.sigma)?;
    let mu = args.mu;
    let method = args.method.to_ascii_lowercase();
    let prox: Box<dyn Fn(f64) -> erf_sparse::Result<f64>> = match method.as_str() {
        "l0" | "hard" => Box::new(move |v| Ok(hard_threshold_scalar(v, mu))),
        other => match Penalty::parse(other, &params).map_err(err)? {
            Penalty::L1 => Box::new(move |v| Ok(soft_shrink_scalar(v, mu))),
            Penalty::Erf { sigma } => Box::new(move |v| erf_prox(v, mu, sigma, ERF_PROX_TOL, ERF_PROX_MAX_ITER)),
            Penalty::Tl1 { a } => Box::new(move |v| tl1_prox(v, mu, a)),
            p => return Err(err(Error::UnsupportedPenalty(format!("{} (no proximal operator)", p.label())))),
        },
    };
    let mut csv = String::from("v,prox\n");
    let step = (args.vmax - args.vmin) / (args.points - 1) as f64;
    for i in 0..args.points {
        let v = args.vmin + step * i as f64;
        csv.push_str(&format!("{v},{}\n", prox(v).map_err(err)?));
    }
    match &args.out {
        Some(path) => write_atomic(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(Status::Ok)
}

/// Builds the spec with precedence flags > file > environment seed > defaults.
fn bench_spec(kind: ExperimentKind, args: &BenchArgs, flag_seed: Option<u64>) -> Res<ExperimentSpec> {
    let mut spec = ExperimentSpec::defaults(kind);
    if let Some(s) = env_seed()? {
        spec.seed = s;
    }
    if let Some(path) = &args.config {
        for (k, v) in parse_key_values(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))? {
            spec.set(&k, &v).map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    for s in &args.sets {
        let (k, v) = split_pair(s)?;
        spec.set(k, v).map_err(err)?;
    }
    let flags = [
        ("trials", args.trials.map(|v| v.to_string())),
        ("jobs", args.jobs.map(|v| v.to_string())),
        ("methods", args.methods.clone()),
        ("F", args.f.clone()),
        ("sigma", args.sigma.clone()),
        ("sparsity", args.sparsity.clone()),
        ("m", args.m.clone()),
        ("fc", args.fc.clone()),
        ("seed", flag_seed.map(|v| v.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            spec.set(k, &v).map_err(err)?;
        }
    }
    spec.validate().map_err(err)?;
    Ok(spec)
}

fn bench(kind: ExperimentKind, args: BenchArgs, flag_seed: Option<u64>) -> Res<Status> {
    let spec = bench_spec(kind, &args, flag_seed)?;
    let (csv, trials) = match kind {
        ExperimentKind::SigmaSweep => {
            let o = run_sigma_sweep(&spec).map_err(err)?;
            (to_csv(&o.cells.iter().map(SweepRow).collect::<Vec<_>>()), o.trials)
        }
        ExperimentKind::SuccessRate => {
            let o = run_success_rate(&spec).map_err(err)?;
            (to_csv(&o.cells.iter().map(SuccessRow).collect::<Vec<_>>()), o.trials)
        }
        ExperimentKind::SuperRes => {
            let o = run_superres(&spec).map_err(err)?;
            (to_csv(&o.cells), o.trials)
        }
        ExperimentKind::Noisy => {
            let o = run_noisy(&spec).map_err(err)?;
            (to_csv(&o.cells), o.trials)
        }
    };
    let name = kind.name();
    let csv_path = args.out_dir.join(format!("{name}.csv"));
    let mut written: Vec<PathBuf> = vec![csv_path.clone()];
    write_atomic(&csv_path, csv.as_bytes())?;
    if args.trials_csv {
        let path = args.out_dir.join("trials.csv");
        write_atomic(&path, to_csv::<TrialRecord>(&trials).as_bytes())?;
        written.push(path);
    }
    let failed = trials.iter().filter(|r| r.relative_error.is_nan() && r.method != "oracle").count();
    let mut manifest = vec![
        ("command".to_string(), format!("bench-{}", bench_name(kind))),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("output".to_string(), format!("{name}.csv")),
        ("trial_records".to_string(), trials.len().to_string()),
        ("failed_solves".to_string(), failed.to_string()),
    ];
    manifest.extend(spec.to_pairs());
    let manifest_path = args.out_dir.join(format!("{name}.manifest"));
    write_atomic(&manifest_path, key_values(&manifest).as_bytes())?;
    written.push(manifest_path);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(Status::Ok)
}

fn bench_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::SigmaSweep => "sigma",
        ExperimentKind::SuccessRate => "success",
        ExperimentKind::SuperRes => "superres",
        ExperimentKind::Noisy => "noisy",
    }
}

fn gnsp_check(args: GnspArgs, seed: u64) -> Res<Status> {
    let a = load_matrix(&args.matrix)?;
    let verdict = gnsp_falsifier(&a, args.sigma, args.s, args.samples, &mut seeded_rng(seed)).map_err(err)?;
    let pairs = match verdict {
        GnspVerdict::Falsified { witness, support } => vec![
            ("verdict".to_string(), "falsified".to_string()),
            ("support".to_string(), support.indices().iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")),
            ("witness".to_string(), witness.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")),
        ],
        GnspVerdict::Undetermined { candidates_checked, trivial_kernel } => vec![
            ("verdict".to_string(), "undetermined".to_string()),
            ("candidates_checked".to_string(), candidates_checked.to_string()),
            ("trivial_kernel".to_string(), trivial_kernel.to_string()),
        ],
    };
    print!("{}", key_values(&pairs));
    Ok(Status::Ok)
}
