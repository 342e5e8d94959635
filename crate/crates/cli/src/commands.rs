use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dqopt::al::{self, AlConfig, AlSolverConfig, BitCountEvaluator, Evaluator};
use dqopt::bench::{self, BenchConfig};
use dqopt::engine::{self, Mode, QaoaSubSolver, SolverConfig};
use dqopt::optics::{self, OpticsEvaluator};
use dqopt::oracle::{self, SaConfig};
use dqopt::par::{self, WorkerPool};
use dqopt::qaoa::{self, QaoaConfig, QaoaParams};
use dqopt::{BinaryVector, Error, QuboMatrix};

use crate::config::RunConfig;
use crate::{AlArgs, BenchArgs, Cli, CliMode, Command, EvaluateArgs, GenQuboArgs, OutFormat, QaoaDebugArgs, QaoaFlags, SolveArgs};

pub const SEED_ENV: &str = "DQOPT_SEED";
const DEFAULT_MATERIALS: &str = "data/materials";
const DEFAULT_SOLAR: &str = "data/solar_am15g.csv";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    /// 2 usage, 3 data, 4 capacity, 5 solver.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Argument(_) => 2,
                Error::Data { .. } | Error::Io { .. } => 3,
                Error::Capacity { .. } => 4,
                Error::Solver(_) | Error::UndefinedRatio => 5,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Settings shared by every command after merging flags, config and env.
struct Ctx {
    file: RunConfig,
    seed: u64,
    workers: Option<usize>,
    deterministic: bool,
    command: &'static str,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?,
            ),
            Err(_) => None,
        };
        let workers = cli.workers.map(|w| w as usize).or(file.workers);
        if workers == Some(0) {
            return Err(usage("workers must be at least 1"));
        }
        Ok(Self {
            seed: cli.seed.or(file.seed).or(env_seed).unwrap_or(0),
            workers,
            deterministic: cli.deterministic,
            command: match cli.command {
                Command::GenQubo(_) => "gen-qubo",
                Command::Solve(_) => "solve",
                Command::Bench(_) => "bench",
                Command::Evaluate(_) => "evaluate",
                Command::AlDesign(_) => "al-design",
                Command::QaoaDebug(_) => "qaoa-debug",
            },
            file,
        })
    }

    /// Explicit size, else logical CPUs capped at `p`.
    fn pool(&self, p: usize) -> Result<WorkerPool> {
        let n = self.workers.unwrap_or_else(|| par::available_cpus().min(p.max(1)));
        Ok(WorkerPool::new(n)?)
    }

    fn manifest(&self, config: Value, outputs: &[&Path], notices: &[String], workers: usize) -> Value {
        let created = (!self.deterministic).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        json!({
            "tool": "dqopt",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "args": std::env::args().skip(1).collect::<Vec<_>>(),
            "seed": self.seed,
            "workers": workers,
            "deterministic": self.deterministic,
            "config_file": self.file,
            "config": config,
            "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "notices": notices,
            "created_unix": created,
        })
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| {
        CliError::Core(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_text(path, &s)
}

/// `dir/stem.<suffix>` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn qaoa_config(base: &QaoaConfig, flags: &QaoaFlags) -> QaoaConfig {
    QaoaConfig {
        layers: flags.layers.unwrap_or(base.layers),
        budget: flags.budget.unwrap_or(base.budget),
        shots: flags.shots.unwrap_or(base.shots),
        ..base.clone()
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = Ctx::new(cli)?;
    match &cli.command {
        Command::GenQubo(a) => gen_qubo(&ctx, a),
        Command::Solve(a) => solve(&ctx, a),
        Command::Bench(a) => bench_cmd(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::AlDesign(a) => al_design(&ctx, a),
        Command::QaoaDebug(a) => qaoa_debug(&ctx, a),
    }
}

fn gen_qubo(ctx: &Ctx, a: &GenQuboArgs) -> Result<()> {
    let n = a.n as usize;
    let q = QuboMatrix::gaussian(n, ctx.seed)?;
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("qubo-n{n}-seed{}.json", ctx.seed)));
    write_json(&out, &q)?;
    let manifest_path = sibling(&out, "manifest.json");
    write_json(&manifest_path, &ctx.manifest(json!({ "n": n }), &[&out], &[], 1))?;

    let v = q.as_slice();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "wrote {}: n={n} coefficients={} mean={mean:.6} std={:.6} min={min:.6} max={max:.6}",
        out.display(),
        v.len(),
        var.sqrt()
    );
    Ok(())
}

/// Report written by the brute and sa modes; shares the energy fields of
/// the decomposed-solver report.
#[derive(Serialize)]
struct OracleReport {
    mode: String,
    solver: String,
    best_x: BinaryVector,
    best_energy: f64,
    energy_trace: Vec<f64>,
    trace_time_s: Vec<f64>,
    wall_time_s: f64,
    sub_solves: usize,
    failed_sub_solves: usize,
    workers: usize,
    config: Value,
}

fn solver_config(ctx: &Ctx, a: &SolveArgs, n: usize) -> Result<(SolverConfig, Option<String>)> {
    let f = &ctx.file.solver;
    let k = a.k.or(f.k);
    let mut cfg = match a.mode {
        CliMode::Dqaoa => SolverConfig::dqaoa(n),
        CliMode::DqQaoa => SolverConfig::dq_qaoa(),
        CliMode::Dc => SolverConfig::dc_baseline(k.unwrap_or(4)),
        CliMode::Brute | CliMode::Sa => unreachable!("oracle modes have no solver config"),
    };
    if let Some(k) = k {
        cfg.k = k;
    }
    if let Some(it) = a.iters.or(f.iterations) {
        cfg.iterations = it;
    }
    if let Some(p) = a.p.or(f.p) {
        cfg.p = p;
    }
    cfg.dc_sizes = if a.dc_sizes.is_empty() { f.dc_sizes.clone() } else { a.dc_sizes.clone() };
    cfg.qaoa = qaoa_config(&f.qaoa, &a.qaoa);
    cfg.seed = ctx.seed;
    Ok(cfg.normalized())
}

fn solve(ctx: &Ctx, a: &SolveArgs) -> Result<()> {
    let q = QuboMatrix::read_file(&a.qubo)?;
    let n = q.n();
    let trace_path = a.trace.clone().unwrap_or_else(|| sibling(&a.out, "trace.csv"));
    let manifest_path = sibling(&a.out, "manifest.json");
    let mut notices = Vec::new();

    let (report, trace_csv, config, workers, energy) = match a.mode {
        CliMode::Brute | CliMode::Sa => {
            let t0 = Instant::now();
            let (x, e, name, config) = if a.mode == CliMode::Brute {
                let (x, e) = oracle::brute_force(&q)?;
                (x, e, "brute-force", Value::Null)
            } else {
                let cfg = SaConfig {
                    sweeps: a.sweeps.unwrap_or(ctx.file.sa.sweeps),
                    restarts: a.restarts.unwrap_or(ctx.file.sa.restarts),
                    seed: ctx.seed,
                    ..ctx.file.sa.clone()
                };
                let (x, e) = oracle::simulated_annealing(&q, &cfg)?;
                (x, e, "simulated-annealing", serde_json::to_value(&cfg).expect("serializable"))
            };
            let wall = t0.elapsed().as_secs_f64();
            let mode = if a.mode == CliMode::Brute { "brute" } else { "sa" };
            let rep = OracleReport {
                mode: mode.into(),
                solver: name.into(),
                best_x: x,
                best_energy: e,
                energy_trace: vec![e],
                trace_time_s: vec![wall],
                wall_time_s: wall,
                sub_solves: 0,
                failed_sub_solves: 0,
                workers: 1,
                config: config.clone(),
            };
            let trace = format!("iteration,best_energy\n0,{e}\n");
            (serde_json::to_value(&rep).expect("serializable"), trace, config, 1, e)
        }
        _ => {
            let (cfg, notice) = solver_config(ctx, a, n)?;
            if let Some(msg) = notice {
                eprintln!("warning: {msg}");
                notices.push(msg);
            }
            let p = match cfg.mode {
                Mode::DcBaseline => n.div_ceil(cfg.k.max(1)),
                _ => cfg.p,
            };
            let pool = ctx.pool(p)?;
            let rep = engine::solve(&q, &cfg, &QaoaSubSolver::new(cfg.qaoa.clone()), &pool)?;
            if rep.failed_sub_solves > 0 {
                let msg = format!("{} sub-solves failed twice and were skipped", rep.failed_sub_solves);
                eprintln!("warning: {msg}");
                notices.push(msg);
            }
            let trace = rep.trace_csv();
            let e = rep.best_energy;
            (
                serde_json::to_value(&rep).expect("serializable"),
                trace,
                serde_json::to_value(&cfg).expect("serializable"),
                pool.workers(),
                e,
            )
        }
    };
    write_json(&a.out, &report)?;
    write_text(&trace_path, &trace_csv)?;
    let outputs: [&Path; 2] = [&a.out, &trace_path];
    write_json(&manifest_path, &ctx.manifest(config, &outputs, &notices, workers))?;
    println!(
        "{}: n={n} best_energy={energy} wall_time_s={:.3} report={}",
        report["mode"].as_str().unwrap_or_default(),
        report["wall_time_s"].as_f64().unwrap_or_default(),
        a.out.display()
    );
    Ok(())
}

/// Fields read back from any saved solve report.
#[derive(Deserialize)]
struct SavedReport {
    mode: String,
    best_x: BinaryVector,
    best_energy: f64,
}

fn read_report(path: &Path) -> Result<SavedReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Core(Error::Data {
            path: path.to_path_buf(),
            line: Some(e.line()),
            msg: e.to_string(),
        })
    })
}

pub fn parse_size_range(s: &str) -> std::result::Result<Vec<usize>, String> {
    let bad = || format!("size range {s:?} is not of the form A..B or A..B:STEP");
    let (range, step) = match s.split_once(':') {
        Some((r, st)) => (r, st.trim().parse::<usize>().map_err(|_| bad())?),
        None => (s, 1),
    };
    let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if step == 0 || lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s.trim() {
        "dqaoa" => Ok(Mode::Dqaoa),
        "dq-qaoa" | "dq_qaoa" => Ok(Mode::DqQaoa),
        "dc" | "dc_baseline" => Ok(Mode::DcBaseline),
        other => Err(usage(format!("unknown bench mode {other:?} (expected dqaoa, dq-qaoa or dc)"))),
    }
}

fn bench_cmd(ctx: &Ctx, a: &BenchArgs) -> Result<()> {
    if !a.from_reports.is_empty() {
        let alg = read_report(&a.from_reports[0])?;
        let reference = read_report(&a.from_reports[1])?;
        if alg.best_x.len() != reference.best_x.len() {
            return Err(usage("the two reports solve problems of different sizes"));
        }
        let ratio = oracle::approximation_ratio(alg.best_energy, reference.best_energy)?;
        let out = json!({
            "n": alg.best_x.len(),
            "mode": alg.mode,
            "reference": reference.mode,
            "energy_alg": alg.best_energy,
            "energy_ref": reference.best_energy,
            "ratio": ratio,
            "flagged": ratio > 1.0 + 1e-12,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        return Ok(());
    }

    let f = &ctx.file.bench;
    let sizes = if !a.sizes.is_empty() {
        a.sizes.clone()
    } else if let Some(r) = &a.size_range {
        parse_size_range(r).map_err(usage)?
    } else {
        f.sizes.clone()
    };
    if sizes.is_empty() {
        return Err(usage("give --sizes, --size-range or --from-reports"));
    }
    let mode_names = if a.modes.is_empty() {
        if f.modes.is_empty() {
            vec!["dqaoa".to_string()]
        } else {
            f.modes.clone()
        }
    } else {
        a.modes.clone()
    };
    let modes = mode_names.iter().map(|m| parse_mode(m)).collect::<Result<Vec<_>>>()?;
    let s = &ctx.file.solver;
    let defaults = BenchConfig::default();
    let cfg = BenchConfig {
        sizes,
        modes,
        seeds_per_size: a.seeds.or(f.seeds_per_size).unwrap_or(defaults.seeds_per_size),
        seed: ctx.seed,
        k: a.k.or(s.k).unwrap_or(defaults.k),
        iterations: a.iters.or(s.iterations),
        p: a.p.or(s.p),
        qaoa: qaoa_config(&s.qaoa, &a.qaoa),
        sa: ctx.file.sa.clone(),
    };
    let max_n = cfg.sizes.iter().copied().max().unwrap_or(1);
    let pool = ctx.pool(cfg.p.unwrap_or(max_n))?;
    let out = bench::benchmark_suite(&cfg, &pool)?;

    let csv_path = a.out.join("bench.csv");
    let json_path = a.out.join("bench.json");
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    out.write_files(&csv_path, &json_path)?;
    let notices: Vec<String> = out
        .failures
        .iter()
        .map(|f| format!("n={} {} seed {}: {}", f.n, f.mode, f.seed, f.error))
        .chain(
            out.records
                .iter()
                .filter(|r| r.flagged)
                .map(|r| format!("n={} {} seed {}: ratio {} beats the {} reference", r.n, r.mode, r.seed, r.ratio, r.reference)),
        )
        .collect();
    for n in &notices {
        eprintln!("warning: {n}");
    }
    let manifest_path = a.out.join("manifest.json");
    let outputs: [&Path; 2] = [&csv_path, &json_path];
    write_json(
        &manifest_path,
        &ctx.manifest(serde_json::to_value(&cfg).expect("serializable"), &outputs, &notices, pool.workers()),
    )?;
    for m in &cfg.modes {
        let label = m.to_string();
        let ratios: Vec<f64> = out.records.iter().filter(|r| r.mode == label).map(|r| r.ratio).collect();
        if let Some(med) = bench::median(&ratios) {
            println!("{label}: {} rows, median ratio {med:.4}", ratios.len());
        }
    }
    println!(
        "wrote {} ({} rows, {} failures)",
        csv_path.display(),
        out.records.len(),
        out.failures.len()
    );
    Ok(())
}

fn optics_paths(ctx: &Ctx, materials: &Option<PathBuf>, solar: &Option<PathBuf>) -> (PathBuf, PathBuf) {
    let o = &ctx.file.optics;
    (
        materials
            .clone()
            .or_else(|| o.materials.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_MATERIALS)),
        solar
            .clone()
            .or_else(|| o.solar.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_SOLAR)),
    )
}

fn evaluate(ctx: &Ctx, a: &EvaluateArgs) -> Result<()> {
    let bits: BinaryVector = a.bits.trim().parse().map_err(|e: Error| usage(e.to_string()))?;
    optics::decode_structure(&bits)?;
    let (materials, solar) = optics_paths(ctx, &a.materials, &a.solar);
    let ev = OpticsEvaluator::load(&materials, &solar)?;
    let r = ev.evaluate_detailed(&bits)?;
    match a.out {
        OutFormat::Json => {
            let out = json!({
                "bits": r.bits,
                "layers": r.stack.layers,
                "fom": r.fom,
                "spectrum": r.spectrum,
                "manifest": ctx.manifest(json!({ "materials": materials, "solar": solar }), &[], &[], 1),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        OutFormat::Text => {
            for (i, l) in r.stack.layers.iter().enumerate() {
                println!("layer {:>2}: {:<6} {:.3} nm", i + 1, l.material.name(), l.thickness_nm);
            }
            println!("fom: {}", r.fom);
        }
    }
    Ok(())
}

fn al_design(ctx: &Ctx, a: &AlArgs) -> Result<()> {
    let f = &ctx.file.al;
    let defaults = AlConfig::default();
    let base_solver = f.solver.clone().unwrap_or_else(AlSolverConfig::default);
    let cfg = AlConfig {
        n_bits: a.n_bits.or(f.n_bits).unwrap_or(defaults.n_bits),
        init_count: a.init_count.or(f.init_count).unwrap_or(defaults.init_count),
        seed: ctx.seed,
        cycles_cap: a.cycles_cap.or(f.cycles_cap),
        fm: ctx.file.fm.clone(),
        solver: AlSolverConfig {
            k: a.k.unwrap_or(base_solver.k),
            iterations: a.iters.unwrap_or(base_solver.iterations),
            p: a.p.or(base_solver.p),
            qaoa: qaoa_config(&base_solver.qaoa, &a.qaoa),
        },
    };
    cfg.validate()?;
    let layers = cfg.n_bits / 2;
    if !a.synthetic && !(optics::MIN_LAYERS..=optics::MAX_LAYERS).contains(&layers) {
        return Err(usage(format!(
            "--n-bits {} gives {layers} layers; optics needs {}..={} layers",
            cfg.n_bits,
            optics::MIN_LAYERS,
            optics::MAX_LAYERS
        )));
    }
    let evaluator: Box<dyn Evaluator> = if a.synthetic {
        Box::new(BitCountEvaluator)
    } else {
        let (materials, solar) = optics_paths(ctx, &a.materials, &a.solar);
        Box::new(OpticsEvaluator::load(&materials, &solar)?)
    };
    let pool = ctx.pool(cfg.solver.p.unwrap_or(cfg.n_bits))?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    let manifest_path = a.out.join("manifest.json");
    let files = ["dataset.csv", "trace.csv", "best.json", "fm_model.json", "state.json"].map(|f| a.out.join(f));
    let outputs: Vec<&Path> = files.iter().map(|p| p.as_path()).collect();
    let mut config = serde_json::to_value(&cfg).expect("serializable");
    config["evaluator"] = json!(evaluator.name());
    write_json(&manifest_path, &ctx.manifest(config, &outputs, &[], pool.workers()))?;

    let state = al::al_run(&cfg, evaluator.as_ref(), &pool, Some(&a.out))?;
    let reason = if state.injections_in_window() >= al::WINDOW_STOP {
        "random-injection window saturated"
    } else {
        "cycle cap reached"
    };
    println!(
        "{} cycles ({reason}); best fom {} for {}; outputs in {}",
        state.cycle,
        state.best_fom,
        state.best_bits,
        a.out.display()
    );
    Ok(())
}

fn qaoa_debug(ctx: &Ctx, a: &QaoaDebugArgs) -> Result<()> {
    let q = QuboMatrix::read_file(&a.qubo)?;
    let cfg = qaoa_config(&ctx.file.solver.qaoa, &a.qaoa);
    cfg.validate()?;
    let diag = qaoa::cost_diagonal(&q, cfg.max_qubits)?;
    let (params, optimized) = if a.gamma.is_empty() {
        let (p, _) = qaoa::optimize_on_diagonal(&diag, cfg.layers, cfg.budget, cfg.starts, ctx.seed)?;
        (p, true)
    } else {
        (QaoaParams::new(a.gamma.clone(), a.beta.clone())?, false)
    };
    let state = qaoa::ansatz_state(&diag, &params);
    let expectation = qaoa::expectation(&state, &diag)?;
    let probs = state.probabilities();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&i, &j| probs[j].total_cmp(&probs[i]).then(i.cmp(&j)));
    let top: Vec<Value> = order
        .iter()
        .take(a.top)
        .map(|&i| {
            json!({
                "bits": BinaryVector::from_index(i, q.n()),
                "probability": probs[i],
                "energy": diag.values()[i],
            })
        })
        .collect();
    let (ground, _) = oracle::brute_force(&q)?;
    let out = json!({
        "n": q.n(),
        "optimized": optimized,
        "gammas": params.gammas,
        "betas": params.betas,
        "expectation": expectation,
        "diagonal_min": diag.min(),
        "diagonal_max": diag.max(),
        "ground_state": ground,
        "ground_probability": probs[ground.to_index()],
        "top_states": top,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_ranges() {
        assert_eq!(parse_size_range("6..14").unwrap().len(), 9);
        assert_eq!(parse_size_range("6..=8").unwrap(), vec![6, 7, 8]);
        assert_eq!(parse_size_range("10..30:10").unwrap(), vec![10, 20, 30]);
        assert!(parse_size_range("8..6").is_err());
        assert!(parse_size_range("6-8").is_err());
        assert!(parse_size_range("0..3").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(Error::Argument("x".into())).exit_code(), 2);
        let data = Error::Data {
            path: "f".into(),
            line: None,
            msg: "m".into(),
        };
        assert_eq!(CliError::Core(data).exit_code(), 3);
        let cap = Error::Capacity {
            what: "x",
            got: 2,
            limit: 1,
        };
        assert_eq!(CliError::Core(cap).exit_code(), 4);
        assert_eq!(CliError::Core(Error::Solver("x".into())).exit_code(), 5);
    }
}
