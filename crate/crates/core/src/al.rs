//! Active-learning design loop: fit a factorization machine to the data so
//! far, minimize its QUBO with DQAOA, evaluate the proposal, repeat.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::engine::{self, QaoaSubSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::fm::{self, Dataset, FmHyper, FmModel};
use crate::optics::{self, OpticsEvaluator};
use crate::par::WorkerPool;
use crate::qaoa::QaoaConfig;
use crate::qubo::BinaryVector;
use crate::rng::{self, Rng};

pub const WINDOW: usize = 100;
pub const WINDOW_STOP: usize = 90;
pub const DEFAULT_INIT_COUNT: usize = 25;
pub const MIN_INIT_COUNT: usize = 5;

/// Cycle caps by bit count; larger problems take the next entry up.
pub const CYCLE_CAPS: [(usize, usize); 4] = [(12, 250), (30, 3000), (50, 4000), (100, 5000)];

pub fn cycle_cap(n_bits: usize) -> usize {
    CYCLE_CAPS
        .iter()
        .find(|(n, _)| n_bits <= *n)
        .map_or(CYCLE_CAPS[CYCLE_CAPS.len() - 1].1, |&(_, c)| c)
}

/// Black-box objective scored by the loop; lower is better.
pub trait Evaluator: Sync {
    fn evaluate(&self, bits: &BinaryVector) -> Result<f64>;

    fn name(&self) -> &str;
}

impl Evaluator for OpticsEvaluator {
    fn evaluate(&self, bits: &BinaryVector) -> Result<f64> {
        self.fom_of(bits)
    }

    fn name(&self) -> &str {
        "optics"
    }
}

/// Number of set bits. The all-zeros string is the unique optimum.
#[derive(Clone, Copy, Debug, Default)]
pub struct BitCountEvaluator;

impl Evaluator for BitCountEvaluator {
    fn evaluate(&self, bits: &BinaryVector) -> Result<f64> {
        Ok(bits.count_ones() as f64)
    }

    fn name(&self) -> &str {
        "bitcount"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlSolverConfig {
    pub k: usize,
    pub iterations: usize,
    /// Sub-QUBOs per iteration; `None` means one per bit.
    pub p: Option<usize>,
    pub qaoa: QaoaConfig,
}

impl Default for AlSolverConfig {
    fn default() -> Self {
        Self {
            k: 4,
            iterations: 30,
            p: None,
            qaoa: QaoaConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlConfig {
    pub n_bits: usize,
    pub init_count: usize,
    pub seed: u64,
    /// Overrides the size-based cycle cap.
    pub cycles_cap: Option<usize>,
    pub fm: FmHyper,
    pub solver: AlSolverConfig,
}

impl Default for AlConfig {
    fn default() -> Self {
        Self {
            n_bits: 12,
            init_count: DEFAULT_INIT_COUNT,
            seed: 0,
            cycles_cap: None,
            fm: FmHyper::default(),
            solver: AlSolverConfig::default(),
        }
    }
}

impl AlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bits == 0 || self.n_bits % 2 != 0 {
            return Err(Error::arg(format!("n_bits must be even and positive, got {}", self.n_bits)));
        }
        if self.init_count < MIN_INIT_COUNT {
            return Err(Error::arg(format!("init_count must be at least {MIN_INIT_COUNT}")));
        }
        if self.solver.k == 0 || self.solver.p == Some(0) {
            return Err(Error::arg("solver k and p must be at least 1"));
        }
        self.solver.qaoa.validate()
    }

    pub fn cap(&self) -> usize {
        self.cycles_cap.unwrap_or_else(|| cycle_cap(self.n_bits))
    }

    fn solver_config(&self, seed: u64) -> SolverConfig {
        let mut c = SolverConfig::dqaoa(self.n_bits);
        c.k = self.solver.k.min(self.n_bits);
        c.iterations = self.solver.iterations;
        c.p = self.solver.p.unwrap_or(self.n_bits);
        c.qaoa = self.solver.qaoa.clone();
        c.seed = seed;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub bits: BinaryVector,
    pub fom: f64,
    pub best_fom: f64,
    pub injected: bool,
    pub fm_s: f64,
    pub solve_s: f64,
    pub eval_s: f64,
    pub wall_s: f64,
    pub fm_train_mse: f64,
    pub fm_test_mse: f64,
    /// Surrogate value at the proposed structure.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlState {
    pub n_bits: usize,
    pub seed: u64,
    pub dataset: Dataset,
    /// Completed cycles.
    pub cycle: usize,
    pub best_bits: BinaryVector,
    pub best_fom: f64,
    /// Injection flags of the most recent cycles, oldest first.
    pub window: VecDeque<bool>,
    pub history: Vec<CycleRecord>,
    pub errors: Vec<String>,
}

impl AlState {
    pub fn injections_in_window(&self) -> usize {
        self.window.iter().filter(|&&b| b).count()
    }

    pub fn best_trace(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.best_fom).collect()
    }

    /// `cycle,fom,best_fom,injected,fm_s,solve_s,eval_s`
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("cycle,fom,best_fom,injected,fm_s,solve_s,eval_s\n");
        for r in &self.history {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.cycle, r.fom, r.best_fom, r.injected as u8, r.fm_s, r.solve_s, r.eval_s
            ));
        }
        s
    }
}

fn random_bits(n: usize, r: &mut Rng) -> BinaryVector {
    BinaryVector::new((0..n).map(|_| r.gen_range(0..2u8)).collect()).expect("binary")
}

/// Evaluates `init_count` uniform random structures. Duplicates are kept.
pub fn al_init(cfg: &AlConfig, evaluator: &dyn Evaluator) -> Result<AlState> {
    cfg.validate()?;
    let mut r = rng::derived_rng(cfg.seed, &[0]);
    let mut dataset = Dataset::default();
    for _ in 0..cfg.init_count {
        let x = random_bits(cfg.n_bits, &mut r);
        let y = evaluator.evaluate(&x)?;
        dataset.push(x, y)?;
    }
    let (best_bits, best_fom) = dataset.best().cloned().expect("non-empty");
    Ok(AlState {
        n_bits: cfg.n_bits,
        seed: cfg.seed,
        dataset,
        cycle: 0,
        best_bits,
        best_fom,
        window: VecDeque::new(),
        history: Vec::new(),
        errors: Vec::new(),
    })
}

/// One surrogate → solve → evaluate round. On error the state is untouched.
/// Returns the model trained this cycle alongside its record.
pub fn al_cycle(
    state: &mut AlState,
    cfg: &AlConfig,
    evaluator: &dyn Evaluator,
    pool: &WorkerPool,
) -> Result<(CycleRecord, FmModel)> {
    if state.n_bits != cfg.n_bits {
        return Err(Error::arg("state and config disagree on n_bits"));
    }
    let t = state.cycle as u64;
    let start = Instant::now();

    let hp = FmHyper {
        seed: rng::derive_seed(cfg.seed ^ cfg.fm.seed, &[1, t]),
        ..cfg.fm.clone()
    };
    let (model, metrics) = fm::fm_train(&state.dataset, &hp)?;
    let (q, _) = model.to_qubo()?;
    let fm_s = start.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let scfg = cfg.solver_config(rng::derive_seed(cfg.seed, &[2, t]));
    let report = engine::dqaoa_run(&q, &scfg, &QaoaSubSolver::new(cfg.solver.qaoa.clone()), pool)?;
    let solve_s = t1.elapsed().as_secs_f64();

    let predicted = model.predict(&report.best_x)?;
    let (bits, injected) = if state.dataset.contains(&report.best_x) {
        let mut r = rng::derived_rng(cfg.seed, &[3, t]);
        (random_bits(cfg.n_bits, &mut r), true)
    } else {
        (report.best_x, false)
    };

    let t2 = Instant::now();
    let fom = evaluator.evaluate(&bits)?;
    if !fom.is_finite() {
        return Err(Error::Solver(format!("{} returned a non-finite value", evaluator.name())));
    }
    let eval_s = t2.elapsed().as_secs_f64();

    state.dataset.push(bits.clone(), fom)?;
    if fom < state.best_fom {
        state.best_fom = fom;
        state.best_bits = bits.clone();
    }
    state.window.push_back(injected);
    while state.window.len() > WINDOW {
        state.window.pop_front();
    }
    state.cycle += 1;
    let record = CycleRecord {
        cycle: state.cycle,
        bits,
        fom,
        best_fom: state.best_fom,
        injected,
        fm_s,
        solve_s,
        eval_s,
        wall_s: start.elapsed().as_secs_f64(),
        fm_train_mse: metrics.train_mse,
        fm_test_mse: metrics.test_mse,
        predicted,
    };
    state.history.push(record.clone());
    Ok((record, model))
}

/// Stop once 90 of the last 100 cycles were random injections, or at the cap.
pub fn stopping_check(state: &AlState, cap: usize) -> bool {
    state.injections_in_window() >= WINDOW_STOP || state.cycle >= cap
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Checkpoint {
    config: AlConfig,
    state: AlState,
}

#[derive(Serialize)]
struct Best<'a> {
    bits: &'a BinaryVector,
    fom: f64,
    cycle: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    layers: Option<optics::LayerStack>,
}

const STATE_FILE: &str = "state.json";

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn persist(dir: &Path, cfg: &AlConfig, state: &AlState, model: Option<&FmModel>) -> Result<()> {
    state.dataset.write_csv(&dir.join("dataset.csv"))?;
    write(&dir.join("trace.csv"), state.trace_csv())?;
    let best_cycle = state
        .history
        .iter()
        .rev()
        .find(|r| r.bits == state.best_bits && r.fom == state.best_fom)
        .map_or(0, |r| r.cycle);
    let best = Best {
        bits: &state.best_bits,
        fom: state.best_fom,
        cycle: best_cycle,
        layers: optics::decode_structure(&state.best_bits).ok(),
    };
    write(&dir.join("best.json"), serde_json::to_string_pretty(&best).expect("serializable"))?;
    if let Some(m) = model {
        m.write_json(&dir.join("fm_model.json"))?;
    }
    let ckpt = Checkpoint {
        config: cfg.clone(),
        state: state.clone(),
    };
    write(&dir.join(STATE_FILE), serde_json::to_string(&ckpt).expect("serializable"))
}

/// Loads a checkpoint written by `al_run`, if any. The stored configuration
/// must match `cfg` apart from the cycle cap.
pub fn load_checkpoint(dir: &Path, cfg: &AlConfig) -> Result<Option<AlState>> {
    let path = dir.join(STATE_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let ckpt: Checkpoint =
        serde_json::from_str(&text).map_err(|e| Error::data(&path, Some(e.line()), e.to_string()))?;
    let mut stored = ckpt.config;
    stored.cycles_cap = cfg.cycles_cap;
    if &stored != cfg {
        return Err(Error::data(&path, None, "checkpoint was written with a different configuration"));
    }
    Ok(Some(ckpt.state))
}

/// Runs (or resumes, when `out` holds a checkpoint) until `stopping_check`
/// fires. With `out` set, every cycle is checkpointed. A failing cycle is
/// recorded and ends the run with its error.
pub fn al_run(
    cfg: &AlConfig,
    evaluator: &dyn Evaluator,
    pool: &WorkerPool,
    out: Option<&Path>,
) -> Result<AlState> {
    cfg.validate()?;
    let resumed = match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            load_checkpoint(dir, cfg)?
        }
        None => None,
    };
    let mut state = match resumed {
        Some(s) => {
            log::info!("resuming at cycle {}", s.cycle);
            s
        }
        None => {
            let s = al_init(cfg, evaluator)?;
            if let Some(dir) = out {
                persist(dir, cfg, &s, None)?;
            }
            s
        }
    };
    let cap = cfg.cap();
    while !stopping_check(&state, cap) {
        match al_cycle(&mut state, cfg, evaluator, pool) {
            Ok((rec, model)) => {
                log::info!(
                    "cycle {}: fom {:.6} best {:.6}{}",
                    rec.cycle,
                    rec.fom,
                    rec.best_fom,
                    if rec.injected { " (random)" } else { "" }
                );
                if let Some(dir) = out {
                    persist(dir, cfg, &state, Some(&model))?;
                }
            }
            Err(e) => {
                state.errors.push(format!("cycle {}: {e}", state.cycle + 1));
                if let Some(dir) = out {
                    persist(dir, cfg, &state, None)?;
                }
                return Err(e);
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(n_bits: usize, seed: u64) -> AlConfig {
        AlConfig {
            n_bits,
            seed,
            fm: FmHyper {
                epochs: 100,
                ..FmHyper::default()
            },
            solver: AlSolverConfig {
                iterations: 5,
                qaoa: QaoaConfig {
                    budget: 60,
                    shots: 128,
                    ..QaoaConfig::default()
                },
                ..AlSolverConfig::default()
            },
            ..AlConfig::default()
        }
    }

    #[test]
    fn caps() {
        assert_eq!(cycle_cap(12), 250);
        assert_eq!(cycle_cap(30), 3000);
        assert_eq!(cycle_cap(50), 4000);
        assert_eq!(cycle_cap(100), 5000);
        assert_eq!(cycle_cap(8), 250);
        assert_eq!(cycle_cap(200), 5000);
    }

    #[test]
    fn init_examples() {
        let cfg = quick(12, 3);
        let s = al_init(&cfg, &BitCountEvaluator).unwrap();
        assert_eq!(s.dataset.len(), 25);
        let min = s.dataset.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        assert_eq!(s.best_fom, min);
        assert_eq!(s, al_init(&cfg, &BitCountEvaluator).unwrap());
        assert!(al_init(&AlConfig { n_bits: 7, ..cfg.clone() }, &BitCountEvaluator).is_err());
        assert!(al_init(&AlConfig { init_count: 4, ..cfg }, &BitCountEvaluator).is_err());
    }

    #[test]
    fn stopping_rules() {
        let cfg = quick(12, 0);
        let mut s = al_init(&cfg, &BitCountEvaluator).unwrap();
        assert!(!stopping_check(&s, 250));
        s.window = (0..100).map(|i| i < 90).collect();
        assert!(stopping_check(&s, 250));
        s.window = (0..100).map(|i| i < 89).collect();
        assert!(!stopping_check(&s, 250));
        s.cycle = 3000;
        assert!(stopping_check(&s, cycle_cap(30)));
    }

    #[test]
    fn saturated_dataset_forces_injection() {
        let cfg = AlConfig {
            init_count: 16,
            ..quick(4, 1)
        };
        let mut s = al_init(&cfg, &BitCountEvaluator).unwrap();
        s.dataset = Dataset::new(
            (0..16)
                .map(|i| {
                    let x = BinaryVector::from_index(i, 4);
                    let y = x.count_ones() as f64;
                    (x, y)
                })
                .collect(),
        )
        .unwrap();
        let pool = WorkerPool::sequential();
        for c in 0..5 {
            let (rec, _) = al_cycle(&mut s, &cfg, &BitCountEvaluator, &pool).unwrap();
            assert!(rec.injected);
            assert_eq!(s.dataset.len(), 17 + c);
        }
    }

    #[test]
    fn cycles_keep_invariants() {
        let cfg = quick(12, 5);
        let pool = WorkerPool::sequential();
        let mut s = al_init(&cfg, &BitCountEvaluator).unwrap();
        let mut prev = s.best_fom;
        for _ in 0..8 {
            let before = s.dataset.len();
            let (rec, _) = al_cycle(&mut s, &cfg, &BitCountEvaluator, &pool).unwrap();
            assert_eq!(s.dataset.len(), before + 1);
            assert!(rec.best_fom <= prev);
            assert_eq!(rec.fom, BitCountEvaluator.evaluate(&rec.bits).unwrap());
            let parts = rec.fm_s + rec.solve_s + rec.eval_s;
            assert!(rec.fm_s >= 0.0 && rec.solve_s >= 0.0 && rec.eval_s >= 0.0);
            assert!(parts <= rec.wall_s && parts >= 0.9 * rec.wall_s);
            prev = rec.best_fom;
        }
        let min = s.dataset.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        assert_eq!(s.best_fom, min);
    }

    struct Failing;

    impl Evaluator for Failing {
        fn evaluate(&self, bits: &BinaryVector) -> Result<f64> {
            if bits.count_ones() == 0 {
                Ok(0.0)
            } else {
                Err(Error::Solver("evaluator offline".into()))
            }
        }

        fn name(&self) -> &str {
            "failing"
        }
    }

    #[test]
    fn failed_cycle_leaves_state_untouched() {
        let cfg = quick(6, 2);
        let mut s = al_init(&cfg, &BitCountEvaluator).unwrap();
        let before = s.clone();
        assert!(al_cycle(&mut s, &cfg, &Failing, &WorkerPool::sequential()).is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let pool = WorkerPool::sequential();
        let full_cfg = AlConfig {
            cycles_cap: Some(6),
            ..quick(8, 11)
        };
        let strip = |s: &AlState| {
            s.history
                .iter()
                .map(|r| (r.cycle, r.bits.clone(), r.fom, r.injected))
                .collect::<Vec<_>>()
        };
        let full = al_run(&full_cfg, &BitCountEvaluator, &pool, None).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let part_cfg = AlConfig {
            cycles_cap: Some(3),
            ..full_cfg.clone()
        };
        let part = al_run(&part_cfg, &BitCountEvaluator, &pool, Some(dir.path())).unwrap();
        assert_eq!(part.cycle, 3);
        let resumed = al_run(&full_cfg, &BitCountEvaluator, &pool, Some(dir.path())).unwrap();
        assert_eq!(resumed.cycle, 6);
        assert_eq!(strip(&resumed), strip(&full));
        assert_eq!(resumed.dataset, full.dataset);
        for f in ["dataset.csv", "trace.csv", "best.json", "fm_model.json", "state.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        assert_eq!(trace.lines().count(), 7);

        let other = AlConfig { seed: 99, ..full_cfg };
        assert!(matches!(
            al_run(&other, &BitCountEvaluator, &pool, Some(dir.path())),
            Err(Error::Data { .. })
        ));
    }
}
