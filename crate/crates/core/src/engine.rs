//! Decomposition/aggregation driver: sliding-window initialization, random
//! sub-QUBO iterations dispatched across a worker pool, and cost-reducing
//! per-variable aggregation. Also hosts the single-worker (dq-QAOA) and
//! naive divide-and-conquer baselines.
//!
//! The orchestrator owns the global assignment. Workers only ever see a
//! [`SubTask`] (a clamped sub-problem plus a seed) and hand back a
//! [`SubResult`]; results are consumed in worker-index order, so a run is
//! reproducible no matter how the pool schedules tasks.

use std::fmt;
use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle;
use crate::par::WorkerPool;
use crate::qaoa::{self, QaoaConfig};
use crate::qubo::{BinaryVector, QuboMatrix, SubProblem};
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dqaoa,
    DqQaoa,
    DcBaseline,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Dqaoa => "dqaoa",
            Mode::DqQaoa => "dq-qaoa",
            Mode::DcBaseline => "dc",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Sub-QUBO size (block size for the divide-and-conquer baseline).
    pub k: usize,
    pub iterations: usize,
    /// Sub-QUBOs per iteration.
    pub p: usize,
    pub seed: u64,
    #[serde(default)]
    pub qaoa: QaoaConfig,
    /// Block sizes swept by the divide-and-conquer baseline; empty means `[k]`.
    #[serde(default)]
    pub dc_sizes: Vec<usize>,
}

impl SolverConfig {
    /// k = 4, 30 iterations, p = n.
    pub fn dqaoa(n: usize) -> Self {
        Self {
            mode: Mode::Dqaoa,
            k: 4,
            iterations: 30,
            p: n.max(1),
            seed: 0,
            qaoa: QaoaConfig::default(),
            dc_sizes: Vec::new(),
        }
    }

    /// k = 4, 300 iterations, p = 1.
    pub fn dq_qaoa() -> Self {
        Self {
            mode: Mode::DqQaoa,
            k: 4,
            iterations: 300,
            p: 1,
            seed: 0,
            qaoa: QaoaConfig::default(),
            dc_sizes: Vec::new(),
        }
    }

    pub fn dc_baseline(k: usize) -> Self {
        Self {
            mode: Mode::DcBaseline,
            k,
            iterations: 0,
            p: 1,
            seed: 0,
            qaoa: QaoaConfig::default(),
            dc_sizes: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::arg("sub-QUBO size k must be at least 1"));
        }
        if self.p == 0 {
            return Err(Error::arg("p must be at least 1"));
        }
        match self.mode {
            Mode::Dqaoa | Mode::DqQaoa if self.k > n => {
                return Err(Error::arg(format!("sub-QUBO size {} exceeds problem size {n}", self.k)))
            }
            Mode::DqQaoa if self.p != 1 => {
                return Err(Error::arg(format!(
                    "dq-QAOA solves one sub-QUBO per iteration; p = {} must be normalized to 1",
                    self.p
                )))
            }
            Mode::DcBaseline if self.dc_sizes.contains(&0) => {
                return Err(Error::arg("divide-and-conquer block sizes must be at least 1"))
            }
            _ => {}
        }
        self.qaoa.validate()
    }

    /// Force mode-implied settings. Returns a notice when something changed.
    pub fn normalized(mut self) -> (Self, Option<String>) {
        if self.mode == Mode::DqQaoa && self.p != 1 {
            let note = format!("dq-QAOA runs with p = 1 (requested p = {})", self.p);
            self.p = 1;
            return (self, Some(note));
        }
        (self, None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubSolution {
    pub bits: BinaryVector,
    pub energy: f64,
}

/// A backend able to minimize a small QUBO.
pub trait SubSolver: Sync {
    fn solve(&self, subq: &QuboMatrix, seed: u64) -> Result<SubSolution>;

    fn name(&self) -> &str;
}

/// Exact statevector QAOA.
#[derive(Clone, Debug, Default)]
pub struct QaoaSubSolver {
    pub cfg: QaoaConfig,
}

impl QaoaSubSolver {
    pub fn new(cfg: QaoaConfig) -> Self {
        Self { cfg }
    }
}

impl SubSolver for QaoaSubSolver {
    fn solve(&self, subq: &QuboMatrix, seed: u64) -> Result<SubSolution> {
        let out = qaoa::qaoa_solve(subq, &self.cfg, seed)?;
        Ok(SubSolution {
            bits: out.bits,
            energy: out.energy,
        })
    }

    fn name(&self) -> &str {
        "qaoa-statevector"
    }
}

/// Exhaustive enumeration; handy as a noiseless reference backend.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSubSolver;

impl SubSolver for ExactSubSolver {
    fn solve(&self, subq: &QuboMatrix, _seed: u64) -> Result<SubSolution> {
        let (bits, energy) = oracle::brute_force(subq)?;
        Ok(SubSolution { bits, energy })
    }

    fn name(&self) -> &str {
        "exact"
    }
}

/// Orchestrator → worker message.
#[derive(Clone, Debug)]
pub struct SubTask {
    pub worker: usize,
    pub problem: SubProblem,
    pub seed: u64,
}

/// Worker → orchestrator message. `solution` is `None` when both attempts failed.
#[derive(Clone, Debug)]
pub struct SubResult {
    pub worker: usize,
    pub solution: Option<SubSolution>,
    pub attempts: usize,
}

fn execute(solver: &dyn SubSolver, task: &SubTask) -> SubResult {
    let k = task.problem.k();
    let try_once = |seed: u64| -> Result<SubSolution> {
        let s = solver.solve(&task.problem.subq, seed)?;
        if s.bits.len() != k {
            return Err(Error::Solver(format!(
                "{} returned {} bits for a {k}-variable sub-QUBO",
                solver.name(),
                s.bits.len()
            )));
        }
        Ok(s)
    };
    match try_once(task.seed) {
        Ok(s) => SubResult {
            worker: task.worker,
            solution: Some(s),
            attempts: 1,
        },
        Err(first) => {
            log::warn!("sub-solve on worker {} failed ({first}); retrying", task.worker);
            let solution = match try_once(rng::derive_seed(task.seed, &[u64::MAX])) {
                Ok(s) => Some(s),
                Err(e) => {
                    log::warn!("sub-solve on worker {} failed again ({e}); skipping", task.worker);
                    None
                }
            };
            SubResult {
                worker: task.worker,
                solution,
                attempts: 2,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: String,
    pub solver: String,
    pub best_x: BinaryVector,
    pub best_energy: f64,
    /// Global energy after initialization, then after every iteration.
    pub energy_trace: Vec<f64>,
    /// Seconds since solve entry at which each trace entry was recorded.
    pub trace_time_s: Vec<f64>,
    pub wall_time_s: f64,
    pub sub_solves: usize,
    pub failed_sub_solves: usize,
    pub workers: usize,
    pub config: SolverConfig,
}

impl SolveReport {
    /// `iteration,best_energy` rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,best_energy\n");
        for (i, e) in self.energy_trace.iter().enumerate() {
            out.push_str(&format!("{i},{e}\n"));
        }
        out
    }

    /// Seconds until the trace first reached `target` (within `tol`).
    pub fn time_to_reach(&self, target: f64, tol: f64) -> Option<f64> {
        self.energy_trace
            .iter()
            .zip(&self.trace_time_s)
            .find(|(e, _)| **e <= target + tol)
            .map(|(_, t)| *t)
    }
}

/// Contiguous windows `[j, j + k)` for `j = 0..=n-k`.
pub fn init_windows(n: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::arg(format!("window size {k} invalid for problem size {n}")));
    }
    Ok((0..=n - k).map(|j| (j..j + k).collect()).collect())
}

/// Uniform k-subset of `0..n`, sorted.
pub fn random_subset(n: usize, k: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::arg(format!("cannot draw {k} of {n} variables")));
    }
    let mut v = index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    Ok(v)
}

struct Counters {
    solves: usize,
    failures: usize,
}

impl Counters {
    fn record(&mut self, r: &SubResult) {
        self.solves += r.attempts;
        if r.solution.is_none() {
            self.failures += 1;
        }
    }
}

fn init_global(
    q: &QuboMatrix,
    cfg: &SolverConfig,
    solver: &dyn SubSolver,
    counters: &mut Counters,
) -> Result<BinaryVector> {
    let n = q.n();
    let k = cfg.k;
    let mut x = vec![0u8; n];
    // Window j depends on the assignment produced by window j-1, so the
    // sweep runs in index order.
    for (j, window) in init_windows(n, k)?.into_iter().enumerate() {
        let task = SubTask {
            worker: j,
            problem: q.extract_sub_qubo(&window, &x)?,
            seed: rng::derive_seed(cfg.seed, &[0, j as u64]),
        };
        let res = execute(solver, &task);
        counters.record(&res);
        let Some(sol) = res.solution else { continue };
        if j == 0 {
            x[..k].copy_from_slice(sol.bits.bits());
        } else {
            x[j + k - 1] = sol.bits[k - 1];
        }
    }
    BinaryVector::new(x)
}

/// Sliding-window initialization. Already-assigned variables are clamped;
/// not-yet-assigned variables outside the window count as 0; each window
/// after the first contributes only its newest variable.
pub fn initialize_global(q: &QuboMatrix, cfg: &SolverConfig, solver: &dyn SubSolver) -> Result<BinaryVector> {
    cfg.validate(q.n())?;
    let mut c = Counters { solves: 0, failures: 0 };
    init_global(q, cfg, solver, &mut c)
}

/// Apply each differing sub-solution bit, in ascending local order, only
/// when flipping it strictly lowers the global energy of the running
/// assignment. Returns the summed energy change.
fn aggregate_in_place(q: &QuboMatrix, x: &mut [u8], indices: &[usize], s: &[u8]) -> f64 {
    let mut change = 0.0;
    for (&i, &bit) in indices.iter().zip(s) {
        if bit != x[i] {
            let d = q.delta_unchecked(x, i);
            if d < 0.0 {
                x[i] ^= 1;
                change += d;
            }
        }
    }
    change
}

pub fn aggregate(q: &QuboMatrix, x_g: &[u8], sub: &SubProblem, s: &[u8]) -> Result<BinaryVector> {
    if x_g.len() != q.n() {
        return Err(Error::arg("global assignment length does not match QUBO size"));
    }
    if s.len() != sub.k() {
        return Err(Error::arg("sub-solution length does not match sub-problem size"));
    }
    if sub.indices.iter().any(|&i| i >= q.n()) {
        return Err(Error::arg("sub-problem index out of range"));
    }
    let mut x = x_g.to_vec();
    aggregate_in_place(q, &mut x, &sub.indices, s);
    BinaryVector::new(x)
}

fn iterate(
    q: &QuboMatrix,
    cfg: &SolverConfig,
    solver: &dyn SubSolver,
    pool: &WorkerPool,
) -> Result<SolveReport> {
    let start = Instant::now();
    let n = q.n();
    let mut counters = Counters { solves: 0, failures: 0 };
    let mut x = init_global(q, cfg, solver, &mut counters)?.into_inner();
    let mut energy = q.energy_unchecked(&x);
    let mut trace = vec![energy];
    let mut times = vec![start.elapsed().as_secs_f64()];

    for t in 0..cfg.iterations {
        let snapshot = x.clone();
        let tasks = (0..cfg.p)
            .map(|w| {
                let mut r = rng::derived_rng(cfg.seed, &[2, t as u64, w as u64]);
                let subset = random_subset(n, cfg.k, &mut r)?;
                Ok(SubTask {
                    worker: w,
                    problem: q.extract_sub_qubo(&subset, &snapshot)?,
                    seed: rng::derive_seed(cfg.seed, &[1, t as u64, w as u64]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let results = pool.map(&tasks, |_, task| execute(solver, task));
        for (task, res) in tasks.iter().zip(&results) {
            counters.record(res);
            if let Some(sol) = &res.solution {
                energy += aggregate_in_place(q, &mut x, &task.problem.indices, &sol.bits);
            }
        }
        trace.push(energy);
        times.push(start.elapsed().as_secs_f64());
    }

    let best_x = BinaryVector::new(x)?;
    let best_energy = q.energy_unchecked(&best_x);
    Ok(SolveReport {
        mode: cfg.mode.to_string(),
        solver: solver.name().to_string(),
        best_x,
        best_energy,
        energy_trace: trace,
        trace_time_s: times,
        wall_time_s: start.elapsed().as_secs_f64(),
        sub_solves: counters.solves,
        failed_sub_solves: counters.failures,
        workers: pool.workers(),
        config: cfg.clone(),
    })
}

/// Distributed QAOA: initialize, then `iterations` rounds of `p` random
/// sub-QUBOs solved concurrently and aggregated in worker order.
pub fn dqaoa_run(
    q: &QuboMatrix,
    cfg: &SolverConfig,
    solver: &dyn SubSolver,
    pool: &WorkerPool,
) -> Result<SolveReport> {
    if cfg.mode != Mode::Dqaoa {
        return Err(Error::arg(format!("dqaoa_run called with mode {}", cfg.mode)));
    }
    cfg.validate(q.n())?;
    iterate(q, cfg, solver, pool)
}

/// The single-worker special case (`p = 1`).
pub fn dq_qaoa_run(
    q: &QuboMatrix,
    cfg: &SolverConfig,
    solver: &dyn SubSolver,
    pool: &WorkerPool,
) -> Result<SolveReport> {
    if cfg.mode != Mode::DqQaoa {
        return Err(Error::arg(format!("dq_qaoa_run called with mode {}", cfg.mode)));
    }
    cfg.validate(q.n())?;
    iterate(q, cfg, solver, pool)
}

/// Partition into contiguous blocks, drop cross-block couplings, solve the
/// blocks independently and concatenate. With several block sizes the best
/// final energy wins.
pub fn dc_baseline_run(
    q: &QuboMatrix,
    cfg: &SolverConfig,
    solver: &dyn SubSolver,
    pool: &WorkerPool,
) -> Result<SolveReport> {
    if cfg.mode != Mode::DcBaseline {
        return Err(Error::arg(format!("dc_baseline_run called with mode {}", cfg.mode)));
    }
    cfg.validate(q.n())?;
    let start = Instant::now();
    let n = q.n();
    let sizes = if cfg.dc_sizes.is_empty() {
        vec![cfg.k]
    } else {
        cfg.dc_sizes.clone()
    };
    let zeros = vec![0u8; n];
    let mut counters = Counters { solves: 0, failures: 0 };
    let mut best: Option<(Vec<u8>, f64)> = None;
    let mut trace = Vec::new();
    let mut times = Vec::new();

    for (si, &size) in sizes.iter().enumerate() {
        let size = size.min(n);
        let tasks = (0..n)
            .step_by(size)
            .enumerate()
            .map(|(b, lo)| {
                let block: Vec<usize> = (lo..(lo + size).min(n)).collect();
                Ok(SubTask {
                    worker: b,
                    // Clamping against all-zeros leaves the plain restriction.
                    problem: q.extract_sub_qubo(&block, &zeros)?,
                    seed: rng::derive_seed(cfg.seed, &[3, si as u64, b as u64]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let results = pool.map(&tasks, |_, task| execute(solver, task));
        let mut x = zeros.clone();
        for (task, res) in tasks.iter().zip(&results) {
            counters.record(res);
            if let Some(sol) = &res.solution {
                for (&i, &b) in task.problem.indices.iter().zip(sol.bits.bits()) {
                    x[i] = b;
                }
            }
        }
        let e = q.energy_unchecked(&x);
        if best.as_ref().map_or(true, |b| e < b.1) {
            best = Some((x, e));
        }
        trace.push(best.as_ref().expect("set above").1);
        times.push(start.elapsed().as_secs_f64());
    }

    let (x, e) = best.expect("at least one block size");
    Ok(SolveReport {
        mode: cfg.mode.to_string(),
        solver: solver.name().to_string(),
        best_x: BinaryVector::new(x)?,
        best_energy: e,
        energy_trace: trace,
        trace_time_s: times,
        wall_time_s: start.elapsed().as_secs_f64(),
        sub_solves: counters.solves,
        failed_sub_solves: counters.failures,
        workers: pool.workers(),
        config: cfg.clone(),
    })
}

/// Dispatch on `cfg.mode`.
pub fn solve(q: &QuboMatrix, cfg: &SolverConfig, solver: &dyn SubSolver, pool: &WorkerPool) -> Result<SolveReport> {
    match cfg.mode {
        Mode::Dqaoa => dqaoa_run(q, cfg, solver, pool),
        Mode::DqQaoa => dq_qaoa_run(q, cfg, solver, pool),
        Mode::DcBaseline => dc_baseline_run(q, cfg, solver, pool),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn exact() -> &'static dyn SubSolver {
        &ExactSubSolver
    }

    #[test]
    fn windows_examples() {
        let w = init_windows(8, 4).unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w[0], vec![0, 1, 2, 3]);
        assert_eq!(w[4], vec![4, 5, 6, 7]);
        assert_eq!(init_windows(5, 5).unwrap(), vec![vec![0, 1, 2, 3, 4]]);
        let singles = init_windows(10, 1).unwrap();
        assert_eq!(singles.len(), 10);
        assert!(singles.iter().enumerate().all(|(i, w)| w == &vec![i]));
        assert!(init_windows(3, 4).is_err());
    }

    #[test]
    fn windows_visit_every_variable() {
        for n in 1..20 {
            for k in 1..=n {
                let mut seen = vec![false; n];
                for w in init_windows(n, k).unwrap() {
                    for i in w {
                        seen[i] = true;
                    }
                }
                assert!(seen.into_iter().all(|s| s));
            }
        }
    }

    #[test]
    fn subset_examples() {
        let mut r = rng::rng_from(1);
        assert_eq!(random_subset(5, 5, &mut r).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(random_subset(3, 4, &mut r).is_err());
        let a: Vec<_> = {
            let mut r = rng::rng_from(9);
            (0..5).map(|_| random_subset(20, 4, &mut r).unwrap()).collect()
        };
        let b: Vec<_> = {
            let mut r = rng::rng_from(9);
            (0..5).map(|_| random_subset(20, 4, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn subset_is_uniform() {
        let mut r = rng::rng_from(2024);
        let mut counts = [0usize; 20];
        let draws = 10_000;
        for _ in 0..draws {
            let s = random_subset(20, 4, &mut r).unwrap();
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            for i in s {
                counts[i] += 1;
            }
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 0.2).abs() <= 0.02, "frequency {f}");
        }
    }

    #[test]
    fn aggregate_examples() {
        let q = QuboMatrix::from_rows(&[[-1.0, 0.0], [0.0, 0.0]]).unwrap();
        let sub = q.extract_sub_qubo(&[0], &[0, 0]).unwrap();
        assert_eq!(aggregate(&q, &[0, 0], &sub, &[1]).unwrap().bits(), &[1, 0]);

        let g = QuboMatrix::gaussian(6, 3).unwrap();
        let xg = [1, 0, 1, 1, 0, 0];
        let sub = g.extract_sub_qubo(&[0, 2, 5], &xg).unwrap();
        assert_eq!(aggregate(&g, &xg, &sub, &[1, 1, 0]).unwrap().bits(), &xg);
        assert!(aggregate(&g, &xg, &sub, &[1, 1]).is_err());
    }

    #[test]
    fn aggregate_never_raises_energy() {
        let mut r = rng::rng_from(5);
        use rand::Rng;
        for seed in 0..200 {
            let q = QuboMatrix::gaussian(9, seed).unwrap();
            let xg: Vec<u8> = (0..9).map(|_| r.gen_range(0..2)).collect();
            let idx = random_subset(9, 4, &mut r).unwrap();
            let sub = q.extract_sub_qubo(&idx, &xg).unwrap();
            let s: Vec<u8> = (0..4).map(|_| r.gen_range(0..2)).collect();
            let after = aggregate(&q, &xg, &sub, &s).unwrap();
            assert!(q.energy(&after).unwrap() <= q.energy(&xg).unwrap() + 1e-12);
        }
    }

    #[test]
    fn initialization_single_window_is_one_solve() {
        let q = QuboMatrix::gaussian(4, 1).unwrap();
        let cfg = SolverConfig { k: 4, ..SolverConfig::dqaoa(4) };
        let x = initialize_global(&q, &cfg, exact()).unwrap();
        assert_eq!(x, oracle::brute_force(&q).unwrap().0);
    }

    #[test]
    fn initialization_bounded_by_optimum() {
        for seed in 0..20 {
            let q = QuboMatrix::gaussian(6, seed).unwrap();
            let cfg = SolverConfig { k: 3, ..SolverConfig::dqaoa(6) };
            let x = initialize_global(&q, &cfg, exact()).unwrap();
            let (_, opt) = oracle::brute_force(&q).unwrap();
            assert!(q.energy(&x).unwrap() >= opt - 1e-12);
        }
        let z = QuboMatrix::zeros(7).unwrap();
        let x = initialize_global(&z, &SolverConfig::dqaoa(7), exact()).unwrap();
        assert_eq!(z.energy(&x).unwrap(), 0.0);
    }

    #[test]
    fn zero_iterations_reports_initialization() {
        let q = QuboMatrix::gaussian(10, 4).unwrap();
        let cfg = SolverConfig {
            iterations: 0,
            ..SolverConfig::dqaoa(10)
        };
        let rep = dqaoa_run(&q, &cfg, exact(), &WorkerPool::sequential()).unwrap();
        let init = initialize_global(&q, &cfg, exact()).unwrap();
        assert_eq!(rep.best_x, init);
        assert_eq!(rep.energy_trace.len(), 1);
        assert_eq!(rep.sub_solves, 7);
    }

    #[test]
    fn traces_are_monotone_and_consistent() {
        let pool = WorkerPool::new(3).unwrap();
        for seed in 0..10 {
            let q = QuboMatrix::gaussian(12, seed).unwrap();
            let cfg = SolverConfig::dqaoa(12).with_seed(seed);
            let rep = dqaoa_run(&q, &cfg, exact(), &pool).unwrap();
            assert!(rep.energy_trace.windows(2).all(|w| w[1] <= w[0]));
            assert!((rep.best_energy - q.energy(&rep.best_x).unwrap()).abs() < 1e-12);
            assert_eq!(rep.energy_trace.len(), 31);
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let q = QuboMatrix::gaussian(14, 77).unwrap();
        let cfg = SolverConfig {
            iterations: 5,
            ..SolverConfig::dqaoa(14).with_seed(3)
        };
        let solver = QaoaSubSolver::default();
        let a = dqaoa_run(&q, &cfg, &solver, &WorkerPool::sequential()).unwrap();
        let b = dqaoa_run(&q, &cfg, &solver, &WorkerPool::new(4).unwrap()).unwrap();
        assert_eq!(a.best_x, b.best_x);
        assert_eq!(a.energy_trace, b.energy_trace);
    }

    #[test]
    fn full_width_subsets_reach_the_optimum() {
        // k = n: the single window is the whole problem.
        for seed in 0..5 {
            let q = QuboMatrix::gaussian(7, seed).unwrap();
            let cfg = SolverConfig { k: 7, iterations: 2, ..SolverConfig::dqaoa(7) };
            let rep = dqaoa_run(&q, &cfg, exact(), &WorkerPool::sequential()).unwrap();
            assert!((rep.best_energy - oracle::brute_force(&q).unwrap().1).abs() < 1e-12);
        }
    }

    #[test]
    fn dq_qaoa_requires_single_worker_slot() {
        let q = QuboMatrix::gaussian(8, 1).unwrap();
        let bad = SolverConfig { p: 5, ..SolverConfig::dq_qaoa() };
        assert!(matches!(
            dq_qaoa_run(&q, &bad, exact(), &WorkerPool::sequential()),
            Err(Error::Argument(_))
        ));
        let (fixed, note) = bad.normalized();
        assert_eq!(fixed.p, 1);
        assert!(note.is_some());
        let rep = dq_qaoa_run(&q, &fixed, exact(), &WorkerPool::sequential()).unwrap();
        assert_eq!(rep.energy_trace.len(), 301);
    }

    #[test]
    fn dc_block_diagonal_is_exact() {
        let mut q = QuboMatrix::zeros(8).unwrap();
        let g = QuboMatrix::gaussian(8, 5).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i / 4 == j / 4 {
                    q.set(i, j, g.get(i, j));
                }
            }
        }
        let rep = dc_baseline_run(&q, &SolverConfig::dc_baseline(4), exact(), &WorkerPool::sequential()).unwrap();
        let (_, opt) = oracle::brute_force(&q).unwrap();
        assert!((rep.best_energy - opt).abs() < 1e-12);
    }

    #[test]
    fn dc_oversized_block_is_one_solve() {
        let q = QuboMatrix::gaussian(5, 2).unwrap();
        let rep = dc_baseline_run(&q, &SolverConfig::dc_baseline(10), exact(), &WorkerPool::sequential()).unwrap();
        assert_eq!(rep.sub_solves, 1);
        assert_eq!(rep.best_energy, oracle::brute_force(&q).unwrap().1);
    }

    #[test]
    fn dc_sweep_keeps_best() {
        let q = QuboMatrix::gaussian(12, 6).unwrap();
        let pool = WorkerPool::sequential();
        let single: Vec<f64> = [3, 4, 6]
            .iter()
            .map(|&k| dc_baseline_run(&q, &SolverConfig::dc_baseline(k), exact(), &pool).unwrap().best_energy)
            .collect();
        let cfg = SolverConfig {
            dc_sizes: vec![3, 4, 6],
            ..SolverConfig::dc_baseline(4)
        };
        let swept = dc_baseline_run(&q, &cfg, exact(), &pool).unwrap();
        assert_eq!(swept.best_energy, single.iter().copied().fold(f64::INFINITY, f64::min));
    }

    struct Flaky {
        calls: AtomicUsize,
        fail_every: usize,
    }

    impl SubSolver for Flaky {
        fn solve(&self, subq: &QuboMatrix, seed: u64) -> Result<SubSolution> {
            let c = self.calls.fetch_add(1, Ordering::SeqCst);
            if c % self.fail_every == 0 {
                return Err(Error::Solver("injected".into()));
            }
            ExactSubSolver.solve(subq, seed)
        }
        fn name(&self) -> &str {
            "flaky"
        }
    }

    #[test]
    fn failed_sub_solves_are_retried_then_skipped() {
        let q = QuboMatrix::gaussian(8, 3).unwrap();
        let cfg = SolverConfig {
            iterations: 3,
            ..SolverConfig::dqaoa(8)
        };
        // every call fails: each task is attempted twice and skipped
        let always = Flaky { calls: AtomicUsize::new(0), fail_every: 1 };
        let rep = dqaoa_run(&q, &cfg, &always, &WorkerPool::sequential()).unwrap();
        let tasks = 5 + 3 * 8;
        assert_eq!(rep.failed_sub_solves, tasks);
        assert_eq!(rep.sub_solves, 2 * tasks);
        assert_eq!(rep.best_x, BinaryVector::zeros(8));

        // every other call fails: the retry always succeeds
        let half = Flaky { calls: AtomicUsize::new(0), fail_every: 2 };
        let rep = dqaoa_run(&q, &cfg, &half, &WorkerPool::sequential()).unwrap();
        assert_eq!(rep.failed_sub_solves, 0);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { k: 0, ..SolverConfig::dqaoa(5) }.validate(5).is_err());
        assert!(SolverConfig { k: 6, ..SolverConfig::dqaoa(5) }.validate(5).is_err());
        assert!(SolverConfig { p: 0, ..SolverConfig::dqaoa(5) }.validate(5).is_err());
        assert!(SolverConfig::dc_baseline(9).validate(5).is_ok());
        let q = QuboMatrix::zeros(5).unwrap();
        let wrong = SolverConfig::dq_qaoa();
        assert!(dqaoa_run(&q, &wrong, exact(), &WorkerPool::sequential()).is_err());
    }
}
