//! Benchmark harness: Gaussian instances per size and seed, solved in each
//! requested mode and scored against the best available reference.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{self, Mode, QaoaSubSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::oracle::{self, SaConfig, BRUTE_FORCE_MAX};
use crate::par::WorkerPool;
use crate::qaoa::QaoaConfig;
use crate::qubo::QuboMatrix;
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    Brute,
    Sa,
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reference::Brute => "brute",
            Reference::Sa => "sa",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub modes: Vec<Mode>,
    pub seeds_per_size: usize,
    /// Root seed; instance and solver seeds derive from it.
    pub seed: u64,
    pub k: usize,
    pub iterations: Option<usize>,
    /// Sub-QUBOs per DQAOA iteration; `None` means p = n.
    pub p: Option<usize>,
    pub qaoa: QaoaConfig,
    pub sa: SaConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: Vec::new(),
            modes: vec![Mode::Dqaoa],
            seeds_per_size: 3,
            seed: 0,
            k: 4,
            iterations: None,
            p: None,
            qaoa: QaoaConfig::default(),
            sa: SaConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::arg("benchmark needs at least one problem size"));
        }
        if self.modes.is_empty() {
            return Err(Error::arg("benchmark needs at least one mode"));
        }
        if self.sizes.contains(&0) {
            return Err(Error::arg("problem sizes must be at least 1"));
        }
        if self.seeds_per_size == 0 {
            return Err(Error::arg("seeds_per_size must be at least 1"));
        }
        self.qaoa.validate()
    }

    /// Solver configuration for one row; `k` is clamped to `n`.
    pub fn solver_config(&self, mode: Mode, n: usize, seed: u64) -> SolverConfig {
        let k = self.k.min(n);
        let mut cfg = match mode {
            Mode::Dqaoa => {
                let mut c = SolverConfig::dqaoa(n);
                c.p = self.p.unwrap_or(n);
                c
            }
            Mode::DqQaoa => SolverConfig::dq_qaoa(),
            Mode::DcBaseline => SolverConfig::dc_baseline(k),
        };
        cfg.k = k;
        if let (Some(it), Mode::Dqaoa | Mode::DqQaoa) = (self.iterations, mode) {
            cfg.iterations = it;
        }
        cfg.qaoa = self.qaoa.clone();
        cfg.seed = seed;
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub n: usize,
    pub mode: String,
    pub seed: u64,
    pub ratio: f64,
    pub reference: Reference,
    pub energy_alg: f64,
    pub energy_ref: f64,
    pub time_s: f64,
    pub sub_solves: usize,
    /// Set when the algorithm beat the reference; the reference deserves a rerun.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchFailure {
    pub n: usize,
    pub mode: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchOutput {
    pub config: BenchConfig,
    pub records: Vec<BenchmarkRecord>,
    pub failures: Vec<BenchFailure>,
}

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "mode",
    "seed",
    "ratio",
    "reference",
    "energy_alg",
    "energy_ref",
    "time_s",
    "sub_solves",
];

/// Reference energy: exhaustive up to the brute-force cap, annealing above.
pub fn reference_energy(q: &QuboMatrix, sa: &SaConfig) -> Result<(Reference, f64)> {
    if q.n() <= BRUTE_FORCE_MAX {
        Ok((Reference::Brute, oracle::brute_force(q)?.1))
    } else {
        Ok((Reference::Sa, oracle::simulated_annealing(q, sa)?.1))
    }
}

/// Runs every (size, seed, mode) row. Row failures are collected, not fatal.
/// All modes on one (size, seed) see the same instance and reference.
pub fn benchmark_suite(cfg: &BenchConfig, pool: &WorkerPool) -> Result<BenchOutput> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let solver = QaoaSubSolver::new(cfg.qaoa.clone());
    for &n in &cfg.sizes {
        for s in 0..cfg.seeds_per_size as u64 {
            let fail_all = |failures: &mut Vec<BenchFailure>, e: &Error| {
                for m in &cfg.modes {
                    failures.push(BenchFailure {
                        n,
                        mode: m.to_string(),
                        seed: s,
                        error: e.to_string(),
                    });
                }
            };
            let q = match QuboMatrix::gaussian(n, derive_seed(cfg.seed, &[n as u64, s])) {
                Ok(q) => q,
                Err(e) => {
                    fail_all(&mut failures, &e);
                    continue;
                }
            };
            let sa = SaConfig {
                seed: derive_seed(cfg.seed, &[n as u64, s, 0]),
                ..cfg.sa.clone()
            };
            let (reference, e_ref) = match reference_energy(&q, &sa) {
                Ok(r) => r,
                Err(e) => {
                    fail_all(&mut failures, &e);
                    continue;
                }
            };
            for &mode in &cfg.modes {
                let scfg = cfg.solver_config(mode, n, derive_seed(cfg.seed, &[n as u64, s, 1]));
                let row = (|| {
                    let t0 = Instant::now();
                    let rep = engine::solve(&q, &scfg, &solver, pool)?;
                    let time_s = t0.elapsed().as_secs_f64();
                    let ratio = oracle::approximation_ratio(rep.best_energy, e_ref)?;
                    Ok::<_, Error>(BenchmarkRecord {
                        n,
                        mode: mode.to_string(),
                        seed: s,
                        ratio,
                        reference,
                        energy_alg: rep.best_energy,
                        energy_ref: e_ref,
                        time_s,
                        sub_solves: rep.sub_solves,
                        flagged: ratio > 1.0 + 1e-12,
                    })
                })();
                match row {
                    Ok(r) => {
                        if r.flagged {
                            log::warn!("n={n} seed={s} {mode}: ratio {} beats the {reference} reference", r.ratio);
                        }
                        records.push(r);
                    }
                    Err(e) => failures.push(BenchFailure {
                        n,
                        mode: mode.to_string(),
                        seed: s,
                        error: e.to_string(),
                    }),
                }
            }
        }
    }
    Ok(BenchOutput {
        config: cfg.clone(),
        records,
        failures,
    })
}

pub fn write_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Solver(format!("writing benchmark csv: {e}"));
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.mode.clone(),
            r.seed.to_string(),
            r.ratio.to_string(),
            r.reference.to_string(),
            r.energy_alg.to_string(),
            r.energy_ref.to_string(),
            r.time_s.to_string(),
            r.sub_solves.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Solver(format!("writing benchmark csv: {e}")))?;
    Ok(())
}

pub fn csv_string(records: &[BenchmarkRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

impl BenchOutput {
    pub fn write_files(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        std::fs::write(csv_path, csv_string(&self.records)).map_err(|e| Error::io(csv_path, e))?;
        let json = serde_json::to_string_pretty(self).expect("serializable");
        std::fs::write(json_path, json).map_err(|e| Error::io(json_path, e))
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> BenchConfig {
        BenchConfig {
            sizes: vec![6, 7],
            modes: vec![Mode::Dqaoa, Mode::DcBaseline],
            seeds_per_size: 2,
            iterations: Some(3),
            qaoa: QaoaConfig {
                budget: 40,
                shots: 64,
                ..QaoaConfig::default()
            },
            ..BenchConfig::default()
        }
    }

    #[test]
    fn row_count_and_csv_shape() {
        let out = benchmark_suite(&small_cfg(), &WorkerPool::sequential()).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.records.len(), 2 * 2 * 2);
        let csv = csv_string(&out.records);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.all(|l| l.split(',').count() == 9));
        for r in &out.records {
            assert_eq!(r.reference, Reference::Brute);
            assert!(r.ratio.is_finite() && r.ratio <= 1.0 + 1e-12);
            assert!((r.ratio - r.energy_alg / r.energy_ref).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_apart_from_time() {
        let strip = |o: BenchOutput| {
            o.records
                .into_iter()
                .map(|r| BenchmarkRecord { time_s: 0.0, ..r })
                .collect::<Vec<_>>()
        };
        let a = strip(benchmark_suite(&small_cfg(), &WorkerPool::sequential()).unwrap());
        let b = strip(benchmark_suite(&small_cfg(), &WorkerPool::new(2).unwrap()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn empty_lists_rejected() {
        let pool = WorkerPool::sequential();
        let cfg = BenchConfig {
            modes: vec![],
            ..small_cfg()
        };
        assert!(matches!(benchmark_suite(&cfg, &pool), Err(Error::Argument(_))));
        let cfg = BenchConfig {
            sizes: vec![],
            ..small_cfg()
        };
        assert!(matches!(benchmark_suite(&cfg, &pool), Err(Error::Argument(_))));
    }

    #[test]
    fn reference_switches_to_annealing_above_cap() {
        let q = QuboMatrix::gaussian(25, 3).unwrap();
        let sa = SaConfig {
            sweeps: 100,
            ..SaConfig::default()
        };
        assert_eq!(reference_energy(&q, &sa).unwrap().0, Reference::Sa);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
