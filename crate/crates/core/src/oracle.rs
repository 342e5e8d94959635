//! Reference solvers (exhaustive search, simulated annealing) and the
//! approximation-ratio metric used to score the decomposed solvers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::qubo::{BinaryVector, QuboMatrix};
use crate::rng;

pub const BRUTE_FORCE_MAX: usize = 24;

/// Single-flip bookkeeping: couplings `Q_ij + Q_ji` and the local field
/// of every variable, so a flip's energy change is O(1) and an accepted
/// flip costs O(n).
struct FlipState<'a> {
    n: usize,
    diag: &'a [f64],
    sym: &'a [f64],
    x: Vec<u8>,
    field: Vec<f64>,
    energy: f64,
}

struct Couplings {
    diag: Vec<f64>,
    sym: Vec<f64>,
}

impl Couplings {
    fn new(q: &QuboMatrix) -> Self {
        let n = q.n();
        let mut sym = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sym[i * n + j] = q.get(i, j) + q.get(j, i);
                }
            }
        }
        Self {
            diag: (0..n).map(|i| q.get(i, i)).collect(),
            sym,
        }
    }
}

impl<'a> FlipState<'a> {
    fn new(q: &QuboMatrix, c: &'a Couplings, x: Vec<u8>) -> Self {
        let n = q.n();
        let mut field = vec![0.0; n];
        for (i, f) in field.iter_mut().enumerate() {
            *f = (0..n).filter(|&j| x[j] != 0).map(|j| c.sym[i * n + j]).sum();
        }
        let energy = q.energy_unchecked(&x);
        Self {
            n,
            diag: &c.diag,
            sym: &c.sym,
            x,
            field,
            energy,
        }
    }

    #[inline]
    fn delta(&self, i: usize) -> f64 {
        let d = self.diag[i] + self.field[i];
        if self.x[i] == 0 {
            d
        } else {
            -d
        }
    }

    #[inline]
    fn flip(&mut self, i: usize, delta: f64) {
        let sign = if self.x[i] == 0 { 1.0 } else { -1.0 };
        self.x[i] ^= 1;
        self.energy += delta;
        let row = &self.sym[i * self.n..(i + 1) * self.n];
        for (f, s) in self.field.iter_mut().zip(row) {
            *f += sign * s;
        }
    }
}

fn better(e: f64, idx: usize, best: (f64, usize)) -> bool {
    e < best.0 || (e == best.0 && idx < best.1)
}

/// Exact minimum by exhaustive enumeration. Exact ties resolve to the
/// lowest little-endian index.
pub fn brute_force(q: &QuboMatrix) -> Result<(BinaryVector, f64)> {
    let n = q.n();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::Capacity {
            what: "brute-force variables",
            got: n,
            limit: BRUTE_FORCE_MAX,
        });
    }
    let couplings = Couplings::new(q);
    let high = n.min(6);
    let low = n - high;

    // Each chunk fixes the top `high` bits and walks the low bits in Gray order.
    let chunk_best = par::map_range(1usize << high, |chunk| {
        let base = chunk << low;
        let mut st = FlipState::new(q, &couplings, BinaryVector::from_index(base, n).into_inner());
        let mut idx = base;
        let mut best = (st.energy, idx);
        for step in 1usize..(1 << low) {
            let bit = step.trailing_zeros() as usize;
            let d = st.delta(bit);
            st.flip(bit, d);
            idx ^= 1 << bit;
            if better(st.energy, idx, best) {
                best = (st.energy, idx);
            }
        }
        best
    });
    let (_, idx) = chunk_best
        .into_iter()
        .fold((f64::INFINITY, usize::MAX), |acc, b| if better(b.0, b.1, acc) { b } else { acc });
    let x = BinaryVector::from_index(idx, n);
    let e = q.energy_unchecked(&x);
    Ok((x, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    pub sweeps: usize,
    pub t_hot: f64,
    pub t_cold: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            sweeps: 2000,
            t_hot: 2.0,
            t_cold: 0.01,
            restarts: 8,
            seed: 0,
        }
    }
}

/// Best-of-restarts single-flip Metropolis annealing on a geometric
/// temperature schedule. Restart `r` draws from its own derived stream, so
/// adding restarts can only improve the reported energy.
pub fn simulated_annealing(q: &QuboMatrix, cfg: &SaConfig) -> Result<(BinaryVector, f64)> {
    if cfg.sweeps == 0 || cfg.restarts == 0 {
        return Err(Error::arg("annealing needs at least one sweep and one restart"));
    }
    if !(cfg.t_hot > 0.0 && cfg.t_cold > 0.0) {
        return Err(Error::arg("annealing temperatures must be positive"));
    }
    let n = q.n();
    let couplings = Couplings::new(q);
    let ratio = cfg.t_cold / cfg.t_hot;
    let runs = par::map_range(cfg.restarts, |r| {
        let mut rng = rng::derived_rng(cfg.seed, &[r as u64]);
        let x0: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let mut st = FlipState::new(q, &couplings, x0);
        let mut best_e = st.energy;
        let mut best_x = st.x.clone();
        for s in 0..cfg.sweeps {
            let frac = if cfg.sweeps > 1 {
                s as f64 / (cfg.sweeps - 1) as f64
            } else {
                1.0
            };
            let t = cfg.t_hot * ratio.powf(frac);
            for i in 0..n {
                let d = st.delta(i);
                if d <= 0.0 || rng.gen::<f64>() < (-d / t).exp() {
                    st.flip(i, d);
                    if st.energy < best_e {
                        best_e = st.energy;
                        best_x.copy_from_slice(&st.x);
                    }
                }
            }
        }
        let e = q.energy_unchecked(&best_x);
        (best_x, e)
    });
    let (x, e) = runs
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("at least one restart");
    Ok((BinaryVector::new(x)?, e))
}

/// `e_alg / e_ref`. Values above 1 mean the algorithm beat the reference.
pub fn approximation_ratio(e_alg: f64, e_ref: f64) -> Result<f64> {
    if e_ref == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(e_alg / e_ref)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enumerate(q: &QuboMatrix) -> (usize, f64) {
        let n = q.n();
        let mut best = (0, f64::INFINITY);
        for idx in 0..1usize << n {
            let e = q.energy(&BinaryVector::from_index(idx, n)).unwrap();
            if e < best.1 {
                best = (idx, e);
            }
        }
        best
    }

    #[test]
    fn brute_force_examples() {
        let (x, e) = brute_force(&QuboMatrix::zeros(3).unwrap()).unwrap();
        assert_eq!((x.bits(), e), (&[0u8, 0, 0][..], 0.0));
        let (x, e) = brute_force(&QuboMatrix::from_diagonal(&[-1.0, -1.0]).unwrap()).unwrap();
        assert_eq!((x.bits(), e), (&[1u8, 1][..], -2.0));
        let (x, e) = brute_force(&QuboMatrix::from_rows(&[[1.0, -3.0], [0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!((x.bits(), e), (&[1u8, 1][..], -1.0));
    }

    #[test]
    fn brute_force_matches_plain_enumeration() {
        for seed in 0..20 {
            let n = 3 + (seed as usize % 9);
            let q = QuboMatrix::gaussian(n, seed).unwrap();
            let (idx, e) = enumerate(&q);
            let (x, be) = brute_force(&q).unwrap();
            assert_eq!(x.to_index(), idx);
            assert!((be - e).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_capacity() {
        let q = QuboMatrix::zeros(25).unwrap();
        assert!(matches!(brute_force(&q), Err(Error::Capacity { .. })));
    }

    #[test]
    fn sa_zero_and_consistency() {
        let (_, e) = simulated_annealing(&QuboMatrix::zeros(5).unwrap(), &SaConfig::default()).unwrap();
        assert_eq!(e, 0.0);
        let q = QuboMatrix::gaussian(12, 4).unwrap();
        let (x, e) = simulated_annealing(&q, &SaConfig::default()).unwrap();
        assert!((q.energy(&x).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn sa_more_restarts_never_worse() {
        let q = QuboMatrix::gaussian(30, 8).unwrap();
        let mut prev = f64::INFINITY;
        for restarts in 1..6 {
            let cfg = SaConfig {
                sweeps: 50,
                restarts,
                seed: 3,
                ..SaConfig::default()
            };
            let (_, e) = simulated_annealing(&q, &cfg).unwrap();
            assert!(e <= prev);
            prev = e;
        }
    }

    #[test]
    fn sa_is_deterministic() {
        let q = QuboMatrix::gaussian(20, 1).unwrap();
        let cfg = SaConfig {
            sweeps: 100,
            seed: 5,
            ..SaConfig::default()
        };
        assert_eq!(simulated_annealing(&q, &cfg).unwrap(), simulated_annealing(&q, &cfg).unwrap());
    }

    #[test]
    fn sa_matches_brute_force_small() {
        let mut hits = 0;
        for seed in 0..20 {
            let q = QuboMatrix::gaussian(12, 500 + seed).unwrap();
            let (_, exact) = brute_force(&q).unwrap();
            let (_, e) = simulated_annealing(&q, &SaConfig { seed, ..SaConfig::default() }).unwrap();
            assert!(e >= exact - 1e-12);
            if (e - exact).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 19, "hits {hits}");
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(approximation_ratio(-3.0, -3.0).unwrap(), 1.0);
        assert!((approximation_ratio(-95.0, -100.0).unwrap() - 0.95).abs() < 1e-15);
        assert!(matches!(approximation_ratio(-1.0, 0.0), Err(Error::UndefinedRatio)));
        assert!(approximation_ratio(-101.0, -100.0).unwrap() > 1.0);
    }
}
