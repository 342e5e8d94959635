//! Exact statevector QAOA for small sub-QUBOs.
//!
//! The cost Hamiltonian is diagonal in the computational basis, so it is
//! stored directly as the vector of QUBO energies over all `2^k` basis
//! states. Bit `i` of a basis index is variable `i` (little-endian).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim;
use crate::qubo::{BinaryVector, QuboMatrix};
use crate::rng;

pub const DEFAULT_MAX_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    amps: Vec<Complex64>,
    qubits: usize,
}

impl Statevector {
    /// `|+>^k`.
    pub fn uniform(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amps: vec![a; dim],
            qubits,
        }
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps, qubits }
    }

    /// Wraps raw amplitudes; the length must be a power of two and the
    /// vector normalized to within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::arg(format!("statevector length {dim} is not a power of two")));
        }
        let s = Self {
            qubits: dim.trailing_zeros() as usize,
            amps,
        };
        if (s.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::arg("statevector is not normalized"));
        }
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// QUBO energy of every computational basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct CostDiagonal {
    values: Vec<f64>,
}

impl CostDiagonal {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::arg("cost diagonal length must be a power of two"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn cost_diagonal(subq: &QuboMatrix, max_qubits: usize) -> Result<CostDiagonal> {
    let k = subq.n();
    if k > max_qubits {
        return Err(Error::Capacity {
            what: "qubits",
            got: k,
            limit: max_qubits,
        });
    }
    // Build by highest set bit: E(b) = E(b without h) + Q_hh + sum_{j<h, b_j=1} (Q_hj + Q_jh).
    let mut values = vec![0.0; 1 << k];
    for h in 0..k {
        let base = 1usize << h;
        for low in 0..base {
            let mut add = subq.get(h, h);
            let mut rest = low;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                add += subq.get(h, j) + subq.get(j, h);
                rest &= rest - 1;
            }
            values[base | low] = values[low] + add;
        }
    }
    Ok(CostDiagonal { values })
}

fn check_dims(state: &Statevector, diag: &CostDiagonal) -> Result<()> {
    if state.amps.len() != diag.values.len() {
        return Err(Error::arg(format!(
            "statevector length {} does not match cost diagonal length {}",
            state.amps.len(),
            diag.values.len()
        )));
    }
    Ok(())
}

/// `|psi> <- exp(-i gamma H_C) |psi>`.
pub fn apply_cost_phase(state: &mut Statevector, diag: &CostDiagonal, gamma: f64) -> Result<()> {
    check_dims(state, diag)?;
    for (a, &c) in state.amps.iter_mut().zip(&diag.values) {
        *a *= Complex64::from_polar(1.0, -gamma * c);
    }
    Ok(())
}

/// `|psi> <- exp(-i beta sum_q X_q) |psi>`, one 2×2 rotation per qubit.
pub fn apply_mixer(state: &mut Statevector, beta: f64) {
    let (s, c) = beta.sin_cos();
    let mis = Complex64::new(0.0, -s);
    let dim = state.amps.len();
    for q in 0..state.qubits {
        let stride = 1usize << q;
        for block in (0..dim).step_by(stride << 1) {
            for i in block..block + stride {
                let a0 = state.amps[i];
                let a1 = state.amps[i + stride];
                state.amps[i] = a0 * c + a1 * mis;
                state.amps[i + stride] = a0 * mis + a1 * c;
            }
        }
    }
}

/// `<psi| H_C |psi>`.
pub fn expectation(state: &Statevector, diag: &CostDiagonal) -> Result<f64> {
    check_dims(state, diag)?;
    Ok(state
        .amps
        .iter()
        .zip(&diag.values)
        .map(|(a, &c)| a.norm_sqr() * c)
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::arg(format!(
                "need equal, nonzero numbers of gammas and betas (got {} and {})",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    fn from_flat(flat: &[f64]) -> Self {
        let l = flat.len() / 2;
        Self {
            gammas: flat[..l].to_vec(),
            betas: flat[l..].to_vec(),
        }
    }
}

/// Prepare `|+>^k` and apply each (cost phase, mixer) layer in turn.
pub fn ansatz_state(diag: &CostDiagonal, params: &QaoaParams) -> Statevector {
    let qubits = diag.len().trailing_zeros() as usize;
    let mut state = Statevector::uniform(qubits);
    for (&g, &b) in params.gammas.iter().zip(&params.betas) {
        apply_cost_phase(&mut state, diag, g).expect("dimensions agree by construction");
        apply_mixer(&mut state, b);
    }
    state
}

pub fn qaoa_ansatz(subq: &QuboMatrix, params: &QaoaParams, max_qubits: usize) -> Result<Statevector> {
    let diag = cost_diagonal(subq, max_qubits)?;
    Ok(ansatz_state(&diag, params))
}

/// Knobs of the sub-QUBO QAOA solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaoaConfig {
    pub layers: usize,
    /// Objective evaluations allowed per optimizer start.
    pub budget: usize,
    pub shots: usize,
    pub starts: usize,
    pub max_qubits: usize,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            layers: 1,
            budget: 300,
            shots: 1024,
            starts: 1,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.budget == 0 || self.shots == 0 || self.starts == 0 {
            return Err(Error::arg("QAOA layers, budget, shots and starts must all be at least 1"));
        }
        Ok(())
    }
}

const SIMPLEX_STEP: f64 = 0.4;

/// Minimize the QAOA expectation from seeded random starts in `[0, pi)^(2l)`.
/// Returns the best parameters seen and their expectation.
pub fn optimize_on_diagonal(
    diag: &CostDiagonal,
    layers: usize,
    budget: usize,
    starts: usize,
    seed: u64,
) -> Result<(QaoaParams, f64)> {
    if layers == 0 || budget == 0 || starts == 0 {
        return Err(Error::arg("layers, budget and starts must be at least 1"));
    }
    let mut best: Option<(QaoaParams, f64)> = None;
    for start in 0..starts {
        let mut r = rng::derived_rng(seed, &[start as u64]);
        let x0: Vec<f64> = (0..2 * layers).map(|_| r.gen_range(0.0..PI)).collect();
        let objective = |flat: &[f64]| {
            let state = ansatz_state(diag, &QaoaParams::from_flat(flat));
            expectation(&state, diag).expect("dimensions agree by construction")
        };
        let m = optim::nelder_mead(objective, &x0, SIMPLEX_STEP, budget, 1e-12);
        if best.as_ref().map_or(true, |b| m.value < b.1) {
            best = Some((QaoaParams::from_flat(&m.x), m.value));
        }
    }
    Ok(best.expect("at least one start"))
}

pub fn optimize_params(
    subq: &QuboMatrix,
    layers: usize,
    budget: usize,
    seed: u64,
) -> Result<(QaoaParams, f64)> {
    let diag = cost_diagonal(subq, DEFAULT_MAX_QUBITS.max(subq.n()))?;
    optimize_on_diagonal(&diag, layers, budget, 1, seed)
}

/// Draw `shots` basis states from the Born distribution and keep the one
/// with the lowest cost. Ties in cost keep the first sampled.
pub fn sample_solution(
    state: &Statevector,
    diag: &CostDiagonal,
    shots: usize,
    seed: u64,
) -> Result<(BinaryVector, f64)> {
    check_dims(state, diag)?;
    if shots == 0 {
        return Err(Error::arg("shots must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut r = rng::rng_from(seed);
    let mut best = usize::MAX;
    for _ in 0..shots {
        let u = r.gen::<f64>() * total;
        let mut idx = cdf.partition_point(|&c| c <= u);
        if idx >= cdf.len() {
            // u rounded up to the total mass
            idx = cdf.partition_point(|&c| c < total);
        }
        if best == usize::MAX || diag.values[idx] < diag.values[best] {
            best = idx;
        }
    }
    Ok((
        BinaryVector::from_index(best, state.qubits),
        diag.values[best],
    ))
}

/// Everything one QAOA sub-solve produces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QaoaOutcome {
    pub bits: BinaryVector,
    pub energy: f64,
    pub params: QaoaParams,
    pub expectation: f64,
}

/// Optimize angles, prepare the state, sample, and report the best shot.
/// The returned energy is re-evaluated on `subq`.
pub fn qaoa_solve(subq: &QuboMatrix, cfg: &QaoaConfig, seed: u64) -> Result<QaoaOutcome> {
    cfg.validate()?;
    let diag = cost_diagonal(subq, cfg.max_qubits)?;
    let (params, expectation) =
        optimize_on_diagonal(&diag, cfg.layers, cfg.budget, cfg.starts, rng::derive_seed(seed, &[0]))?;
    let state = ansatz_state(&diag, &params);
    let (bits, _) = sample_solution(&state, &diag, cfg.shots, rng::derive_seed(seed, &[1]))?;
    let energy = subq.energy(&bits)?;
    Ok(QaoaOutcome {
        bits,
        energy,
        params,
        expectation,
    })
}
