//! Second-order factorization machine used as a QUBO surrogate.
//!
//! For binary inputs the model
//! `y = w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j`
//! maps exactly onto an upper-triangular QUBO plus the constant `w0`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{BinaryVector, QuboMatrix};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmModel {
    pub n: usize,
    pub m: usize,
    pub w0: f64,
    pub w: Vec<f64>,
    /// `n` rows of `m` latent factors.
    pub v: Vec<Vec<f64>>,
}

impl FmModel {
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(0.0, vec![0.0; n], vec![vec![0.0; m]; n])
    }

    pub fn new(w0: f64, w: Vec<f64>, v: Vec<Vec<f64>>) -> Result<Self> {
        let n = w.len();
        let m = v.first().map_or(0, |r| r.len());
        let model = Self { n, m, w0, w, v };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::arg("factorization machine needs n >= 1 and m >= 1"));
        }
        if self.w.len() != self.n || self.v.len() != self.n || self.v.iter().any(|r| r.len() != self.m) {
            return Err(Error::arg("factorization machine parameter shapes are inconsistent"));
        }
        let finite = self.w0.is_finite()
            && self.w.iter().all(|x| x.is_finite())
            && self.v.iter().flatten().all(|x| x.is_finite());
        if !finite {
            return Err(Error::arg("factorization machine has non-finite parameters"));
        }
        Ok(())
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        self.v[i].iter().zip(&self.v[j]).map(|(a, b)| a * b).sum()
    }

    /// Factorized evaluation: `w0 + w.x + 1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2]`.
    pub fn predict(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::arg(format!(
                "input length {} does not match model size {}",
                x.len(),
                self.n
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[u8]) -> f64 {
        let active: Vec<usize> = (0..self.n).filter(|&i| x[i] != 0).collect();
        let linear: f64 = active.iter().map(|&i| self.w[i]).sum();
        let mut pair = 0.0;
        for f in 0..self.m {
            let (mut s, mut s2) = (0.0, 0.0);
            for &i in &active {
                let v = self.v[i][f];
                s += v;
                s2 += v * v;
            }
            pair += s * s - s2;
        }
        self.w0 + linear + 0.5 * pair
    }

    /// `Q_ii = w_i`, `Q_ij = <v_i, v_j>` for `i < j`, zero below the diagonal.
    /// Returns the matrix and the constant offset `w0`.
    pub fn to_qubo(&self) -> Result<(QuboMatrix, f64)> {
        self.validate()?;
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = self.w[i];
            for j in i + 1..n {
                q[i * n + j] = self.dot(i, j);
            }
        }
        Ok((QuboMatrix::new(n, q)?, self.w0))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::data(path, Some(e.line()), e.to_string()))?;
        m.validate().map_err(|e| Error::data(path, None, e.to_string()))?;
        Ok(m)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("model serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

pub fn fm_predict(model: &FmModel, x: &[u8]) -> Result<f64> {
    model.predict(x)
}

pub fn fm_to_qubo(model: &FmModel) -> Result<(QuboMatrix, f64)> {
    model.to_qubo()
}

/// Labelled structures `(bits, y)` with a common length.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<(BinaryVector, f64)>,
}

impl Dataset {
    pub fn new(rows: Vec<(BinaryVector, f64)>) -> Result<Self> {
        let d = Self { rows };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((first, _)) = self.rows.first() {
            let n = first.len();
            for (i, (x, y)) in self.rows.iter().enumerate() {
                if x.len() != n {
                    return Err(Error::arg(format!("row {i} has {} bits, expected {n}", x.len())));
                }
                if !y.is_finite() {
                    return Err(Error::arg(format!("row {i} has non-finite target")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_bits(&self) -> Option<usize> {
        self.rows.first().map(|(x, _)| x.len())
    }

    pub fn push(&mut self, x: BinaryVector, y: f64) -> Result<()> {
        if let Some(n) = self.n_bits() {
            if x.len() != n {
                return Err(Error::arg(format!("row has {} bits, expected {n}", x.len())));
            }
        }
        if !y.is_finite() {
            return Err(Error::arg("non-finite target"));
        }
        self.rows.push((x, y));
        Ok(())
    }

    pub fn contains(&self, x: &BinaryVector) -> bool {
        self.rows.iter().any(|(r, _)| r == x)
    }

    /// Row with the smallest target; the earliest wins ties.
    pub fn best(&self) -> Option<&(BinaryVector, f64)> {
        self.rows
            .iter()
            .reduce(|a, b| if b.1 < a.1 { b } else { a })
    }

    /// CSV with header `bits,y`; bits as a 0/1 string.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::data(path, None, e.to_string()))?;
        w.write_record(["bits", "y"]).map_err(|e| Error::data(path, None, e.to_string()))?;
        for (x, y) in &self.rows {
            w.write_record([x.to_string(), format!("{y:?}")])
                .map_err(|e| Error::data(path, None, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::data(path, None, e.to_string()))?;
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::data(path, Some(line), e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::data(path, Some(line), "expected two fields"));
            }
            let x: BinaryVector = rec[0]
                .parse()
                .map_err(|e: Error| Error::data(path, Some(line), e.to_string()))?;
            let y: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|_| Error::data(path, Some(line), format!("bad target {:?}", &rec[1])))?;
            rows.push((x, y));
        }
        Dataset::new(rows).map_err(|e| Error::data(path, None, e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FmHyper {
    pub m: usize,
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    /// Fraction of rows held out for testing (0.2 gives a 4:1 split).
    pub test_fraction: f64,
    /// Standard deviation of the initial latent factors.
    pub init_std: f64,
}

impl Default for FmHyper {
    fn default() -> Self {
        Self {
            m: 8,
            lr: 0.01,
            epochs: 500,
            l2: 1e-4,
            seed: 0,
            test_fraction: 0.2,
            init_std: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmMetrics {
    pub train_mse: f64,
    pub test_mse: f64,
    /// Training-set MSE after each epoch.
    pub epoch_train_mse: Vec<f64>,
}

pub const MIN_TRAIN_ROWS: usize = 5;

fn mse(model: &FmModel, rows: &[&(BinaryVector, f64)]) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    rows.iter()
        .map(|(x, y)| (model.predict_unchecked(x) - y).powi(2))
        .sum::<f64>()
        / rows.len() as f64
}

/// Shuffle with `hp.seed`, hold out `test_fraction`, and fit `(w0, w, v)`
/// by per-sample SGD on squared error with l2 on `w` and `v`.
pub fn fm_train(data: &Dataset, hp: &FmHyper) -> Result<(FmModel, FmMetrics)> {
    data.validate()?;
    if data.len() < MIN_TRAIN_ROWS {
        return Err(Error::arg(format!(
            "need at least {MIN_TRAIN_ROWS} rows to train, got {}",
            data.len()
        )));
    }
    if hp.m == 0 || hp.epochs == 0 || !(hp.lr > 0.0) || !(0.0..1.0).contains(&hp.test_fraction) {
        return Err(Error::arg("invalid factorization machine hyperparameters"));
    }
    let n = data.n_bits().expect("non-empty");
    let mut r = rng::derived_rng(hp.seed, &[0]);

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut r);
    let n_test = ((data.len() as f64) * hp.test_fraction).round() as usize;
    let n_test = n_test.min(data.len() - 1);
    let (test_idx, train_idx) = order.split_at(n_test);
    let train: Vec<&(BinaryVector, f64)> = train_idx.iter().map(|&i| &data.rows[i]).collect();
    let test: Vec<&(BinaryVector, f64)> = test_idx.iter().map(|&i| &data.rows[i]).collect();

    let init = Normal::new(0.0, hp.init_std.max(0.0)).map_err(|e| Error::arg(e.to_string()))?;
    let mut model = FmModel {
        n,
        m: hp.m,
        w0: 0.0,
        w: vec![0.0; n],
        v: (0..n)
            .map(|_| (0..hp.m).map(|_| init.sample(&mut r)).collect())
            .collect(),
    };

    let mut epoch_train_mse = Vec::with_capacity(hp.epochs);
    let mut sums = vec![0.0; hp.m];
    let mut visit: Vec<usize> = (0..train.len()).collect();
    for _ in 0..hp.epochs {
        visit.shuffle(&mut r);
        for &t in &visit {
            let (x, y) = train[t];
            let active: Vec<usize> = (0..n).filter(|&i| x[i] != 0).collect();
            for (f, s) in sums.iter_mut().enumerate() {
                *s = active.iter().map(|&i| model.v[i][f]).sum();
            }
            let err = model.predict_unchecked(x) - y;
            model.w0 -= hp.lr * err;
            for &i in &active {
                model.w[i] -= hp.lr * (err + hp.l2 * model.w[i]);
                for f in 0..hp.m {
                    let v = model.v[i][f];
                    model.v[i][f] -= hp.lr * (err * (sums[f] - v) + hp.l2 * v);
                }
            }
        }
        epoch_train_mse.push(mse(&model, &train));
    }
    model.validate().map_err(|_| Error::Solver("training diverged".into()))?;

    let metrics = FmMetrics {
        train_mse: mse(&model, &train),
        test_mse: mse(&model, &test),
        epoch_train_mse,
    };
    Ok((model, metrics))
}
