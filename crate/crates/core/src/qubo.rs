//! Dense QUBO matrices, binary assignments and clamped sub-problems.
//!
//! Energies are evaluated as `x^T Q x` on the matrix exactly as stored; no
//! symmetrization or triangular convention is imposed.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Standard deviation of the Gaussian benchmark ensemble.
pub const GAUSSIAN_STD: f64 = 0.15;

/// A length-n assignment of binary decision variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryVector(Vec<u8>);

impl BinaryVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::arg(format!("bit {pos} is {}, expected 0 or 1", bits[pos])));
        }
        Ok(Self(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Little-endian decoding: bit `i` of `index` becomes variable `i`.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|i| ((index >> i) & 1) as u8).collect())
    }

    /// Inverse of [`BinaryVector::from_index`]. Requires `len() < usize::BITS`.
    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        self.0[i] = bit & 1;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl std::ops::Deref for BinaryVector {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::arg(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }
}

impl Serialize for BinaryVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinaryVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense n×n QUBO coefficients, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuboFile", into = "QuboFile")]
pub struct QuboMatrix {
    n: usize,
    q: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuboFile {
    n: usize,
    q: Vec<f64>,
}

impl TryFrom<QuboFile> for QuboMatrix {
    type Error = Error;
    fn try_from(f: QuboFile) -> Result<Self> {
        QuboMatrix::new(f.n, f.q)
    }
}

impl From<QuboMatrix> for QuboFile {
    fn from(m: QuboMatrix) -> Self {
        QuboFile { n: m.n, q: m.q }
    }
}

impl QuboMatrix {
    pub fn new(n: usize, q: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("QUBO size must be at least 1"));
        }
        if q.len() != n * n {
            return Err(Error::arg(format!(
                "QUBO of size {n} needs {} coefficients, got {}",
                n * n,
                q.len()
            )));
        }
        if let Some(pos) = q.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!(
                "non-finite coefficient at ({}, {})",
                pos / n,
                pos % n
            )));
        }
        Ok(Self { n, q })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n])
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut q = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::arg(format!("row {i} has {} entries, expected {n}", r.len())));
            }
            q.extend_from_slice(r);
        }
        Self::new(n, q)
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut q = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            q[i * n + i] = v;
        }
        Self::new(n, q)
    }

    /// Every entry drawn independently from Normal(0, 0.15).
    pub fn gaussian(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("QUBO size must be at least 1"));
        }
        let normal = Normal::new(0.0, GAUSSIAN_STD).expect("valid normal");
        let mut r = rng::rng_from(seed);
        let q = (0..n * n).map(|_| normal.sample(&mut r)).collect();
        Self::new(n, q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.q[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// Count of structurally nonzero off-diagonal cells.
    pub fn off_diagonal_nonzeros(&self) -> usize {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.get(i, j) != 0.0)
            .count()
    }

    fn check_len(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::arg(format!(
                "assignment length {} does not match QUBO size {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// `x^T Q x`.
    pub fn energy(&self, x: &[u8]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[u8]) -> f64 {
        let ones: Vec<usize> = (0..self.n).filter(|&i| x[i] != 0).collect();
        let mut e = 0.0;
        for &i in &ones {
            let row = self.row(i);
            for &j in &ones {
                e += row[j];
            }
        }
        e
    }

    /// `energy(flip(x, i)) - energy(x)` in O(n).
    pub fn energy_delta_flip(&self, x: &[u8], i: usize) -> Result<f64> {
        self.check_len(x)?;
        if i >= self.n {
            return Err(Error::arg(format!("index {i} out of range for size {}", self.n)));
        }
        Ok(self.delta_unchecked(x, i))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, x: &[u8], i: usize) -> f64 {
        let n = self.n;
        let row = self.row(i);
        let mut field = row[i];
        for j in 0..n {
            if j != i && x[j] != 0 {
                field += row[j] + self.q[j * n + i];
            }
        }
        if x[i] == 0 {
            field
        } else {
            -field
        }
    }

    /// Clamp every variable outside `indices` to its value in `x_global`,
    /// folding couplings to clamped variables into the sub-problem diagonal.
    pub fn extract_sub_qubo(&self, indices: &[usize], x_global: &[u8]) -> Result<SubProblem> {
        self.check_len(x_global)?;
        if indices.is_empty() {
            return Err(Error::arg("sub-problem needs at least one index"));
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("duplicate sub-problem index"));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.n) {
            return Err(Error::arg(format!("index {bad} out of range for size {}", self.n)));
        }
        let mut in_sub = vec![false; self.n];
        for &i in &sorted {
            in_sub[i] = true;
        }
        let fixed_ones: Vec<usize> = (0..self.n)
            .filter(|&j| !in_sub[j] && x_global[j] != 0)
            .collect();

        let k = sorted.len();
        let mut sub = vec![0.0; k * k];
        for (a, &i) in sorted.iter().enumerate() {
            for (b, &j) in sorted.iter().enumerate() {
                sub[a * k + b] = self.get(i, j);
            }
            sub[a * k + a] += fixed_ones
                .iter()
                .map(|&j| self.get(i, j) + self.get(j, i))
                .sum::<f64>();
        }
        let mut offset = 0.0;
        for &i in &fixed_ones {
            for &j in &fixed_ones {
                offset += self.get(i, j);
            }
        }
        Ok(SubProblem {
            indices: sorted,
            subq: QuboMatrix { n: k, q: sub },
            offset,
        })
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::data(path, Some(e.line()), e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("QUBO serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// First line holds `n`, followed by `n` comma-separated dense rows.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (ln, head) = lines
            .next()
            .ok_or_else(|| Error::data(path, Some(1), "empty file"))?;
        let n: usize = head
            .trim()
            .trim_start_matches("n=")
            .parse()
            .map_err(|_| Error::data(path, Some(ln + 1), "expected size header"))?;
        let mut q = Vec::with_capacity(n * n);
        for (ln, line) in lines {
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::data(path, Some(ln + 1), format!("bad number {field:?}")))?;
                q.push(v);
            }
        }
        Self::new(n, q).map_err(|e| Error::data(path, None, e.to_string()))
    }

    /// Dispatch on extension: `.csv` is the dense-rows format, anything else JSON.
    pub fn read_file(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::read_csv(path),
            _ => Self::read_json(path),
        }
    }
}

/// A k-variable restriction of a QUBO with the remaining variables clamped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubProblem {
    pub indices: Vec<usize>,
    pub subq: QuboMatrix,
    pub offset: f64,
}

impl SubProblem {
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// Write a local assignment into a copy of `x_global`.
    pub fn merge(&self, x_global: &[u8], local: &[u8]) -> BinaryVector {
        let mut out = x_global.to_vec();
        for (a, &i) in self.indices.iter().enumerate() {
            out[i] = local[a];
        }
        BinaryVector(out)
    }
}
