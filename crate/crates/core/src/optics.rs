//! Planar multilayer filters: bit-string decoding, normal-incidence
//! transfer-matrix transmittance, and the solar-weighted figure of merit.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::qubo::BinaryVector;

pub const TOTAL_THICKNESS_NM: f64 = 1200.0;
pub const MIN_LAYERS: usize = 3;
pub const MAX_LAYERS: usize = 50;
pub const BAND_START_NM: f64 = 300.0;
pub const BAND_END_NM: f64 = 2500.0;
pub const GRID_STEP_NM: f64 = 5.0;
pub const VISIBLE_NM: (f64, f64) = (400.0, 700.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Material {
    SiO2,
    Si3N4,
    Al2O3,
    TiO2,
}

impl Material {
    pub const ALL: [Material; 4] = [Material::SiO2, Material::Si3N4, Material::Al2O3, Material::TiO2];

    /// Two-bit label, first bit most significant.
    pub fn code(self) -> [u8; 2] {
        match self {
            Material::SiO2 => [0, 0],
            Material::Si3N4 => [0, 1],
            Material::Al2O3 => [1, 0],
            Material::TiO2 => [1, 1],
        }
    }

    pub fn from_code(hi: u8, lo: u8) -> Self {
        Self::ALL[((hi & 1) << 1 | (lo & 1)) as usize]
    }

    pub fn name(self) -> &'static str {
        match self {
            Material::SiO2 => "SiO2",
            Material::Si3N4 => "Si3N4",
            Material::Al2O3 => "Al2O3",
            Material::TiO2 => "TiO2",
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Real-valued samples on a strictly increasing wavelength grid (nm).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub wavelengths: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_grid(w: &[f64]) -> std::result::Result<(), String> {
    if w.is_empty() {
        return Err("empty wavelength grid".into());
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite()) {
        return Err(format!("non-finite wavelength at position {i}"));
    }
    if let Some(i) = w.windows(2).position(|p| p[1] <= p[0]) {
        return Err(format!("wavelengths not strictly increasing at position {}", i + 1));
    }
    Ok(())
}

/// Linear interpolation on a validated grid; `None` outside its span.
fn interp(w: &[f64], v: &[f64], x: f64) -> Option<f64> {
    if x < w[0] || x > w[w.len() - 1] {
        return None;
    }
    let i = w.partition_point(|&p| p < x);
    if w[i] == x {
        return Some(v[i]);
    }
    let t = (x - w[i - 1]) / (w[i] - w[i - 1]);
    Some(v[i - 1] + t * (v[i] - v[i - 1]))
}

impl Spectrum {
    pub fn new(wavelengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if wavelengths.len() != values.len() {
            return Err(Error::arg("spectrum grid and values differ in length"));
        }
        check_grid(&wavelengths).map_err(Error::Argument)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("spectrum has non-finite values"));
        }
        Ok(Self { wavelengths, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn interpolate(&self, lambda_nm: f64) -> Result<f64> {
        interp(&self.wavelengths, &self.values, lambda_nm).ok_or_else(|| {
            Error::arg(format!(
                "wavelength {lambda_nm} nm outside [{}, {}] nm",
                self.wavelengths[0],
                self.wavelengths[self.len() - 1]
            ))
        })
    }

    pub fn resample(&self, grid: &[f64]) -> Result<Spectrum> {
        let values = grid.iter().map(|&l| self.interpolate(l)).collect::<Result<Vec<_>>>()?;
        Spectrum::new(grid.to_vec(), values)
    }
}

/// `300, 305, ..., 2500` nm.
pub fn default_grid() -> Vec<f64> {
    let steps = ((BAND_END_NM - BAND_START_NM) / GRID_STEP_NM).round() as usize;
    (0..=steps).map(|i| BAND_START_NM + GRID_STEP_NM * i as f64).collect()
}

/// Unity transmission on the visible band (inclusive), zero elsewhere.
pub fn ideal_filter(grid: &[f64]) -> Result<Spectrum> {
    let values = grid
        .iter()
        .map(|&l| if (VISIBLE_NM.0..=VISIBLE_NM.1).contains(&l) { 1.0 } else { 0.0 })
        .collect();
    Spectrum::new(grid.to_vec(), values)
}

fn read_csv_rows(path: &Path, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::data(path, None, format!("{other:?}")),
        })?;
    let got = r.headers().map_err(|e| Error::data(path, Some(1), e.to_string()))?.clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(Error::data(
            path,
            Some(1),
            format!("expected header {:?}, found {:?}", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::data(path, Some(line), e.to_string()))?;
        if rec.len() != header.len() {
            return Err(Error::data(path, Some(line), format!("expected {} fields", header.len())));
        }
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::data(path, Some(line), "malformed number"))?;
        rows.push((line, vals));
    }
    if rows.is_empty() {
        return Err(Error::data(path, None, "no data rows"));
    }
    for w in rows.windows(2) {
        if w[1].1[0] <= w[0].1[0] {
            return Err(Error::data(path, Some(w[1].0), "wavelengths not strictly increasing"));
        }
    }
    Ok(rows)
}

/// Reads `wavelength_nm,value`.
pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    let rows = read_csv_rows(path, &["wavelength_nm", "value"])?;
    let (w, v) = rows.into_iter().map(|(_, r)| (r[0], r[1])).unzip();
    Spectrum::new(w, v).map_err(|e| Error::data(path, None, e.to_string()))
}

/// Complex refractive index `n + ik` tabulated against wavelength.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialTable {
    pub wavelengths: Vec<f64>,
    pub n: Vec<f64>,
    pub k: Vec<f64>,
}

impl MaterialTable {
    pub fn constant(n: f64, k: f64) -> Self {
        Self {
            wavelengths: vec![0.0, f64::MAX],
            n: vec![n, n],
            k: vec![k, k],
        }
    }

    /// Reads `wavelength_nm,n,k`.
    pub fn load(path: &Path) -> Result<Self> {
        let rows = read_csv_rows(path, &["wavelength_nm", "n", "k"])?;
        if let Some((line, _)) = rows.iter().find(|(_, r)| r[2] < 0.0) {
            return Err(Error::data(path, Some(*line), "negative extinction coefficient"));
        }
        Ok(Self {
            wavelengths: rows.iter().map(|(_, r)| r[0]).collect(),
            n: rows.iter().map(|(_, r)| r[1]).collect(),
            k: rows.iter().map(|(_, r)| r[2]).collect(),
        })
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.wavelengths[0] <= lo && self.wavelengths[self.wavelengths.len() - 1] >= hi
    }

    pub fn index_at(&self, lambda_nm: f64) -> Option<Complex64> {
        let n = interp(&self.wavelengths, &self.n, lambda_nm)?;
        let k = interp(&self.wavelengths, &self.k, lambda_nm)?;
        Some(Complex64::new(n, k))
    }
}

/// Dispersion data for the four layer materials plus the surrounding media.
#[derive(Clone, Debug)]
pub struct MaterialDb {
    tables: BTreeMap<Material, MaterialTable>,
    pub ambient: f64,
    /// Exit medium below the stack; `None` means the ambient.
    pub substrate: Option<MaterialTable>,
}

impl MaterialDb {
    pub fn new(tables: BTreeMap<Material, MaterialTable>) -> Self {
        Self {
            tables,
            ambient: 1.0,
            substrate: None,
        }
    }

    /// Loads `<Material>.csv` for every material and, when present,
    /// `substrate.csv` from `dir`. Every table must span 300–2500 nm.
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "materials directory not found"),
            ));
        }
        let load_covering = |path: PathBuf| -> Result<MaterialTable> {
            let t = MaterialTable::load(&path)?;
            if !t.covers(BAND_START_NM, BAND_END_NM) {
                return Err(Error::data(
                    &path,
                    None,
                    format!("table does not cover {BAND_START_NM}-{BAND_END_NM} nm"),
                ));
            }
            Ok(t)
        };
        let mut tables = BTreeMap::new();
        for m in Material::ALL {
            let path = dir.join(format!("{}.csv", m.name()));
            if !path.exists() {
                return Err(Error::data(&path, None, format!("missing material {m}")));
            }
            tables.insert(m, load_covering(path)?);
        }
        let sub = dir.join("substrate.csv");
        let substrate = if sub.exists() { Some(load_covering(sub)?) } else { None };
        Ok(Self {
            tables,
            ambient: 1.0,
            substrate,
        })
    }

    pub fn index(&self, m: Material, lambda_nm: f64) -> Result<Complex64> {
        let table = self.tables.get(&m).ok_or_else(|| {
            Error::data(PathBuf::from(m.name()), None, format!("missing material {m}"))
        })?;
        table.index_at(lambda_nm).ok_or_else(|| {
            Error::arg(format!("wavelength {lambda_nm} nm outside the {m} table"))
        })
    }

    fn exit_index(&self, lambda_nm: f64) -> Result<Complex64> {
        match &self.substrate {
            None => Ok(Complex64::new(self.ambient, 0.0)),
            Some(t) => t
                .index_at(lambda_nm)
                .ok_or_else(|| Error::arg(format!("wavelength {lambda_nm} nm outside the substrate table"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: Material,
    pub thickness_nm: f64,
}

/// Layers listed from the illuminated side down.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.iter().any(|l| !(l.thickness_nm > 0.0 && l.thickness_nm.is_finite())) {
            return Err(Error::arg("layer thickness must be positive"));
        }
        Ok(Self { layers })
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    pub fn materials(&self) -> Vec<Material> {
        self.layers.iter().map(|l| l.material).collect()
    }
}

/// Two bits per layer, first bit most significant; layers share the
/// 1200 nm total equally.
pub fn decode_structure(bits: &[u8]) -> Result<LayerStack> {
    if bits.len() % 2 != 0 {
        return Err(Error::arg(format!("structure needs an even bit count, got {}", bits.len())));
    }
    let nl = bits.len() / 2;
    if !(MIN_LAYERS..=MAX_LAYERS).contains(&nl) {
        return Err(Error::arg(format!(
            "layer count {nl} outside {MIN_LAYERS}..={MAX_LAYERS}"
        )));
    }
    let t = TOTAL_THICKNESS_NM / nl as f64;
    LayerStack::new(
        bits.chunks(2)
            .map(|c| Layer {
                material: Material::from_code(c[0], c[1]),
                thickness_nm: t,
            })
            .collect(),
    )
}

pub fn encode_structure(stack: &LayerStack) -> BinaryVector {
    BinaryVector::new(stack.layers.iter().flat_map(|l| l.material.code()).collect())
        .expect("material codes are binary")
}

/// A homogeneous film with complex index `n + ik`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Film {
    pub index: Complex64,
    pub thickness_nm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Response {
    pub reflectance: f64,
    pub transmittance: f64,
    pub absorptance: f64,
}

/// Normal-incidence characteristic-matrix solution for `films` between a
/// lossless incidence medium and an exit medium.
pub fn film_response(films: &[Film], n_in: f64, n_out: Complex64, lambda_nm: f64) -> Response {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    // [B, C] = prod_j M_j [1, n_out]; evaluated from the exit side upward.
    let mut b = one;
    let mut c = n_out;
    for f in films.iter().rev() {
        let delta = 2.0 * std::f64::consts::PI * f.index * f.thickness_nm / lambda_nm;
        let (s, co) = (delta.sin(), delta.cos());
        let nb = co * b - i * s / f.index * c;
        let nc = -i * f.index * s * b + co * c;
        b = nb;
        c = nc;
    }
    let denom = n_in * b + c;
    let r = (n_in * b - c) / denom;
    let reflectance = r.norm_sqr();
    let transmittance = 4.0 * n_in * n_out.re / denom.norm_sqr();
    Response {
        reflectance,
        transmittance,
        absorptance: 1.0 - reflectance - transmittance,
    }
}

fn stack_films(stack: &LayerStack, db: &MaterialDb, lambda_nm: f64) -> Result<Vec<Film>> {
    stack
        .layers
        .iter()
        .map(|l| {
            Ok(Film {
                index: db.index(l.material, lambda_nm)?,
                thickness_nm: l.thickness_nm,
            })
        })
        .collect()
}

pub fn tmm_response(stack: &LayerStack, db: &MaterialDb, lambda_nm: f64) -> Result<Response> {
    if !(lambda_nm > 0.0 && lambda_nm.is_finite()) {
        return Err(Error::arg(format!("invalid wavelength {lambda_nm}")));
    }
    let films = stack_films(stack, db, lambda_nm)?;
    Ok(film_response(&films, db.ambient, db.exit_index(lambda_nm)?, lambda_nm))
}

pub fn tmm_transmittance(stack: &LayerStack, db: &MaterialDb, lambda_nm: f64) -> Result<f64> {
    Ok(tmm_response(stack, db, lambda_nm)?.transmittance)
}

pub fn transmission_spectrum(stack: &LayerStack, db: &MaterialDb, grid: &[f64]) -> Result<Spectrum> {
    let values = par::map_range(grid.len(), |i| tmm_transmittance(stack, db, grid[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(grid.to_vec(), values)
}

fn trapezoid(x: &[f64], y: impl Fn(usize) -> f64) -> f64 {
    x.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (y(i) + y(i + 1)))
        .sum()
}

/// `10 * int[(T_ideal S)^2 - (T_designed S)^2] / int S^2`, trapezoidal.
pub fn fom(designed: &Spectrum, ideal: &Spectrum, solar: &Spectrum) -> Result<f64> {
    if designed.wavelengths != solar.wavelengths || ideal.wavelengths != solar.wavelengths {
        return Err(Error::arg("figure of merit needs all spectra on one grid"));
    }
    if solar.len() < 2 {
        return Err(Error::arg("figure of merit needs at least two grid points"));
    }
    let w = &solar.wavelengths;
    let s = &solar.values;
    let norm = trapezoid(w, |i| s[i] * s[i]);
    if norm <= 0.0 {
        return Err(Error::arg("solar spectrum has zero power on the grid"));
    }
    let num = trapezoid(w, |i| {
        let ti = ideal.values[i] * s[i];
        let td = designed.values[i] * s[i];
        ti * ti - td * td
    });
    Ok(10.0 * num / norm)
}

/// Structure → stack → spectrum → figure of merit, on a fixed grid.
#[derive(Clone, Debug)]
pub struct OpticsEvaluator {
    pub db: MaterialDb,
    pub solar: Spectrum,
    pub ideal: Spectrum,
}

#[derive(Clone, Debug, Serialize)]
pub struct Evaluation {
    pub bits: BinaryVector,
    pub stack: LayerStack,
    pub fom: f64,
    pub spectrum: Spectrum,
}

impl OpticsEvaluator {
    /// Resamples `solar` onto `grid`.
    pub fn new(db: MaterialDb, solar: &Spectrum, grid: &[f64]) -> Result<Self> {
        Ok(Self {
            db,
            solar: solar.resample(grid)?,
            ideal: ideal_filter(grid)?,
        })
    }

    pub fn load(materials_dir: &Path, solar_path: &Path) -> Result<Self> {
        let db = MaterialDb::load(materials_dir)?;
        let solar = load_spectrum(solar_path)?;
        let grid = default_grid();
        Self::new(db, &solar, &grid).map_err(|e| match e {
            Error::Argument(msg) => Error::data(solar_path, None, msg),
            other => other,
        })
    }

    pub fn evaluate_detailed(&self, bits: &BinaryVector) -> Result<Evaluation> {
        let stack = decode_structure(bits)?;
        let spectrum = transmission_spectrum(&stack, &self.db, &self.solar.wavelengths)?;
        let fom = fom(&spectrum, &self.ideal, &self.solar)?;
        Ok(Evaluation {
            bits: bits.clone(),
            stack,
            fom,
            spectrum,
        })
    }

    pub fn fom_of(&self, bits: &BinaryVector) -> Result<f64> {
        Ok(self.evaluate_detailed(bits)?.fom)
    }
}
