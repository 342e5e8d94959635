//! Optional JSON run configuration. Command-line flags take precedence over
//! values read here.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dqopt::al::AlSolverConfig;
use dqopt::fm::FmHyper;
use dqopt::oracle::SaConfig;
use dqopt::qaoa::QaoaConfig;
use dqopt::Error;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub solver: SolverSection,
    pub sa: SaConfig,
    pub bench: BenchSection,
    pub fm: FmHyper,
    pub al: AlSection,
    pub optics: OpticsSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub k: Option<usize>,
    pub iterations: Option<usize>,
    pub p: Option<usize>,
    pub dc_sizes: Vec<usize>,
    pub qaoa: QaoaConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub sizes: Vec<usize>,
    pub modes: Vec<String>,
    pub seeds_per_size: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlSection {
    pub n_bits: Option<usize>,
    pub init_count: Option<usize>,
    pub cycles_cap: Option<usize>,
    pub solver: Option<AlSolverConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsSection {
    pub materials: Option<PathBuf>,
    pub solar: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Data {
            path: path.to_path_buf(),
            line: Some(e.line()),
            msg: e.to_string(),
        })
    }
}
