//! Workload configuration files.
//!
//! ```toml
//! matrix = "weights.txt"      # paths are relative to this file
//! vectors = "inputs.txt"
//! perf = "perf.toml"          # optional, bundled defaults otherwise
//! seed = 7                    # used by `difftest --config`
//!
//! [geometry]
//! words = 16
//! bits = 64
//! banks = 1
//! subrows = 1
//!
//! [mode]
//! kind = "mvp"                # hamming | cam | mvp | gf2 | pla
//! bias = [0, 0, ...]          # mvp only
//! # thresholds = [...]        # cam only; complete match when absent
//! # program = "logic.pla"     # pla only
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ppac_core::perf::PerfParams;
use ppac_core::textfmt::{self, IntMatrix};
use ppac_core::workload::{RunRequest, WorkloadMode};
use ppac_core::ArrayGeometry;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeConfig {
    Hamming,
    Cam {
        #[serde(default)]
        thresholds: Option<Vec<i64>>,
    },
    Mvp {
        #[serde(default)]
        bias: Option<Vec<i64>>,
    },
    Gf2,
    Pla {
        program: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadConfig {
    pub geometry: ArrayGeometry,
    pub mode: ModeConfig,
    #[serde(default)]
    pub matrix: Option<PathBuf>,
    pub vectors: PathBuf,
    #[serde(default)]
    pub perf: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip)]
    dir: PathBuf,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new("E_IO", format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: ppac_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::new(e.code(), format!("{}: {e}", path.display())))
}

impl WorkloadConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut config: WorkloadConfig = toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| {
                text[..s.start.min(text.len())].lines().count().max(1)
            });
            CliError::new(
                "E_PARSE",
                format!("{}: line {line}: {}", path.display(), e.message()),
            )
        })?;
        in_file(path, config.geometry.validate())?;
        config.dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(config)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.dir.join(p)
    }

    fn matrix_file(&self, p: &Path) -> Result<IntMatrix, CliError> {
        let path = self.resolve(p);
        in_file(&path, textfmt::parse_matrix(&read(&path)?))
    }

    /// Reads every referenced file and builds the service request.
    pub fn to_request(&self, verbose: bool) -> Result<RunRequest, CliError> {
        let mode = match &self.mode {
            ModeConfig::Hamming => WorkloadMode::Hamming,
            ModeConfig::Cam { thresholds } => WorkloadMode::Cam {
                thresholds: thresholds.clone(),
            },
            ModeConfig::Mvp { bias } => WorkloadMode::Mvp { bias: bias.clone() },
            ModeConfig::Gf2 => WorkloadMode::Gf2,
            ModeConfig::Pla { program } => {
                let path = self.resolve(program);
                WorkloadMode::Pla {
                    program: in_file(&path, textfmt::parse_pla(&read(&path)?))?,
                }
            }
        };
        let matrix = self
            .matrix
            .as_deref()
            .map(|p| self.matrix_file(p))
            .transpose()?;
        let vectors_path = self.resolve(&self.vectors);
        let vectors = in_file(&vectors_path, textfmt::parse_vectors(&read(&vectors_path)?))?;
        let perf = match &self.perf {
            Some(p) => {
                let path = self.resolve(p);
                Some(in_file(&path, PerfParams::from_toml_str(&read(&path)?))?)
            }
            None => None,
        };
        Ok(RunRequest {
            geometry: self.geometry,
            mode,
            matrix,
            vectors,
            verbose,
            perf,
            options: None,
        })
    }
}
