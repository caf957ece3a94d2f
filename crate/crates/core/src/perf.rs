//! Throughput and energy accounting.
//!
//! One OP is a 1-bit multiply or a 1-bit add, so a row inner product over `N`
//! bits is `2N - 1` OPs and the whole array does `M (2N - 1)` OPs per cycle.
//! This count is used for every mode, including multi-bit MVPs, so OP/s is
//! only comparable between designs counting the same way.
//!
//! Clock and power figures are calibration constants read from a parameter
//! file. Lookups are exact: an array size missing from the file is an error,
//! never interpolated.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::controller::ModeSpec;
use crate::error::{Error, Result};

const DEFAULTS: &str = include_str!("../data/perf_defaults.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayParams {
    pub words: usize,
    pub bits: usize,
    pub banks: usize,
    pub subrows: usize,
    pub clock_ghz: f64,
    pub power_mw: f64,
    #[serde(default)]
    pub mode_power_mw: BTreeMap<String, f64>,
}

impl ArrayParams {
    pub fn clock_hz(&self) -> f64 {
        self.clock_ghz * 1e9
    }

    pub fn power_w(&self) -> f64 {
        self.power_mw * 1e-3
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.words, self.bits, self.banks, self.subrows)
    }

    /// Power of the mode `spec` runs in, in watts.
    pub fn mode_power_w(&self, spec: &ModeSpec) -> Result<f64> {
        let key = power_key(spec);
        self.mode_power_mw
            .get(&key)
            .map(|mw| mw * 1e-3)
            .ok_or_else(|| {
                Error::Perf(format!(
                    "no power figure for mode `{key}` on {}x{}",
                    self.words, self.bits
                ))
            })
    }

    fn validate(&self) -> Result<()> {
        self.geometry()?;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.clock_ghz) || !positive(self.power_mw) {
            return Err(Error::Perf(format!(
                "{}x{}: clock and power must be positive",
                self.words, self.bits
            )));
        }
        if let Some((k, _)) = self.mode_power_mw.iter().find(|(_, &v)| !positive(v)) {
            return Err(Error::Perf(format!("mode `{k}`: power must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfParams {
    #[serde(rename = "array")]
    pub arrays: Vec<ArrayParams>,
}

impl PerfParams {
    /// The four characterized array sizes.
    pub fn defaults() -> Self {
        Self::from_toml_str(DEFAULTS).expect("bundled parameters parse")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let params: PerfParams = toml::from_str(text).map_err(|e| Error::Parse {
            line: toml_line(text, e.span()),
            message: e.message().to_string(),
        })?;
        for a in &params.arrays {
            a.validate()?;
        }
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Perf(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Parameters for exactly this array size.
    pub fn lookup(&self, geometry: &ArrayGeometry) -> Result<&ArrayParams> {
        self.arrays
            .iter()
            .find(|a| a.words == geometry.words && a.bits == geometry.bits)
            .ok_or_else(|| {
                Error::Perf(format!(
                    "no parameters for a {}x{} array",
                    geometry.words, geometry.bits
                ))
            })
    }
}

fn toml_line(text: &str, span: Option<std::ops::Range<usize>>) -> usize {
    span.map_or(0, |s| {
        text[..s.start.min(text.len())].lines().count().max(1)
    })
}

/// Key into `mode_power_mw` for a mode.
pub fn power_key(spec: &ModeSpec) -> String {
    match spec {
        ModeSpec::HammingSimilarity | ModeSpec::CamComplete | ModeSpec::CamSimilarity { .. } => {
            "hamming".into()
        }
        ModeSpec::Mvp { matrix, vector } => format!("mvp-{matrix}-{vector}"),
        ModeSpec::Gf2Mvp => "gf2".into(),
        ModeSpec::Pla { .. } => "pla".into(),
    }
}

pub fn ops_per_cycle(geometry: &ArrayGeometry) -> u64 {
    geometry.words as u64 * (2 * geometry.bits as u64 - 1)
}

fn check_clock(clock_hz: f64) -> Result<()> {
    if clock_hz.is_finite() && clock_hz > 0.0 {
        Ok(())
    } else {
        Err(Error::Perf(format!(
            "clock must be positive, got {clock_hz} Hz"
        )))
    }
}

/// OP/s.
pub fn peak_throughput(geometry: &ArrayGeometry, clock_hz: f64) -> Result<f64> {
    check_clock(clock_hz)?;
    Ok(ops_per_cycle(geometry) as f64 * clock_hz)
}

/// Steady-state cycles per result. Consecutive inputs overlap in the
/// pipeline, so the two-cycle latency does not add to this.
pub fn mvp_cycles(spec: &ModeSpec) -> u64 {
    match spec {
        ModeSpec::Mvp { matrix, vector } => u64::from(matrix.width()) * u64::from(vector.width()),
        _ => 1,
    }
}

/// Results (MVPs) per second.
pub fn mode_throughput(spec: &ModeSpec, clock_hz: f64) -> Result<f64> {
    check_clock(clock_hz)?;
    Ok(clock_hz / mvp_cycles(spec) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Energy spent over `cycles` cycles in this mode.
    pub joules: f64,
    pub joules_per_mvp: f64,
    /// Total array power over peak throughput.
    pub joules_per_op: f64,
}

pub fn energy_report(spec: &ModeSpec, cycles: u64, params: &ArrayParams) -> Result<EnergyReport> {
    let power = params.mode_power_w(spec)?;
    let clock = params.clock_hz();
    let geometry = params.geometry()?;
    Ok(EnergyReport {
        joules: power * cycles as f64 / clock,
        joules_per_mvp: power / mode_throughput(spec, clock)?,
        joules_per_op: params.power_w() / peak_throughput(&geometry, clock)?,
    })
}
