//! Whole-workload execution: load, run every input vector, decode, and attach
//! performance estimates. Shared by the service and the command line.

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::controller::{Decoded, ModeSpec, PlaProgram, Session, StoredMatrixLayout};
use crate::error::{Error, Result};
use crate::formats::{Level, NumberFormat};
use crate::machine::SimOptions;
use crate::perf::{self, PerfParams};
use crate::textfmt::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WorkloadMode {
    Hamming,
    /// Complete-match CAM when `thresholds` is absent.
    Cam {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thresholds: Option<Vec<i64>>,
    },
    Mvp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias: Option<Vec<i64>>,
    },
    Gf2,
    Pla {
        program: PlaProgram,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub geometry: ArrayGeometry,
    pub mode: WorkloadMode,
    /// Stored matrix; absent in logic-program mode.
    #[serde(default)]
    pub matrix: Option<IntMatrix>,
    /// Input vectors, one per result. 1-bit modes use `uint1` entries.
    pub vectors: IntMatrix,
    /// Include raw row outputs and bank counts.
    #[serde(default)]
    pub verbose: bool,
    /// Performance parameters; the bundled defaults when absent.
    #[serde(default)]
    pub perf: Option<PerfParams>,
    #[serde(default)]
    pub options: Option<SimOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorResult {
    pub index: usize,
    pub decoded: Decoded,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfSection {
    pub clock_ghz: f64,
    pub ops_per_cycle: u64,
    pub peak_tops: f64,
    pub energy_fj_per_op: f64,
    pub cycles_per_mvp: u64,
    pub throughput_gmvps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_power_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_pj_per_mvp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_energy_nj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub geometry: ArrayGeometry,
    pub mode: String,
    pub matrix_format: Option<NumberFormat>,
    pub vector_format: NumberFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<StoredMatrixLayout>,
    pub vectors: usize,
    pub cycles_per_vector: u64,
    pub latency: u64,
    pub setup_cycles: u64,
    pub total_cycles: u64,
    pub results: Vec<VectorResult>,
    pub perf: Option<PerfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perf_note: Option<String>,
}

/// Rounds to a fixed number of decimals so reports are stable text.
fn round(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

/// Rows of a `uint1` matrix as array words.
pub fn to_words(v: &IntMatrix) -> Result<Vec<Vec<Level>>> {
    if v.format != NumberFormat::uint(1)? {
        return Err(Error::Mode(format!(
            "1-bit modes take uint1 vectors, got {}",
            v.format
        )));
    }
    Ok(v.rows
        .iter()
        .map(|r| r.iter().map(|&b| Level::from_bool(b == 1)).collect())
        .collect())
}

/// Rows of a `uint1` matrix as variable assignments.
pub fn to_bools(v: &IntMatrix) -> Result<Vec<Vec<bool>>> {
    Ok(to_words(v)?
        .into_iter()
        .map(|r| r.into_iter().map(Level::is_hi).collect())
        .collect())
}

/// Runs a complete workload.
pub fn execute(req: &RunRequest) -> Result<RunReport> {
    req.geometry.validate()?;
    let mut session = Session::new(req.geometry, req.options.unwrap_or_default())?;
    let need_matrix = || req.matrix.as_ref().ok_or(Error::NoMatrix);

    let (spec, results) = match &req.mode {
        WorkloadMode::Mvp { bias } => {
            let matrix = need_matrix()?;
            session.load_matrix(&matrix.rows, matrix.format)?;
            if let Some(b) = bias {
                session.set_bias(b)?;
            }
            session.prepare_reg_n(req.vectors.format)?;
            let spec = ModeSpec::Mvp {
                matrix: matrix.format,
                vector: req.vectors.format,
            };
            (
                spec,
                session.run_mvp_batch(req.vectors.format, &req.vectors.rows)?,
            )
        }
        WorkloadMode::Hamming | WorkloadMode::Cam { .. } | WorkloadMode::Gf2 => {
            let matrix = need_matrix()?;
            if matrix.format != NumberFormat::uint(1)? {
                return Err(Error::Mode(format!(
                    "1-bit modes store uint1 matrices, got {}",
                    matrix.format
                )));
            }
            session.load_matrix(&matrix.rows, matrix.format)?;
            let xs = to_words(&req.vectors)?;
            match &req.mode {
                WorkloadMode::Hamming => (ModeSpec::HammingSimilarity, session.run_hamming(&xs)?),
                WorkloadMode::Cam { thresholds: None } => {
                    (ModeSpec::CamComplete, session.run_cam_complete(&xs)?)
                }
                WorkloadMode::Cam {
                    thresholds: Some(t),
                } => (
                    ModeSpec::CamSimilarity {
                        thresholds: t.clone(),
                    },
                    session.run_cam(&xs, t)?,
                ),
                _ => (ModeSpec::Gf2Mvp, session.run_gf2(&xs)?),
            }
        }
        WorkloadMode::Pla { program } => {
            session.program_pla(program)?;
            let spec = ModeSpec::Pla {
                program: program.clone(),
            };
            (spec, session.run_pla(&to_bools(&req.vectors)?)?)
        }
    };

    let cycles_per_vector = perf::mvp_cycles(&spec);
    let total_cycles: u64 = results.iter().map(|r| r.cycles).sum();
    let latency = results.first().map_or(cycles_per_vector + 1, |r| r.latency);
    let params = req.perf.clone().unwrap_or_else(PerfParams::defaults);
    let (perf, perf_note) = match perf_section(&spec, &req.geometry, total_cycles, &params) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };

    Ok(RunReport {
        geometry: req.geometry,
        mode: spec.name().to_string(),
        matrix_format: session.matrix_format(),
        vector_format: req.vectors.format,
        layout: session.layout().filter(|l| l.bits > 1),
        vectors: results.len(),
        cycles_per_vector,
        latency,
        setup_cycles: session.setup_cycles(),
        total_cycles,
        results: results
            .into_iter()
            .enumerate()
            .map(|(index, r)| VectorResult {
                index,
                decoded: r.decoded,
                y: req.verbose.then_some(r.y),
                p: req.verbose.then_some(r.p),
            })
            .collect(),
        perf,
        perf_note,
    })
}

/// Performance figures for `spec` on `geometry`.
pub fn perf_section(
    spec: &ModeSpec,
    geometry: &ArrayGeometry,
    run_cycles: u64,
    params: &PerfParams,
) -> Result<PerfSection> {
    let array = params.lookup(geometry)?;
    let clock = array.clock_hz();
    let peak = perf::peak_throughput(geometry, clock)?;
    let mut section = PerfSection {
        clock_ghz: array.clock_ghz,
        ops_per_cycle: perf::ops_per_cycle(geometry),
        peak_tops: round(peak * 1e-12, 2),
        energy_fj_per_op: round(array.power_w() / peak * 1e15, 2),
        cycles_per_mvp: perf::mvp_cycles(spec),
        throughput_gmvps: round(perf::mode_throughput(spec, clock)? * 1e-9, 4),
        mode_power_mw: None,
        energy_pj_per_mvp: None,
        run_energy_nj: None,
        note: None,
    };
    match perf::energy_report(spec, run_cycles, array) {
        Ok(e) => {
            section.mode_power_mw = Some(round(array.mode_power_w(spec)? * 1e3, 2));
            section.energy_pj_per_mvp = Some(round(e.joules_per_mvp * 1e12, 1));
            section.run_energy_nj = Some(round(e.joules * 1e9, 4));
        }
        Err(e) => section.note = Some(e.to_string()),
    }
    Ok(section)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfRequest {
    pub geometry: ArrayGeometry,
    /// Modes to report; the characterized set when absent.
    #[serde(default)]
    pub modes: Option<Vec<ModeSpec>>,
    #[serde(default)]
    pub params: Option<PerfParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePerf {
    pub mode: String,
    pub cycles_per_mvp: u64,
    pub throughput_gmvps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_pj_per_mvp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub geometry: ArrayGeometry,
    pub clock_ghz: f64,
    pub power_mw: f64,
    pub ops_per_cycle: u64,
    pub peak_tops: f64,
    pub energy_fj_per_op: f64,
    pub modes: Vec<ModePerf>,
}

/// Hamming similarity, 1-bit bipolar MVP, 4-bit unsigned MVP, GF(2), logic.
pub fn characterized_modes() -> Vec<ModeSpec> {
    let f = |s: &str| s.parse::<NumberFormat>().expect("valid format");
    vec![
        ModeSpec::HammingSimilarity,
        ModeSpec::Mvp {
            matrix: f("oddint1"),
            vector: f("oddint1"),
        },
        ModeSpec::Mvp {
            matrix: f("uint4"),
            vector: f("uint4"),
        },
        ModeSpec::Gf2Mvp,
        ModeSpec::Pla {
            program: PlaProgram {
                variables: 0,
                banks: Vec::new(),
            },
        },
    ]
}

/// Throughput and energy figures for an array size.
pub fn perf_report(req: &PerfRequest) -> Result<PerfReport> {
    req.geometry.validate()?;
    let params = req.params.clone().unwrap_or_else(PerfParams::defaults);
    let array = params.lookup(&req.geometry)?;
    let clock = array.clock_hz();
    let peak = perf::peak_throughput(&req.geometry, clock)?;
    let modes = req.modes.clone().unwrap_or_else(characterized_modes);
    Ok(PerfReport {
        geometry: req.geometry,
        clock_ghz: array.clock_ghz,
        power_mw: array.power_mw,
        ops_per_cycle: perf::ops_per_cycle(&req.geometry),
        peak_tops: round(peak * 1e-12, 2),
        energy_fj_per_op: round(array.power_w() / peak * 1e15, 2),
        modes: modes
            .iter()
            .map(|spec| {
                let power = array.mode_power_w(spec).ok();
                let throughput = perf::mode_throughput(spec, clock)?;
                Ok(ModePerf {
                    mode: perf::power_key(spec),
                    cycles_per_mvp: perf::mvp_cycles(spec),
                    throughput_gmvps: round(throughput * 1e-9, 4),
                    power_mw: power.map(|w| round(w * 1e3, 2)),
                    energy_pj_per_mvp: power.map(|w| round(w / throughput * 1e12, 1)),
                })
            })
            .collect::<Result<Vec<_>>>()?,
    })
}
