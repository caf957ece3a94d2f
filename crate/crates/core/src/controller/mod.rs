//! Mode planning and execution on top of the clocked array model.
//!
//! A [`Session`] owns one array with its loaded contents and runs every
//! operating mode: Hamming similarity, complete and similarity-match CAM,
//! multi-bit MVPs in all format combinations, GF(2) MVPs, and two-level logic.

mod layout;
mod pla;
mod schedule;

pub use layout::{encode_matrix, StoredMatrixLayout};
pub use pla::{
    bank_output, program_pla, term_threshold, Gate, Literal, PlaBank, PlaProgram, PlaTerm,
};
pub use schedule::{
    plan_schedule, reg_n_capture, ModeSpec, PlaneProduct, RegNProbe, Schedule, ScheduleStep,
};

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::formats::{Level, NumberFormat};
use crate::machine::{Ppac, SimOptions, Stimulus, TraceRecord, LATENCY};

/// Mode-level interpretation of the row outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "kebab-case")]
pub enum Decoded {
    Similarities(Vec<i64>),
    Matches(Vec<bool>),
    Integers(Vec<i64>),
    Gf2(Vec<u8>),
    Boolean(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeResult {
    /// Row outputs `y_m` after the last cycle.
    pub y: Vec<i64>,
    /// Bank counts `p_b` after the last cycle.
    pub p: Vec<u32>,
    /// Array cycles occupied by this input.
    pub cycles: u64,
    /// Cycles from the first stimulus until the result is visible.
    pub latency: u64,
    pub decoded: Decoded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Contents {
    Empty,
    Matrix {
        format: NumberFormat,
        layout: StoredMatrixLayout,
    },
    Pla,
}

/// One simulated array with its configuration state. Single-threaded; clone
/// a loaded session to fan out work.
#[derive(Debug, Clone)]
pub struct Session {
    machine: Ppac,
    contents: Contents,
    program: Option<PlaProgram>,
    reg_n: Option<RegNProbe>,
    bias: Vec<i64>,
    setup_cycles: u64,
}

impl Session {
    pub fn new(geometry: ArrayGeometry, options: SimOptions) -> Result<Self> {
        Ok(Session {
            machine: Ppac::new(geometry, options)?,
            contents: Contents::Empty,
            program: None,
            reg_n: None,
            bias: vec![0; geometry.words],
            setup_cycles: 0,
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        self.machine.geometry()
    }

    pub fn machine(&self) -> &Ppac {
        &self.machine
    }

    /// Cycles spent on `reg_N` capture passes.
    pub fn setup_cycles(&self) -> u64 {
        self.setup_cycles
    }

    pub fn layout(&self) -> Option<StoredMatrixLayout> {
        match self.contents {
            Contents::Matrix { layout, .. } => Some(layout),
            _ => None,
        }
    }

    pub fn matrix_format(&self) -> Option<NumberFormat> {
        match self.contents {
            Contents::Matrix { format, .. } => Some(format),
            _ => None,
        }
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.machine.take_trace()
    }

    /// Stores an `M x J` matrix with `J * K = N`.
    pub fn load_matrix(
        &mut self,
        matrix: &[Vec<i64>],
        format: NumberFormat,
    ) -> Result<StoredMatrixLayout> {
        let g = *self.geometry();
        if matrix.len() != g.words {
            return Err(Error::LengthMismatch {
                expected: g.words,
                actual: matrix.len(),
            });
        }
        let (rows, layout) = encode_matrix(matrix, format, g.bits)?;
        for (m, row) in rows.iter().enumerate() {
            self.machine.write_word(m, row)?;
        }
        self.machine.set_reg_n_slots(layout.bits);
        self.bias = vec![0; g.words];
        self.contents = Contents::Matrix { format, layout };
        self.program = None;
        self.reg_n = None;
        Ok(layout)
    }

    /// Stores raw words, as a 1-bit `uint` matrix.
    pub fn load_words(&mut self, words: &[Vec<Level>]) -> Result<StoredMatrixLayout> {
        let matrix: Vec<Vec<i64>> = words
            .iter()
            .map(|w| w.iter().map(|l| i64::from(l.is_hi())).collect())
            .collect();
        self.load_matrix(&matrix, NumberFormat::uint(1)?)
    }

    /// Thresholds used as a per-row bias in MVP mode (`y = A x - bias`).
    pub fn set_bias(&mut self, bias: &[i64]) -> Result<()> {
        if bias.len() != self.geometry().words {
            return Err(Error::LengthMismatch {
                expected: self.geometry().words,
                actual: bias.len(),
            });
        }
        self.bias = bias.to_vec();
        Ok(())
    }

    /// Captures the per-plane similarity against all-ones or all-zeros needed
    /// by mixed-format products. Returns the number of capture cycles, zero
    /// when `vector` needs none. Only has to be repeated after a new matrix.
    pub fn prepare_reg_n(&mut self, vector: NumberFormat) -> Result<u64> {
        let (format, layout) = match self.contents {
            Contents::Matrix { format, layout } => (format, layout),
            _ => return Err(Error::NoMatrix),
        };
        let Some(probe) = PlaneProduct::for_formats(format, vector).reg_n_probe() else {
            return Ok(0);
        };
        if self.reg_n == Some(probe) {
            return Ok(0);
        }
        let capture = reg_n_capture(&layout, probe);
        self.machine
            .set_thresholds(&vec![0; self.geometry().words])?;
        self.machine.run(&capture)?;
        self.reg_n = Some(probe);
        let cycles = capture.len() as u64;
        self.setup_cycles += cycles;
        Ok(cycles)
    }

    /// Current `reg_N` slots of `row`.
    pub fn reg_n(&self, row: usize) -> &[i64] {
        &self.machine.alu(row).reg_n
    }

    fn mvp_schedule(&self, vector: NumberFormat) -> Result<Schedule> {
        let (format, layout) = match self.contents {
            Contents::Matrix { format, layout } => (format, layout),
            _ => return Err(Error::NoMatrix),
        };
        let spec = ModeSpec::Mvp {
            matrix: format,
            vector,
        };
        if let Some(probe) = PlaneProduct::for_formats(format, vector).reg_n_probe() {
            if self.reg_n != Some(probe) {
                return Err(Error::RegNotPrepared);
            }
        }
        plan_schedule(&spec, self.geometry(), Some(&layout))
    }

    pub fn run_mvp(&mut self, vector: NumberFormat, x: &[i64]) -> Result<ModeResult> {
        Ok(self
            .run_mvp_batch(vector, std::slice::from_ref(&x.to_vec()))?
            .remove(0))
    }

    /// Streams several vectors back to back through the pipeline.
    pub fn run_mvp_batch(
        &mut self,
        vector: NumberFormat,
        xs: &[Vec<i64>],
    ) -> Result<Vec<ModeResult>> {
        let schedule = self.mvp_schedule(vector)?;
        let inputs = xs
            .iter()
            .map(|x| schedule.bind_vector(x))
            .collect::<Result<Vec<_>>>()?;
        let bias = self.bias.clone();
        self.stream(&inputs, &bias, |y, _| Decoded::Integers(y.to_vec()))
    }

    fn bit_mode(
        &mut self,
        spec: &ModeSpec,
        xs: &[Vec<Level>],
        thresholds: &[i64],
        decode: impl Fn(&[i64], &[u32]) -> Decoded,
    ) -> Result<Vec<ModeResult>> {
        let schedule = plan_schedule(spec, self.geometry(), None)?;
        let inputs = xs
            .iter()
            .map(|x| schedule.bind_bits(x))
            .collect::<Result<Vec<_>>>()?;
        self.stream(&inputs, thresholds, decode)
    }

    fn require_words(&self) -> Result<()> {
        match self.contents {
            Contents::Matrix { layout, .. } if layout.bits == 1 => Ok(()),
            Contents::Matrix { .. } => Err(Error::Mode("mode needs a 1-bit stored matrix".into())),
            _ => Err(Error::NoMatrix),
        }
    }

    /// `hsim(a_m, x)` for every row.
    pub fn run_hamming(&mut self, xs: &[Vec<Level>]) -> Result<Vec<ModeResult>> {
        self.require_words()?;
        let zeros = vec![0; self.geometry().words];
        self.bit_mode(&ModeSpec::HammingSimilarity, xs, &zeros, |y, _| {
            Decoded::Similarities(y.to_vec())
        })
    }

    /// Similarity-match CAM: row `m` matches when `hsim(a_m, x) >= delta_m`.
    /// `delta_m = N` for every row gives a complete-match CAM.
    pub fn run_cam(&mut self, xs: &[Vec<Level>], thresholds: &[i64]) -> Result<Vec<ModeResult>> {
        self.require_words()?;
        let n = self.geometry().bits as i64;
        for (row, &t) in thresholds.iter().enumerate() {
            if !(0..=n).contains(&t) {
                return Err(Error::Threshold {
                    row,
                    threshold: t,
                    max: n,
                });
            }
        }
        let spec = ModeSpec::CamSimilarity {
            thresholds: thresholds.to_vec(),
        };
        self.bit_mode(&spec, xs, thresholds, |y, _| {
            Decoded::Matches(y.iter().map(|&v| v >= 0).collect())
        })
    }

    pub fn run_cam_complete(&mut self, xs: &[Vec<Level>]) -> Result<Vec<ModeResult>> {
        let n = self.geometry().bits as i64;
        self.run_cam(xs, &vec![n; self.geometry().words])
    }

    /// GF(2) products, read from the LSB of each row output.
    pub fn run_gf2(&mut self, xs: &[Vec<Level>]) -> Result<Vec<ModeResult>> {
        self.require_words()?;
        let zeros = vec![0; self.geometry().words];
        self.bit_mode(&ModeSpec::Gf2Mvp, xs, &zeros, |y, _| {
            Decoded::Gf2(y.iter().map(|&v| (v & 1) as u8).collect())
        })
    }

    /// Stores a two-level logic program; unprogrammed rows never assert.
    pub fn program_pla(&mut self, program: &PlaProgram) -> Result<()> {
        let (rows, thresholds) = program_pla(program, self.geometry())?;
        for (m, row) in rows.iter().enumerate() {
            self.machine.write_word(m, row)?;
        }
        self.machine.set_reg_n_slots(1);
        self.bias = thresholds;
        self.contents = Contents::Pla;
        self.program = Some(program.clone());
        self.reg_n = None;
        Ok(())
    }

    /// Evaluates the programmed functions for each variable assignment.
    pub fn run_pla(&mut self, assignments: &[Vec<bool>]) -> Result<Vec<ModeResult>> {
        let program = self.program.clone().ok_or(Error::NoMatrix)?;
        let n = self.geometry().bits;
        let xs = assignments
            .iter()
            .map(|a| program.input_columns(a, n))
            .collect::<Result<Vec<_>>>()?;
        self.run_pla_columns(&xs)
    }

    /// Like [`Session::run_pla`] with the literal columns driven directly.
    /// Every variable column and its complement must disagree.
    pub fn run_pla_columns(&mut self, xs: &[Vec<Level>]) -> Result<Vec<ModeResult>> {
        let program = self.program.clone().ok_or(Error::NoMatrix)?;
        for x in xs {
            program.assignment_from_columns(x)?;
        }
        let banks = self.geometry().banks;
        let thresholds = self.bias.clone();
        let spec = ModeSpec::Pla {
            program: program.clone(),
        };
        self.bit_mode(&spec, xs, &thresholds, |_, p| {
            Decoded::Boolean(
                (0..banks)
                    .map(|b| match program.banks.get(b) {
                        Some(bank) => bank_output(bank.output, p[b], bank.terms.len()),
                        None => false,
                    })
                    .collect(),
            )
        })
    }

    fn stream(
        &mut self,
        inputs: &[Vec<Stimulus>],
        thresholds: &[i64],
        decode: impl Fn(&[i64], &[u32]) -> Decoded,
    ) -> Result<Vec<ModeResult>> {
        self.machine.set_thresholds(thresholds)?;
        let flat: Vec<Stimulus> = inputs.iter().flatten().cloned().collect();
        let outputs = self.machine.run(&flat)?;
        let mut results = Vec::with_capacity(inputs.len());
        let mut offset = 0;
        for input in inputs {
            let first = &outputs[offset];
            let last = &outputs[offset + input.len() - 1];
            debug_assert_eq!(last.ready_at - last.issued_at, LATENCY);
            results.push(ModeResult {
                y: last.y.clone(),
                p: last.p.clone(),
                cycles: input.len() as u64,
                latency: last.ready_at - first.issued_at,
                decoded: decode(&last.y, &last.p),
            });
            offset += input.len();
        }
        Ok(results)
    }
}
