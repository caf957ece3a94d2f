//! Clocked model of the whole array: bit-cells, one pipeline stage after the
//! row population count, the row ALUs, and the bank adders.
//!
//! A stimulus applied during cycle `t` is counted during `t`, latched at the
//! end of `t`, processed by the row ALUs during `t + 1` and visible at the
//! output from cycle `t + 2` on. A new stimulus may be applied every cycle.

use serde::{Deserialize, Serialize};

use crate::alu::{bank_counts, AccumulatorMode, ControlWord, RowAluState};
use crate::array::{ArrayGeometry, BitCellArray, ColumnOpSelect, PackedBits};
use crate::error::{Error, Result};
use crate::formats::{levels_to_string, Level};

/// Pipeline depth from stimulus to visible output.
pub const LATENCY: u64 = 2;

/// Deliberate defects used to check that the differential harness notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Every row subtracts `delta + 1` instead of `delta`.
    ThresholdOffByOne,
    /// `vAccX-1` and `mAccX-1` are ignored.
    DropMsbNegation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOptions {
    pub strict: bool,
    pub accumulator: AccumulatorMode,
    pub fault: Option<Fault>,
    pub trace: bool,
}

/// Inputs driven onto the array for one cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus {
    pub x: Vec<Level>,
    pub select: ColumnOpSelect,
    pub ctrl: ControlWord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleOutput {
    pub issued_at: u64,
    pub ready_at: u64,
    pub y: Vec<i64>,
    pub p: Vec<u32>,
}

/// One processed stimulus, for debugging and counterexample reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub cycle: u64,
    pub x: String,
    pub select: String,
    pub ctrl: String,
    pub r: Vec<u32>,
    pub y: Vec<i64>,
}

#[derive(Debug, Clone)]
struct Staged {
    issued_at: u64,
    ctrl: ControlWord,
    x: Option<String>,
    select: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Ppac {
    array: BitCellArray,
    alus: Vec<RowAluState>,
    thresholds: Vec<i64>,
    staged: Option<Staged>,
    cycle: u64,
    options: SimOptions,
    trace: Vec<TraceRecord>,
}

impl Ppac {
    pub fn new(geometry: ArrayGeometry, options: SimOptions) -> Result<Self> {
        let array = BitCellArray::new(geometry)?.with_strict(options.strict);
        Ok(Ppac {
            array,
            alus: vec![RowAluState::new(1); geometry.words],
            thresholds: vec![0; geometry.words],
            staged: None,
            cycle: 0,
            options,
            trace: Vec::new(),
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        self.array.geometry()
    }

    pub fn options(&self) -> &SimOptions {
        &self.options
    }

    pub fn array(&self) -> &BitCellArray {
        &self.array
    }

    pub fn write_word(&mut self, row: usize, data: &[Level]) -> Result<()> {
        self.array.write_word(row, data)
    }

    pub fn alu(&self, row: usize) -> &RowAluState {
        &self.alus[row]
    }

    /// Resizes every row's `reg_N` file, clearing it.
    pub fn set_reg_n_slots(&mut self, slots: usize) {
        for alu in &mut self.alus {
            alu.reg_n = vec![0; slots.max(1)];
        }
    }

    pub fn set_thresholds(&mut self, thresholds: &[i64]) -> Result<()> {
        if thresholds.len() != self.geometry().words {
            return Err(Error::LengthMismatch {
                expected: self.geometry().words,
                actual: thresholds.len(),
            });
        }
        self.thresholds.copy_from_slice(thresholds);
        Ok(())
    }

    pub fn thresholds(&self) -> &[i64] {
        &self.thresholds
    }

    /// Current cycle number (cycles elapsed since construction).
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn is_idle(&self) -> bool {
        self.staged.is_none()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        std::mem::take(&mut self.trace)
    }

    /// Advances one clock cycle, optionally applying a new stimulus.
    /// Returns the output of the stimulus applied one cycle earlier, if any.
    pub fn clock(&mut self, stimulus: Option<&Stimulus>) -> Result<Option<CycleOutput>> {
        let geometry = *self.geometry();
        if let Some(s) = stimulus {
            if s.x.len() != geometry.bits {
                return Err(Error::LengthMismatch {
                    expected: geometry.bits,
                    actual: s.x.len(),
                });
            }
            s.ctrl.validate()?;
        }

        // Second stage: row ALUs on the latched counts.
        let output = match self.staged.take() {
            Some(staged) => Some(self.alu_stage(staged)?),
            None => None,
        };

        // First stage: bit-cells and row population counts.
        if let Some(s) = stimulus {
            let counts = self
                .array
                .popcounts_packed(&PackedBits::from_levels(&s.x), &s.select)?;
            for (alu, r) in self.alus.iter_mut().zip(counts.rows) {
                alu.r_pipe = r;
            }
            let trace = self.options.trace;
            self.staged = Some(Staged {
                issued_at: self.cycle,
                ctrl: s.ctrl,
                x: trace.then(|| levels_to_string(&s.x)),
                select: trace.then(|| s.select.to_trace_string()),
            });
        }

        self.cycle += 1;
        Ok(output)
    }

    fn alu_stage(&mut self, staged: Staged) -> Result<CycleOutput> {
        let mut ctrl = staged.ctrl;
        let mut extra = 0;
        match self.options.fault {
            Some(Fault::ThresholdOffByOne) => extra = 1,
            Some(Fault::DropMsbNegation) => {
                ctrl.v_acc_neg = false;
                ctrl.m_acc_neg = false;
            }
            None => {}
        }
        let mode = self.options.accumulator;
        let mut r_trace = Vec::new();
        let y = self
            .alus
            .iter_mut()
            .zip(&self.thresholds)
            .map(|(alu, &delta)| {
                if self.options.trace {
                    r_trace.push(alu.r_pipe);
                }
                alu.step(alu.r_pipe, &ctrl, delta + extra, mode)
            })
            .collect::<Result<Vec<i64>>>()?;
        let p = bank_counts(&y, self.array.geometry())?;
        if self.options.trace {
            self.trace.push(TraceRecord {
                cycle: staged.issued_at,
                x: staged.x.unwrap_or_default(),
                select: staged.select.unwrap_or_default(),
                ctrl: staged.ctrl.to_string(),
                r: r_trace,
                y: y.clone(),
            });
        }
        Ok(CycleOutput {
            issued_at: staged.issued_at,
            ready_at: self.cycle + 1,
            y,
            p,
        })
    }

    /// Applies `stimuli` back to back and drains the pipeline. Returns one
    /// output per stimulus, in order.
    pub fn run(&mut self, stimuli: &[Stimulus]) -> Result<Vec<CycleOutput>> {
        let mut outputs = Vec::with_capacity(stimuli.len());
        for s in stimuli {
            outputs.extend(self.clock(Some(s))?);
        }
        while !self.is_idle() {
            outputs.extend(self.clock(None)?);
        }
        Ok(outputs)
    }
}
