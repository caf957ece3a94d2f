//! Row ALU datapath.
//!
//! Per cycle, the row population count `r_m` passes through an offset and
//! doubling stage, the vector accumulator, the matrix accumulator, and finally
//! the threshold subtraction that yields `y_m`. The bank adder counts rows
//! whose output has a clear sign bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::formats::Level;

/// Control signals for one cycle. All flags default to off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ControlWord {
    /// Double the row population count.
    pub pop_x2: bool,
    /// Add the stored `reg_N` value.
    pub n_oz: bool,
    /// Subtract the offset `c`.
    pub c_en: bool,
    pub c: i64,
    /// Negate the addend entering the vector accumulator.
    pub v_acc_neg: bool,
    pub we_v: bool,
    pub v_acc: bool,
    /// Negate the addend entering the matrix accumulator.
    pub m_acc_neg: bool,
    pub we_m: bool,
    pub m_acc: bool,
    /// Capture `r_m` into `reg_N`.
    pub we_n: bool,
    /// Which `reg_N` slot is read by `n_oz` and written by `we_n`.
    pub n_slot: usize,
}

impl ControlWord {
    pub fn validate(&self) -> Result<()> {
        if self.we_v && self.v_acc {
            return Err(Error::ControlWord("weV and vAcc both set".into()));
        }
        if self.we_m && self.m_acc {
            return Err(Error::ControlWord("weM and mAcc both set".into()));
        }
        Ok(())
    }
}

impl fmt::Display for ControlWord {
    /// Compact listing of the asserted signals, e.g. `popX2 cEn c=4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flags = [
            (self.pop_x2, "popX2"),
            (self.n_oz, "nOZ"),
            (self.c_en, "cEn"),
            (self.v_acc_neg, "vAccX-1"),
            (self.we_v, "weV"),
            (self.v_acc, "vAcc"),
            (self.m_acc_neg, "mAccX-1"),
            (self.we_m, "weM"),
            (self.m_acc, "mAcc"),
            (self.we_n, "weN"),
        ];
        let mut parts: Vec<String> = flags
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, name)| name.to_string())
            .collect();
        if self.c_en {
            parts.push(format!("c={}", self.c));
        }
        if (self.n_oz || self.we_n) && self.n_slot != 0 {
            parts.push(format!("slot={}", self.n_slot));
        }
        if parts.is_empty() {
            f.write_str("-")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// How accumulator and output registers treat values that do not fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccumulatorMode {
    /// Exact arithmetic; any register magnitude above `bound` is an error.
    Checked { bound: i64 },
    /// Two's complement wrap-around at `bits` bits, for comparison with
    /// fixed-width hardware traces.
    Wrap { bits: u32 },
}

impl Default for AccumulatorMode {
    fn default() -> Self {
        AccumulatorMode::Checked { bound: i64::MAX }
    }
}

impl AccumulatorMode {
    fn apply(&self, what: &str, v: i128) -> Result<i64> {
        match *self {
            AccumulatorMode::Checked { bound } => {
                if v.unsigned_abs() > bound.unsigned_abs() as u128 {
                    Err(Error::Overflow(format!(
                        "{what} = {v} exceeds bound {bound}"
                    )))
                } else {
                    Ok(v as i64)
                }
            }
            AccumulatorMode::Wrap { bits } => {
                let bits = bits.clamp(1, 64);
                let shift = 128 - bits;
                Ok(((v << shift) >> shift) as i64)
            }
        }
    }
}

/// Registers of one row ALU.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowAluState {
    /// Stored Hamming similarities, one slot per matrix bit-plane.
    pub reg_n: Vec<i64>,
    pub acc_v: i64,
    pub acc_m: i64,
    /// Pipeline register between the row population count and the ALU.
    pub r_pipe: u32,
}

impl RowAluState {
    pub fn new(reg_n_slots: usize) -> Self {
        RowAluState {
            reg_n: vec![0; reg_n_slots.max(1)],
            ..Default::default()
        }
    }

    fn slot(&self, ctrl: &ControlWord) -> Result<usize> {
        if ctrl.n_slot < self.reg_n.len() {
            Ok(ctrl.n_slot)
        } else {
            Err(Error::ControlWord(format!(
                "reg_N slot {} out of range ({} slots)",
                ctrl.n_slot,
                self.reg_n.len()
            )))
        }
    }

    /// One combinational pass plus register update. Returns `y_m`.
    pub fn step(
        &mut self,
        r: u32,
        ctrl: &ControlWord,
        delta: i64,
        mode: AccumulatorMode,
    ) -> Result<i64> {
        ctrl.validate()?;
        let slot = self.slot(ctrl)?;
        let r = i128::from(r);

        let p = if ctrl.pop_x2 { 2 * r } else { r };
        let mut q = p;
        if ctrl.n_oz {
            q += i128::from(self.reg_n[slot]);
        }
        if ctrl.c_en {
            q -= i128::from(ctrl.c);
        }
        if ctrl.v_acc_neg {
            q = -q;
        }

        let v_out = if ctrl.v_acc {
            2 * i128::from(self.acc_v) + q
        } else {
            q
        };
        let v_out = mode.apply("vector accumulator", v_out)?;

        let m_in = if ctrl.m_acc_neg {
            -i128::from(v_out)
        } else {
            i128::from(v_out)
        };
        let m_out = if ctrl.m_acc {
            2 * i128::from(self.acc_m) + m_in
        } else {
            m_in
        };
        let m_out = mode.apply("matrix accumulator", m_out)?;
        let y = mode.apply("row output", i128::from(m_out) - i128::from(delta))?;

        if ctrl.we_v || ctrl.v_acc {
            self.acc_v = v_out;
        }
        if ctrl.we_m || ctrl.m_acc {
            self.acc_m = m_out;
        }
        if ctrl.we_n {
            self.reg_n[slot] = r as i64;
        }
        Ok(y)
    }
}

/// Negated sign bit of a row output: HI iff `y >= 0`.
pub fn msb_negated(y: i64) -> Level {
    Level::from_bool(y >= 0)
}

/// Bank adder: number of rows per bank with a nonnegative output.
pub fn bank_counts(y: &[i64], geometry: &ArrayGeometry) -> Result<Vec<u32>> {
    if y.len() != geometry.words {
        return Err(Error::LengthMismatch {
            expected: geometry.words,
            actual: y.len(),
        });
    }
    Ok(y.chunks(geometry.rows_per_bank())
        .map(|bank| bank.iter().filter(|&&v| msb_negated(v).is_hi()).count() as u32)
        .collect())
}
