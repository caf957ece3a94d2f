//! The latched bit-cell array.
//!
//! Each of the `M` rows stores an `N`-bit word. Every cycle, column `n` sees
//! the input bit `x_n` and a selector `s_n` choosing XNOR or AND between the
//! stored bit and `x_n`. Each row is split into `B_s` subrows of `V = N / B_s`
//! cells that produce local population counts, which the row sums into `r_m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::Level;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// `M`: number of stored words (rows).
    pub words: usize,
    /// `N`: bits per word (columns).
    pub bits: usize,
    /// `B`: number of banks.
    pub banks: usize,
    /// `B_s`: subrows per row.
    pub subrows: usize,
}

impl ArrayGeometry {
    pub fn new(words: usize, bits: usize, banks: usize, subrows: usize) -> Result<Self> {
        let g = ArrayGeometry {
            words,
            bits,
            banks,
            subrows,
        };
        g.validate()?;
        Ok(g)
    }

    /// Single bank, single subrow.
    pub fn flat(words: usize, bits: usize) -> Result<Self> {
        Self::new(words, bits, 1, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.words == 0 || self.bits == 0 || self.banks == 0 || self.subrows == 0 {
            return Err(Error::Geometry(format!(
                "all dimensions must be >= 1: {self}"
            )));
        }
        if !self.words.is_multiple_of(self.banks) {
            return Err(Error::Geometry(format!(
                "banks B={} must divide words M={}",
                self.banks, self.words
            )));
        }
        if !self.bits.is_multiple_of(self.subrows) {
            return Err(Error::Geometry(format!(
                "subrows B_s={} must divide bits N={}",
                self.subrows, self.bits
            )));
        }
        Ok(())
    }

    /// `R`: rows per bank.
    pub fn rows_per_bank(&self) -> usize {
        self.words / self.banks
    }

    /// `V`: cells per subrow.
    pub fn subrow_width(&self) -> usize {
        self.bits / self.subrows
    }

    pub fn bank_of(&self, row: usize) -> usize {
        row / self.rows_per_bank()
    }

    /// Wires from one subrow to its row ALU, `ceil(log2(V + 1))`.
    pub fn subrow_wire_width(&self) -> u32 {
        usize::BITS - self.subrow_width().leading_zeros()
    }
}

impl std::fmt::Display for ArrayGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{} (B={}, B_s={})",
            self.words, self.bits, self.banks, self.subrows
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnOp {
    Xnor,
    And,
}

/// Per-column operator selection `s_n`. Part of each cycle's stimulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnOpSelect(pub Vec<ColumnOp>);

impl ColumnOpSelect {
    pub fn uniform(op: ColumnOp, n: usize) -> Self {
        ColumnOpSelect(vec![op; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `X` for XNOR, `A` for AND.
    pub fn to_trace_string(&self) -> String {
        self.0
            .iter()
            .map(|op| match op {
                ColumnOp::Xnor => 'X',
                ColumnOp::And => 'A',
            })
            .collect()
    }
}

/// A packed row of levels, 64 cells per word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct PackedBits {
    len: usize,
    words: Vec<u64>,
}

impl PackedBits {
    pub(crate) fn zeros(len: usize) -> Self {
        PackedBits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub(crate) fn from_levels(levels: &[Level]) -> Self {
        let mut p = Self::zeros(levels.len());
        for (i, l) in levels.iter().enumerate() {
            if l.is_hi() {
                p.words[i / 64] |= 1 << (i % 64);
            }
        }
        p
    }

    pub(crate) fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut p = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                p.words[i / 64] |= 1 << (i % 64);
            }
        }
        p
    }

    pub(crate) fn get(&self, i: usize) -> Level {
        Level::from_bool((self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    pub(crate) fn to_levels(&self) -> Vec<Level> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Population count over cells `[start, start + len)`.
    pub(crate) fn count_range(&self, start: usize, len: usize) -> u32 {
        let mut total = 0;
        let mut pos = start;
        let end = start + len;
        while pos < end {
            let w = pos / 64;
            let lo = pos % 64;
            let hi = (end - w * 64).min(64);
            let span = hi - lo;
            let mask = if span == 64 {
                u64::MAX
            } else {
                ((1u64 << span) - 1) << lo
            };
            total += (self.words[w] & mask).count_ones();
            pos = w * 64 + hi;
        }
        total
    }
}

/// Column selectors packed into an XNOR mask and an AND mask.
#[derive(Debug, Clone)]
struct PackedSelect {
    xnor: PackedBits,
    and: PackedBits,
}

impl PackedSelect {
    fn new(s: &ColumnOpSelect) -> Self {
        PackedSelect {
            xnor: PackedBits::from_fn(s.len(), |i| s.0[i] == ColumnOp::Xnor),
            and: PackedBits::from_fn(s.len(), |i| s.0[i] == ColumnOp::And),
        }
    }
}

/// Row population counts from one array cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowCounts {
    subrows: usize,
    /// Subrow partial counts, row-major `M x B_s`.
    partial: Vec<u32>,
    /// `r_m` per row.
    pub rows: Vec<u32>,
}

impl RowCounts {
    /// Partial counts of each subrow of `row`, each in `[0, V]`.
    pub fn subrow_counts(&self, row: usize) -> &[u32] {
        &self.partial[row * self.subrows..(row + 1) * self.subrows]
    }
}

#[derive(Debug, Clone)]
pub struct BitCellArray {
    geometry: ArrayGeometry,
    rows: Vec<PackedBits>,
    written: Vec<bool>,
    strict: bool,
}

impl BitCellArray {
    /// A fresh array with every cell at LO.
    pub fn new(geometry: ArrayGeometry) -> Result<Self> {
        geometry.validate()?;
        Ok(BitCellArray {
            geometry,
            rows: vec![PackedBits::zeros(geometry.bits); geometry.words],
            written: vec![false; geometry.words],
            strict: false,
        })
    }

    /// In strict mode, evaluating a cycle over never-written rows is an error.
    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn write_word(&mut self, row: usize, data: &[Level]) -> Result<()> {
        if row >= self.geometry.words {
            return Err(Error::IndexOutOfRange {
                index: row,
                limit: self.geometry.words,
            });
        }
        self.check_len(data.len())?;
        self.rows[row] = PackedBits::from_levels(data);
        self.written[row] = true;
        Ok(())
    }

    pub fn read_word(&self, row: usize) -> Result<Vec<Level>> {
        if row >= self.geometry.words {
            return Err(Error::IndexOutOfRange {
                index: row,
                limit: self.geometry.words,
            });
        }
        if self.strict && !self.written[row] {
            return Err(Error::UninitializedRow(row));
        }
        Ok(self.rows[row].to_levels())
    }

    pub fn cell(&self, row: usize, col: usize) -> Level {
        self.rows[row].get(col)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.geometry.bits {
            return Err(Error::LengthMismatch {
                expected: self.geometry.bits,
                actual: len,
            });
        }
        Ok(())
    }

    /// Evaluates one array cycle: per-cell XNOR/AND against `x`, subrow
    /// partial counts, and the row totals `r_m`.
    pub fn cycle_popcounts(&self, x: &[Level], select: &ColumnOpSelect) -> Result<RowCounts> {
        self.check_len(x.len())?;
        self.check_len(select.len())?;
        self.popcounts_packed(&PackedBits::from_levels(x), select)
    }

    pub(crate) fn popcounts_packed(
        &self,
        x: &PackedBits,
        select: &ColumnOpSelect,
    ) -> Result<RowCounts> {
        if self.strict {
            if let Some(row) = self.written.iter().position(|w| !w) {
                return Err(Error::UninitializedRow(row));
            }
        }
        let g = &self.geometry;
        let v = g.subrow_width();
        let sel = PackedSelect::new(select);
        let mut partial = Vec::with_capacity(g.words * g.subrows);
        let mut rows = Vec::with_capacity(g.words);
        let mut cell_out = PackedBits::zeros(g.bits);
        for stored in &self.rows {
            for (i, out) in cell_out.words.iter_mut().enumerate() {
                let a = stored.words[i];
                let xi = x.words[i];
                *out = (sel.xnor.words[i] & !(a ^ xi)) | (sel.and.words[i] & a & xi);
            }
            let mut total = 0;
            for s in 0..g.subrows {
                let c = cell_out.count_range(s * v, v);
                partial.push(c);
                total += c;
            }
            rows.push(total);
        }
        Ok(RowCounts {
            subrows: g.subrows,
            partial,
            rows,
        })
    }
}
