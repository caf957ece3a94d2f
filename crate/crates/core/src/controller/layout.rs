use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{Level, NumberFormat};

/// Placement of a `K`-bit matrix in the array columns.
///
/// Entry `j` owns the contiguous columns `jK .. jK + K - 1`, MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredMatrixLayout {
    /// `J`: logical entries per row.
    pub entries: usize,
    /// `K`: bits per entry.
    pub bits: usize,
}

impl StoredMatrixLayout {
    pub fn new(columns: usize, bits: usize) -> Result<Self> {
        if bits == 0 || !columns.is_multiple_of(bits) {
            return Err(Error::Geometry(format!(
                "entry width K={bits} must divide N={columns}"
            )));
        }
        Ok(StoredMatrixLayout {
            entries: columns / bits,
            bits,
        })
    }

    pub fn columns(&self) -> usize {
        self.entries * self.bits
    }

    /// Column holding bit `plane` (1-based, `K` = MSB) of entry `entry`.
    pub fn column_of(&self, entry: usize, plane: usize) -> usize {
        debug_assert!(entry < self.entries && (1..=self.bits).contains(&plane));
        entry * self.bits + (self.bits - plane)
    }

    /// Whether `column` carries bit-plane `plane`.
    pub fn is_plane_column(&self, column: usize, plane: usize) -> bool {
        self.bits - 1 - column % self.bits == plane - 1
    }

    /// Stored levels of one matrix row.
    pub fn encode_row(&self, row: &[i64], fmt: NumberFormat) -> Result<Vec<Level>> {
        if row.len() != self.entries {
            return Err(Error::LengthMismatch {
                expected: self.entries,
                actual: row.len(),
            });
        }
        let mut out = vec![Level::Lo; self.columns()];
        for (j, &v) in row.iter().enumerate() {
            let code = fmt.encode(v)?;
            for (i, level) in code.into_iter().enumerate() {
                out[self.column_of(j, self.bits - i)] = level;
            }
        }
        Ok(out)
    }
}

/// Encodes an `M x J` matrix into stored row contents.
pub fn encode_matrix(
    matrix: &[Vec<i64>],
    fmt: NumberFormat,
    columns: usize,
) -> Result<(Vec<Vec<Level>>, StoredMatrixLayout)> {
    let layout = StoredMatrixLayout::new(columns, fmt.width() as usize)?;
    let rows = matrix
        .iter()
        .map(|row| layout.encode_row(row, fmt))
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, layout))
}
