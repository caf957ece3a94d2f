//! Per-cycle stimulus planning.
//!
//! A multi-bit MVP walks the matrix bit-planes MSB first in the outer loop and
//! the vector bit-planes MSB first in the inner loop, `K * L` cycles in all.
//! The vector accumulator doubles across vector planes; the matrix accumulator
//! doubles across matrix planes on the last cycle of each matrix plane.

use serde::{Deserialize, Serialize};

use super::layout::StoredMatrixLayout;
use super::pla::PlaProgram;
use crate::alu::ControlWord;
use crate::array::{ArrayGeometry, ColumnOp, ColumnOpSelect};
use crate::error::{Error, Result};
use crate::formats::{decompose_planes, FormatKind, Level, NumberFormat};
use crate::machine::Stimulus;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ModeSpec {
    HammingSimilarity,
    CamComplete,
    CamSimilarity {
        thresholds: Vec<i64>,
    },
    Mvp {
        matrix: NumberFormat,
        vector: NumberFormat,
    },
    Gf2Mvp,
    Pla {
        program: PlaProgram,
    },
}

impl ModeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModeSpec::HammingSimilarity => "hamming",
            ModeSpec::CamComplete => "cam",
            ModeSpec::CamSimilarity { .. } => "cam-similarity",
            ModeSpec::Mvp { .. } => "mvp",
            ModeSpec::Gf2Mvp => "gf2",
            ModeSpec::Pla { .. } => "pla",
        }
    }
}

/// How one 1-bit plane product is realized from the row population count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneProduct {
    /// {0,1} x {0,1}: AND, count passed through.
    And,
    /// ±1 x ±1: XNOR, `2 r - J`.
    Bipolar,
    /// ±1 matrix x {0,1} vector: XNOR, `r + hsim(a, 1) - J`.
    BipolarMatrix,
    /// {0,1} matrix x ±1 vector: AND, `2 r + hsim(a, 0) - J`.
    BipolarVector,
}

impl PlaneProduct {
    pub fn for_formats(matrix: NumberFormat, vector: NumberFormat) -> Self {
        match (matrix.kind().is_bipolar(), vector.kind().is_bipolar()) {
            (false, false) => PlaneProduct::And,
            (true, true) => PlaneProduct::Bipolar,
            (true, false) => PlaneProduct::BipolarMatrix,
            (false, true) => PlaneProduct::BipolarVector,
        }
    }

    fn column_op(self) -> ColumnOp {
        match self {
            PlaneProduct::And | PlaneProduct::BipolarVector => ColumnOp::And,
            PlaneProduct::Bipolar | PlaneProduct::BipolarMatrix => ColumnOp::Xnor,
        }
    }

    /// Probe needed in `reg_N` before the product can run.
    pub fn reg_n_probe(self) -> Option<RegNProbe> {
        match self {
            PlaneProduct::BipolarMatrix => Some(RegNProbe::AllOnes),
            PlaneProduct::BipolarVector => Some(RegNProbe::AllZeros),
            _ => None,
        }
    }

    fn offset_controls(self, entries: usize, slot: usize) -> ControlWord {
        let c = entries as i64;
        match self {
            PlaneProduct::And => ControlWord::default(),
            PlaneProduct::Bipolar => ControlWord {
                pop_x2: true,
                c_en: true,
                c,
                ..Default::default()
            },
            PlaneProduct::BipolarMatrix => ControlWord {
                n_oz: true,
                c_en: true,
                c,
                n_slot: slot,
                ..Default::default()
            },
            PlaneProduct::BipolarVector => ControlWord {
                pop_x2: true,
                n_oz: true,
                c_en: true,
                c,
                n_slot: slot,
                ..Default::default()
            },
        }
    }
}

/// Input used to capture `reg_N`: `hsim(a, 1)` or `hsim(a, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegNProbe {
    AllOnes,
    AllZeros,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleStep {
    /// Matrix bit-plane `k` (1-based, `K` = MSB); 0 outside MVP mode.
    pub matrix_plane: usize,
    /// Vector bit-plane `l` (1-based, `L` = MSB); 0 outside MVP mode.
    pub vector_plane: usize,
    pub select: ColumnOpSelect,
    pub ctrl: ControlWord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub steps: Vec<ScheduleStep>,
    pub layout: Option<StoredMatrixLayout>,
    pub vector_format: Option<NumberFormat>,
}

impl Schedule {
    pub fn cycles(&self) -> usize {
        self.steps.len()
    }

    /// Binds a 1-bit input word to a single-cycle schedule.
    pub fn bind_bits(&self, x: &[Level]) -> Result<Vec<Stimulus>> {
        let step = match self.steps.as_slice() {
            [step] if self.layout.is_none() => step,
            _ => return Err(Error::Mode("schedule expects integer input".into())),
        };
        if x.len() != step.select.len() {
            return Err(Error::LengthMismatch {
                expected: step.select.len(),
                actual: x.len(),
            });
        }
        Ok(vec![Stimulus {
            x: x.to_vec(),
            select: step.select.clone(),
            ctrl: step.ctrl,
        }])
    }

    /// Binds an integer vector of `J` entries to an MVP schedule.
    pub fn bind_vector(&self, x: &[i64]) -> Result<Vec<Stimulus>> {
        let (layout, fmt) = match (self.layout, self.vector_format) {
            (Some(l), Some(f)) => (l, f),
            _ => return Err(Error::Mode("schedule expects a bit input".into())),
        };
        if x.len() != layout.entries {
            return Err(Error::LengthMismatch {
                expected: layout.entries,
                actual: x.len(),
            });
        }
        let planes = decompose_planes(x, fmt)?;
        let width = fmt.width() as usize;
        Ok(self
            .steps
            .iter()
            .map(|step| {
                let plane = &planes[width - step.vector_plane];
                let mut bits = vec![Level::Lo; layout.columns()];
                for (j, &level) in plane.levels().iter().enumerate() {
                    bits[layout.column_of(j, step.matrix_plane)] = level;
                }
                Stimulus {
                    x: bits,
                    select: step.select.clone(),
                    ctrl: step.ctrl,
                }
            })
            .collect())
    }
}

/// Column selectors for one matrix plane: `op` on its columns, AND elsewhere.
fn plane_select(layout: &StoredMatrixLayout, plane: usize, op: ColumnOp) -> ColumnOpSelect {
    ColumnOpSelect(
        (0..layout.columns())
            .map(|c| {
                if layout.is_plane_column(c, plane) {
                    op
                } else {
                    ColumnOp::And
                }
            })
            .collect(),
    )
}

/// Builds the cycle-by-cycle plan for `spec`. MVP specs need the stored
/// matrix layout.
pub fn plan_schedule(
    spec: &ModeSpec,
    geometry: &ArrayGeometry,
    layout: Option<&StoredMatrixLayout>,
) -> Result<Schedule> {
    let n = geometry.bits;
    let single = |op: ColumnOp| Schedule {
        steps: vec![ScheduleStep {
            matrix_plane: 0,
            vector_plane: 0,
            select: ColumnOpSelect::uniform(op, n),
            ctrl: ControlWord::default(),
        }],
        layout: None,
        vector_format: None,
    };
    match spec {
        ModeSpec::HammingSimilarity | ModeSpec::CamComplete => Ok(single(ColumnOp::Xnor)),
        ModeSpec::CamSimilarity { thresholds } => {
            if thresholds.len() != geometry.words {
                return Err(Error::LengthMismatch {
                    expected: geometry.words,
                    actual: thresholds.len(),
                });
            }
            Ok(single(ColumnOp::Xnor))
        }
        ModeSpec::Gf2Mvp | ModeSpec::Pla { .. } => Ok(single(ColumnOp::And)),
        ModeSpec::Mvp { matrix, vector } => {
            let layout = layout.ok_or(Error::NoMatrix)?;
            if layout.bits != matrix.width() as usize || layout.columns() != n {
                return Err(Error::Mode(format!(
                    "layout {}x{} does not match {matrix} on {n} columns",
                    layout.entries, layout.bits
                )));
            }
            Ok(plan_mvp(*matrix, *vector, layout))
        }
    }
}

fn plan_mvp(matrix: NumberFormat, vector: NumberFormat, layout: &StoredMatrixLayout) -> Schedule {
    let k_bits = matrix.width() as usize;
    let l_bits = vector.width() as usize;
    let product = PlaneProduct::for_formats(matrix, vector);
    let mut steps = Vec::with_capacity(k_bits * l_bits);
    for k in (1..=k_bits).rev() {
        let select = plane_select(layout, k, product.column_op());
        for l in (1..=l_bits).rev() {
            let mut ctrl = product.offset_controls(layout.entries, k - 1);
            if l_bits > 1 {
                ctrl.we_v = l == l_bits;
                ctrl.v_acc = l < l_bits;
            }
            ctrl.v_acc_neg = l == l_bits && vector.kind() == FormatKind::Int;
            // The matrix chain consumes the finished vector sum on l = 1.
            if l == 1 {
                if k_bits > 1 {
                    ctrl.we_m = k == k_bits;
                    ctrl.m_acc = k < k_bits;
                }
                ctrl.m_acc_neg = k == k_bits && matrix.kind() == FormatKind::Int;
            }
            steps.push(ScheduleStep {
                matrix_plane: k,
                vector_plane: l,
                select: select.clone(),
                ctrl,
            });
        }
    }
    Schedule {
        steps,
        layout: Some(*layout),
        vector_format: Some(vector),
    }
}

/// Capture cycles filling `reg_N` slot `k - 1` with the per-plane similarity
/// against an all-ones or all-zeros probe. Columns of other planes are nulled.
pub fn reg_n_capture(layout: &StoredMatrixLayout, probe: RegNProbe) -> Vec<Stimulus> {
    (1..=layout.bits)
        .map(|k| {
            let active = |c: usize| layout.is_plane_column(c, k);
            let x = (0..layout.columns())
                .map(|c| Level::from_bool(active(c) && probe == RegNProbe::AllOnes))
                .collect();
            Stimulus {
                x,
                select: plane_select(layout, k, ColumnOp::Xnor),
                ctrl: ControlWord {
                    we_n: true,
                    n_slot: k - 1,
                    ..Default::default()
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fmt(s: &str) -> NumberFormat {
        s.parse().unwrap()
    }

    fn mvp_schedule(m: &str, v: &str, n: usize) -> Schedule {
        let g = ArrayGeometry::flat(4, n).unwrap();
        let layout = StoredMatrixLayout::new(n, fmt(m).width() as usize).unwrap();
        plan_schedule(
            &ModeSpec::Mvp {
                matrix: fmt(m),
                vector: fmt(v),
            },
            &g,
            Some(&layout),
        )
        .unwrap()
    }

    #[test]
    fn bipolar_one_bit() {
        let s = mvp_schedule("oddint1", "oddint1", 8);
        assert_eq!(s.cycles(), 1);
        let step = &s.steps[0];
        assert!(step.select.0.iter().all(|&op| op == ColumnOp::Xnor));
        assert_eq!(
            step.ctrl,
            ControlWord {
                pop_x2: true,
                c_en: true,
                c: 8,
                ..Default::default()
            }
        );
    }

    #[test]
    fn binary_one_bit() {
        let s = mvp_schedule("uint1", "uint1", 8);
        assert_eq!(s.cycles(), 1);
        assert!(s.steps[0].select.0.iter().all(|&op| op == ColumnOp::And));
        assert_eq!(s.steps[0].ctrl, ControlWord::default());
    }

    #[test]
    fn four_by_four_bits_on_256_columns() {
        let s = mvp_schedule("uint4", "uint4", 256);
        assert_eq!(s.cycles(), 16);
    }

    #[test]
    fn plane_order_and_accumulator_flags() {
        let s = mvp_schedule("int2", "int3", 8);
        let order: Vec<(usize, usize)> = s
            .steps
            .iter()
            .map(|st| (st.matrix_plane, st.vector_plane))
            .collect();
        assert_eq!(order, vec![(2, 3), (2, 2), (2, 1), (1, 3), (1, 2), (1, 1)]);
        let flags: Vec<(bool, bool, bool, bool, bool, bool)> = s
            .steps
            .iter()
            .map(|st| {
                let c = st.ctrl;
                (c.we_v, c.v_acc, c.v_acc_neg, c.we_m, c.m_acc, c.m_acc_neg)
            })
            .collect();
        assert_eq!(
            flags,
            vec![
                (true, false, true, false, false, false),
                (false, true, false, false, false, false),
                (false, true, false, true, false, true),
                (true, false, true, false, false, false),
                (false, true, false, false, false, false),
                (false, true, false, false, true, false),
            ]
        );
    }

    #[test]
    fn inactive_plane_columns_nulled() {
        let g = ArrayGeometry::flat(1, 4).unwrap();
        let layout = StoredMatrixLayout::new(4, 2).unwrap();
        let spec = ModeSpec::Mvp {
            matrix: fmt("oddint2"),
            vector: fmt("oddint1"),
        };
        let s = plan_schedule(&spec, &g, Some(&layout)).unwrap();
        use ColumnOp::{And, Xnor};
        assert_eq!(s.steps[0].select.0, vec![Xnor, And, Xnor, And]);
        assert_eq!(s.steps[1].select.0, vec![And, Xnor, And, Xnor]);
        assert_eq!(s.steps[0].ctrl.c, 2);
        let stim = s.bind_vector(&[1, -1]).unwrap();
        use Level::{Hi, Lo};
        assert_eq!(stim[0].x, vec![Hi, Lo, Lo, Lo]);
        assert_eq!(stim[1].x, vec![Lo, Hi, Lo, Lo]);
    }

    #[test]
    fn mixed_pairs_select_reg_n_slots() {
        let s = mvp_schedule("oddint2", "uint1", 4);
        assert_eq!(s.steps[0].ctrl.n_slot, 1);
        assert_eq!(s.steps[1].ctrl.n_slot, 0);
        assert!(s.steps.iter().all(|st| st.ctrl.n_oz && !st.ctrl.pop_x2));
        let s = mvp_schedule("uint1", "oddint1", 4);
        assert!(s.steps[0].ctrl.pop_x2 && s.steps[0].ctrl.n_oz && s.steps[0].ctrl.c_en);
    }

    #[test]
    fn single_cycle_modes() {
        let g = ArrayGeometry::flat(2, 4).unwrap();
        for spec in [
            ModeSpec::HammingSimilarity,
            ModeSpec::CamComplete,
            ModeSpec::Gf2Mvp,
            ModeSpec::CamSimilarity {
                thresholds: vec![1, 2],
            },
        ] {
            assert_eq!(plan_schedule(&spec, &g, None).unwrap().cycles(), 1);
        }
        let bad = ModeSpec::CamSimilarity {
            thresholds: vec![1],
        };
        assert!(plan_schedule(&bad, &g, None).is_err());
        let mvp = ModeSpec::Mvp {
            matrix: fmt("uint2"),
            vector: fmt("uint2"),
        };
        assert_eq!(plan_schedule(&mvp, &g, None), Err(Error::NoMatrix));
        let wrong = StoredMatrixLayout::new(4, 1).unwrap();
        assert!(plan_schedule(&mvp, &g, Some(&wrong)).is_err());
    }

    #[test]
    fn capture_probe_restricted_to_plane() {
        let layout = StoredMatrixLayout::new(4, 2).unwrap();
        let caps = reg_n_capture(&layout, RegNProbe::AllOnes);
        use Level::{Hi, Lo};
        assert_eq!(caps.len(), 2);
        // Plane 2 is the MSB, stored first in each entry.
        assert_eq!(caps[1].x, vec![Hi, Lo, Hi, Lo]);
        assert_eq!(caps[0].x, vec![Lo, Hi, Lo, Hi]);
        assert_eq!(caps[1].ctrl.n_slot, 1);
        let caps = reg_n_capture(&layout, RegNProbe::AllZeros);
        assert!(caps.iter().all(|c| c.x.iter().all(|&l| l == Lo)));
    }
}
