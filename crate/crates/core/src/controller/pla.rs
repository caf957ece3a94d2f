//! Two-level logic programs.
//!
//! Each bank evaluates one Boolean function. Every programmed row computes a
//! first-stage term over input literals; the bank adder then feeds a
//! second-stage gate. Variable `i` is driven on column `2i` and its
//! complement on column `2i + 1`.
//!
//! `Maj` over `n` inputs is true when at least `ceil(n / 2)` inputs are true,
//! in both stages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::formats::Level;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    And,
    Or,
    Maj,
}

impl Gate {
    pub const ALL: [Gate; 3] = [Gate::And, Gate::Or, Gate::Maj];
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::And => "and",
            Gate::Or => "or",
            Gate::Maj => "maj",
        })
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(Gate::And),
            "or" => Ok(Gate::Or),
            "maj" => Ok(Gate::Maj),
            other => Err(Error::Pla(format!("unknown gate `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn column(&self) -> usize {
        2 * self.var + usize::from(self.negated)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaTerm {
    pub gate: Gate,
    pub literals: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaBank {
    pub terms: Vec<PlaTerm>,
    pub output: Gate,
}

impl Default for PlaBank {
    fn default() -> Self {
        PlaBank {
            terms: Vec::new(),
            output: Gate::Or,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlaProgram {
    pub variables: usize,
    pub banks: Vec<PlaBank>,
}

impl PlaProgram {
    pub fn validate(&self, geometry: &ArrayGeometry) -> Result<()> {
        if 2 * self.variables > geometry.bits {
            return Err(Error::Pla(format!(
                "{} variables need {} columns, array has {}",
                self.variables,
                2 * self.variables,
                geometry.bits
            )));
        }
        if self.banks.len() > geometry.banks {
            return Err(Error::Pla(format!(
                "{} banks programmed, array has {}",
                self.banks.len(),
                geometry.banks
            )));
        }
        for (b, bank) in self.banks.iter().enumerate() {
            if bank.terms.len() > geometry.rows_per_bank() {
                return Err(Error::Pla(format!(
                    "bank {b} has {} terms, only {} rows per bank",
                    bank.terms.len(),
                    geometry.rows_per_bank()
                )));
            }
            for term in &bank.terms {
                let mut cols: Vec<usize> = Vec::with_capacity(term.literals.len());
                for lit in &term.literals {
                    if lit.var >= self.variables {
                        return Err(Error::Pla(format!(
                            "literal {lit} beyond {} variables",
                            self.variables
                        )));
                    }
                    if cols.contains(&lit.column()) {
                        return Err(Error::Pla(format!(
                            "literal {lit} repeated in a bank {b} term"
                        )));
                    }
                    cols.push(lit.column());
                }
            }
        }
        Ok(())
    }

    /// Drives the literal columns from a variable assignment.
    pub fn input_columns(&self, assignment: &[bool], columns: usize) -> Result<Vec<Level>> {
        if assignment.len() != self.variables {
            return Err(Error::LengthMismatch {
                expected: self.variables,
                actual: assignment.len(),
            });
        }
        let mut x = vec![Level::Lo; columns];
        for (i, &v) in assignment.iter().enumerate() {
            x[2 * i] = Level::from_bool(v);
            x[2 * i + 1] = Level::from_bool(!v);
        }
        Ok(x)
    }

    /// Recovers the assignment from driven columns, checking complements.
    pub fn assignment_from_columns(&self, x: &[Level]) -> Result<Vec<bool>> {
        if x.len() < 2 * self.variables {
            return Err(Error::LengthMismatch {
                expected: 2 * self.variables,
                actual: x.len(),
            });
        }
        (0..self.variables)
            .map(|i| {
                if x[2 * i] == x[2 * i + 1] {
                    Err(Error::ComplementMismatch(i))
                } else {
                    Ok(x[2 * i].is_hi())
                }
            })
            .collect()
    }
}

/// Threshold that makes a row assert exactly when its term is true.
pub fn term_threshold(term: &PlaTerm) -> i64 {
    let n = term.literals.len() as i64;
    match term.gate {
        Gate::And => n,
        Gate::Or => 1,
        Gate::Maj => (n + 1) / 2,
    }
}

/// Second-stage decision from a bank count `p_b`.
pub fn bank_output(gate: Gate, count: u32, terms: usize) -> bool {
    let count = count as usize;
    match gate {
        Gate::Or => count > 0,
        Gate::And => count == terms,
        Gate::Maj => count >= terms.div_ceil(2),
    }
}

/// Stored rows and thresholds for `program`. Unused rows store all-LO with
/// threshold `N + 1`, so they never assert.
pub fn program_pla(
    program: &PlaProgram,
    geometry: &ArrayGeometry,
) -> Result<(Vec<Vec<Level>>, Vec<i64>)> {
    program.validate(geometry)?;
    let n = geometry.bits;
    let r = geometry.rows_per_bank();
    let mut rows = vec![vec![Level::Lo; n]; geometry.words];
    let mut thresholds = vec![n as i64 + 1; geometry.words];
    for (b, bank) in program.banks.iter().enumerate() {
        for (t, term) in bank.terms.iter().enumerate() {
            let row = b * r + t;
            for lit in &term.literals {
                rows[row][lit.column()] = Level::Hi;
            }
            thresholds[row] = term_threshold(term);
        }
    }
    Ok((rows, thresholds))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(var: usize) -> Literal {
        Literal {
            var,
            negated: false,
        }
    }

    #[test]
    fn thresholds_per_gate() {
        let and = PlaTerm {
            gate: Gate::And,
            literals: vec![lit(0), lit(1)],
        };
        let or = PlaTerm {
            gate: Gate::Or,
            literals: vec![lit(0), lit(1), lit(2)],
        };
        let maj = PlaTerm {
            gate: Gate::Maj,
            literals: vec![lit(0), lit(1), lit(2)],
        };
        assert_eq!(term_threshold(&and), 2);
        assert_eq!(term_threshold(&or), 1);
        assert_eq!(term_threshold(&maj), 2);
    }

    #[test]
    fn programmed_rows() {
        let g = ArrayGeometry::new(4, 8, 2, 1).unwrap();
        let program = PlaProgram {
            variables: 3,
            banks: vec![PlaBank {
                terms: vec![PlaTerm {
                    gate: Gate::And,
                    literals: vec![
                        lit(0),
                        Literal {
                            var: 2,
                            negated: true,
                        },
                    ],
                }],
                output: Gate::Or,
            }],
        };
        let (rows, delta) = program_pla(&program, &g).unwrap();
        let stored: Vec<usize> = (0..8).filter(|&c| rows[0][c].is_hi()).collect();
        assert_eq!(stored, vec![0, 5]);
        assert_eq!(delta, vec![2, 9, 9, 9]);
    }

    #[test]
    fn validation_errors() {
        let g = ArrayGeometry::new(4, 8, 2, 1).unwrap();
        let term = PlaTerm {
            gate: Gate::And,
            literals: vec![lit(0)],
        };
        let too_many_terms = PlaProgram {
            variables: 1,
            banks: vec![PlaBank {
                terms: vec![term.clone(); 3],
                output: Gate::Or,
            }],
        };
        assert!(program_pla(&too_many_terms, &g).is_err());
        let collision = PlaProgram {
            variables: 1,
            banks: vec![PlaBank {
                terms: vec![PlaTerm {
                    gate: Gate::Or,
                    literals: vec![lit(0), lit(0)],
                }],
                output: Gate::Or,
            }],
        };
        assert!(program_pla(&collision, &g).is_err());
        let wide = PlaProgram {
            variables: 5,
            banks: vec![],
        };
        assert!(program_pla(&wide, &g).is_err());
        let banks = PlaProgram {
            variables: 1,
            banks: vec![PlaBank::default(); 3],
        };
        assert!(program_pla(&banks, &g).is_err());
    }

    #[test]
    fn complement_consistency() {
        let p = PlaProgram {
            variables: 2,
            banks: vec![],
        };
        let x = p.input_columns(&[true, false], 6).unwrap();
        assert_eq!(p.assignment_from_columns(&x).unwrap(), vec![true, false]);
        let mut bad = x.clone();
        bad[3] = Level::Lo;
        assert_eq!(
            p.assignment_from_columns(&bad),
            Err(Error::ComplementMismatch(1))
        );
    }

    #[test]
    fn bank_decisions() {
        assert!(bank_output(Gate::Or, 1, 3));
        assert!(!bank_output(Gate::Or, 0, 3));
        assert!(bank_output(Gate::And, 3, 3));
        assert!(!bank_output(Gate::And, 2, 3));
        assert!(bank_output(Gate::Maj, 2, 3));
        assert!(!bank_output(Gate::Maj, 1, 3));
    }
}
