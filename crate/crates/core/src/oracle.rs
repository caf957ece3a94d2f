//! Golden references for every decoded result.
//!
//! Nothing here touches the array, ALU, machine, or schedule code: inputs are
//! plain integers and booleans, arithmetic is done in `i128`.

use crate::controller::{Gate, PlaProgram};
use crate::error::{Error, Result};

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: a,
            actual: b,
        })
    }
}

/// Number of equal positions.
pub fn oracle_hsim(a: &[bool], x: &[bool]) -> Result<i64> {
    same_len(a.len(), x.len())?;
    let distance = a.iter().zip(x).filter(|(p, q)| p != q).count();
    Ok((a.len() - distance) as i64)
}

/// Exact `A x`.
pub fn oracle_mvp(matrix: &[Vec<i64>], x: &[i64]) -> Result<Vec<i128>> {
    matrix
        .iter()
        .map(|row| {
            same_len(x.len(), row.len())?;
            Ok(row
                .iter()
                .zip(x)
                .map(|(&a, &b)| i128::from(a) * i128::from(b))
                .sum())
        })
        .collect()
}

/// `A x` over GF(2): AND products, XOR sums.
pub fn oracle_gf2_mvp(matrix: &[Vec<bool>], x: &[bool]) -> Result<Vec<bool>> {
    matrix
        .iter()
        .map(|row| {
            same_len(x.len(), row.len())?;
            Ok(row
                .iter()
                .zip(x)
                .fold(false, |acc, (&a, &b)| acc ^ (a && b)))
        })
        .collect()
}

fn gate(g: Gate, inputs: impl Iterator<Item = bool>) -> bool {
    let values: Vec<bool> = inputs.collect();
    let ones = values.iter().filter(|&&v| v).count();
    match g {
        Gate::And => ones == values.len(),
        Gate::Or => ones > 0,
        Gate::Maj => 2 * ones >= values.len(),
    }
}

/// Direct two-level evaluation, one output per programmed bank.
pub fn oracle_pla(program: &PlaProgram, assignment: &[bool]) -> Result<Vec<bool>> {
    same_len(program.variables, assignment.len())?;
    Ok(program
        .banks
        .iter()
        .map(|bank| {
            let terms = bank.terms.iter().map(|term| {
                gate(
                    term.gate,
                    term.literals.iter().map(|l| assignment[l.var] != l.negated),
                )
            });
            gate(bank.output, terms)
        })
        .collect())
}
