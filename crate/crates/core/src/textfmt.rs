//! Plain-text matrix, vector, and logic-program files.
//!
//! Matrix files start with `M J K <kind>` followed by `M` rows of `J`
//! whitespace-separated integers. Vector files start with `J L <kind>`
//! followed by one vector of `J` integers per line. `<kind>` is `uint`,
//! `int`, or `oddint`; the width comes from `K` / `L`.
//!
//! Logic programs have one statement per line:
//!
//! ```text
//! vars 3
//! 0 and x0 x1      # bank 0, AND term over X0 and X1
//! 0 and !x2
//! 0 out or         # bank 0 second stage
//! ```
//!
//! Blank lines and `#` comments are ignored everywhere.

use serde::{Deserialize, Serialize};

use crate::controller::{Gate, Literal, PlaBank, PlaProgram, PlaTerm};
use crate::error::{Error, Result};
use crate::formats::{FormatKind, NumberFormat};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    pub format: NumberFormat,
    pub rows: Vec<Vec<i64>>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(line: usize, tok: &str, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("{what}: expected a count, got `{tok}`")))
}

fn parse_header(line: usize, text: &str) -> Result<(usize, NumberFormat)> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    if toks.len() != 3 && toks.len() != 4 {
        return Err(parse_err(line, "header must be `<count> <width> <kind>`"));
    }
    let (dims, kind) = toks.split_at(toks.len() - 1);
    let width = parse_usize(line, dims[dims.len() - 1], "width")?;
    let kind_tok = kind[0];
    let kind_name = kind_tok.trim_end_matches(|c: char| c.is_ascii_digit());
    let kind: FormatKind = kind_name
        .parse()
        .map_err(|e: Error| parse_err(line, e.to_string()))?;
    if kind_name.len() != kind_tok.len() && kind_tok[kind_name.len()..] != width.to_string() {
        return Err(parse_err(
            line,
            format!("`{kind_tok}` contradicts width {width}"),
        ));
    }
    let fmt = NumberFormat::new(kind, width as u32).map_err(|e| parse_err(line, e.to_string()))?;
    Ok((toks.len(), fmt))
}

fn parse_row(line: usize, text: &str, expect: usize, fmt: NumberFormat) -> Result<Vec<i64>> {
    let row = text
        .split_whitespace()
        .map(|t| {
            let v: i64 = t
                .parse()
                .map_err(|_| parse_err(line, format!("expected an integer, got `{t}`")))?;
            if !fmt.contains(v) {
                return Err(parse_err(
                    line,
                    format!("{v} is not representable as {fmt}"),
                ));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    if row.len() != expect {
        return Err(parse_err(
            line,
            format!("expected {expect} entries, got {}", row.len()),
        ));
    }
    Ok(row)
}

/// Parses a `M J K <kind>` matrix file.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let mut lines = content_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty matrix file"))?;
    let (ntok, format) = parse_header(hl, header)?;
    if ntok != 4 {
        return Err(parse_err(hl, "matrix header must be `M J K <kind>`"));
    }
    let toks: Vec<&str> = header.split_whitespace().collect();
    let m = parse_usize(hl, toks[0], "M")?;
    let j = parse_usize(hl, toks[1], "J")?;
    let rows = lines
        .map(|(ln, l)| parse_row(ln, l, j, format))
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != m {
        return Err(parse_err(
            hl,
            format!("header declares {m} rows, file has {}", rows.len()),
        ));
    }
    Ok(IntMatrix { format, rows })
}

/// Parses a `J L <kind>` vector file; each following line is one vector.
pub fn parse_vectors(text: &str) -> Result<IntMatrix> {
    let mut lines = content_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty vector file"))?;
    let (ntok, format) = parse_header(hl, header)?;
    if ntok != 3 {
        return Err(parse_err(hl, "vector header must be `J L <kind>`"));
    }
    let j = parse_usize(hl, header.split_whitespace().next().unwrap_or(""), "J")?;
    let rows = lines
        .map(|(ln, l)| parse_row(ln, l, j, format))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntMatrix { format, rows })
}

fn write_rows(out: &mut String, rows: &[Vec<i64>]) {
    for row in rows {
        let line: Vec<String> = row.iter().map(i64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

pub fn format_matrix(m: &IntMatrix) -> String {
    let j = m.rows.first().map_or(0, Vec::len);
    let mut out = format!(
        "{} {} {} {}\n",
        m.rows.len(),
        j,
        m.format.width(),
        m.format.kind().name()
    );
    write_rows(&mut out, &m.rows);
    out
}

pub fn format_vectors(v: &IntMatrix) -> String {
    let j = v.rows.first().map_or(0, Vec::len);
    let mut out = format!("{} {} {}\n", j, v.format.width(), v.format.kind().name());
    write_rows(&mut out, &v.rows);
    out
}

fn parse_literal(line: usize, tok: &str) -> Result<Literal> {
    let (negated, rest) = match tok.strip_prefix('!') {
        Some(r) => (true, r),
        None => (false, tok),
    };
    let var = rest
        .strip_prefix('x')
        .or_else(|| rest.strip_prefix('X'))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| parse_err(line, format!("bad literal `{tok}`, expected `xN` or `!xN`")))?;
    Ok(Literal { var, negated })
}

/// Parses a logic program.
pub fn parse_pla(text: &str) -> Result<PlaProgram> {
    let mut variables = None;
    let mut banks: Vec<PlaBank> = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "vars" {
            if toks.len() != 2 || variables.is_some() {
                return Err(parse_err(ln, "expected a single `vars <count>` line"));
            }
            variables = Some(parse_usize(ln, toks[1], "vars")?);
            continue;
        }
        if toks.len() < 2 {
            return Err(parse_err(
                ln,
                "expected `<bank> <gate> <literals...>` or `<bank> out <gate>`",
            ));
        }
        let bank = parse_usize(ln, toks[0], "bank")?;
        if banks.len() <= bank {
            banks.resize(bank + 1, PlaBank::default());
        }
        if toks[1] == "out" {
            if toks.len() != 3 {
                return Err(parse_err(ln, "expected `<bank> out <gate>`"));
            }
            banks[bank].output = toks[2]
                .parse()
                .map_err(|e: Error| parse_err(ln, e.to_string()))?;
            continue;
        }
        let gate: Gate = toks[1]
            .parse()
            .map_err(|e: Error| parse_err(ln, e.to_string()))?;
        let literals = toks[2..]
            .iter()
            .map(|t| parse_literal(ln, t))
            .collect::<Result<Vec<_>>>()?;
        banks[bank].terms.push(PlaTerm { gate, literals });
    }
    let variables = variables.ok_or_else(|| parse_err(1, "missing `vars <count>` line"))?;
    let program = PlaProgram { variables, banks };
    if let Some(lit) = program
        .banks
        .iter()
        .flat_map(|b| &b.terms)
        .flat_map(|t| &t.literals)
        .find(|l| l.var >= variables)
    {
        return Err(Error::Pla(format!(
            "literal {lit} beyond {variables} variables"
        )));
    }
    Ok(program)
}

pub fn format_pla(program: &PlaProgram) -> String {
    let mut out = format!("vars {}\n", program.variables);
    for (b, bank) in program.banks.iter().enumerate() {
        for term in &bank.terms {
            let lits: Vec<String> = term.literals.iter().map(Literal::to_string).collect();
            let line = format!("{b} {} {}", term.gate, lits.join(" "));
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str(&format!("{b} out {}\n", bank.output));
    }
    out
}
