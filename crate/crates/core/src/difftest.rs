//! Differential testing of the simulated MVP path against the integer oracle.
//!
//! Trial `i` draws everything from a ChaCha stream selected by `(seed, i)`, so
//! a run is reproducible regardless of thread count. The first failing trial
//! is shrunk greedily and re-run with tracing on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::controller::{Decoded, Session};
use crate::error::{Error, Result};
use crate::formats::{FormatKind, NumberFormat, MAX_WIDTH};
use crate::machine::{Fault, SimOptions, TraceRecord};
use crate::oracle::oracle_mvp;

/// All matrix x vector format-kind pairs, in trial rotation order.
pub const KIND_PAIRS: [(FormatKind, FormatKind); 9] = [
    (FormatKind::Uint, FormatKind::Uint),
    (FormatKind::Uint, FormatKind::Int),
    (FormatKind::Uint, FormatKind::Oddint),
    (FormatKind::Int, FormatKind::Uint),
    (FormatKind::Int, FormatKind::Int),
    (FormatKind::Int, FormatKind::Oddint),
    (FormatKind::Oddint, FormatKind::Uint),
    (FormatKind::Oddint, FormatKind::Int),
    (FormatKind::Oddint, FormatKind::Oddint),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifftestConfig {
    pub trials: u64,
    pub seed: u64,
    pub max_words: usize,
    pub max_bits: usize,
    pub max_width: u32,
    #[serde(default)]
    pub fault: Option<Fault>,
}

impl Default for DifftestConfig {
    fn default() -> Self {
        DifftestConfig {
            trials: 1000,
            seed: 0,
            max_words: 64,
            max_bits: 256,
            max_width: 4,
            fault: None,
        }
    }
}

impl DifftestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Usage("trials must be at least 1".into()));
        }
        if self.max_words == 0 || self.max_bits == 0 {
            return Err(Error::Usage("array bounds must be at least 1".into()));
        }
        if !(1..=MAX_WIDTH).contains(&self.max_width) {
            return Err(Error::Usage(format!(
                "max width must be in [1, {MAX_WIDTH}]"
            )));
        }
        Ok(())
    }
}

/// One generated MVP instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub index: u64,
    pub geometry: ArrayGeometry,
    pub matrix_format: NumberFormat,
    pub vector_format: NumberFormat,
    pub matrix: Vec<Vec<i64>>,
    pub vector: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    pub geometry: ArrayGeometry,
    pub matrix_format: NumberFormat,
    pub vector_format: NumberFormat,
    pub matrix: Vec<Vec<i64>>,
    pub vector: Vec<i64>,
    pub expected: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actual: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStats {
    pub matrix: FormatKind,
    pub vector: FormatKind,
    pub trials: u64,
    pub passed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifftestSummary {
    pub seed: u64,
    pub trials: u64,
    pub passed: u64,
    pub pairs: Vec<PairStats>,
    pub counterexample: Option<Counterexample>,
}

impl DifftestSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }

    pub fn headline(&self) -> String {
        format!("{}/{} pass", self.passed, self.trials)
    }
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|&d| n.is_multiple_of(d)).collect()
}

fn sample(fmt: NumberFormat, rng: &mut ChaCha8Rng) -> i64 {
    let (lo, hi) = fmt.value_range();
    // Bias towards the extremes, where sign and carry bugs live.
    match rng.random_range(0..8) {
        0 => lo,
        1 => hi,
        _ if fmt.kind() == FormatKind::Oddint => lo + 2 * rng.random_range(0..=(hi - lo) / 2),
        _ => rng.random_range(lo..=hi),
    }
}

/// Deterministically generates trial `index`.
pub fn generate_trial(config: &DifftestConfig, index: u64) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let (mk, vk) = KIND_PAIRS[(index % KIND_PAIRS.len() as u64) as usize];
    let max_k = config.max_width.min(config.max_bits as u32);
    let k = rng.random_range(1..=max_k);
    let l = rng.random_range(1..=config.max_width);
    let matrix_format = NumberFormat::new(mk, k)?;
    let vector_format = NumberFormat::new(vk, l)?;
    let words = rng.random_range(1..=config.max_words);
    let entries = rng.random_range(1..=config.max_bits / k as usize);
    let bits = entries * k as usize;
    let banks = pick(&divisors(words), &mut rng);
    let subrows = pick(&divisors(bits), &mut rng);
    let geometry = ArrayGeometry::new(words, bits, banks, subrows)?;
    let matrix = (0..words)
        .map(|_| {
            (0..entries)
                .map(|_| sample(matrix_format, &mut rng))
                .collect()
        })
        .collect();
    let vector = (0..entries)
        .map(|_| sample(vector_format, &mut rng))
        .collect();
    Ok(Trial {
        index,
        geometry,
        matrix_format,
        vector_format,
        matrix,
        vector,
    })
}

fn pick(options: &[usize], rng: &mut ChaCha8Rng) -> usize {
    options[rng.random_range(0..options.len())]
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Outcome {
    Pass,
    Mismatch {
        expected: Vec<i64>,
        actual: Vec<i64>,
    },
    Failed {
        expected: Vec<i64>,
        error: Error,
    },
}

fn simulate(trial: &Trial, options: SimOptions) -> (Result<Vec<i64>>, Vec<TraceRecord>) {
    let mut session = match Session::new(trial.geometry, options) {
        Ok(s) => s,
        Err(e) => return (Err(e), Vec::new()),
    };
    let result = (|| {
        session.load_matrix(&trial.matrix, trial.matrix_format)?;
        session.prepare_reg_n(trial.vector_format)?;
        session.take_trace();
        let r = session.run_mvp(trial.vector_format, &trial.vector)?;
        match r.decoded {
            Decoded::Integers(y) => Ok(y),
            other => Err(Error::Mode(format!("unexpected result {other:?}"))),
        }
    })();
    (result, session.take_trace())
}

fn check(trial: &Trial, fault: Option<Fault>) -> Outcome {
    let expected: Vec<i64> = match oracle_mvp(&trial.matrix, &trial.vector) {
        Ok(v) => v.into_iter().map(|e| e as i64).collect(),
        Err(error) => {
            return Outcome::Failed {
                expected: Vec::new(),
                error,
            }
        }
    };
    let options = SimOptions {
        fault,
        ..SimOptions::default()
    };
    match simulate(trial, options).0 {
        Ok(actual) if actual == expected => Outcome::Pass,
        Ok(actual) => Outcome::Mismatch { expected, actual },
        Err(error) => Outcome::Failed { expected, error },
    }
}

fn fails(trial: &Trial, fault: Option<Fault>) -> bool {
    check(trial, fault) != Outcome::Pass
}

/// Smaller variants of `t`, most aggressive first.
fn shrink_candidates(t: &Trial) -> Vec<Trial> {
    let mut out = Vec::new();
    let with = |matrix: Vec<Vec<i64>>, vector: Vec<i64>, mf: NumberFormat, vf: NumberFormat| {
        let entries = vector.len();
        let geometry = ArrayGeometry::flat(matrix.len(), entries * mf.width() as usize).ok()?;
        Some(Trial {
            index: t.index,
            geometry,
            matrix_format: mf,
            vector_format: vf,
            matrix,
            vector,
        })
    };
    let flat = with(
        t.matrix.clone(),
        t.vector.clone(),
        t.matrix_format,
        t.vector_format,
    );
    if t.geometry.banks > 1 || t.geometry.subrows > 1 {
        out.extend(flat);
    }
    if t.matrix.len() > 1 {
        for row in &t.matrix {
            out.extend(with(
                vec![row.clone()],
                t.vector.clone(),
                t.matrix_format,
                t.vector_format,
            ));
        }
    }
    if t.vector.len() > 1 {
        for j in 0..t.vector.len() {
            let drop = |v: &Vec<i64>| {
                let mut v = v.clone();
                v.remove(j);
                v
            };
            out.extend(with(
                t.matrix.iter().map(drop).collect(),
                drop(&t.vector),
                t.matrix_format,
                t.vector_format,
            ));
        }
    }
    // Replacements for a value: the simplest one, then a step towards zero.
    let smaller = |v: i64, f: NumberFormat| -> Vec<i64> {
        let (simplest, step) = match f.kind() {
            FormatKind::Oddint => (1, v - 2 * v.signum()),
            _ => (0, v / 2),
        };
        let mut c = Vec::new();
        if v != simplest {
            c.push(simplest);
        }
        if step != v && step != simplest && f.contains(step) {
            c.push(step);
        }
        c
    };
    for j in 0..t.vector.len() {
        for s in smaller(t.vector[j], t.vector_format) {
            let mut v = t.vector.clone();
            v[j] = s;
            out.extend(with(t.matrix.clone(), v, t.matrix_format, t.vector_format));
        }
        for m in 0..t.matrix.len() {
            for s in smaller(t.matrix[m][j], t.matrix_format) {
                let mut a = t.matrix.clone();
                a[m][j] = s;
                out.extend(with(a, t.vector.clone(), t.matrix_format, t.vector_format));
            }
        }
    }
    let narrower = |f: NumberFormat| NumberFormat::new(f.kind(), f.width() - 1).ok();
    if let Some(mf) = narrower(t.matrix_format) {
        if t.matrix.iter().flatten().all(|&v| mf.contains(v)) {
            out.extend(with(
                t.matrix.clone(),
                t.vector.clone(),
                mf,
                t.vector_format,
            ));
        }
    }
    if let Some(vf) = narrower(t.vector_format) {
        if t.vector.iter().all(|&v| vf.contains(v)) {
            out.extend(with(
                t.matrix.clone(),
                t.vector.clone(),
                t.matrix_format,
                vf,
            ));
        }
    }
    out
}

/// Greedily replaces `trial` by smaller failing variants until none is left.
pub fn shrink(trial: &Trial, fault: Option<Fault>) -> Trial {
    let mut current = trial.clone();
    'outer: loop {
        for candidate in shrink_candidates(&current) {
            if fails(&candidate, fault) {
                current = candidate;
                continue 'outer;
            }
        }
        return current;
    }
}

fn counterexample(trial: &Trial, fault: Option<Fault>) -> Counterexample {
    let options = SimOptions {
        fault,
        trace: true,
        ..SimOptions::default()
    };
    let (result, trace) = simulate(trial, options);
    let (expected, actual, error) = match check(trial, fault) {
        Outcome::Mismatch { expected, actual } => (expected, Some(actual), None),
        Outcome::Failed { expected, error } => (expected, None, Some(error.to_string())),
        Outcome::Pass => (Vec::new(), result.ok(), None),
    };
    Counterexample {
        trial: trial.index,
        geometry: trial.geometry,
        matrix_format: trial.matrix_format,
        vector_format: trial.vector_format,
        matrix: trial.matrix.clone(),
        vector: trial.vector.clone(),
        expected,
        actual,
        error,
        trace,
    }
}

/// Runs the suite. Trials run in parallel; the report is independent of
/// scheduling.
pub fn run_difftest(config: &DifftestConfig) -> Result<DifftestSummary> {
    config.validate()?;
    let results = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let trial = generate_trial(config, i)?;
            Ok((
                trial.matrix_format.kind(),
                trial.vector_format.kind(),
                !fails(&trial, config.fault),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let pairs = KIND_PAIRS
        .iter()
        .map(|&(m, v)| {
            let hits = results.iter().filter(|r| r.0 == m && r.1 == v);
            PairStats {
                matrix: m,
                vector: v,
                trials: hits.clone().count() as u64,
                passed: hits.filter(|r| r.2).count() as u64,
            }
        })
        .filter(|p| p.trials > 0)
        .collect();
    let passed = results.iter().filter(|r| r.2).count() as u64;
    let counterexample = match results.iter().position(|r| !r.2) {
        Some(first) => {
            let trial = generate_trial(config, first as u64)?;
            Some(counterexample(&shrink(&trial, config.fault), config.fault))
        }
        None => None,
    };
    Ok(DifftestSummary {
        seed: config.seed,
        trials: config.trials,
        passed,
        pairs,
        counterexample,
    })
}
