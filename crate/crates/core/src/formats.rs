//! Fixed-width integer formats and their bit-plane decompositions.
//!
//! Every format is an `L`-bit string of logical levels. `uint` and `int` map
//! LO/HI to 0/1 (plain binary and 2's complement); `oddint` maps LO/HI to
//! -1/+1 in every bit position, which yields the odd integers in
//! `[-2^L + 1, 2^L - 1]`.
//!
//! Bit sequences and planes are always ordered MSB-first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest supported format. Keeps every accumulator comfortably inside `i64`.
pub const MAX_WIDTH: u32 = 16;

/// A logical bit level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Level {
    #[default]
    Lo,
    Hi,
}

impl Level {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Level::Hi
        } else {
            Level::Lo
        }
    }

    pub fn is_hi(self) -> bool {
        self == Level::Hi
    }
}

impl std::ops::Not for Level {
    type Output = Level;

    fn not(self) -> Level {
        match self {
            Level::Lo => Level::Hi,
            Level::Hi => Level::Lo,
        }
    }
}

/// Renders levels as a `0`/`1` string.
pub fn levels_to_string(levels: &[Level]) -> String {
    levels
        .iter()
        .map(|l| if l.is_hi() { '1' } else { '0' })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    Uint,
    Int,
    Oddint,
}

impl FormatKind {
    pub const ALL: [FormatKind; 3] = [FormatKind::Uint, FormatKind::Int, FormatKind::Oddint];

    pub fn name(self) -> &'static str {
        match self {
            FormatKind::Uint => "uint",
            FormatKind::Int => "int",
            FormatKind::Oddint => "oddint",
        }
    }

    /// True when LO/HI stand for -1/+1 rather than 0/1.
    pub fn is_bipolar(self) -> bool {
        self == FormatKind::Oddint
    }
}

impl FromStr for FormatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uint" => Ok(FormatKind::Uint),
            "int" => Ok(FormatKind::Int),
            "oddint" => Ok(FormatKind::Oddint),
            other => Err(Error::Format(format!("unknown format kind `{other}`"))),
        }
    }
}

/// An `L`-bit number format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NumberFormat {
    kind: FormatKind,
    width: u32,
}

impl NumberFormat {
    pub fn new(kind: FormatKind, width: u32) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::Format(format!(
                "width {width} outside [1, {MAX_WIDTH}]"
            )));
        }
        Ok(NumberFormat { kind, width })
    }

    pub fn uint(width: u32) -> Result<Self> {
        Self::new(FormatKind::Uint, width)
    }

    pub fn int(width: u32) -> Result<Self> {
        Self::new(FormatKind::Int, width)
    }

    pub fn oddint(width: u32) -> Result<Self> {
        Self::new(FormatKind::Oddint, width)
    }

    pub fn kind(&self) -> FormatKind {
        self.kind
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Inclusive `(min, max)` of representable values.
    pub fn value_range(&self) -> (i64, i64) {
        let l = self.width;
        match self.kind {
            FormatKind::Uint => (0, (1i64 << l) - 1),
            FormatKind::Int => (-(1i64 << (l - 1)), (1i64 << (l - 1)) - 1),
            FormatKind::Oddint => (-(1i64 << l) + 1, (1i64 << l) - 1),
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        let (lo, hi) = self.value_range();
        v >= lo && v <= hi && (self.kind != FormatKind::Oddint || v.rem_euclid(2) == 1)
    }

    /// Every representable value in ascending order.
    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        let (lo, hi) = self.value_range();
        let step = if self.kind == FormatKind::Oddint {
            2
        } else {
            1
        };
        (lo..=hi).step_by(step)
    }

    fn check(&self, v: i64) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                value: v,
                format: *self,
            })
        }
    }

    /// Encodes `v` as `width` levels, MSB first.
    pub fn encode(&self, v: i64) -> Result<Vec<Level>> {
        self.check(v)?;
        let raw = self.raw_code(v);
        Ok((0..self.width)
            .rev()
            .map(|bit| Level::from_bool((raw >> bit) & 1 == 1))
            .collect())
    }

    /// Unsigned code word whose bits are the levels of `v`.
    fn raw_code(&self, v: i64) -> u64 {
        let l = self.width;
        let mask = (1u64 << l) - 1;
        match self.kind {
            FormatKind::Uint | FormatKind::Int => (v as u64) & mask,
            // v = 2u - (2^L - 1)
            FormatKind::Oddint => ((v + (1i64 << l) - 1) / 2) as u64,
        }
    }

    /// Decodes `width` MSB-first levels.
    pub fn decode(&self, bits: &[Level]) -> Result<i64> {
        if bits.len() != self.width as usize {
            return Err(Error::LengthMismatch {
                expected: self.width as usize,
                actual: bits.len(),
            });
        }
        let l = bits.len() as u32;
        let weight = |i: usize| 1i64 << (l as usize - 1 - i);
        Ok(bits
            .iter()
            .enumerate()
            .map(|(i, b)| match (self.kind, b) {
                (_, Level::Hi) if self.kind == FormatKind::Int && i == 0 => -weight(i),
                (FormatKind::Oddint, Level::Lo) => -weight(i),
                (_, Level::Hi) => weight(i),
                (_, Level::Lo) => 0,
            })
            .sum())
    }

    /// Weight of bit-plane `plane` (1-based, `width` = MSB) in the recombination
    /// sum. Negative for the MSB of `int`.
    pub fn plane_weight(&self, plane: u32) -> i64 {
        let w = 1i64 << (plane - 1);
        if self.kind == FormatKind::Int && plane == self.width {
            -w
        } else {
            w
        }
    }
}

impl fmt::Display for NumberFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.name(), self.width)
    }
}

impl FromStr for NumberFormat {
    type Err = Error;

    /// Parses names such as `uint4`, `int2`, `oddint1`.
    fn from_str(s: &str) -> Result<Self> {
        let split = s
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| Error::Format(format!("missing width in `{s}`")))?;
        let kind: FormatKind = s[..split].parse()?;
        let width: u32 = s[split..]
            .parse()
            .map_err(|_| Error::Format(format!("bad width in `{s}`")))?;
        NumberFormat::new(kind, width)
    }
}

impl TryFrom<String> for NumberFormat {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NumberFormat> for String {
    fn from(f: NumberFormat) -> String {
        f.to_string()
    }
}

/// One bit position across all entries of a vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPlane(pub Vec<Level>);

impl BitPlane {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn levels(&self) -> &[Level] {
        &self.0
    }
}

/// Splits `x` into `width` bit-planes, MSB plane first.
pub fn decompose_planes(x: &[i64], fmt: NumberFormat) -> Result<Vec<BitPlane>> {
    let codes = x
        .iter()
        .map(|&v| fmt.encode(v))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..fmt.width() as usize)
        .map(|i| BitPlane(codes.iter().map(|c| c[i]).collect()))
        .collect())
}

/// Weighted recombination of MSB-first planes back into integers.
pub fn recombine_planes(planes: &[BitPlane], fmt: NumberFormat) -> Result<Vec<i64>> {
    if planes.len() != fmt.width() as usize {
        return Err(Error::LengthMismatch {
            expected: fmt.width() as usize,
            actual: planes.len(),
        });
    }
    let dim = planes.first().map_or(0, BitPlane::len);
    let mut out = vec![0i64; dim];
    for (i, plane) in planes.iter().enumerate() {
        if plane.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: plane.len(),
            });
        }
        let weight = fmt.plane_weight(fmt.width() - i as u32);
        for (acc, level) in out.iter_mut().zip(plane.levels()) {
            *acc += match (fmt.kind(), level) {
                (_, Level::Hi) => weight,
                (FormatKind::Oddint, Level::Lo) => -weight,
                (_, Level::Lo) => 0,
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Level::{Hi, Lo};

    #[test]
    fn table_ranges_for_two_bits() {
        assert_eq!(NumberFormat::uint(2).unwrap().value_range(), (0, 3));
        assert_eq!(NumberFormat::int(2).unwrap().value_range(), (-2, 1));
        assert_eq!(NumberFormat::oddint(2).unwrap().value_range(), (-3, 3));
    }

    #[test]
    fn table_value_sets_for_two_bits() {
        let set = |f: NumberFormat| f.values().collect::<Vec<_>>();
        assert_eq!(set(NumberFormat::uint(2).unwrap()), vec![0, 1, 2, 3]);
        assert_eq!(set(NumberFormat::int(2).unwrap()), vec![-2, -1, 0, 1]);
        assert_eq!(set(NumberFormat::oddint(2).unwrap()), vec![-3, -1, 1, 3]);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(
            NumberFormat::uint(2).unwrap().encode(3).unwrap(),
            vec![Hi, Hi]
        );
        assert_eq!(
            NumberFormat::int(2).unwrap().encode(-2).unwrap(),
            vec![Hi, Lo]
        );
        assert_eq!(
            NumberFormat::oddint(2).unwrap().encode(-1).unwrap(),
            vec![Lo, Hi]
        );
    }

    #[test]
    fn oddint_codes_enumerated() {
        // Each 2-bit code against sum of 2^(l-1) * (+/-1).
        let f = NumberFormat::oddint(2).unwrap();
        let codes = [([Lo, Lo], -3), ([Lo, Hi], -1), ([Hi, Lo], 1), ([Hi, Hi], 3)];
        for (bits, v) in codes {
            let direct: i64 = bits
                .iter()
                .enumerate()
                .map(|(i, b)| (1i64 << (1 - i)) * if b.is_hi() { 1 } else { -1 })
                .sum();
            assert_eq!(direct, v);
            assert_eq!(f.decode(&bits).unwrap(), v);
            assert_eq!(f.encode(v).unwrap(), bits.to_vec());
        }
    }

    #[test]
    fn encode_rejects_bad_values() {
        let odd = NumberFormat::oddint(3).unwrap();
        assert!(matches!(odd.encode(2), Err(Error::OutOfRange { .. })));
        assert!(odd.encode(0).is_err());
        assert!(odd.encode(9).is_err());
        assert!(NumberFormat::uint(2).unwrap().encode(-1).is_err());
        assert!(NumberFormat::int(2).unwrap().encode(2).is_err());
    }

    #[test]
    fn width_bounds() {
        assert!(NumberFormat::uint(0).is_err());
        assert!(NumberFormat::uint(MAX_WIDTH + 1).is_err());
        assert!(NumberFormat::uint(MAX_WIDTH).is_ok());
    }

    #[test]
    fn round_trip_exhaustive_up_to_eight_bits() {
        for kind in FormatKind::ALL {
            for width in 1..=8 {
                let f = NumberFormat::new(kind, width).unwrap();
                let mut count = 0u64;
                for v in f.values() {
                    assert_eq!(f.decode(&f.encode(v).unwrap()).unwrap(), v, "{f} {v}");
                    count += 1;
                }
                assert_eq!(count, 1 << width, "{f}");
            }
        }
    }

    #[test]
    fn oddint_enumeration_is_all_odd_values() {
        for width in 1..=10 {
            let f = NumberFormat::oddint(width).unwrap();
            let vals: Vec<i64> = f.values().collect();
            assert_eq!(vals.len(), 1 << width);
            assert!(vals.iter().all(|v| v.rem_euclid(2) == 1));
            assert_eq!(vals[0], -(1 << width) + 1);
            assert_eq!(*vals.last().unwrap(), (1 << width) - 1);
        }
    }

    #[test]
    fn decompose_examples() {
        let planes = decompose_planes(&[3, 1, 2], NumberFormat::uint(2).unwrap()).unwrap();
        assert_eq!(planes[0].levels(), &[Hi, Lo, Hi]);
        assert_eq!(planes[1].levels(), &[Hi, Hi, Lo]);

        let planes = decompose_planes(&[-2, 1], NumberFormat::int(2).unwrap()).unwrap();
        assert_eq!(planes[0].levels(), &[Hi, Lo]);
        assert_eq!(planes[1].levels(), &[Lo, Hi]);

        for f in ["uint3", "int3"] {
            let planes = decompose_planes(&[0, 0], f.parse().unwrap()).unwrap();
            assert!(planes.iter().all(|p| p.levels().iter().all(|l| *l == Lo)));
        }
    }

    #[test]
    fn decompose_rejects_out_of_range_entry() {
        assert!(decompose_planes(&[1, 4], NumberFormat::uint(2).unwrap()).is_err());
    }

    #[test]
    fn format_names_parse() {
        let f: NumberFormat = "oddint3".parse().unwrap();
        assert_eq!(f.kind(), FormatKind::Oddint);
        assert_eq!(f.width(), 3);
        assert_eq!(f.to_string(), "oddint3");
        assert!("float4".parse::<NumberFormat>().is_err());
        assert!("uint".parse::<NumberFormat>().is_err());
    }
}
