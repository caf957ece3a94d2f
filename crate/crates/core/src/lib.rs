//! Bit-true simulator of a parallel processor built from an associative
//! memory array with per-row pop-count ALUs.
//!
//! The layers, bottom up: number [`formats`], the bit-cell [`array`], the
//! per-row [`alu`], the clocked [`machine`], and the mode [`controller`].
//! [`oracle`] holds independent integer references and [`perf`] the
//! throughput/energy arithmetic.

pub mod alu;
pub mod array;
pub mod controller;
pub mod difftest;
pub mod error;
pub mod formats;
pub mod machine;
pub mod oracle;
pub mod perf;
pub mod textfmt;
pub mod workload;

pub use array::ArrayGeometry;
pub use controller::{Decoded, ModeResult, ModeSpec, Session};
pub use error::{Error, Result};
pub use formats::{FormatKind, Level, NumberFormat};
pub use machine::{Fault, SimOptions};
