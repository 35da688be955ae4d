//! Functional, cycle- and energy-accounting simulator of PRINS, a resistive
//! CAM (RCAM) array that doubles as storage and as a massively parallel
//! associative processor.
//!
//! The crate is layered bottom-up:
//!
//! * [`rcam`] models the array and its tag logic bit-exactly.
//! * [`microcode`] lowers word-parallel, bit-serial arithmetic onto
//!   compare/write passes driven by truth tables.
//! * [`kernels`] implements the Euclidean distance, dot product, histogram,
//!   SpMV and BFS workloads on top of the first two.
//! * [`perfmodel`] holds the cycle/energy ledger, the roofline baseline and
//!   report construction.
//! * [`oracle`] contains plain scalar references used for verification.
//! * [`io`] covers dataset files, generators, report emission and the CLI.

pub mod error;
pub mod io;
pub mod kernels;
pub mod microcode;
pub mod oracle;
pub mod perfmodel;
pub mod rcam;

pub use error::{Error, Result};
pub use perfmodel::{Ledger, ModelConfig};
pub use rcam::{BitWord, FieldSpec, RcamArray, ShiftDirection, TagVector};
