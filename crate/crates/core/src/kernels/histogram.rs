//! 256-bin histogram over the top byte of 32-bit samples.

use super::{check_rows, KernelRun};
use crate::error::Result;
use crate::rcam::{BitWord, FieldSpec, RcamArray};

pub const HIST_BINS: usize = 256;
pub const SAMPLE_FIELD: FieldSpec = FieldSpec::const_new("x", 0, 31);
pub const BIN_FIELD: FieldSpec = FieldSpec::const_new("bin", 24, 31);

/// Counts per bin, one compare and one popcount reduction per bin.
pub fn histogram(array: &mut RcamArray, samples: &[u32]) -> Result<KernelRun<Vec<u64>>> {
    check_rows(array, samples.len())?;
    for (row, &x) in samples.iter().enumerate() {
        array.load_row(row, &SAMPLE_FIELD, u128::from(x))?;
    }
    let mut counts = Vec::with_capacity(HIST_BINS);
    for bin in 0..HIST_BINS {
        let key = BitWord::from_value(bin as u128, BIN_FIELD.width())?;
        array.compare(&key, std::slice::from_ref(&BIN_FIELD))?;
        counts.push(array.reduce_popcount());
    }
    Ok(KernelRun {
        output: counts,
        ledger: array.take_ledger(),
    })
}
