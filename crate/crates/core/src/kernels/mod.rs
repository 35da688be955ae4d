//! The benchmark workloads, each a fixed script over one array.
//!
//! A kernel loads its input into the array (uncharged, the data is assumed
//! to already live in storage), runs its instruction script and returns its
//! results together with the ledger of that script.

mod bfs;
mod dense;
mod histogram;
mod spmv;
mod types;

pub use bfs::{bfs, bfs_rows, BfsOutput, BfsRowLayout, BFS_ROW_WIDTH, NULL_VERTEX, UNVISITED};
pub use dense::{dot_product, dot_product_width, euclidean_distance, euclidean_width};
pub use histogram::{histogram, BIN_FIELD, HIST_BINS, SAMPLE_FIELD};
pub(crate) use spmv::quantized_product;
pub use spmv::{quantize, spmv, spmv_width, SpmvOutput, FRAC_BITS, VALUE_BITS};
pub use types::{CsrMatrix, GraphEdges, SampleSet};

use crate::error::{Error, Result};
use crate::perfmodel::Ledger;
use crate::rcam::{FieldSpec, RcamArray};

/// Kernel output plus the cost of producing it.
#[derive(Clone, Debug)]
pub struct KernelRun<T> {
    pub output: T,
    pub ledger: Ledger,
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Hands out consecutive column ranges of a row.
#[derive(Debug)]
pub(crate) struct Columns {
    next: usize,
    width: usize,
}

impl Columns {
    pub(crate) fn new(width: usize) -> Self {
        Self { next: 0, width }
    }

    pub(crate) fn take(&mut self, name: &'static str, width: usize) -> Result<FieldSpec> {
        if width == 0 || self.next + width > self.width {
            return Err(Error::layout(format!(
                "field `{name}` ({width} bits at column {}) does not fit a {}-bit row",
                self.next, self.width
            )));
        }
        let f = FieldSpec::with_width(name, self.next, width);
        self.next += width;
        Ok(f)
    }
}

pub(crate) fn check_rows(array: &RcamArray, rows: usize) -> Result<()> {
    if array.rows() != rows {
        return Err(Error::dimension(format!(
            "kernel needs an array of exactly {rows} rows, got {}",
            array.rows()
        )));
    }
    Ok(())
}

/// Checks that `order` is a permutation of `0..n`.
pub(crate) fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n
        || !order
            .iter()
            .all(|&r| r < n && !std::mem::replace(&mut seen[r], true))
    {
        return Err(Error::dimension(format!(
            "row order is not a permutation of 0..{n}"
        )));
    }
    Ok(())
}
