//! Closed-form SpMV cost, for matrices too large to simulate.
//!
//! The instruction stream of the SpMV kernel is fixed by the matrix shape;
//! only write energies depend on data statistics. Replaying that stream
//! without an array gives the same ledger as a simulated run with matching
//! statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ledger::{ArithOp, Instr, Ledger, ModelConfig};
use crate::error::{Error, Result};
use crate::kernels::{quantize, CsrMatrix, VALUE_BITS};

const PRODUCT_BITS: u32 = 2 * VALUE_BITS as u32;
const UNIFORM_SAMPLES: usize = 4096;

/// Rows tagged by the multiply's writes in a row holding `a` and `b`.
///
/// Each step with multiplier bit `b_i` set tags the row once; a row in state
/// `(c, a_j, p) = 011` moves onto `110`, a later entry, and is tagged again.
fn mult_tagged(a: u64, b: u64) -> u64 {
    let m = VALUE_BITS;
    let mut p = 0u128;
    let mut tagged = 0;
    for i in (0..m).filter(|i| b >> i & 1 == 1) {
        for j in 0..m {
            let c = (p >> (i + m) & 1) as u32;
            let x = (a >> j & 1) as u32;
            let y = (p >> (i + j) & 1) as u32;
            tagged += 1 + u64::from((c, x, y) == (0, 1, 1));
            let sum = c + x + y;
            p = p & !(1 << (i + m)) & !(1 << (i + j))
                | u128::from(sum >= 2) << (i + m)
                | u128::from(sum & 1) << (i + j);
        }
    }
    debug_assert_eq!(p, u128::from(a) * u128::from(b));
    tagged
}

/// Shape and data statistics the SpMV ledger depends on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpmvShape {
    pub n: u64,
    pub nnz: u64,
    pub nonempty_rows: u64,
    /// Rows tagged by the multiply's writes, summed over all of them.
    pub mult_tagged: u64,
    /// Nonzeros whose product is negative.
    pub negative_products: u64,
}

impl SpmvShape {
    /// Exact statistics of `a` multiplied by `b`.
    pub fn of(a: &CsrMatrix, b: &[f64]) -> Result<Self> {
        if b.len() != a.n() {
            return Err(Error::dimension("vector length does not match the matrix"));
        }
        let qb = b.iter().map(|&v| quantize(v)).collect::<Result<Vec<_>>>()?;
        let (mut tagged, mut neg) = (0, 0);
        for (_, c, v) in a.entries() {
            let qa = quantize(v)?;
            tagged += mult_tagged(qa.0, qb[c].0);
            neg += u64::from(qa.1 ^ qb[c].1);
        }
        Ok(Self {
            n: a.n() as u64,
            nnz: a.nnz() as u64,
            nonempty_rows: a.nonempty_rows() as u64,
            mult_tagged: tagged,
            negative_products: neg,
        })
    }

    /// Expected statistics of a matrix with uniformly placed nonzeros and
    /// values uniform in [-1, 1]: half the products negative, multiply
    /// writes averaged over a fixed-seed sample of value pairs.
    pub fn uniform(n: u64, nnz: u64) -> Self {
        let empty = (1.0 - 1.0 / n as f64).powf(nnz as f64);
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let mut q = || quantize(r.gen_range(-1.0..=1.0)).expect("in range").0;
        let sampled: u64 = (0..UNIFORM_SAMPLES).map(|_| mult_tagged(q(), q())).sum();
        Self {
            n,
            nnz,
            nonempty_rows: ((n as f64) * (1.0 - empty)).round() as u64,
            mult_tagged: (sampled as f64 / UNIFORM_SAMPLES as f64 * nnz as f64).round() as u64,
            negative_products: nnz / 2,
        }
    }

    pub fn density(&self) -> f64 {
        self.nnz as f64 / self.n as f64
    }
}

fn charge_pairs(
    l: &mut Ledger,
    cfg: &ModelConfig,
    times: u64,
    compare_bits: u32,
    write_bits: u32,
    tagged_total: u64,
) {
    let rows = l.rows();
    for k in 0..times {
        l.charge(
            Instr::Compare {
                masked_bits: compare_bits,
                rows,
            },
            cfg,
        );
        // write energy is linear in tagged rows, so the total can be booked once
        let tagged = if k == 0 { tagged_total } else { 0 };
        l.charge(
            Instr::Write {
                masked_bits: write_bits,
                tagged,
            },
            cfg,
        );
    }
}

/// Ledger of the SpMV kernel on a matrix of the given shape.
pub fn spmv_ledger(shape: &SpmvShape, cfg: &ModelConfig) -> Result<Ledger> {
    if shape.nnz == 0 || shape.n == 0 {
        return Err(Error::Model("analytic SpMV needs a nonempty matrix".into()));
    }
    let iw = crate::kernels::ceil_log2(shape.n as usize).max(1) as u32;
    let vb = VALUE_BITS as u64;
    let r = shape.nnz;
    let mut l = Ledger::new(r);

    charge_pairs(&mut l, cfg, shape.n, iw, VALUE_BITS as u32 + 1, r);

    let mark = l.mark();
    charge_pairs(&mut l, cfg, 8 * vb * vb, 4, 2, shape.mult_tagged);
    l.note_arith(ArithOp::Mult, mark);

    charge_pairs(&mut l, cfg, 4, 2, 1, r);
    charge_pairs(&mut l, cfg, 1, 0, 2, r);

    let mark = l.mark();
    charge_pairs(
        &mut l,
        cfg,
        8 * u64::from(PRODUCT_BITS),
        3,
        2,
        u64::from(PRODUCT_BITS) * r,
    );
    l.note_arith(ArithOp::Sub, mark);

    let positive = r - shape.negative_products;
    charge_pairs(
        &mut l,
        cfg,
        2 * u64::from(PRODUCT_BITS),
        2,
        1,
        u64::from(PRODUCT_BITS) * positive,
    );

    for _ in 0..shape.nonempty_rows {
        l.charge(
            Instr::Compare {
                masked_bits: iw,
                rows: r,
            },
            cfg,
        );
        l.charge(
            Instr::Reduce {
                passes: PRODUCT_BITS,
                rows: r,
            },
            cfg,
        );
    }
    Ok(l)
}
