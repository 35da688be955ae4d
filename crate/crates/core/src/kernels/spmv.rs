//! Sparse matrix times dense vector with one nonzero per row.
//!
//! Values are fixed point, `FRAC_BITS` fractional bits, stored sign-magnitude
//! so the multiplier only ever sees unsigned magnitudes. After the multiply
//! the negative products are turned into two's complement, which lets a
//! single unsigned field sum per output row produce the signed result modulo
//! 2^64.

use super::{ceil_log2, check_order, check_rows, Columns, CsrMatrix, KernelRun};
use crate::error::{Error, Result};
use crate::microcode::{
    broadcast_zero, exec_truth_table, vec_mult, vec_sub, MultLayout, Operand, TruthTable,
    VectorLayout,
};
use crate::rcam::{BitWord, FieldSpec, RcamArray};

pub const VALUE_BITS: usize = 32;
pub const FRAC_BITS: u32 = 16;
const PRODUCT_BITS: usize = 2 * VALUE_BITS;

/// `(magnitude, negative)` of `v` rounded to the fixed-point grid.
pub fn quantize(v: f64) -> Result<(u64, bool)> {
    let scaled = (v.abs() * f64::from(1u32 << FRAC_BITS)).round();
    if !(scaled < (1u64 << VALUE_BITS) as f64) {
        return Err(Error::Overflow(format!(
            "{v} does not fit {VALUE_BITS}-bit fixed point"
        )));
    }
    let mag = scaled as u64;
    Ok((mag, mag != 0 && v < 0.0))
}

fn signed(q: (u64, bool)) -> i128 {
    if q.1 {
        -i128::from(q.0)
    } else {
        i128::from(q.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpmvOutput {
    /// Exact products summed, scaled by 2^(2·FRAC_BITS).
    pub raw: Vec<i128>,
    pub values: Vec<f64>,
}

pub(crate) struct SpmvLayout {
    pub row: FieldSpec,
    pub col: FieldSpec,
    pub ea: FieldSpec,
    pub sa: FieldSpec,
    pub eb: FieldSpec,
    pub sb: FieldSpec,
    pub p: FieldSpec,
    pub sp: FieldSpec,
    pub t: FieldSpec,
    pub carry: FieldSpec,
    pub zero: FieldSpec,
}

pub(crate) fn index_bits(n: usize) -> usize {
    ceil_log2(n).max(1)
}

impl SpmvLayout {
    pub(crate) fn new(n: usize, width: usize) -> Result<Self> {
        let iw = index_bits(n);
        let mut c = Columns::new(width);
        Ok(Self {
            row: c.take("row", iw)?,
            col: c.take("col", iw)?,
            ea: c.take("e_a", VALUE_BITS)?,
            sa: c.take("sign_a", 1)?,
            eb: c.take("e_b", VALUE_BITS)?,
            sb: c.take("sign_b", 1)?,
            p: c.take("prod", PRODUCT_BITS)?,
            sp: c.take("sign_prod", 1)?,
            t: c.take("signed_prod", PRODUCT_BITS)?,
            carry: c.take("carry", 2)?,
            zero: c.take("zero", 1)?,
        })
    }
}

/// Row width the kernel needs for an `n`-dimensional matrix.
pub fn spmv_width(n: usize) -> usize {
    2 * index_bits(n) + 3 * VALUE_BITS + 2 * PRODUCT_BITS + 6
}

/// `C = A·B`. `order`, if given, places nonzero `k` (row-major) in array row
/// `order[k]`.
pub fn spmv(
    array: &mut RcamArray,
    a: &CsrMatrix,
    b: &[f64],
    order: Option<&[usize]>,
) -> Result<KernelRun<SpmvOutput>> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::dimension(format!(
            "vector of length {} for a {n}x{n} matrix",
            b.len()
        )));
    }
    check_rows(array, a.nnz())?;
    if let Some(o) = order {
        check_order(o, a.nnz())?;
    }
    let l = SpmvLayout::new(n, array.width())?;
    let qb = b.iter().map(|&v| quantize(v)).collect::<Result<Vec<_>>>()?;

    let mut bound = vec![0u128; n];
    for (k, (r, c, v)) in a.entries().enumerate() {
        let qa = quantize(v)?;
        bound[r] += u128::from(qa.0) * u128::from(qb[c].0);
        let row = order.map_or(k, |o| o[k]);
        array.load_row(row, &l.row, r as u128)?;
        array.load_row(row, &l.col, c as u128)?;
        array.load_row(row, &l.ea, u128::from(qa.0))?;
        array.load_row(row, &l.sa, u128::from(qa.1))?;
        for f in [&l.eb, &l.sb, &l.p, &l.sp, &l.t, &l.carry, &l.zero] {
            array.load_row(row, f, 0)?;
        }
    }
    if let Some(r) = bound.iter().position(|s| *s >> (PRODUCT_BITS - 1) != 0) {
        return Err(Error::Overflow(format!(
            "row {r} sum may exceed {} bits",
            PRODUCT_BITS - 1
        )));
    }

    // broadcast B: every nonzero in column i receives B[i]
    let eb_sb = [l.eb.clone(), l.sb.clone()];
    for (i, q) in qb.iter().enumerate() {
        array.compare(
            &BitWord::from_value(i as u128, l.col.width())?,
            std::slice::from_ref(&l.col),
        )?;
        let mut key = BitWord::from_value(u128::from(q.0), VALUE_BITS)?;
        key.push(q.1);
        array.write(&key, &eb_sb)?;
    }

    // all products at once
    vec_mult(
        array,
        &MultLayout::new(&l.ea, &l.eb, l.p.clone()),
        VALUE_BITS,
    )?;
    let xor = TruthTable::from_fn(2, 1, |x| (x ^ (x >> 1)) & 1);
    exec_truth_table(
        array,
        &xor,
        &[l.sa.clone(), l.sb.clone()],
        std::slice::from_ref(&l.sp),
    )?;

    // t = -p everywhere, then t = p where the product is positive
    broadcast_zero(array, std::slice::from_ref(&l.carry))?;
    let neg = VectorLayout::new(
        Operand::zeros(PRODUCT_BITS, &l.zero),
        &l.p,
        l.t.clone(),
        [l.carry.bit_field(0), l.carry.bit_field(1)],
    );
    vec_sub(array, &neg, PRODUCT_BITS)?;
    let keep = TruthTable::from_patterns(2, 1, &[("00", "0"), ("01", "1")])?;
    for j in 0..PRODUCT_BITS {
        exec_truth_table(
            array,
            &keep,
            &[l.sp.clone(), l.p.bit_field(j)],
            &[l.t.bit_field(j)],
        )?;
    }

    // one field sum per nonempty output row
    let mut raw = vec![0i128; n];
    let ptr = a.row_ptr();
    for r in (0..n).filter(|&r| ptr[r + 1] > ptr[r]) {
        array.compare(
            &BitWord::from_value(r as u128, l.row.width())?,
            std::slice::from_ref(&l.row),
        )?;
        let sum = array.reduce_field_sum(&l.t)?;
        raw[r] = i128::from(sum as u64 as i64);
    }
    let scale = f64::from(1u32 << FRAC_BITS).powi(2);
    let values = raw.iter().map(|&x| x as f64 / scale).collect();
    Ok(KernelRun {
        output: SpmvOutput { raw, values },
        ledger: array.take_ledger(),
    })
}

/// Signed fixed-point product of two quantized values, used by the oracle
/// and the analytic model's statistics.
pub(crate) fn quantized_product(x: f64, y: f64) -> Result<i128> {
    Ok(signed(quantize(x)?) * signed(quantize(y)?))
}
