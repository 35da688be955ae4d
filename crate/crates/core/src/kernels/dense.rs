//! Euclidean distance and dot product, one sample per row.
//!
//! Both loop over attributes only: each step broadcasts one scalar to every
//! row and runs a fixed microcode sequence on all samples at once, so the
//! cycle count depends on the dimensions and never on the sample count.

use super::{ceil_log2, check_rows, Columns, KernelRun, SampleSet};
use crate::error::{Error, Result};
use crate::microcode::{
    broadcast_zero, vec_add, vec_mult, vec_square, vec_sub, MultLayout, Operand, VectorLayout,
};
use crate::rcam::{BitWord, FieldSpec, RcamArray};

struct Layout {
    x: Vec<FieldSpec>,
    zero: FieldSpec,
    scalar: FieldSpec,
    carry: FieldSpec,
    /// Difference (distance only).
    diff: Option<FieldSpec>,
    prod: FieldSpec,
    acc: [FieldSpec; 2],
    m: usize,
}

impl Layout {
    fn carries(&self) -> [FieldSpec; 2] {
        [self.carry.bit_field(0), self.carry.bit_field(1)]
    }

    fn load(&self, array: &mut RcamArray, samples: &SampleSet) -> Result<()> {
        for (row, s) in samples.samples().enumerate() {
            for (f, v) in self.x.iter().zip(s) {
                array.load_row(row, f, u128::from(*v))?;
            }
            array.load_row(row, &self.zero, 0)?;
        }
        Ok(())
    }
}

fn ed_layout(n_attrs: usize, w: usize, width: usize) -> Result<Layout> {
    let m = 2 * w + ceil_log2(n_attrs);
    let mut c = Columns::new(width);
    let x = (0..n_attrs)
        .map(|_| c.take("x", w))
        .collect::<Result<_>>()?;
    Ok(Layout {
        x,
        zero: c.take("zero", 1)?,
        scalar: c.take("center", w)?,
        carry: c.take("carry", 2)?,
        diff: Some(c.take("diff", m)?),
        prod: c.take("prod", 2 * m)?,
        acc: [c.take("acc0", m)?, c.take("acc1", m)?],
        m,
    })
}

fn dp_layout(n: usize, w: usize, width: usize) -> Result<Layout> {
    let m = 2 * w + ceil_log2(n);
    let mut c = Columns::new(width);
    let x = (0..n).map(|_| c.take("x", w)).collect::<Result<_>>()?;
    Ok(Layout {
        x,
        zero: c.take("zero", 1)?,
        scalar: c.take("h", w)?,
        carry: c.take("carry", 2)?,
        diff: None,
        prod: c.take("prod", 2 * w)?,
        acc: [c.take("acc0", m)?, c.take("acc1", m)?],
        m,
    })
}

/// Row width the distance kernel needs.
pub fn euclidean_width(n_attrs: usize, attr_width: usize) -> usize {
    let m = 2 * attr_width + ceil_log2(n_attrs);
    n_attrs * attr_width + attr_width + 5 * m + 3
}

/// Row width the dot-product kernel needs.
pub fn dot_product_width(n: usize, width: usize) -> usize {
    let m = 2 * width + ceil_log2(n);
    (n + 3) * width + 2 * m + 3
}

fn check_scalars(values: &[u64], samples: &SampleSet, what: &str) -> Result<()> {
    if values.len() != samples.n_attrs() {
        return Err(Error::dimension(format!(
            "{what} has {} attributes, samples have {}",
            values.len(),
            samples.n_attrs()
        )));
    }
    if let Some(v) = values.iter().find(|v| **v >> samples.attr_width() != 0) {
        return Err(Error::ValueTooWide {
            value: u128::from(*v),
            width: samples.attr_width(),
        });
    }
    Ok(())
}

/// Writes `value` into `field` and zeros `clear` in every row, as one
/// broadcast.
fn broadcast_with_clear(
    array: &mut RcamArray,
    field: &FieldSpec,
    value: u64,
    clear: &[FieldSpec],
) -> Result<()> {
    let mut key = BitWord::from_value(u128::from(value), field.width())?;
    let mut fields = vec![field.clone()];
    for f in clear {
        (0..f.width()).for_each(|_| key.push(false));
        fields.push(f.clone());
    }
    array.compare(&BitWord::new(), &[])?;
    array.write(&key, &fields)
}

/// Squared distance of every sample to every center, indexed
/// `[sample][center]`.
pub fn euclidean_distance(
    array: &mut RcamArray,
    samples: &SampleSet,
    centers: &[Vec<u64>],
) -> Result<KernelRun<Vec<Vec<u128>>>> {
    check_rows(array, samples.n_samples())?;
    for c in centers {
        check_scalars(c, samples, "center")?;
    }
    let w = samples.attr_width();
    let l = ed_layout(samples.n_attrs(), w, array.width())?;
    l.load(array, samples)?;
    let m = l.m;
    let diff = l.diff.clone().expect("distance layout");
    let center = Operand::zero_extended(&l.scalar, m, &l.zero)?;
    let mut out = vec![Vec::with_capacity(centers.len()); samples.n_samples()];
    for c in centers {
        broadcast_zero(array, &[l.acc[0].clone()])?;
        let mut cur = 0;
        for (x, &cv) in l.x.iter().zip(c) {
            broadcast_with_clear(array, &l.scalar, cv, &[l.carry.clone(), l.prod.clone()])?;
            let sub = VectorLayout::new(
                Operand::zero_extended(x, m, &l.zero)?,
                center.clone(),
                diff.clone(),
                l.carries(),
            );
            vec_sub(array, &sub, m)?;
            vec_square(array, &Operand::new(&diff), &l.prod, m)?;
            broadcast_zero(array, std::slice::from_ref(&l.carry))?;
            let add = VectorLayout::new(
                &l.acc[cur],
                &l.prod.slice(0, m),
                l.acc[1 - cur].clone(),
                l.carries(),
            );
            vec_add(array, &add, m)?;
            cur = 1 - cur;
        }
        for (row, d) in array.field_values(&l.acc[cur])?.into_iter().enumerate() {
            out[row].push(d);
        }
    }
    Ok(KernelRun {
        output: out,
        ledger: array.take_ledger(),
    })
}

/// `Σ_i x_i·h_i` for every vector `x` in `vectors`.
pub fn dot_product(
    array: &mut RcamArray,
    vectors: &SampleSet,
    h: &[u64],
) -> Result<KernelRun<Vec<u128>>> {
    check_rows(array, vectors.n_samples())?;
    check_scalars(h, vectors, "H")?;
    let w = vectors.attr_width();
    let l = dp_layout(vectors.n_attrs(), w, array.width())?;
    l.load(array, vectors)?;
    let m = l.m;
    let prod = Operand::zero_extended(&l.prod, m, &l.zero)?;
    broadcast_zero(array, &[l.acc[0].clone()])?;
    let mut cur = 0;
    for (x, &hv) in l.x.iter().zip(h) {
        broadcast_with_clear(array, &l.scalar, hv, &[l.carry.clone(), l.prod.clone()])?;
        vec_mult(array, &MultLayout::new(x, &l.scalar, l.prod.clone()), w)?;
        let add = VectorLayout::new(
            &l.acc[cur],
            prod.clone(),
            l.acc[1 - cur].clone(),
            l.carries(),
        );
        vec_add(array, &add, m)?;
        cur = 1 - cur;
    }
    Ok(KernelRun {
        output: array.field_values(&l.acc[cur])?,
        ledger: array.take_ledger(),
    })
}
