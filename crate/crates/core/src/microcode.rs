//! Word-parallel, bit-serial arithmetic lowered to compare/write passes.
//!
//! Every operation here is a fixed script of array instructions whose length
//! depends only on operand widths, never on the number of rows.
//!
//! Addition and subtraction run one full-adder (full-subtractor) table per
//! bit: 8 entries, each one compare and one write. The carry alternates
//! between two columns, read from one and written to the other, so inputs and
//! outputs of every pass are disjoint.
//!
//! Multiplication accumulates in place. Pass `i` adds the multiplicand into
//! product bits `i..i+m` of every row whose multiplier bit `i` is set, using
//! product bit `i + m` (still zero at that point) as its carry column. In-place
//! tables are only accepted in an entry order that has been checked to be
//! free of double matches, see [`exec_truth_table_ordered`].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::perfmodel::ArithOp;
use crate::rcam::{BitWord, FieldSpec, RcamArray};

/// A (possibly partial) Boolean function given as input/output patterns.
///
/// Pattern bit `k` belongs to field `k` of the field lists the table is run
/// against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    inputs: usize,
    outputs: usize,
    entries: Vec<(BitWord, BitWord)>,
}

impl TruthTable {
    pub fn new(inputs: usize, outputs: usize, entries: Vec<(BitWord, BitWord)>) -> Result<Self> {
        if inputs < usize::BITS as usize && entries.len() > 1usize << inputs {
            return Err(Error::InvalidTable(format!(
                "{} entries exceed 2^{inputs}",
                entries.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, o) in &entries {
            if i.len() != inputs || o.len() != outputs {
                return Err(Error::InvalidTable(format!(
                    "entry widths {}/{} do not match table widths {inputs}/{outputs}",
                    i.len(),
                    o.len()
                )));
            }
            if !seen.insert(i.clone()) {
                return Err(Error::InvalidTable(format!(
                    "duplicate input pattern {i:?}"
                )));
            }
        }
        Ok(Self {
            inputs,
            outputs,
            entries,
        })
    }

    /// Builds a table from pattern strings, e.g. `[("001", "01")]`.
    pub fn from_patterns(inputs: usize, outputs: usize, rows: &[(&str, &str)]) -> Result<Self> {
        let entries = rows
            .iter()
            .map(|(i, o)| Ok((BitWord::from_pattern(i)?, BitWord::from_pattern(o)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(inputs, outputs, entries)
    }

    /// Complete table of `f`, entries in ascending pattern order. Pattern
    /// strings read with field 0 as the leftmost (most significant) symbol,
    /// so `f` receives field 0 in bit `inputs - 1` and must return field 0 of
    /// its output in bit `outputs - 1`.
    pub fn from_fn(inputs: usize, outputs: usize, f: impl Fn(u32) -> u32) -> Self {
        assert!(inputs < 32 && outputs <= 32);
        let entries = (0..1u32 << inputs)
            .map(|x| {
                let y = f(x);
                (msb_first(x, inputs), msb_first(y, outputs))
            })
            .collect();
        Self {
            inputs,
            outputs,
            entries,
        }
    }

    /// Inputs `(c_in, a, b)`, outputs `(c_out, s)`.
    pub fn full_adder() -> Self {
        Self::from_fn(3, 2, |x| x.count_ones())
    }

    /// Inputs `(b_in, a, b)`, outputs `(b_out, d)` with `d = a - b - b_in`.
    pub fn full_subtractor() -> Self {
        Self::from_fn(3, 2, |x| {
            let (bin, a, b) = ((x >> 2) & 1, (x >> 1) & 1, x & 1);
            let d = a ^ b ^ bin;
            let bout = u32::from(a < b + bin);
            (bout << 1) | d
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn entries(&self) -> &[(BitWord, BitWord)] {
        &self.entries
    }

    pub fn is_complete(&self) -> bool {
        self.inputs < 32 && self.entries.len() == 1 << self.inputs
    }

    pub fn lookup(&self, input: &BitWord) -> Option<&BitWord> {
        self.entries
            .iter()
            .find(|(i, _)| i == input)
            .map(|(_, o)| o)
    }

    /// Entries sorted by pattern string.
    fn ascending(&self) -> Vec<&(BitWord, BitWord)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|x, y| x.0.bits().cmp(y.0.bits()));
        v
    }
}

fn msb_first(x: u32, width: usize) -> BitWord {
    BitWord::from_bits((0..width).rev().map(|k| (x >> k) & 1 == 1).collect())
}

fn columns(fields: &[FieldSpec]) -> Vec<usize> {
    fields.iter().flat_map(|f| f.lo()..=f.hi()).collect()
}

fn check_widths(
    table: &TruthTable,
    in_fields: &[FieldSpec],
    out_fields: &[FieldSpec],
) -> Result<()> {
    let (iw, ow) = (columns(in_fields).len(), columns(out_fields).len());
    if iw != table.inputs || ow != table.outputs {
        return Err(Error::InvalidTable(format!(
            "fields span {iw} in / {ow} out bits, table has {} / {}",
            table.inputs, table.outputs
        )));
    }
    Ok(())
}

fn pairs(cols: &[usize], pattern: &BitWord) -> Vec<(usize, bool)> {
    cols.iter()
        .copied()
        .zip(pattern.bits().iter().copied())
        .collect()
}

/// Runs `table` over every row: per entry, in ascending pattern order, one
/// compare of the input pattern and one write of the output pattern.
///
/// Input and output columns must be disjoint; otherwise a row rewritten by
/// one entry could match a later one.
pub fn exec_truth_table(
    array: &mut RcamArray,
    table: &TruthTable,
    in_fields: &[FieldSpec],
    out_fields: &[FieldSpec],
) -> Result<()> {
    check_widths(table, in_fields, out_fields)?;
    let in_cols = columns(in_fields);
    let out_cols = columns(out_fields);
    if let Some(c) = out_cols.iter().find(|c| in_cols.contains(c)) {
        return Err(Error::Hazard(format!(
            "column {c} is both table input and output"
        )));
    }
    for (i, o) in table.ascending() {
        array.compare_bits(pairs(&in_cols, i))?;
        array.write_bits(pairs(&out_cols, o))?;
    }
    Ok(())
}

/// Runs `table` in its stored entry order, allowing output columns that are
/// also inputs.
///
/// The order is verified first: any row that entry `k` moves onto the input
/// pattern of a later entry must be left unchanged by that entry. Entries
/// whose own pattern is self-contradictory (an aliased column required to be
/// both 0 and 1) can never match and are skipped by the check.
pub fn exec_truth_table_ordered(
    array: &mut RcamArray,
    table: &TruthTable,
    in_fields: &[FieldSpec],
    out_fields: &[FieldSpec],
) -> Result<()> {
    check_widths(table, in_fields, out_fields)?;
    let in_cols = columns(in_fields);
    let out_cols = columns(out_fields);
    verify_order(table, &in_cols, &out_cols)?;
    for (i, o) in table.entries() {
        array.compare_bits(pairs(&in_cols, i))?;
        array.write_bits(pairs(&out_cols, o))?;
    }
    Ok(())
}

/// Column assignment implied by `pattern` on `cols`, or `None` if the pattern
/// contradicts itself.
fn assignment(cols: &[usize], pattern: &BitWord) -> Option<HashMap<usize, bool>> {
    let mut m = HashMap::new();
    for (c, b) in cols.iter().zip(pattern.bits()) {
        if *m.entry(*c).or_insert(*b) != *b {
            return None;
        }
    }
    Some(m)
}

fn verify_order(table: &TruthTable, in_cols: &[usize], out_cols: &[usize]) -> Result<()> {
    let apply = |state: &HashMap<usize, bool>, out: &BitWord| {
        let mut s = state.clone();
        for (c, b) in out_cols.iter().zip(out.bits()) {
            s.insert(*c, *b);
        }
        s
    };
    let entries = table.entries();
    for (k, (ik, ok)) in entries.iter().enumerate() {
        let Some(state) = assignment(in_cols, ik) else {
            continue;
        };
        let after = apply(&state, ok);
        let landed = BitWord::from_bits(in_cols.iter().map(|c| after[c]).collect());
        if landed == *ik {
            continue;
        }
        for (il, ol) in &entries[k + 1..] {
            if *il == landed && apply(&after, ol) != after {
                return Err(Error::Hazard(format!(
                    "entry {ik:?} rewrites rows onto later entry {il:?}"
                )));
            }
        }
    }
    Ok(())
}

/// An m-bit operand given bit by bit, so narrower fields can be widened with
/// an always-zero column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operand {
    bits: Vec<FieldSpec>,
}

impl Operand {
    pub fn new(field: &FieldSpec) -> Self {
        Self {
            bits: (0..field.width()).map(|i| field.bit_field(i)).collect(),
        }
    }

    /// `field` padded to `width` bits with `zero`, a column that holds 0 in
    /// every row.
    pub fn zero_extended(field: &FieldSpec, width: usize, zero: &FieldSpec) -> Result<Self> {
        if field.width() > width || zero.width() != 1 {
            return Err(Error::layout(format!(
                "cannot widen {field:?} to {width} bits with {zero:?}"
            )));
        }
        let mut op = Self::new(field);
        op.bits.resize(width, zero.clone());
        Ok(op)
    }

    /// The constant 0, `width` bits wide.
    pub fn zeros(width: usize, zero: &FieldSpec) -> Self {
        Self {
            bits: vec![zero.clone(); width],
        }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, i: usize) -> &FieldSpec {
        &self.bits[i]
    }

    fn cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().map(FieldSpec::lo)
    }
}

impl From<&FieldSpec> for Operand {
    fn from(f: &FieldSpec) -> Self {
        Operand::new(f)
    }
}

/// Fields for an m-bit add or subtract: `s = a ± b`.
#[derive(Clone, Debug)]
pub struct VectorLayout {
    pub a: Operand,
    pub b: Operand,
    pub s: FieldSpec,
    /// Alternating carry (borrow) columns. `carry[0]` is the carry in and
    /// must be zero; the carry out of bit `m - 1` lands in `carry[m % 2]`.
    pub carry: [FieldSpec; 2],
}

impl VectorLayout {
    pub fn new(
        a: impl Into<Operand>,
        b: impl Into<Operand>,
        s: FieldSpec,
        carry: [FieldSpec; 2],
    ) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            s,
            carry,
        }
    }

    pub fn final_carry(&self, m: usize) -> &FieldSpec {
        &self.carry[m % 2]
    }

    fn check(&self, m: usize, width: usize) -> Result<()> {
        if m == 0 {
            return Err(Error::layout("operand width must be at least 1"));
        }
        if self.a.width() != m || self.b.width() != m || self.s.width() != m {
            return Err(Error::layout(format!(
                "operand widths {}/{}/{} do not match m = {m}",
                self.a.width(),
                self.b.width(),
                self.s.width()
            )));
        }
        if self.carry.iter().any(|c| c.width() != 1) {
            return Err(Error::layout("carry fields must be single bits"));
        }
        let outputs = [&self.s, &self.carry[0], &self.carry[1]];
        for (i, x) in outputs.iter().enumerate() {
            if x.hi() >= width {
                return Err(Error::layout(format!("{x:?} exceeds row width {width}")));
            }
            for y in &outputs[i + 1..] {
                if x.overlaps(y) {
                    return Err(Error::layout(format!("{x:?} overlaps {y:?}")));
                }
            }
            if let Some(c) = self
                .a
                .cols()
                .chain(self.b.cols())
                .find(|c| *c >= x.lo() && *c <= x.hi())
            {
                return Err(Error::layout(format!("operand column {c} overlaps {x:?}")));
            }
        }
        Ok(())
    }
}

fn ripple(
    array: &mut RcamArray,
    layout: &VectorLayout,
    m: usize,
    table: &TruthTable,
) -> Result<()> {
    layout.check(m, array.width())?;
    for i in 0..m {
        let ins = [
            layout.carry[i % 2].clone(),
            layout.a.bit(i).clone(),
            layout.b.bit(i).clone(),
        ];
        let outs = [layout.carry[(i + 1) % 2].clone(), layout.s.bit_field(i)];
        exec_truth_table(array, table, &ins, &outs)?;
    }
    Ok(())
}

/// `s = (a + b) mod 2^m` in every row: 8 compares and 8 writes per bit.
pub fn vec_add(array: &mut RcamArray, layout: &VectorLayout, m: usize) -> Result<()> {
    let mark = array.ledger().mark();
    ripple(array, layout, m, &TruthTable::full_adder())?;
    array.ledger_mut().note_arith(ArithOp::Add, mark);
    Ok(())
}

/// `s = (a - b) mod 2^m` in every row; the final borrow is left in
/// `layout.final_carry(m)`.
pub fn vec_sub(array: &mut RcamArray, layout: &VectorLayout, m: usize) -> Result<()> {
    let mark = array.ledger().mark();
    ripple(array, layout, m, &TruthTable::full_subtractor())?;
    array.ledger_mut().note_arith(ArithOp::Sub, mark);
    Ok(())
}

/// Fields for `p = a * b` with a 2m-bit product.
#[derive(Clone, Debug)]
pub struct MultLayout {
    pub a: Operand,
    pub b: Operand,
    /// Must be zero on entry.
    pub p: FieldSpec,
}

impl MultLayout {
    pub fn new(a: impl Into<Operand>, b: impl Into<Operand>, p: FieldSpec) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            p,
        }
    }

    fn check(&self, m: usize, width: usize) -> Result<()> {
        if m == 0 {
            return Err(Error::layout("operand width must be at least 1"));
        }
        if self.a.width() != m || self.b.width() != m || self.p.width() != 2 * m {
            return Err(Error::layout(format!(
                "multiply needs m-bit operands and a 2m-bit product (m = {m})"
            )));
        }
        if self.p.hi() >= width {
            return Err(Error::layout(format!(
                "{:?} exceeds row width {width}",
                self.p
            )));
        }
        if let Some(c) = self
            .a
            .cols()
            .chain(self.b.cols())
            .find(|c| *c >= self.p.lo() && *c <= self.p.hi())
        {
            return Err(Error::layout(format!(
                "operand column {c} overlaps product {:?}",
                self.p
            )));
        }
        Ok(())
    }
}

/// Conditional full-add step over `(b, c, a, p)` writing `(c, p)` in place,
/// only in rows with multiplier bit `b` set.
///
/// With notation `(c, a, p)`, entry 011 moves rows onto 110 and 010 onto 011;
/// 100 moves onto 001 and 101 onto 100. Running 011 before 010 and 100 before
/// 101 means no row is ever rewritten twice; rows landing on 110 or 001 are
/// rewritten with their current values.
fn conditional_add_table() -> TruthTable {
    let order = ["000", "001", "011", "010", "100", "101", "110", "111"];
    let entries = order
        .iter()
        .map(|pat| {
            let x = u32::from_str_radix(pat, 2).expect("static pattern");
            let sum = x.count_ones();
            let mut input = BitWord::from_pattern("1").expect("static");
            for b in BitWord::from_pattern(pat).expect("static").bits() {
                input.push(*b);
            }
            let out = BitWord::from_bits(vec![sum >= 2, sum & 1 == 1]);
            (input, out)
        })
        .collect();
    TruthTable::new(4, 2, entries).expect("static table")
}

fn mult_core(array: &mut RcamArray, layout: &MultLayout, m: usize) -> Result<()> {
    layout.check(m, array.width())?;
    let table = conditional_add_table();
    for i in 0..m {
        let carry = layout.p.bit_field(i + m);
        for j in 0..m {
            let p = layout.p.bit_field(i + j);
            let ins = [
                layout.b.bit(i).clone(),
                carry.clone(),
                layout.a.bit(j).clone(),
                p.clone(),
            ];
            let outs = [carry.clone(), p];
            exec_truth_table_ordered(array, &table, &ins, &outs)?;
        }
    }
    Ok(())
}

/// `p = a * b` (unsigned, exact in 2m bits): m conditional-add passes of m
/// bit steps each, 16·m² cycles at unit write latency.
pub fn vec_mult(array: &mut RcamArray, layout: &MultLayout, m: usize) -> Result<()> {
    let mark = array.ledger().mark();
    mult_core(array, layout, m)?;
    array.ledger_mut().note_arith(ArithOp::Mult, mark);
    Ok(())
}

/// `p = a * a`, with `a` read as both multiplicand and multiplier.
pub fn vec_square(array: &mut RcamArray, a: &Operand, p: &FieldSpec, m: usize) -> Result<()> {
    vec_mult(array, &MultLayout::new(a.clone(), a.clone(), p.clone()), m)
}

/// Writes `value` into `field` of every row (vacuous compare, then write).
pub fn broadcast_write(array: &mut RcamArray, field: &FieldSpec, value: u128) -> Result<()> {
    let key = BitWord::from_value(value, field.width())?;
    array.compare(&BitWord::new(), &[])?;
    array.write(&key, std::slice::from_ref(field))
}

/// Clears `fields` in every row with a single vacuous compare and write.
pub fn broadcast_zero(array: &mut RcamArray, fields: &[FieldSpec]) -> Result<()> {
    let width = fields.iter().map(FieldSpec::width).sum();
    array.compare(&BitWord::new(), &[])?;
    array.write(&BitWord::from_bits(vec![false; width]), fields)
}
