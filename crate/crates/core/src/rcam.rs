//! Bit-level model of an RCAM array and its peripheral circuitry.
//!
//! Cells are stored column-major as packed bit vectors, one `u64` word per 64
//! rows, so that a compare or write touches each masked bit column once for
//! all rows. Every associative instruction charges the array's [`Ledger`].
//!
//! Bit order: within a field, key bit `k` addresses column `lo + k` (least
//! significant bit first). A key for a list of fields is the concatenation
//! of the per-field keys in list order.

use std::borrow::Cow;
use std::fmt;

use crate::error::{Error, Result};
use crate::perfmodel::{Instr, Ledger, ModelConfig, TagOpKind};

/// Rows per RCAM module. Only annotates reports; rows form one logical space
/// across daisy-chained modules.
pub const DEFAULT_MODULE_SIZE: usize = 1 << 20;

/// A named, contiguous, inclusive range of bit columns.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    name: Cow<'static, str>,
    lo: usize,
    hi: usize,
}

impl FieldSpec {
    /// Panics if `hi < lo`.
    pub fn new(name: impl Into<Cow<'static, str>>, lo: usize, hi: usize) -> Self {
        assert!(lo <= hi, "field range [{lo}, {hi}] is reversed");
        Self {
            name: name.into(),
            lo,
            hi,
        }
    }

    /// Compile-time constructor for fixed layouts.
    pub const fn const_new(name: &'static str, lo: usize, hi: usize) -> Self {
        assert!(lo <= hi, "field range is reversed");
        Self {
            name: Cow::Borrowed(name),
            lo,
            hi,
        }
    }

    /// A field of `width` bits starting at column `lo`. Panics on zero width.
    pub fn with_width(name: impl Into<Cow<'static, str>>, lo: usize, width: usize) -> Self {
        assert!(width > 0, "zero-width field");
        Self::new(name, lo, lo + width - 1)
    }

    pub fn bit(name: impl Into<Cow<'static, str>>, col: usize) -> Self {
        Self::new(name, col, col)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn width(&self) -> usize {
        self.hi - self.lo + 1
    }

    /// Column of bit `i` of this field.
    pub fn col(&self, i: usize) -> usize {
        debug_assert!(i < self.width());
        self.lo + i
    }

    /// Single-bit field for bit `i`.
    pub fn bit_field(&self, i: usize) -> FieldSpec {
        assert!(i < self.width(), "bit {i} outside field `{}`", self.name);
        FieldSpec::bit(format!("{}[{i}]", self.name), self.lo + i)
    }

    /// Sub-field of bits `[from, from + width)`.
    pub fn slice(&self, from: usize, width: usize) -> FieldSpec {
        assert!(
            from + width <= self.width(),
            "slice outside field `{}`",
            self.name
        );
        FieldSpec::with_width(
            format!("{}[{}..{}]", self.name, from, from + width),
            self.lo + from,
            width,
        )
    }

    pub fn overlaps(&self, other: &FieldSpec) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    fn check(&self, width: usize) -> Result<()> {
        if self.hi >= width {
            return Err(Error::FieldOutOfBounds {
                name: self.name.to_string(),
                lo: self.lo,
                hi: self.hi,
                width,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}..={}]", self.name, self.lo, self.hi)
    }
}

/// An arbitrary-length bit word, least significant bit first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitWord(Vec<bool>);

impl BitWord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Low `width` bits of `value`. Fails if `value` does not fit.
    pub fn from_value(value: u128, width: usize) -> Result<Self> {
        let mut w = Self::new();
        w.push_value(value, width)?;
        Ok(w)
    }

    /// Parses a pattern string such as `"001"`; character `i` becomes bit `i`.
    pub fn from_pattern(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidTable(format!(
                    "bad pattern character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn push_value(&mut self, value: u128, width: usize) -> Result<()> {
        if width < 128 && value >> width != 0 {
            return Err(Error::ValueTooWide { value, width });
        }
        self.0
            .extend((0..width).map(|i| i < 128 && (value >> i) & 1 == 1));
        Ok(())
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Unsigned value of bits `[from, from + width)`.
    pub fn value(&self, from: usize, width: usize) -> u128 {
        assert!(width <= 128);
        self.0[from..from + width]
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u128::from(b) << i))
    }

    pub fn to_u128(&self) -> u128 {
        self.value(0, self.len())
    }
}

/// One tag latch per row.
#[derive(Clone, PartialEq, Eq)]
pub struct TagVector {
    words: Vec<u64>,
    len: usize,
}

impl TagVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut t = Self {
            words: vec![!0; len.div_ceil(64)],
            len,
        };
        t.clear_tail();
        t
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut t = Self::zeros(bits.len());
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            t.words[i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, row: usize) -> bool {
        assert!(row < self.len);
        self.words[row / 64] >> (row % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|w| *w != 0)
    }

    pub fn first_set(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + bit)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|r| self.get(r)).collect()
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for TagVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            let s: String = (0..self.len)
                .map(|r| if self.get(r) { '1' } else { '0' })
                .collect();
            write!(f, "TagVector({s})")
        } else {
            write!(f, "TagVector(len={}, set={})", self.len, self.count_ones())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftDirection {
    /// Toward row 0.
    Up,
    /// Toward the last row.
    Down,
}

/// The simulated storage: `rows` x `width` bit cells plus key, mask and tag
/// state.
#[derive(Clone)]
pub struct RcamArray {
    rows: usize,
    width: usize,
    module_size: usize,
    cols: Vec<Vec<u64>>,
    key: Vec<u64>,
    mask: Vec<u64>,
    tags: TagVector,
    config: ModelConfig,
    ledger: Ledger,
}

impl fmt::Debug for RcamArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RcamArray")
            .field("rows", &self.rows)
            .field("width", &self.width)
            .field("module_size", &self.module_size)
            .field("tags", &self.tags)
            .finish_non_exhaustive()
    }
}

/// Resolved (column, bit) pairs. Returns `None` when a column is required to
/// be both 0 and 1.
fn resolve(pairs: &mut Vec<(usize, bool)>) -> Option<()> {
    pairs.sort_unstable();
    pairs.dedup();
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        None
    } else {
        Some(())
    }
}

impl RcamArray {
    pub fn new(rows: usize, width: usize) -> Self {
        Self::with_config(rows, width, ModelConfig::default())
    }

    pub fn with_config(rows: usize, width: usize, config: ModelConfig) -> Self {
        let words = rows.div_ceil(64);
        Self {
            rows,
            width,
            module_size: DEFAULT_MODULE_SIZE,
            cols: vec![vec![0; words]; width],
            key: vec![0; width.div_ceil(64)],
            mask: vec![0; width.div_ceil(64)],
            tags: TagVector::zeros(rows),
            config,
            ledger: Ledger::new(rows as u64),
        }
    }

    pub fn with_module_size(mut self, module_size: usize) -> Self {
        assert!(module_size > 0);
        self.module_size = module_size;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn module_size(&self) -> usize {
        self.module_size
    }

    /// Number of daisy-chained modules needed to hold the rows.
    pub fn modules(&self) -> usize {
        self.rows.div_ceil(self.module_size).max(1)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn tags(&self) -> &TagVector {
        &self.tags
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut Ledger {
        &mut self.ledger
    }

    /// Hands the ledger to the caller and starts a fresh one.
    pub fn take_ledger(&mut self) -> Ledger {
        let traced = self.ledger.trace().is_some();
        let mut fresh = Ledger::new(self.rows as u64);
        if traced {
            fresh.enable_trace();
        }
        std::mem::replace(&mut self.ledger, fresh)
    }

    /// Bit `j` of the key register.
    pub fn key_bit(&self, j: usize) -> bool {
        self.key[j / 64] >> (j % 64) & 1 == 1
    }

    /// Bit `j` of the mask register.
    pub fn mask_bit(&self, j: usize) -> bool {
        self.mask[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cols[col][row / 64] >> (row % 64) & 1 == 1
    }

    fn charge(&mut self, instr: Instr) {
        self.ledger.charge(instr, &self.config);
    }

    fn pairs(&self, key: &BitWord, fields: &[FieldSpec]) -> Result<Vec<(usize, bool)>> {
        let expected: usize = fields.iter().map(FieldSpec::width).sum();
        if key.len() != expected {
            return Err(Error::KeyWidth {
                expected,
                got: key.len(),
            });
        }
        let mut out = Vec::with_capacity(expected);
        let mut bits = key.bits().iter();
        for f in fields {
            f.check(self.width)?;
            for col in f.lo..=f.hi {
                out.push((col, *bits.next().expect("width checked")));
            }
        }
        Ok(out)
    }

    fn check_cols(&self, pairs: &[(usize, bool)]) -> Result<()> {
        match pairs.iter().find(|(c, _)| *c >= self.width) {
            Some(&(c, _)) => Err(Error::FieldOutOfBounds {
                name: format!("col{c}"),
                lo: c,
                hi: c,
                width: self.width,
            }),
            None => Ok(()),
        }
    }

    fn load_registers(&mut self, pairs: &[(usize, bool)]) {
        self.mask.iter_mut().for_each(|w| *w = 0);
        for &(c, b) in pairs {
            self.mask[c / 64] |= 1 << (c % 64);
            if b {
                self.key[c / 64] |= 1 << (c % 64);
            } else {
                self.key[c / 64] &= !(1 << (c % 64));
            }
        }
    }

    /// Compares `key` against `fields` in every row and latches the result
    /// into the tags.
    ///
    /// A row is tagged iff every masked column equals its key bit. An empty
    /// field list masks nothing and tags every row. If the same column is
    /// listed twice with different key bits no row can match.
    pub fn compare(&mut self, key: &BitWord, fields: &[FieldSpec]) -> Result<&TagVector> {
        let pairs = self.pairs(key, fields)?;
        self.compare_bits(pairs)?;
        Ok(&self.tags)
    }

    /// Column-level compare: each `(column, bit)` pair is one masked key bit.
    pub fn compare_bits(&mut self, mut pairs: Vec<(usize, bool)>) -> Result<()> {
        self.check_cols(&pairs)?;
        let satisfiable = resolve(&mut pairs).is_some();
        if satisfiable {
            self.load_registers(&pairs);
            let cols = &self.cols;
            let last = self.tags.words.len().saturating_sub(1);
            let tail = match self.rows % 64 {
                0 => !0u64,
                r => (1u64 << r) - 1,
            };
            for (w, tag) in self.tags.words.iter_mut().enumerate() {
                let mut t = if w == last { tail } else { !0 };
                for &(c, b) in &pairs {
                    let x = cols[c][w];
                    t &= if b { x } else { !x };
                    if t == 0 {
                        break;
                    }
                }
                *tag = t;
            }
        } else {
            // the registers still see every listed column; conflicting
            // columns hold the last key bit given
            pairs.dedup_by_key(|p| p.0);
            self.load_registers(&pairs);
            self.tags.words.iter_mut().for_each(|w| *w = 0);
        }
        let masked_bits = pairs.len() as u32;
        self.charge(Instr::Compare {
            masked_bits,
            rows: self.rows as u64,
        });
        Ok(())
    }

    /// Writes `key` into `fields` of every tagged row.
    pub fn write(&mut self, key: &BitWord, fields: &[FieldSpec]) -> Result<()> {
        let pairs = self.pairs(key, fields)?;
        self.write_bits(pairs)
    }

    pub fn write_bits(&mut self, mut pairs: Vec<(usize, bool)>) -> Result<()> {
        self.check_cols(&pairs)?;
        if resolve(&mut pairs).is_none() {
            let col = pairs.windows(2).find(|w| w[0].0 == w[1].0).map(|w| w[0].0);
            return Err(Error::ConflictingWrite(col.unwrap_or_default()));
        }
        self.load_registers(&pairs);
        let tags = &self.tags.words;
        for &(c, b) in &pairs {
            let col = &mut self.cols[c];
            if b {
                col.iter_mut().zip(tags).for_each(|(x, t)| *x |= t);
            } else {
                col.iter_mut().zip(tags).for_each(|(x, t)| *x &= !t);
            }
        }
        let tagged = self.tags.count_ones();
        self.charge(Instr::Write {
            masked_bits: pairs.len() as u32,
            tagged,
        });
        Ok(())
    }

    /// Reads `fields` from the lowest-index tagged row into the key register.
    pub fn read(&mut self, fields: &[FieldSpec]) -> Result<BitWord> {
        for f in fields {
            f.check(self.width)?;
        }
        let row = self.tags.first_set().ok_or(Error::EmptySelection)?;
        let mut word = BitWord::new();
        let mut pairs = Vec::new();
        for f in fields {
            for col in f.lo..=f.hi {
                let bit = self.cell(row, col);
                word.push(bit);
                pairs.push((col, bit));
            }
        }
        resolve(&mut pairs);
        self.load_registers(&pairs);
        self.charge(Instr::Read {
            masked_bits: pairs.len() as u32,
        });
        Ok(word)
    }

    /// Keeps only the lowest-index set tag.
    pub fn first_match(&mut self) {
        if let Some(first) = self.tags.first_set() {
            self.tags.words.iter_mut().for_each(|w| *w = 0);
            self.tags.words[first / 64] = 1 << (first % 64);
        }
        self.charge(Instr::TagOp {
            kind: TagOpKind::FirstMatch,
        });
    }

    /// OR of all tags.
    pub fn if_match(&mut self) -> bool {
        self.charge(Instr::TagOp {
            kind: TagOpKind::IfMatch,
        });
        self.tags.any()
    }

    /// Number of set tags through the reduction tree.
    pub fn reduce_popcount(&mut self) -> u64 {
        self.charge(Instr::Reduce {
            passes: 1,
            rows: self.rows as u64,
        });
        self.tags.count_ones()
    }

    /// Sum of the unsigned `field` values over tagged rows, one tree pass per
    /// field bit. Fields wider than 64 bits are rejected.
    pub fn reduce_field_sum(&mut self, field: &FieldSpec) -> Result<u128> {
        field.check(self.width)?;
        if field.width() > 64 {
            return Err(Error::layout(format!(
                "reduction over {}-bit field `{}` exceeds 64 bits",
                field.width(),
                field.name()
            )));
        }
        let tags = &self.tags.words;
        let sum = (0..field.width()).fold(0u128, |acc, i| {
            let ones: u64 = self.cols[field.lo + i]
                .iter()
                .zip(tags)
                .map(|(x, t)| u64::from((x & t).count_ones()))
                .sum();
            acc + (u128::from(ones) << i)
        });
        self.charge(Instr::Reduce {
            passes: field.width() as u32,
            rows: self.rows as u64,
        });
        Ok(sum)
    }

    /// Moves every tag one row along the daisy chain; the vacated end reads 0.
    pub fn shift_tags(&mut self, direction: ShiftDirection) {
        let words = &mut self.tags.words;
        match direction {
            ShiftDirection::Down => {
                let mut carry = 0;
                for w in words.iter_mut() {
                    let next = *w >> 63;
                    *w = (*w << 1) | carry;
                    carry = next;
                }
            }
            ShiftDirection::Up => {
                let mut carry = 0;
                for w in words.iter_mut().rev() {
                    let next = *w & 1;
                    *w = (*w >> 1) | (carry << 63);
                    carry = next;
                }
            }
        }
        self.tags.clear_tail();
        self.charge(Instr::TagOp {
            kind: TagOpKind::Shift,
        });
    }

    /// Overwrites the tag latches directly. Not an array instruction; used to
    /// set up scenarios and free of charge.
    pub fn set_tags(&mut self, tags: TagVector) -> Result<()> {
        if tags.len() != self.rows {
            return Err(Error::dimension(format!(
                "tag vector of {} entries for {} rows",
                tags.len(),
                self.rows
            )));
        }
        self.tags = tags;
        Ok(())
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row >= self.rows {
            return Err(Error::RowOutOfBounds {
                row,
                rows: self.rows,
            });
        }
        Ok(())
    }

    /// Stores `value` into `field` of `row`, bypassing the associative path.
    pub fn load_row(&mut self, row: usize, field: &FieldSpec, value: u128) -> Result<()> {
        self.check_row(row)?;
        field.check(self.width)?;
        let w = field.width();
        if w < 128 && value >> w != 0 {
            return Err(Error::ValueTooWide { value, width: w });
        }
        let (word, bit) = (row / 64, row % 64);
        for i in 0..w {
            let col = &mut self.cols[field.lo + i][word];
            if i < 128 && (value >> i) & 1 == 1 {
                *col |= 1 << bit;
            } else {
                *col &= !(1 << bit);
            }
        }
        Ok(())
    }

    /// Loads one value per row into `field`, starting at row 0.
    pub fn load_column(&mut self, field: &FieldSpec, values: &[u128]) -> Result<()> {
        field.check(self.width)?;
        if values.len() > self.rows {
            return Err(Error::dimension(format!(
                "{} values for {} rows",
                values.len(),
                self.rows
            )));
        }
        for (row, &v) in values.iter().enumerate() {
            self.load_row(row, field, v)?;
        }
        Ok(())
    }

    /// Current value of `field` in `row`, free of charge.
    pub fn peek(&self, row: usize, field: &FieldSpec) -> Result<u128> {
        self.check_row(row)?;
        field.check(self.width)?;
        if field.width() > 128 {
            return Err(Error::layout("peek of a field wider than 128 bits"));
        }
        let (word, bit) = (row / 64, row % 64);
        Ok((0..field.width()).fold(0u128, |acc, i| {
            acc | (u128::from((self.cols[field.lo + i][word] >> bit) & 1) << i)
        }))
    }

    /// `field` of every row.
    pub fn field_values(&self, field: &FieldSpec) -> Result<Vec<u128>> {
        (0..self.rows).map(|r| self.peek(r, field)).collect()
    }

    /// All rows as full-width words.
    pub fn dump_rows(&self) -> Vec<BitWord> {
        (0..self.rows)
            .map(|r| BitWord::from_bits((0..self.width).map(|c| self.cell(r, c)).collect()))
            .collect()
    }
}
