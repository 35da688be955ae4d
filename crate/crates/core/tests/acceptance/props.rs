//! Randomized invariants of the array and the microcode layer.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prins_core::microcode::{
    exec_truth_table, exec_truth_table_ordered, vec_add, vec_mult, vec_square, vec_sub, MultLayout,
    Operand, TruthTable, VectorLayout,
};
use prins_core::oracle::{oracle_add, oracle_mult, oracle_sub};
use prins_core::perfmodel::OpClass;
use prins_core::{BitWord, FieldSpec, RcamArray, ShiftDirection, TagVector};

pub const CASES: u32 = 10_000;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

/// Runs `test` on `cases` inputs drawn from `strategy`; returns the number
/// of cases on success.
pub fn check<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    runner(cases)
        .run(&strategy, test)
        .map(|_| cases)
        .map_err(|e| format!("{name}: {e}"))
}

fn random_array(rows: usize, width: usize, rng: &mut ChaCha8Rng) -> RcamArray {
    let mut a = RcamArray::new(rows, width);
    let row = FieldSpec::with_width("row", 0, width);
    for r in 0..rows {
        let v: u128 = rng.gen::<u128>() & ((1u128 << width) - 1);
        a.load_row(r, &row, v).unwrap();
    }
    a
}

/// Distinct single-column fields with random key bits.
fn random_key(width: usize, rng: &mut ChaCha8Rng) -> (BitWord, Vec<FieldSpec>) {
    let mut cols: Vec<usize> = (0..width).collect();
    cols.shuffle(rng);
    let k = rng.gen_range(0..=width.min(6));
    let fields: Vec<FieldSpec> = cols[..k].iter().map(|&c| FieldSpec::bit("c", c)).collect();
    let key = BitWord::from_bits((0..k).map(|_| rng.gen()).collect());
    (key, fields)
}

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=150, 1usize..=20, any::<u64>())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn compare_write_round_trip() -> Result<u32, String> {
    check(
        "compare-write round trip",
        CASES,
        dims(),
        |(rows, width, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = random_array(rows, width, &mut rng);
            let (k, fields) = random_key(width, &mut rng);
            let before = a.compare(&k, &fields).unwrap().clone();
            let k2 = BitWord::from_bits((0..k.len()).map(|_| rng.gen()).collect());
            a.write(&k2, &fields).unwrap();
            let after = a.compare(&k2, &fields).unwrap();
            let kept = before.iter_ones().all(|r| after.get(r));
            ensure(kept, || "write lost a tagged row".into())
        },
    )
}

pub fn empty_compare_and_if_match() -> Result<u32, String> {
    check(
        "empty compare / if_match",
        CASES,
        dims(),
        |(rows, width, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = random_array(rows, width, &mut rng);
            ensure(
                a.compare(&BitWord::new(), &[]).unwrap().count_ones() == rows as u64,
                || "vacuous compare".into(),
            )?;
            let (k, fields) = random_key(width, &mut rng);
            a.compare(&k, &fields).unwrap();
            let any = a.if_match();
            ensure(any == (a.reduce_popcount() > 0), || {
                "if_match disagrees with popcount".into()
            })
        },
    )
}

pub fn first_match_idempotent() -> Result<u32, String> {
    check(
        "first_match idempotence",
        CASES,
        dims(),
        |(rows, width, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = random_array(rows, width, &mut rng);
            let (k, fields) = random_key(width, &mut rng);
            let first = a.compare(&k, &fields).unwrap().first_set();
            a.first_match();
            let once = a.tags().clone();
            a.first_match();
            ensure(once.count_ones() <= 1 && once.first_set() == first, || {
                "first_match kept extra tags".into()
            })?;
            ensure(*a.tags() == once, || "first_match not idempotent".into())
        },
    )
}

pub fn write_is_confined() -> Result<u32, String> {
    check("write confinement", CASES, dims(), |(rows, width, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_array(rows, width, &mut rng);
        let (k, fields) = random_key(width, &mut rng);
        let tags = a.compare(&k, &fields).unwrap().clone();
        let before = a.dump_rows();
        let (wk, wf) = random_key(width, &mut rng);
        a.write(&wk, &wf).unwrap();
        let masked: Vec<usize> = wf.iter().map(FieldSpec::lo).collect();
        for (r, old) in before.iter().enumerate() {
            for c in 0..width {
                let inside = tags.get(r) && masked.contains(&c);
                let now = a.cell(r, c);
                if !inside && now != old.bits()[c] {
                    return Err(TestCaseError::fail(format!(
                        "cell ({r}, {c}) changed outside the write"
                    )));
                }
                if inside {
                    let want = wk.bits()[masked.iter().position(|m| *m == c).unwrap()];
                    ensure(now == want, || format!("cell ({r}, {c}) not written"))?;
                }
            }
        }
        Ok(())
    })
}

pub fn field_sum_matches_scalar() -> Result<u32, String> {
    check(
        "reduce_field_sum oracle",
        CASES,
        dims(),
        |(rows, width, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = random_array(rows, width, &mut rng);
            let lo = rng.gen_range(0..width);
            let f = FieldSpec::with_width("f", lo, rng.gen_range(1..=width - lo));
            let (k, fields) = random_key(width, &mut rng);
            let tags = a.compare(&k, &fields).unwrap().clone();
            let want: u128 = tags.iter_ones().map(|r| a.peek(r, &f).unwrap()).sum();
            ensure(a.reduce_field_sum(&f).unwrap() == want, || {
                "field sum mismatch".into()
            })
        },
    )
}

pub fn shift_round_trip() -> Result<u32, String> {
    check(
        "shift up/down",
        CASES,
        (1usize..=300, any::<u64>()),
        |(rows, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = RcamArray::new(rows, 1);
            let bits: Vec<bool> = (0..rows).map(|_| rng.gen()).collect();
            a.set_tags(TagVector::from_bools(&bits)).unwrap();
            a.shift_tags(ShiftDirection::Up);
            a.shift_tags(ShiftDirection::Down);
            let mut want = bits.clone();
            want[0] = false;
            ensure(a.tags().to_bools() == want, || "up then down".into())?;
            a.set_tags(TagVector::from_bools(&bits)).unwrap();
            a.shift_tags(ShiftDirection::Down);
            a.shift_tags(ShiftDirection::Up);
            let mut want = bits;
            want[rows - 1] = false;
            ensure(a.tags().to_bools() == want, || "down then up".into())
        },
    )
}

struct Rig {
    array: RcamArray,
    a: FieldSpec,
    b: FieldSpec,
    s: FieldSpec,
    carry: [FieldSpec; 2],
    p: FieldSpec,
    xs: Vec<(u128, u128)>,
}

fn rig(rows: usize, m: usize, seed: u64) -> Rig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = FieldSpec::with_width("a", 0, m);
    let b = FieldSpec::with_width("b", m, m);
    let s = FieldSpec::with_width("s", 2 * m, m);
    let carry = [FieldSpec::bit("c0", 3 * m), FieldSpec::bit("c1", 3 * m + 1)];
    let p = FieldSpec::with_width("p", 3 * m + 2, 2 * m);
    let mut array = RcamArray::new(rows, 5 * m + 2);
    let mask = (1u128 << m) - 1;
    let xs: Vec<(u128, u128)> = (0..rows)
        .map(|_| (rng.gen::<u128>() & mask, rng.gen::<u128>() & mask))
        .collect();
    for (r, (x, y)) in xs.iter().enumerate() {
        array.load_row(r, &a, *x).unwrap();
        array.load_row(r, &b, *y).unwrap();
    }
    Rig {
        array,
        a,
        b,
        s,
        carry,
        p,
        xs,
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Op {
    Add,
    Sub,
    Mult,
    Square,
}

/// Runs `op` at width `m` on random operands in `rows` rows and compares
/// every row against the scalar oracle.
pub fn arith_matches_oracle(op: Op, rows: usize, m: usize, seed: u64) -> Result<(), String> {
    let mut g = rig(rows, m, seed);
    let mu = m as u32;
    let (field, want): (FieldSpec, Vec<u128>) = match op {
        Op::Add | Op::Sub => {
            let l = VectorLayout::new(&g.a, &g.b, g.s.clone(), g.carry.clone());
            let res = match op {
                Op::Add => vec_add(&mut g.array, &l, m),
                _ => vec_sub(&mut g.array, &l, m),
            };
            res.map_err(|e| e.to_string())?;
            let f = if matches!(op, Op::Add) {
                oracle_add
            } else {
                oracle_sub
            };
            (
                g.s.clone(),
                g.xs.iter().map(|&(x, y)| f(x, y, mu)).collect(),
            )
        }
        Op::Mult => {
            vec_mult(&mut g.array, &MultLayout::new(&g.a, &g.b, g.p.clone()), m)
                .map_err(|e| e.to_string())?;
            (
                g.p.clone(),
                g.xs.iter().map(|&(x, y)| oracle_mult(x, y, mu)).collect(),
            )
        }
        Op::Square => {
            vec_square(&mut g.array, &Operand::new(&g.a), &g.p, m).map_err(|e| e.to_string())?;
            (
                g.p.clone(),
                g.xs.iter().map(|&(x, _)| oracle_mult(x, x, mu)).collect(),
            )
        }
    };
    let got = g.array.field_values(&field).map_err(|e| e.to_string())?;
    match got.iter().zip(&want).position(|(g, w)| g != w) {
        None => Ok(()),
        Some(r) => Err(format!(
            "{op:?} m={m} row {r}: {:?} -> {} (expected {})",
            g.xs[r], got[r], want[r]
        )),
    }
}

pub fn arith_oracle_fuzz() -> Result<u32, String> {
    let ops = prop_oneof![
        Just(Op::Add),
        Just(Op::Sub),
        Just(Op::Mult),
        Just(Op::Square)
    ];
    check(
        "arithmetic oracle",
        CASES,
        (ops, 1usize..=40, 1usize..=12, any::<u64>()),
        |(op, rows, m, seed)| arith_matches_oracle(op, rows, m, seed).map_err(TestCaseError::fail),
    )
}

/// Exact instruction counts of one add and one multiply on `rows` rows.
pub fn cost_law(rows: usize, m: usize, seed: u64) -> Result<(), String> {
    let mut g = rig(rows, m, seed);
    let m64 = m as u64;
    let l = VectorLayout::new(&g.a, &g.b, g.s.clone(), g.carry.clone());
    vec_add(&mut g.array, &l, m).map_err(|e| e.to_string())?;
    let add = g.array.take_ledger();
    let counts = (
        add.ops_of(OpClass::Compare),
        add.ops_of(OpClass::Write),
        add.total_cycles(),
    );
    if counts != (8 * m64, 8 * m64, 16 * m64) {
        return Err(format!("vec_add m={m} R={rows}: {counts:?}"));
    }
    vec_mult(&mut g.array, &MultLayout::new(&g.a, &g.b, g.p.clone()), m)
        .map_err(|e| e.to_string())?;
    let mult = g.array.take_ledger();
    let counts = (
        mult.ops_of(OpClass::Compare),
        mult.ops_of(OpClass::Write),
        mult.total_cycles(),
    );
    if counts != (8 * m64 * m64, 8 * m64 * m64, 16 * m64 * m64) {
        return Err(format!("vec_mult m={m} R={rows}: {counts:?}"));
    }
    Ok(())
}

pub fn cost_law_fuzz() -> Result<u32, String> {
    check(
        "cost law",
        CASES,
        (1usize..=300, 1usize..=10, any::<u64>()),
        |(rows, m, seed)| cost_law(rows, m, seed).map_err(TestCaseError::fail),
    )
}

pub fn double_add_fuzz() -> Result<u32, String> {
    check(
        "add twice",
        CASES,
        (1usize..=40, 1usize..=16, any::<u64>()),
        |(rows, m, seed)| {
            let mut g = rig(rows, m, seed);
            // second sum lands in the product field's low half
            let s2 = g.p.slice(0, m);
            let first = VectorLayout::new(&g.a, &g.b, g.s.clone(), g.carry.clone());
            vec_add(&mut g.array, &first, m).unwrap();
            for c in &g.carry {
                prins_core::microcode::broadcast_write(&mut g.array, c, 0).unwrap();
            }
            let second = VectorLayout::new(&g.s, &g.b, s2.clone(), g.carry.clone());
            vec_add(&mut g.array, &second, m).unwrap();
            let got = g.array.field_values(&s2).unwrap();
            for (r, &(x, y)) in g.xs.iter().enumerate() {
                let want = oracle_add(x, oracle_add(y, y, m as u32 + 1), m as u32);
                ensure(got[r] == want, || {
                    format!("row {r}: {x} + 2*{y} gave {}", got[r])
                })?;
            }
            Ok(())
        },
    )
}

fn table_case(seed: u64) -> (TruthTable, usize, usize, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.gen_range(1..=3);
    let outputs = rng.gen_range(1..=2);
    let outs: Vec<u32> = (0..1 << inputs)
        .map(|_| rng.gen_range(0..1 << outputs))
        .collect();
    (
        TruthTable::from_fn(inputs, outputs, |x| outs[x as usize]),
        inputs,
        outputs,
        rng,
    )
}

pub fn table_row_permutation() -> Result<u32, String> {
    check(
        "truth table row permutation",
        CASES,
        (1usize..=60, any::<u64>()),
        |(rows, seed)| {
            let (table, i, o, mut rng) = table_case(seed);
            let width = i + o + 2;
            let a0 = random_array(rows, width, &mut rng);
            let ins: Vec<FieldSpec> = (0..i).map(|c| FieldSpec::bit("i", c)).collect();
            let outs: Vec<FieldSpec> = (0..o).map(|c| FieldSpec::bit("o", i + c)).collect();
            let mut perm: Vec<usize> = (0..rows).collect();
            perm.shuffle(&mut rng);
            let row = FieldSpec::with_width("row", 0, width);
            let mut permuted = RcamArray::new(rows, width);
            for (k, &src) in perm.iter().enumerate() {
                permuted
                    .load_row(k, &row, a0.peek(src, &row).unwrap())
                    .unwrap();
            }
            let mut a = a0;
            exec_truth_table(&mut a, &table, &ins, &outs).unwrap();
            exec_truth_table(&mut permuted, &table, &ins, &outs).unwrap();
            for (k, &src) in perm.iter().enumerate() {
                ensure(
                    permuted.peek(k, &row).unwrap() == a.peek(src, &row).unwrap(),
                    || "not row-wise".into(),
                )?;
            }
            Ok(())
        },
    )
}

pub fn table_entry_order() -> Result<u32, String> {
    check(
        "truth table entry order",
        CASES,
        (1usize..=60, any::<u64>()),
        |(rows, seed)| {
            let (table, i, o, mut rng) = table_case(seed);
            let width = i + o;
            let ins: Vec<FieldSpec> = (0..i).map(|c| FieldSpec::bit("i", c)).collect();
            let outs: Vec<FieldSpec> = (0..o).map(|c| FieldSpec::bit("o", i + c)).collect();
            let mut entries = table.entries().to_vec();
            entries.shuffle(&mut rng);
            let shuffled = TruthTable::new(i, o, entries).unwrap();
            let mut a = random_array(rows, width, &mut rng);
            let mut b = a.clone();
            exec_truth_table(&mut a, &table, &ins, &outs).unwrap();
            exec_truth_table_ordered(&mut b, &shuffled, &ins, &outs).unwrap();
            ensure(a.dump_rows() == b.dump_rows(), || {
                "entry order changed the result".into()
            })
        },
    )
}
