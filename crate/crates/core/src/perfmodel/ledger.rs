//! Per-instruction cycle and energy accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timing and energy constants of the modeled array and the baseline it is
/// compared against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub clock_hz: f64,
    /// Joules per masked bit per row for a compare.
    pub e_compare_per_bit: f64,
    /// Joules per masked bit per tagged row for a write.
    pub e_write_per_bit: f64,
    pub write_cycles: u64,
    pub fp_mult_cycles: u64,
    /// Not published for the hardware; used for both FP add and FP subtract.
    pub fp_add_cycles: u64,
    pub baseline_bw_bytes_per_s: Vec<f64>,
    /// Peak compute of the bandwidth-limited reference machine (op/s).
    pub peak_perf: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            clock_hz: 500e6,
            e_compare_per_bit: 1e-15,
            e_write_per_bit: 100e-15,
            write_cycles: 1,
            fp_mult_cycles: 4400,
            fp_add_cycles: 1000,
            baseline_bw_bytes_per_s: vec![10e9, 24e9],
            peak_perf: 6e12,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("clock_hz", self.clock_hz),
            ("e_compare_per_bit", self.e_compare_per_bit),
            ("e_write_per_bit", self.e_write_per_bit),
            ("peak_perf", self.peak_perf),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Model(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("write_cycles", self.write_cycles),
            ("fp_mult_cycles", self.fp_mult_cycles),
            ("fp_add_cycles", self.fp_add_cycles),
        ] {
            if v == 0 {
                return Err(Error::Model(format!("{name} must be positive")));
            }
        }
        if self.baseline_bw_bytes_per_s.is_empty() {
            return Err(Error::Model(
                "at least one baseline bandwidth is required".into(),
            ));
        }
        if let Some(bw) = self
            .baseline_bw_bytes_per_s
            .iter()
            .find(|bw| !(bw.is_finite() && **bw > 0.0))
        {
            return Err(Error::Model(format!(
                "baseline bandwidth must be positive, got {bw}"
            )));
        }
        Ok(())
    }

    /// Expected energy of one arithmetic microcode cycle per array row.
    ///
    /// Derived from the conditional-add bit step of the multiplier: eight
    /// 4-bit compares over every row, then eight 2-bit writes that together
    /// touch the half of the rows whose multiplier bit is set (uniform data).
    /// The FP-modeled path charges this per row for every FP cycle.
    pub fn fp_energy_per_row_cycle(&self) -> f64 {
        let energy = 8.0 * 4.0 * self.e_compare_per_bit + 2.0 * 0.5 * self.e_write_per_bit;
        energy / (8 + 8 * self.write_cycles) as f64
    }

    pub fn runtime_s(&self, cycles: u64) -> f64 {
        cycles as f64 / self.clock_hz
    }
}

/// Ledger column an instruction is booked under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpClass {
    Compare,
    Write,
    Read,
    TagOp,
    Reduction,
}

impl OpClass {
    pub const ALL: [OpClass; 5] = [
        OpClass::Compare,
        OpClass::Write,
        OpClass::Read,
        OpClass::TagOp,
        OpClass::Reduction,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagOpKind {
    FirstMatch,
    IfMatch,
    Shift,
}

/// One issued array instruction, as recorded in a trace.
///
/// Carries exactly what is needed to re-derive its cost under any
/// [`ModelConfig`], which is what `replay` does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instr {
    Compare {
        masked_bits: u32,
        rows: u64,
    },
    Write {
        masked_bits: u32,
        tagged: u64,
    },
    Read {
        masked_bits: u32,
    },
    TagOp {
        kind: TagOpKind,
    },
    /// `passes` sweeps of the reduction tree over an array of `rows` rows.
    Reduce {
        passes: u32,
        rows: u64,
    },
}

/// Depth of the tag reduction tree, at least one level.
pub fn tree_depth(rows: u64) -> u64 {
    if rows <= 2 {
        1
    } else {
        64 - u64::from((rows - 1).leading_zeros())
    }
}

impl Instr {
    pub fn class(&self) -> OpClass {
        match self {
            Instr::Compare { .. } => OpClass::Compare,
            Instr::Write { .. } => OpClass::Write,
            Instr::Read { .. } => OpClass::Read,
            Instr::TagOp { .. } => OpClass::TagOp,
            Instr::Reduce { .. } => OpClass::Reduction,
        }
    }

    pub fn cycles(&self, cfg: &ModelConfig) -> u64 {
        match *self {
            Instr::Compare { .. } | Instr::Read { .. } | Instr::TagOp { .. } => 1,
            Instr::Write { .. } => cfg.write_cycles,
            Instr::Reduce { passes, rows } => u64::from(passes) * tree_depth(rows),
        }
    }

    pub fn energy(&self, cfg: &ModelConfig) -> f64 {
        match *self {
            Instr::Compare { masked_bits, rows } => {
                f64::from(masked_bits) * rows as f64 * cfg.e_compare_per_bit
            }
            Instr::Write {
                masked_bits,
                tagged,
            } => f64::from(masked_bits) * tagged as f64 * cfg.e_write_per_bit,
            // sensing a single row
            Instr::Read { masked_bits } => f64::from(masked_bits) * cfg.e_compare_per_bit,
            Instr::TagOp { .. } | Instr::Reduce { .. } => 0.0,
        }
    }
}

/// Word-level arithmetic operation lowered to microcode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithOp {
    Add,
    Sub,
    Mult,
}

impl ArithOp {
    pub const ALL: [ArithOp; 3] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mult];

    fn index(self) -> usize {
        self as usize
    }

    pub fn fp_cycles(self, cfg: &ModelConfig) -> u64 {
        match self {
            ArithOp::Add | ArithOp::Sub => cfg.fp_add_cycles,
            ArithOp::Mult => cfg.fp_mult_cycles,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArithTotals {
    pub count: u64,
    pub cycles: u64,
    pub energy_j: f64,
}

/// Position in a ledger, used to attribute a stretch of instructions to one
/// arithmetic operation.
#[derive(Clone, Copy, Debug)]
pub struct LedgerMark {
    cycles: u64,
    energy_j: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    rows: u64,
    cycles: [u64; 5],
    energy_j: [f64; 5],
    ops: [u64; 5],
    reduce_passes: u64,
    arith: [ArithTotals; 3],
    #[serde(skip)]
    trace: Option<Vec<Instr>>,
}

impl Ledger {
    pub fn new(rows: u64) -> Self {
        Self {
            rows,
            ..Self::default()
        }
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> Option<&[Instr]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Option<Vec<Instr>> {
        self.trace.take()
    }

    pub fn charge(&mut self, instr: Instr, cfg: &ModelConfig) -> u64 {
        let class = instr.class().index();
        let cycles = instr.cycles(cfg);
        self.cycles[class] += cycles;
        self.energy_j[class] += instr.energy(cfg);
        self.ops[class] += 1;
        if let Instr::Reduce { passes, .. } = instr {
            self.reduce_passes += u64::from(passes);
        }
        if let Some(trace) = &mut self.trace {
            trace.push(instr);
        }
        cycles
    }

    /// Re-accounts a recorded trace from scratch under `cfg`.
    pub fn replay(rows: u64, trace: &[Instr], cfg: &ModelConfig) -> Self {
        let mut ledger = Ledger::new(rows);
        for instr in trace {
            ledger.charge(*instr, cfg);
        }
        ledger
    }

    pub fn total_cycles(&self) -> u64 {
        self.cycles.iter().sum()
    }

    pub fn total_energy_j(&self) -> f64 {
        self.energy_j.iter().sum()
    }

    pub fn total_ops(&self) -> u64 {
        self.ops.iter().sum()
    }

    pub fn cycles_of(&self, class: OpClass) -> u64 {
        self.cycles[class.index()]
    }

    pub fn energy_of(&self, class: OpClass) -> f64 {
        self.energy_j[class.index()]
    }

    pub fn ops_of(&self, class: OpClass) -> u64 {
        self.ops[class.index()]
    }

    pub fn reduce_passes(&self) -> u64 {
        self.reduce_passes
    }

    pub fn arith(&self, op: ArithOp) -> ArithTotals {
        self.arith[op.index()]
    }

    pub fn mark(&self) -> LedgerMark {
        LedgerMark {
            cycles: self.total_cycles(),
            energy_j: self.total_energy_j(),
        }
    }

    /// Books everything charged since `mark` as one `op`.
    pub fn note_arith(&mut self, op: ArithOp, mark: LedgerMark) {
        let (cycles, energy) = (self.total_cycles(), self.total_energy_j());
        let slot = &mut self.arith[op.index()];
        slot.count += 1;
        slot.cycles += cycles - mark.cycles;
        slot.energy_j += energy - mark.energy_j;
    }

    /// Adds another ledger's totals (for example a sub-run on a second array).
    pub fn absorb(&mut self, other: &Ledger) {
        for i in 0..5 {
            self.cycles[i] += other.cycles[i];
            self.energy_j[i] += other.energy_j[i];
            self.ops[i] += other.ops[i];
        }
        for i in 0..3 {
            self.arith[i].count += other.arith[i].count;
            self.arith[i].cycles += other.arith[i].cycles;
            self.arith[i].energy_j += other.arith[i].energy_j;
        }
        self.reduce_passes += other.reduce_passes;
    }

    /// Projects the ledger of a run on `self.rows()` rows onto an array of
    /// `rows` rows holding statistically identical data.
    ///
    /// Compare energy is exactly linear in rows and write energy is linear in
    /// tagged rows, whose expectation scales the same way. Reduction cycles
    /// are recomputed for the deeper tree; every other cycle count is
    /// independent of the row count.
    pub fn extrapolate(&self, rows: u64) -> Result<Ledger> {
        if self.rows == 0 || rows == 0 {
            return Err(Error::Model("cannot extrapolate a zero-row ledger".into()));
        }
        let factor = rows as f64 / self.rows as f64;
        let mut out = self.clone();
        out.trace = None;
        out.rows = rows;
        for e in &mut out.energy_j {
            *e *= factor;
        }
        for a in &mut out.arith {
            a.energy_j *= factor;
        }
        let red = OpClass::Reduction.index();
        out.cycles[red] = self.reduce_passes * tree_depth(rows);
        Ok(out)
    }

    /// Cycles and energy with every arithmetic operation re-costed as a
    /// single-precision FP operation. Non-arithmetic instructions are kept.
    pub fn fp_modeled(&self, cfg: &ModelConfig) -> (u64, f64) {
        let mut cycles = self.total_cycles();
        let mut energy = self.total_energy_j();
        let per_cycle = cfg.fp_energy_per_row_cycle() * self.rows as f64;
        for op in ArithOp::ALL {
            let a = self.arith(op);
            let fp = a.count * op.fp_cycles(cfg);
            cycles = cycles - a.cycles + fp;
            energy = energy - a.energy_j + fp as f64 * per_cycle;
        }
        (cycles, energy.max(0.0))
    }
}
