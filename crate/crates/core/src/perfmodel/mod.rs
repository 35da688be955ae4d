//! Cost accounting and the analytic baseline the array is compared against.

pub mod analytic;
mod ledger;
mod report;
mod roofline;

pub use ledger::{
    tree_depth, ArithOp, ArithTotals, Instr, Ledger, LedgerMark, ModelConfig, OpClass, TagOpKind,
};
pub use report::{build_report, Baseline, DatasetInfo, FpMode, GraphMeta, KernelReport};
pub use roofline::{
    attainable_perf, kernel_ai, knee, log_range, roofline_points, throughput, Kernel, RooflinePoint,
};
