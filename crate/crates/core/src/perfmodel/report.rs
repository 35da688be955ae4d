//! Turning a finished ledger into the figures a benchmark run reports.

use serde::{Deserialize, Serialize};

use super::ledger::{Ledger, ModelConfig};
use super::roofline::{attainable_perf, throughput, Kernel};
use crate::error::{Error, Result};

/// How arithmetic is costed when building a report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpMode {
    /// Ledger as executed by the fixed-point microcode.
    #[default]
    Fixed,
    /// Every recorded add, subtract and multiply re-costed as a
    /// single-precision operation.
    FpModeled,
}

impl std::str::FromStr for FpMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(FpMode::Fixed),
            "fp" | "fp_modeled" | "fp-modeled" => Ok(FpMode::FpModeled),
            other => Err(Error::Model(format!("unknown fp mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub vertices: u64,
    pub edges: u64,
    pub avg_degree: f64,
    pub max_degree: u64,
}

/// What a run processed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    /// Array rows the data occupies.
    pub rows: u64,
    /// Useful operations of the workload in the kernel's unit (FLOP, OP or
    /// traversed edges).
    pub ops: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphMeta>,
}

impl DatasetInfo {
    pub fn new(name: impl Into<String>, rows: u64, ops: u64) -> Self {
        Self {
            name: name.into(),
            rows,
            ops,
            density: None,
            graph: None,
        }
    }

    /// Bytes a bandwidth-limited machine has to stream for `ops` operations
    /// at the kernel's arithmetic intensity.
    pub fn bytes(&self, kernel: Kernel) -> f64 {
        self.ops as f64 / kernel.ai()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub bw: f64,
    pub attainable: f64,
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub kernel: Kernel,
    pub dataset: DatasetInfo,
    pub fp_mode: FpMode,
    pub cycles: u64,
    pub runtime_s: f64,
    pub energy_j: f64,
    pub ops: u64,
    pub ops_unit: String,
    pub dataset_bytes: f64,
    pub throughput_bytes_per_s: f64,
    /// Operations per second.
    pub perf: f64,
    pub ai: f64,
    pub baselines: Vec<Baseline>,
    pub power_w: f64,
    /// Operations per second per watt.
    pub power_efficiency: f64,
    /// One bit column per cycle into the tag register.
    pub internal_bw_bits_per_s: f64,
}

impl KernelReport {
    pub fn speedup_at(&self, bw: f64) -> Option<f64> {
        self.baselines
            .iter()
            .find(|b| b.bw == bw)
            .map(|b| b.speedup)
    }
}

pub fn build_report(
    ledger: &Ledger,
    kernel: Kernel,
    dataset: &DatasetInfo,
    config: &ModelConfig,
    fp_mode: FpMode,
) -> Result<KernelReport> {
    config.validate()?;
    let (cycles, energy_j) = match fp_mode {
        FpMode::Fixed => (ledger.total_cycles(), ledger.total_energy_j()),
        FpMode::FpModeled => ledger.fp_modeled(config),
    };
    if cycles == 0 {
        return Err(Error::Model("ledger has no cycles".into()));
    }
    if !(energy_j > 0.0) {
        return Err(Error::Model(
            "ledger has no energy, power efficiency is undefined".into(),
        ));
    }
    let runtime_s = config.runtime_s(cycles);
    let perf = dataset.ops as f64 / runtime_s;
    let ai = kernel.ai();
    let dataset_bytes = dataset.bytes(kernel);
    let baselines = config
        .baseline_bw_bytes_per_s
        .iter()
        .map(|&bw| {
            let attainable = attainable_perf(config.peak_perf, ai, bw);
            Baseline {
                bw,
                attainable,
                speedup: perf / attainable,
            }
        })
        .collect();
    let power_w = energy_j / runtime_s;
    Ok(KernelReport {
        kernel,
        dataset: dataset.clone(),
        fp_mode,
        cycles,
        runtime_s,
        energy_j,
        ops: dataset.ops,
        ops_unit: kernel.ops_unit().to_string(),
        dataset_bytes,
        throughput_bytes_per_s: throughput(dataset_bytes, runtime_s)?,
        perf,
        ai,
        baselines,
        power_w,
        power_efficiency: perf / power_w,
        internal_bw_bits_per_s: ledger.rows() as f64 * config.clock_hz,
    })
}
