//! Throughput, roofline bound and per-kernel arithmetic intensities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dataset bytes processed per second of runtime.
pub fn throughput(dataset_bytes: f64, runtime_s: f64) -> Result<f64> {
    if !(runtime_s > 0.0) {
        return Err(Error::Model(format!(
            "runtime must be positive, got {runtime_s}"
        )));
    }
    Ok(dataset_bytes / runtime_s)
}

/// Roofline bound of a bandwidth-limited machine: the lesser of its peak
/// compute and `ai` times its storage bandwidth.
pub fn attainable_perf(peak_perf: f64, ai: f64, bw: f64) -> f64 {
    peak_perf.min(ai * bw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    EuclideanDistance,
    DotProduct,
    Histogram,
    Spmv,
    Bfs,
}

impl Kernel {
    pub const ALL: [Kernel; 5] = [
        Kernel::EuclideanDistance,
        Kernel::DotProduct,
        Kernel::Histogram,
        Kernel::Spmv,
        Kernel::Bfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::EuclideanDistance => "ed",
            Kernel::DotProduct => "dp",
            Kernel::Histogram => "hist",
            Kernel::Spmv => "spmv",
            Kernel::Bfs => "bfs",
        }
    }

    /// Baseline operations per byte fetched from external storage,
    /// assuming single-precision operands.
    pub fn ai(self) -> f64 {
        match self {
            // three FLOPs per 4-byte attribute
            Kernel::EuclideanDistance => 3.0 / 4.0,
            Kernel::DotProduct => 2.0 / 4.0,
            // byte shift and increment per 32-bit sample
            Kernel::Histogram => 2.0 / 4.0,
            Kernel::Spmv => 1.0 / 6.0,
            // two ops per two 4-byte accesses
            Kernel::Bfs => 1.0 / 4.0,
        }
    }

    pub fn ops_unit(self) -> &'static str {
        match self {
            Kernel::EuclideanDistance | Kernel::DotProduct | Kernel::Spmv => "FLOP",
            Kernel::Histogram => "OP",
            Kernel::Bfs => "TE",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed" | "euclidean" | "euclidean_distance" => Ok(Kernel::EuclideanDistance),
            "dp" | "dot" | "dot_product" => Ok(Kernel::DotProduct),
            "hist" | "histogram" => Ok(Kernel::Histogram),
            "spmv" => Ok(Kernel::Spmv),
            "bfs" => Ok(Kernel::Bfs),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Arithmetic intensity of a kernel given by name.
pub fn kernel_ai(name: &str) -> Result<f64> {
    name.parse::<Kernel>().map(Kernel::ai)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RooflinePoint {
    pub ai: f64,
    /// `None` for the compute ceiling row.
    pub bw: Option<f64>,
    pub attainable: f64,
}

/// Samples the roofline of every configured bandwidth at each AI, followed
/// by the flat peak ceiling.
pub fn roofline_points(
    peak_perf: f64,
    bws: &[f64],
    ai_range: &[f64],
) -> Result<Vec<RooflinePoint>> {
    if ai_range.is_empty() {
        return Err(Error::Model("empty AI range".into()));
    }
    let mut out = Vec::with_capacity(ai_range.len() * (bws.len() + 1));
    for &bw in bws {
        out.extend(ai_range.iter().map(|&ai| RooflinePoint {
            ai,
            bw: Some(bw),
            attainable: attainable_perf(peak_perf, ai, bw),
        }));
    }
    out.extend(ai_range.iter().map(|&ai| RooflinePoint {
        ai,
        bw: None,
        attainable: peak_perf,
    }));
    Ok(out)
}

/// AI at which the bandwidth slope meets the compute ceiling.
pub fn knee(peak_perf: f64, bw: f64) -> f64 {
    peak_perf / bw
}

/// `count` log-spaced AI values spanning `[lo, hi]`.
pub fn log_range(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi / lo).ln() / (count - 1) as f64;
            (0..count).map(|i| lo * (step * i as f64).exp()).collect()
        }
    }
}
