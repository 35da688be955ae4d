//! Report serialization.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perfmodel::{KernelReport, ModelConfig};

pub const CSV_HEADER: &str =
    "kernel,dataset,cycles,runtime_s,energy_j,perf,ai,baseline_bw,attainable,speedup,gflops_per_w";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Quotes a CSV cell when needed.
fn cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per configured baseline. Floats use shortest round-trip form.
pub fn render_csv(reports: &[KernelReport]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in reports {
        for b in &r.baselines {
            let _ = writeln!(
                s,
                "{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                r.kernel,
                cell(&r.dataset.name),
                r.cycles,
                r.runtime_s,
                r.energy_j,
                r.perf,
                r.ai,
                b.bw,
                b.attainable,
                b.speedup,
                r.power_efficiency / 1e9
            );
        }
    }
    s
}

pub fn render_report(report: &KernelReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Csv => render_csv(std::slice::from_ref(report)),
    })
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn emit_report(report: &KernelReport, format: Format, path: Option<&Path>) -> Result<()> {
    write_output(&render_report(report, format)?, path)
}

pub(crate) fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Model constants from `path`, else from the file named by `PRINS_CONFIG`,
/// else defaults. Keys not present keep their default.
pub fn load_config(path: Option<&Path>) -> Result<ModelConfig> {
    let env = std::env::var_os("PRINS_CONFIG");
    let path = path.or(env.as_deref().map(Path::new));
    let cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: p.to_path_buf(),
                line: e.line(),
                msg: e.to_string(),
            })?
        }
        None => ModelConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}
