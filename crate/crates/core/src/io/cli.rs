//! `prins` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::gen::{self, Dataset, DEFAULT_ATTRS};
use super::report::{emit_report, load_config, write_output, Format};
use super::{edges, mtx};
use crate::error::{Error, Result};
use crate::kernels::{self, bfs_rows, CsrMatrix, GraphEdges, SampleSet};
use crate::oracle;
use crate::perfmodel::{
    analytic, build_report, log_range, roofline_points, DatasetInfo, FpMode, GraphMeta, Instr,
    Kernel, Ledger, ModelConfig,
};
use crate::rcam::{RcamArray, DEFAULT_MODULE_SIZE};

#[derive(Parser, Debug)]
#[command(
    name = "prins",
    version,
    about = "Associative in-storage processing simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Array capacity in rows.
    #[arg(long, default_value_t = DEFAULT_MODULE_SIZE)]
    rows: usize,
    /// Bits per row.
    #[arg(long, default_value_t = 256)]
    row_width: usize,
    /// JSON file of model constants (falls back to $PRINS_CONFIG).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Input file: .mtx for spmv, an edge list for bfs, a `gen` JSON file otherwise.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Generated size: samples, values, matrix dimension or vertices.
    #[arg(long)]
    n: Option<usize>,
    /// Generated matrix nonzeros (default 8n).
    #[arg(long)]
    nnz: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ATTRS)]
    attrs: usize,
    #[arg(long, default_value_t = 8)]
    attr_width: usize,
    /// Distance kernel centers.
    #[arg(long, default_value_t = 1)]
    centers: usize,
    #[arg(long, default_value_t = 8.0)]
    avg_degree: f64,
    /// Default 4 × average degree.
    #[arg(long)]
    max_degree: Option<u64>,
    /// BFS source vertex.
    #[arg(long, default_value_t = 0)]
    source: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a kernel and print its report.
    Run {
        kernel: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        /// Re-cost arithmetic as single-precision FP operations.
        #[arg(long)]
        fp_model: bool,
        /// Project the ledger onto this many rows of the same kind of data
        /// (ed, dp, hist).
        #[arg(long)]
        project_rows: Option<u64>,
        /// spmv only: closed-form cost of a uniform random matrix of shape
        /// (--n, --nnz) without simulating it.
        #[arg(long)]
        analytic: bool,
        /// Save the instruction trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Execute a kernel and compare against the scalar oracle.
    Verify {
        kernel: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Write a synthetic dataset.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Print roofline samples for the configured baselines.
    Roofline {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        ai_min: f64,
        #[arg(long, default_value_t = 100.0)]
        ai_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Re-account a saved instruction trace under the current config.
    Replay {
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    Samples,
    Hist,
    Vector,
    Matrix,
    Graph,
}

/// Saved instruction trace.
#[derive(Serialize, Deserialize)]
pub struct TraceFile {
    pub rows: u64,
    pub instrs: Vec<Instr>,
}

enum Input {
    Distance(SampleSet, Vec<Vec<u64>>),
    Dot(SampleSet, Vec<u64>),
    Hist(Vec<u32>),
    Spmv(CsrMatrix, Vec<f64>),
    Bfs(GraphEdges, u64),
}

impl Input {
    fn rows(&self) -> usize {
        match self {
            Input::Distance(s, _) | Input::Dot(s, _) => s.n_samples(),
            Input::Hist(v) => v.len(),
            Input::Spmv(a, _) => a.nnz(),
            Input::Bfs(g, _) => bfs_rows(g),
        }
    }
}

enum Outcome {
    Distance(Vec<Vec<u128>>),
    Dot(Vec<u128>),
    Hist(Vec<u64>),
    Spmv(Vec<i128>),
    Bfs(kernels::BfsOutput),
}

fn default_n(kernel: Kernel) -> usize {
    match kernel {
        Kernel::EuclideanDistance | Kernel::DotProduct => 10_000,
        Kernel::Histogram => 1 << 20,
        Kernel::Spmv => 512,
        Kernel::Bfs => 1024,
    }
}

fn load_json_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let d: Dataset = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    // re-check invariants the derived deserializer does not enforce
    Ok(match d {
        Dataset::Samples(s) => Dataset::Samples(SampleSet::new(
            s.n_attrs(),
            s.attr_width(),
            s.values().to_vec(),
        )?),
        other => other,
    })
}

fn prepare(kernel: Kernel, d: &DataArgs, seed: u64) -> Result<Input> {
    let mut r = gen::rng(seed);
    let n = d.n.unwrap_or_else(|| default_n(kernel));
    let loaded = match (&d.dataset, kernel) {
        (Some(p), Kernel::Spmv) => Some(Dataset::Matrix(mtx::load_matrix_market(p)?)),
        (Some(p), Kernel::Bfs) => Some(Dataset::Graph(edges::load_edge_list(p)?)),
        (Some(p), _) => Some(load_json_dataset(p)?),
        (None, _) => None,
    };
    let wrong = |what: &str| Error::dimension(format!("dataset file does not hold {what}"));
    Ok(match kernel {
        Kernel::EuclideanDistance | Kernel::DotProduct => {
            let samples = match loaded {
                Some(Dataset::Samples(s)) => s,
                Some(_) => return Err(wrong("samples")),
                None => gen::gen_samples(&mut r, n, d.attrs, d.attr_width)?,
            };
            let scalars = gen::gen_samples(
                &mut r,
                d.centers.max(1),
                samples.n_attrs(),
                samples.attr_width(),
            )?;
            let rows: Vec<Vec<u64>> = scalars.samples().map(<[u64]>::to_vec).collect();
            if kernel == Kernel::DotProduct {
                Input::Dot(samples, rows[0].clone())
            } else {
                Input::Distance(samples, rows[..d.centers].to_vec())
            }
        }
        Kernel::Histogram => match loaded {
            Some(Dataset::Hist { values }) => Input::Hist(values),
            Some(_) => return Err(wrong("histogram values")),
            None => Input::Hist(gen::gen_hist(&mut r, n)?),
        },
        Kernel::Spmv => {
            let a = match loaded {
                Some(Dataset::Matrix(a)) => a,
                Some(_) => return Err(wrong("a matrix")),
                None => gen::gen_matrix(&mut r, n, d.nnz.unwrap_or(8 * n))?,
            };
            let b = if a.n() == 0 {
                Vec::new()
            } else {
                gen::gen_vector(&mut r, a.n())?
            };
            Input::Spmv(a, b)
        }
        Kernel::Bfs => {
            let g = match loaded {
                Some(Dataset::Graph(g)) => g,
                Some(_) => return Err(wrong("a graph")),
                None => {
                    let max = d
                        .max_degree
                        .unwrap_or((4.0 * d.avg_degree) as u64)
                        .min(n as u64 - 1);
                    gen::gen_graph(&mut r, n as u64, d.avg_degree, max)?
                }
            };
            Input::Bfs(g, d.source)
        }
    })
}

fn execute(
    input: &Input,
    c: &Common,
    cfg: &ModelConfig,
    trace: bool,
) -> Result<(Outcome, Ledger, DatasetInfo)> {
    let rows = input.rows();
    if rows > c.rows {
        return Err(Error::layout(format!(
            "dataset needs {rows} rows, the array has {}",
            c.rows
        )));
    }
    let mut array = RcamArray::with_config(rows, c.row_width, cfg.clone());
    if trace {
        array.ledger_mut().enable_trace();
    }
    Ok(match input {
        Input::Distance(s, centers) => {
            let run = kernels::euclidean_distance(&mut array, s, centers)?;
            let ops = 3 * s.n_samples() * s.n_attrs() * centers.len();
            let info = DatasetInfo::new(
                format!("samples {}x{}", s.n_samples(), s.n_attrs()),
                rows as u64,
                ops as u64,
            );
            (Outcome::Distance(run.output), run.ledger, info)
        }
        Input::Dot(s, h) => {
            let run = kernels::dot_product(&mut array, s, h)?;
            let ops = 2 * s.n_samples() * s.n_attrs();
            let info = DatasetInfo::new(
                format!("vectors {}x{}", s.n_samples(), s.n_attrs()),
                rows as u64,
                ops as u64,
            );
            (Outcome::Dot(run.output), run.ledger, info)
        }
        Input::Hist(v) => {
            let run = kernels::histogram(&mut array, v)?;
            let info = DatasetInfo::new(
                format!("uint32 x{}", v.len()),
                rows as u64,
                2 * v.len() as u64,
            );
            (Outcome::Hist(run.output), run.ledger, info)
        }
        Input::Spmv(a, b) => {
            let run = kernels::spmv(&mut array, a, b, None)?;
            let mut info = DatasetInfo::new(
                format!("csr n={} nnz={}", a.n(), a.nnz()),
                rows as u64,
                2 * a.nnz() as u64,
            );
            info.density = Some(a.density());
            (Outcome::Spmv(run.output.raw), run.ledger, info)
        }
        Input::Bfs(g, source) => {
            let run = kernels::bfs(&mut array, g, *source, None)?;
            let mut info = DatasetInfo::new(
                format!("graph V={} E={}", g.vertices(), g.num_edges()),
                rows as u64,
                run.output.rows_examined,
            );
            info.graph = Some(graph_meta(g));
            (Outcome::Bfs(run.output), run.ledger, info)
        }
    })
}

pub(crate) fn graph_meta(g: &GraphEdges) -> GraphMeta {
    GraphMeta {
        vertices: g.vertices(),
        edges: g.num_edges(),
        avg_degree: g.avg_out_degree(),
        max_degree: g.max_out_degree(),
    }
}

/// Returns the mismatch description, if any.
fn check(input: &Input, outcome: &Outcome) -> Result<Option<String>> {
    fn first_diff<T: PartialEq + std::fmt::Debug>(got: &[T], want: &[T]) -> Option<String> {
        if got.len() != want.len() {
            return Some(format!("{} results, expected {}", got.len(), want.len()));
        }
        got.iter()
            .zip(want)
            .position(|(g, w)| g != w)
            .map(|i| format!("entry {i}: got {:?}, expected {:?}", got[i], want[i]))
    }
    Ok(match (input, outcome) {
        (Input::Distance(s, c), Outcome::Distance(got)) => {
            first_diff(got, &oracle::oracle_ed(s, c))
        }
        (Input::Dot(s, h), Outcome::Dot(got)) => first_diff(got, &oracle::oracle_dp(s, h)),
        (Input::Hist(v), Outcome::Hist(got)) => first_diff(got, &oracle::oracle_hist(v)),
        (Input::Spmv(a, b), Outcome::Spmv(got)) => first_diff(got, &oracle::oracle_spmv(a, b)?),
        (Input::Bfs(g, s), Outcome::Bfs(out)) => {
            oracle::check_bfs(g, *s, &out.distance, &out.predecessor)
                .err()
                .map(|e| e.to_string())
        }
        _ => unreachable!("outcome always matches its input"),
    })
}

fn run(
    kernel: Kernel,
    c: &Common,
    d: &DataArgs,
    fp_model: bool,
    project_rows: Option<u64>,
    analytic_only: bool,
    trace: Option<&Path>,
) -> Result<()> {
    let cfg = load_config(c.config.as_deref())?;
    let mode = if fp_model {
        FpMode::FpModeled
    } else {
        FpMode::Fixed
    };
    let (ledger, info) = if analytic_only {
        if kernel != Kernel::Spmv {
            return Err(Error::Model("--analytic is only available for spmv".into()));
        }
        let n = d.n.unwrap_or_else(|| default_n(kernel));
        let nnz = d.nnz.unwrap_or(8 * n);
        let shape = analytic::SpmvShape::uniform(n as u64, nnz as u64);
        let mut info = DatasetInfo::new(
            format!("uniform n={n} nnz={nnz}"),
            nnz as u64,
            2 * nnz as u64,
        );
        info.density = Some(shape.density());
        (analytic::spmv_ledger(&shape, &cfg)?, info)
    } else {
        let input = prepare(kernel, d, c.seed)?;
        let (_, mut ledger, mut info) = execute(&input, c, &cfg, trace.is_some())?;
        if let Some(path) = trace {
            let file = TraceFile {
                rows: ledger.rows(),
                instrs: ledger.take_trace().unwrap_or_default(),
            };
            std::fs::write(path, serde_json::to_string(&file)?)?;
        }
        if let Some(target) = project_rows {
            if matches!(kernel, Kernel::Spmv | Kernel::Bfs) {
                return Err(Error::Model(
                    "--project-rows applies to ed, dp and hist".into(),
                ));
            }
            let factor = target as f64 / info.rows as f64;
            ledger = ledger.extrapolate(target)?;
            info.ops = (info.ops as f64 * factor).round() as u64;
            info.rows = target;
            info.name = format!("{} projected to {target} rows", info.name);
        }
        (ledger, info)
    };
    let report = build_report(&ledger, kernel, &info, &cfg, mode)?;
    emit_report(&report, c.format, c.out.as_deref())
}

fn verify(kernel: Kernel, c: &Common, d: &DataArgs) -> Result<bool> {
    let cfg = load_config(c.config.as_deref())?;
    let input = prepare(kernel, d, c.seed)?;
    let (outcome, _, info) = execute(&input, c, &cfg, false)?;
    let verdict = check(&input, &outcome)?;
    let line = match &verdict {
        None => format!("verify {kernel} on {}: ok\n", info.name),
        Some(m) => format!("verify {kernel} on {}: MISMATCH {m}\n", info.name),
    };
    write_output(&line, c.out.as_deref())?;
    Ok(verdict.is_none())
}

fn generate(kind: GenKind, c: &Common, d: &DataArgs) -> Result<()> {
    let kernel = match kind {
        GenKind::Samples => Kernel::EuclideanDistance,
        GenKind::Hist => Kernel::Histogram,
        GenKind::Vector | GenKind::Matrix => Kernel::Spmv,
        GenKind::Graph => Kernel::Bfs,
    };
    let n = d.n.unwrap_or_else(|| default_n(kernel));
    let spec = match kind {
        GenKind::Samples => gen::GenSpec::Samples {
            n,
            attrs: d.attrs,
            attr_width: d.attr_width,
        },
        GenKind::Hist => gen::GenSpec::Hist { n },
        GenKind::Vector => gen::GenSpec::Vector { n },
        GenKind::Matrix => gen::GenSpec::Matrix {
            n,
            nnz: d.nnz.unwrap_or(8 * n),
        },
        GenKind::Graph => gen::GenSpec::Graph {
            vertices: n as u64,
            avg_degree: d.avg_degree,
            max_degree: d
                .max_degree
                .unwrap_or((4.0 * d.avg_degree) as u64)
                .min(n as u64 - 1),
        },
    };
    let text = match gen::gen_synthetic(&spec, c.seed)? {
        Dataset::Matrix(a) => mtx::write_matrix_market(&a),
        Dataset::Graph(g) => edges::write_edge_list(&g),
        other => serde_json::to_string(&other)? + "\n",
    };
    write_output(&text, c.out.as_deref())
}

fn roofline(c: &Common, lo: f64, hi: f64, points: usize) -> Result<()> {
    let cfg = load_config(c.config.as_deref())?;
    if !(lo > 0.0 && hi >= lo) || points == 0 {
        return Err(Error::Model(
            "AI range must be positive and nonempty".into(),
        ));
    }
    let pts = roofline_points(
        cfg.peak_perf,
        &cfg.baseline_bw_bytes_per_s,
        &log_range(lo, hi, points),
    )?;
    let text = match c.format {
        Format::Json => serde_json::to_string_pretty(&pts)? + "\n",
        Format::Csv => {
            let mut s = String::from("ai,bw,attainable\n");
            for p in pts {
                let bw =
                    p.bw.map_or_else(|| "peak".to_string(), |b| format!("{b:?}"));
                s += &format!("{:?},{bw},{:?}\n", p.ai, p.attainable);
            }
            s
        }
    };
    write_output(&text, c.out.as_deref())
}

fn replay(path: &Path, c: &Common) -> Result<()> {
    let cfg = load_config(c.config.as_deref())?;
    let text = std::fs::read_to_string(path)?;
    let file: TraceFile = serde_json::from_str(&text)?;
    let ledger = Ledger::replay(file.rows, &file.instrs, &cfg);
    write_output(
        &(serde_json::to_string_pretty(&ledger)? + "\n"),
        c.out.as_deref(),
    )
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 success, 1 failure or oracle mismatch, 2 usage error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let kernel = |name: &str| name.parse::<Kernel>();
    let result = match &cli.cmd {
        Command::Run {
            kernel: k,
            common,
            data,
            fp_model,
            project_rows,
            analytic,
            trace,
        } => kernel(k).and_then(|k| {
            run(
                k,
                common,
                data,
                *fp_model,
                *project_rows,
                *analytic,
                trace.as_deref(),
            )
            .map(|_| true)
        }),
        Command::Verify {
            kernel: k,
            common,
            data,
        } => kernel(k).and_then(|k| verify(k, common, data)),
        Command::Gen { kind, common, data } => generate(*kind, common, data).map(|_| true),
        Command::Roofline {
            common,
            ai_min,
            ai_max,
            points,
        } => roofline(common, *ai_min, *ai_max, *points).map(|_| true),
        Command::Replay { trace, common } => replay(trace, common).map(|_| true),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ Error::UnknownKernel(_)) => {
            eprintln!("error: {e}\nknown kernels: ed, dp, hist, spmv, bfs");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
