//! Dataset files, generators, reports and the command line.

mod cli;
pub mod edges;
pub mod gen;
pub mod mtx;
mod report;

pub use cli::{cli_main, TraceFile};
pub use edges::{load_edge_list, parse_edge_list, write_edge_list};
pub use gen::{gen_synthetic, Dataset, GenSpec};
pub use mtx::{load_matrix_market, parse_matrix_market, write_matrix_market};
pub use report::{emit_report, load_config, render_csv, render_report, Format, CSV_HEADER};
