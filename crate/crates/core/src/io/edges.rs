//! Edge-list text: one `src dst` pair per line, `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::GraphEdges;

pub fn load_edge_list(path: &Path) -> Result<GraphEdges> {
    parse_edge_list(&std::fs::read_to_string(path)?, path)
}

/// Vertex count is one past the largest ID seen.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<GraphEdges> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or_default();
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        if toks.len() != 2 {
            return Err(err(format!(
                "expected `src dst`, got {} tokens",
                toks.len()
            )));
        }
        let id = |t: &str| {
            t.parse::<u64>()
                .map_err(|_| err(format!("bad vertex ID `{t}`")))
        };
        edges.push((id(toks[0])?, id(toks[1])?));
    }
    let vertices = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    GraphEdges::new(vertices, edges)
}

pub fn write_edge_list(g: &GraphEdges) -> String {
    let mut s = format!("# {} vertices, {} edges\n", g.vertices(), g.num_edges());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}
