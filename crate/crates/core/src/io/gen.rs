//! Seeded synthetic datasets.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{CsrMatrix, GraphEdges, SampleSet};

pub const DEFAULT_ATTRS: usize = 16;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn positive(what: &str, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::dimension(format!("{what} must be at least 1")));
    }
    Ok(())
}

/// What to generate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenSpec {
    Samples {
        n: usize,
        attrs: usize,
        attr_width: usize,
    },
    Hist {
        n: usize,
    },
    Vector {
        n: usize,
    },
    Matrix {
        n: usize,
        nnz: usize,
    },
    Graph {
        vertices: u64,
        avg_degree: f64,
        max_degree: u64,
    },
}

/// A generated or loaded dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dataset {
    Samples(SampleSet),
    Hist { values: Vec<u32> },
    Vector { values: Vec<f64> },
    Matrix(CsrMatrix),
    Graph(GraphEdges),
}

pub fn gen_synthetic(spec: &GenSpec, seed: u64) -> Result<Dataset> {
    let mut r = rng(seed);
    Ok(match *spec {
        GenSpec::Samples {
            n,
            attrs,
            attr_width,
        } => Dataset::Samples(gen_samples(&mut r, n, attrs, attr_width)?),
        GenSpec::Hist { n } => Dataset::Hist {
            values: gen_hist(&mut r, n)?,
        },
        GenSpec::Vector { n } => Dataset::Vector {
            values: gen_vector(&mut r, n)?,
        },
        GenSpec::Matrix { n, nnz } => Dataset::Matrix(gen_matrix(&mut r, n, nnz)?),
        GenSpec::Graph {
            vertices,
            avg_degree,
            max_degree,
        } => Dataset::Graph(gen_graph(&mut r, vertices, avg_degree, max_degree)?),
    })
}

pub fn gen_samples(
    r: &mut impl Rng,
    n: usize,
    attrs: usize,
    attr_width: usize,
) -> Result<SampleSet> {
    positive("sample count", n as u64)?;
    positive("attribute count", attrs as u64)?;
    if !(1..=32).contains(&attr_width) {
        return Err(Error::dimension(format!(
            "attribute width {attr_width} outside 1..=32"
        )));
    }
    let values = (0..n * attrs)
        .map(|_| r.gen_range(0..1u64 << attr_width))
        .collect();
    SampleSet::new(attrs, attr_width, values)
}

/// Uniform 32-bit integers.
pub fn gen_hist(r: &mut impl Rng, n: usize) -> Result<Vec<u32>> {
    positive("sample count", n as u64)?;
    Ok((0..n).map(|_| r.gen()).collect())
}

/// Uniform values in [-1, 1].
pub fn gen_vector(r: &mut impl Rng, n: usize) -> Result<Vec<f64>> {
    positive("vector length", n as u64)?;
    Ok((0..n).map(|_| r.gen_range(-1.0..=1.0)).collect())
}

/// `nnz` distinct uniformly placed nonzeros with values in [-1, 1].
pub fn gen_matrix(r: &mut impl Rng, n: usize, nnz: usize) -> Result<CsrMatrix> {
    positive("dimension", n as u64)?;
    let cells = (n as u128) * (n as u128);
    if nnz as u128 > cells {
        return Err(Error::dimension(format!(
            "{nnz} nonzeros do not fit a {n}x{n} matrix"
        )));
    }
    let positions: Vec<usize> = if cells <= 1 << 24 {
        sample(r, cells as usize, nnz).into_vec()
    } else {
        let mut seen = HashSet::with_capacity(nnz);
        while seen.len() < nnz {
            seen.insert(r.gen_range(0..n * n));
        }
        let mut v: Vec<usize> = seen.into_iter().collect();
        v.sort_unstable();
        v
    };
    let entries = positions
        .into_iter()
        .map(|p| (p / n, p % n, r.gen_range(-1.0..=1.0)))
        .collect();
    CsrMatrix::from_triplets(n, entries)
}

/// Directed graph with a prescribed average and maximum out-degree: vertex 0
/// gets `max_degree` successors, every other vertex a uniform degree with
/// mean `avg_degree`. Successors of a vertex are distinct.
pub fn gen_graph(
    r: &mut impl Rng,
    vertices: u64,
    avg_degree: f64,
    max_degree: u64,
) -> Result<GraphEdges> {
    positive("vertex count", vertices)?;
    if !(avg_degree >= 1.0) || (max_degree as f64) < avg_degree || max_degree >= vertices {
        return Err(Error::dimension(format!(
            "need 1 <= avg degree {avg_degree} <= max degree {max_degree} < vertices {vertices}"
        )));
    }
    let spread = ((2.0 * avg_degree).round() as u64 - 1).clamp(1, max_degree);
    let mut edges = Vec::new();
    for u in 0..vertices {
        let d = if u == 0 {
            max_degree
        } else {
            r.gen_range(1..=spread)
        };
        for v in sample(r, vertices as usize, d as usize) {
            edges.push((u, v as u64));
        }
    }
    GraphEdges::new(vertices, edges)
}
