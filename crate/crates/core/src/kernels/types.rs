use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n_samples` vectors of `n_attrs` unsigned `attr_width`-bit attributes,
/// stored sample-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    n_samples: usize,
    n_attrs: usize,
    attr_width: usize,
    values: Vec<u64>,
}

impl SampleSet {
    pub fn new(n_attrs: usize, attr_width: usize, values: Vec<u64>) -> Result<Self> {
        if n_attrs == 0 || !(1..=32).contains(&attr_width) {
            return Err(Error::dimension(format!(
                "need at least one attribute of 1..=32 bits, got {n_attrs} x {attr_width}"
            )));
        }
        if !values.len().is_multiple_of(n_attrs) {
            return Err(Error::dimension(format!(
                "{} values do not split into {n_attrs}-attribute samples",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| **v >> attr_width != 0) {
            return Err(Error::ValueTooWide {
                value: u128::from(*v),
                width: attr_width,
            });
        }
        Ok(Self {
            n_samples: values.len() / n_attrs,
            n_attrs,
            attr_width,
            values,
        })
    }

    pub fn from_rows(attr_width: usize, rows: &[Vec<u64>]) -> Result<Self> {
        let n_attrs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_attrs) {
            return Err(Error::dimension("samples of unequal length"));
        }
        Self::new(n_attrs, attr_width, rows.concat())
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_attrs(&self) -> usize {
        self.n_attrs
    }

    pub fn attr_width(&self) -> usize {
        self.attr_width
    }

    pub fn sample(&self, i: usize) -> &[u64] {
        &self.values[i * self.n_attrs..(i + 1) * self.n_attrs]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[u64]> {
        self.values.chunks(self.n_attrs)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Same samples in the order `order[k]` = old index of new sample `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        super::check_order(order, self.n_samples)?;
        let values = order
            .iter()
            .flat_map(|&i| self.sample(i).iter().copied())
            .collect();
        Self::new(self.n_attrs, self.attr_width, values)
    }
}

/// Square sparse matrix as sorted coordinate triplets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n: usize,
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sorts the triplets by (row, col); duplicates and out-of-range indices
    /// are errors.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::dimension(format!("dimension {n} too large")));
        }
        if let Some(e) = entries.iter().find(|e| e.0 >= n || e.1 >= n) {
            return Err(Error::dimension(format!(
                "entry ({}, {}) outside a {n}x{n} matrix",
                e.0, e.1
            )));
        }
        if let Some(e) = entries.iter().find(|e| !e.2.is_finite()) {
            return Err(Error::dimension(format!(
                "non-finite value at ({}, {})",
                e.0, e.1
            )));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::dimension(format!(
                "duplicate entry ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self {
            n,
            rows: entries.iter().map(|e| e.0 as u32).collect(),
            cols: entries.iter().map(|e| e.1 as u32).collect(),
            vals: entries.iter().map(|e| e.2).collect(),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn density(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.nnz() as f64 / self.n as f64
        }
    }

    /// `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nnz()).map(move |k| (self.rows[k] as usize, self.cols[k] as usize, self.vals[k]))
    }

    /// Row pointer array of the CSR form.
    pub fn row_ptr(&self) -> Vec<usize> {
        let mut ptr = vec![0; self.n + 1];
        for &r in &self.rows {
            ptr[r as usize + 1] += 1;
        }
        for i in 0..self.n {
            ptr[i + 1] += ptr[i];
        }
        ptr
    }

    pub fn nonempty_rows(&self) -> usize {
        let mut rows = self.rows.clone();
        rows.dedup();
        rows.len()
    }
}

/// Directed graph as an edge list over vertices `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdges {
    vertices: u64,
    edges: Vec<(u64, u64)>,
}

impl GraphEdges {
    pub fn new(vertices: u64, edges: Vec<(u64, u64)>) -> Result<Self> {
        if let Some(e) = edges.iter().find(|e| e.0 >= vertices || e.1 >= vertices) {
            return Err(Error::dimension(format!(
                "edge ({}, {}) references a vertex outside 0..{vertices}",
                e.0, e.1
            )));
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> u64 {
        self.vertices
    }

    pub fn num_edges(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn edges(&self) -> &[(u64, u64)] {
        &self.edges
    }

    pub fn out_degrees(&self) -> Vec<u64> {
        let mut d = vec![0; self.vertices as usize];
        for &(u, _) in &self.edges {
            d[u as usize] += 1;
        }
        d
    }

    /// Mean out-degree over vertices with at least one out-edge.
    pub fn avg_out_degree(&self) -> f64 {
        let with_edges = self.out_degrees().iter().filter(|d| **d > 0).count();
        if with_edges == 0 {
            0.0
        } else {
            self.edges.len() as f64 / with_edges as f64
        }
    }

    pub fn max_out_degree(&self) -> u64 {
        self.out_degrees().into_iter().max().unwrap_or(0)
    }

    /// Successor lists indexed by vertex.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let mut adj = vec![Vec::new(); self.vertices as usize];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
        }
        adj
    }
}
