//! Plain scalar references the array kernels are checked against.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::kernels::{CsrMatrix, GraphEdges, SampleSet};

fn mask(m: u32) -> u128 {
    if m >= 128 {
        u128::MAX
    } else {
        (1u128 << m) - 1
    }
}

/// `(a + b) mod 2^m`.
pub fn oracle_add(a: u128, b: u128, m: u32) -> u128 {
    a.wrapping_add(b) & mask(m)
}

/// `(a - b) mod 2^m`.
pub fn oracle_sub(a: u128, b: u128, m: u32) -> u128 {
    a.wrapping_sub(b) & mask(m)
}

/// `a * b` as a 2m-bit product of m-bit operands (m ≤ 64).
pub fn oracle_mult(a: u128, b: u128, m: u32) -> u128 {
    assert!(m <= 64);
    (a & mask(m)) * (b & mask(m))
}

pub fn oracle_ed(samples: &SampleSet, centers: &[Vec<u64>]) -> Vec<Vec<u128>> {
    samples
        .samples()
        .map(|x| {
            centers
                .iter()
                .map(|c| {
                    x.iter()
                        .zip(c)
                        .map(|(&a, &b)| {
                            let d = i128::from(a) - i128::from(b);
                            (d * d) as u128
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

pub fn oracle_dp(vectors: &SampleSet, h: &[u64]) -> Vec<u128> {
    vectors
        .samples()
        .map(|x| {
            x.iter()
                .zip(h)
                .map(|(&a, &b)| u128::from(a) * u128::from(b))
                .sum()
        })
        .collect()
}

/// 256 bins over bits 31..24.
pub fn oracle_hist(samples: &[u32]) -> Vec<u64> {
    let mut h = vec![0; 256];
    for &x in samples {
        h[(x >> 24) as usize] += 1;
    }
    h
}

/// CSR product on the quantized grid the kernel computes on, scaled by
/// 2^(2·FRAC_BITS).
pub fn oracle_spmv(a: &CsrMatrix, b: &[f64]) -> Result<Vec<i128>> {
    if b.len() != a.n() {
        return Err(Error::dimension("vector length does not match the matrix"));
    }
    let ptr = a.row_ptr();
    let entries: Vec<_> = a.entries().collect();
    (0..a.n())
        .map(|r| {
            entries[ptr[r]..ptr[r + 1]]
                .iter()
                .map(|&(_, c, v)| crate::kernels::quantized_product(v, b[c]))
                .sum()
        })
        .collect()
}

/// Queue-based BFS: per-vertex distance and one valid predecessor.
pub fn oracle_bfs(g: &GraphEdges, source: u64) -> (Vec<Option<u64>>, Vec<Option<u64>>) {
    let adj = g.adjacency();
    let n = g.vertices() as usize;
    let mut dist = vec![None; n];
    let mut pred = vec![None; n];
    let mut queue = VecDeque::new();
    dist[source as usize] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize].expect("queued vertices have a distance");
        for &v in &adj[u as usize] {
            if dist[v as usize].is_none() {
                dist[v as usize] = Some(du + 1);
                pred[v as usize] = Some(u);
                queue.push_back(v);
            }
        }
    }
    (dist, pred)
}

/// Checks a BFS result: exact distances against the oracle, and every
/// predecessor an in-neighbour exactly one level closer to the source.
pub fn check_bfs(
    g: &GraphEdges,
    source: u64,
    distance: &[Option<u8>],
    predecessor: &[Option<u64>],
) -> Result<()> {
    let (want, _) = oracle_bfs(g, source);
    let edges: std::collections::HashSet<_> = g.edges().iter().copied().collect();
    for v in 0..g.vertices() as usize {
        let got = distance[v].map(u64::from);
        if got != want[v] {
            return Err(Error::Model(format!(
                "vertex {v}: distance {got:?}, expected {:?}",
                want[v]
            )));
        }
        match (want[v], predecessor[v]) {
            (Some(0), None) | (None, None) => {}
            (Some(d), Some(p)) if d > 0 => {
                let ok = want[p as usize] == Some(d - 1) && edges.contains(&(p, v as u64));
                if !ok {
                    return Err(Error::Model(format!(
                        "vertex {v}: predecessor {p} is not a valid parent"
                    )));
                }
            }
            (d, p) => {
                return Err(Error::Model(format!(
                    "vertex {v}: distance {d:?} with predecessor {p:?}"
                )));
            }
        }
    }
    Ok(())
}
