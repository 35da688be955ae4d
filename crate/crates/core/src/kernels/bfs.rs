//! Level-synchronous BFS over an edge-per-row layout.
//!
//! Each level repeatedly picks one unprocessed row of the frontier, reads its
//! edge and marks every row of the successor vertex in one compare and one
//! write. Rows are examined one at a time, which is what bounds the speedup
//! by the out-degree.

use super::{check_order, check_rows, GraphEdges, KernelRun};
use crate::error::{Error, Result};
use crate::rcam::{BitWord, FieldSpec, RcamArray};

/// Successor ID of rows standing in for vertices without out-edges.
pub const NULL_VERTEX: u64 = (1 << 48) - 1;
/// Distance of rows never reached.
pub const UNVISITED: u8 = u8::MAX;
pub const BFS_ROW_WIDTH: usize = 154;

/// Column assignment of one edge row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsRowLayout {
    pub vertex: FieldSpec,
    pub successor: FieldSpec,
    pub visited: FieldSpec,
    pub visited_from: FieldSpec,
    pub predecessor: FieldSpec,
    pub distance: FieldSpec,
}

impl Default for BfsRowLayout {
    fn default() -> Self {
        Self {
            vertex: FieldSpec::new("vertex", 0, 47),
            successor: FieldSpec::new("successor", 48, 95),
            visited: FieldSpec::bit("visited", 96),
            visited_from: FieldSpec::bit("visited_from", 97),
            predecessor: FieldSpec::new("predecessor", 98, 145),
            distance: FieldSpec::new("distance", 146, 153),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsOutput {
    /// `None` for unreachable vertices.
    pub distance: Vec<Option<u8>>,
    /// `None` for the source and unreachable vertices.
    pub predecessor: Vec<Option<u64>>,
    /// Rows picked from a frontier and processed one by one.
    pub rows_examined: u64,
}

/// Array rows the graph occupies: one per edge plus one per vertex without
/// out-edges.
pub fn bfs_rows(g: &GraphEdges) -> usize {
    g.edges().len() + g.out_degrees().iter().filter(|d| **d == 0).count()
}

fn key(pairs: &[(&FieldSpec, u64)]) -> Result<(BitWord, Vec<FieldSpec>)> {
    let mut w = BitWord::new();
    for (f, v) in pairs {
        w.push_value(u128::from(*v), f.width())?;
    }
    Ok((w, pairs.iter().map(|(f, _)| (*f).clone()).collect()))
}

pub fn bfs(
    array: &mut RcamArray,
    g: &GraphEdges,
    source: u64,
    order: Option<&[usize]>,
) -> Result<KernelRun<BfsOutput>> {
    if source >= g.vertices() {
        return Err(Error::dimension(format!(
            "source {source} outside 0..{}",
            g.vertices()
        )));
    }
    if g.vertices() >= NULL_VERTEX {
        return Err(Error::dimension(
            "vertex IDs must fit 48 bits below the null ID",
        ));
    }
    let rows = bfs_rows(g);
    check_rows(array, rows)?;
    if let Some(o) = order {
        check_order(o, rows)?;
    }
    let l = BfsRowLayout::default();
    if array.width() < BFS_ROW_WIDTH {
        return Err(Error::layout(format!(
            "BFS rows need {BFS_ROW_WIDTH} bits, array has {}",
            array.width()
        )));
    }

    let stubs = g
        .out_degrees()
        .into_iter()
        .enumerate()
        .filter(|(_, d)| *d == 0)
        .map(|(v, _)| (v as u64, NULL_VERTEX));
    for (k, (u, v)) in g.edges().iter().copied().chain(stubs).enumerate() {
        let row = order.map_or(k, |o| o[k]);
        let is_source = u == source;
        array.load_row(row, &l.vertex, u128::from(u))?;
        array.load_row(row, &l.successor, u128::from(v))?;
        // the source counts as visited so back-edges cannot relabel it
        array.load_row(row, &l.visited, u128::from(is_source))?;
        // stub rows have nothing to expand
        array.load_row(row, &l.visited_from, u128::from(v == NULL_VERTEX))?;
        array.load_row(row, &l.predecessor, 0)?;
        array.load_row(
            row,
            &l.distance,
            if is_source { 0 } else { u128::from(UNVISITED) },
        )?;
    }

    let mut examined = 0u64;
    let mut level = 0u64;
    loop {
        let (frontier, frontier_fields) = key(&[(&l.distance, level), (&l.visited_from, 0)])?;
        loop {
            array.compare(&frontier, &frontier_fields)?;
            if !array.if_match() {
                break;
            }
            array.first_match();
            array.write(
                &BitWord::from_value(1, 1)?,
                std::slice::from_ref(&l.visited_from),
            )?;
            let edge = array.read(&[l.vertex.clone(), l.successor.clone()])?;
            let (u, v) = (edge.value(0, 48) as u64, edge.value(48, 48) as u64);
            examined += 1;
            let (target, target_fields) = key(&[(&l.vertex, v), (&l.visited, 0)])?;
            array.compare(&target, &target_fields)?;
            if level + 1 == u64::from(UNVISITED) {
                if array.if_match() {
                    return Err(Error::Overflow(format!(
                        "graph depth from {source} reaches the {UNVISITED} distance sentinel"
                    )));
                }
                continue;
            }
            let (mark, mark_fields) = key(&[
                (&l.distance, level + 1),
                (&l.predecessor, u),
                (&l.visited, 1),
            ])?;
            array.write(&mark, &mark_fields)?;
        }
        if level + 1 == u64::from(UNVISITED) {
            break;
        }
        let (next, next_fields) = key(&[(&l.distance, level + 1)])?;
        array.compare(&next, &next_fields)?;
        if !array.if_match() {
            break;
        }
        level += 1;
    }

    Ok(KernelRun {
        output: extract(array, g, source, &l, examined)?,
        ledger: array.take_ledger(),
    })
}

fn extract(
    array: &RcamArray,
    g: &GraphEdges,
    source: u64,
    l: &BfsRowLayout,
    examined: u64,
) -> Result<BfsOutput> {
    let n = g.vertices() as usize;
    let mut distance = vec![None; n];
    let mut predecessor = vec![None; n];
    let mut seen = vec![false; n];
    for row in 0..array.rows() {
        let v = array.peek(row, &l.vertex)? as usize;
        let d = array.peek(row, &l.distance)? as u8;
        let dist = (d != UNVISITED).then_some(d);
        let pred = (dist.is_some() && v as u64 != source)
            .then(|| array.peek(row, &l.predecessor))
            .transpose()?;
        let pred = pred.map(|p| p as u64);
        if std::mem::replace(&mut seen[v], true) {
            assert_eq!(
                (distance[v], predecessor[v]),
                (dist, pred),
                "rows of vertex {v} disagree"
            );
        }
        distance[v] = dist;
        predecessor[v] = pred;
    }
    Ok(BfsOutput {
        distance,
        predecessor,
        rows_examined: examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(g: &GraphEdges, source: u64) -> BfsOutput {
        let mut a = RcamArray::new(bfs_rows(g), BFS_ROW_WIDTH);
        bfs(&mut a, g, source, None).unwrap().output
    }

    #[test]
    fn single_edge() {
        let g = GraphEdges::new(2, vec![(0, 1)]).unwrap();
        let out = run(&g, 0);
        assert_eq!(out.distance, vec![Some(0), Some(1)]);
        assert_eq!(out.predecessor, vec![None, Some(0)]);
    }

    #[test]
    fn path_graph() {
        let g = GraphEdges::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(
            run(&g, 0).distance,
            vec![Some(0), Some(1), Some(2), Some(3)]
        );
        assert_eq!(run(&g, 2).distance, vec![None, None, Some(0), Some(1)]);
    }

    #[test]
    fn back_edge_keeps_source() {
        let g = GraphEdges::new(3, vec![(0, 1), (1, 0), (1, 2), (2, 0)]).unwrap();
        let out = run(&g, 0);
        assert_eq!(out.distance, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(out.predecessor, vec![None, Some(0), Some(1)]);
        assert_eq!(out.rows_examined, 4);
    }

    #[test]
    fn layout_matches_row_format() {
        let l = BfsRowLayout::default();
        let widths: Vec<usize> = [
            &l.vertex,
            &l.successor,
            &l.visited,
            &l.visited_from,
            &l.predecessor,
            &l.distance,
        ]
        .iter()
        .map(|f| f.width())
        .collect();
        assert_eq!(widths, vec![48, 48, 1, 1, 48, 8]);
        assert_eq!(l.distance.hi() + 1, BFS_ROW_WIDTH);
    }

    #[test]
    fn errors() {
        let g = GraphEdges::new(2, vec![(0, 1)]).unwrap();
        let mut a = RcamArray::new(2, BFS_ROW_WIDTH);
        assert!(matches!(bfs(&mut a, &g, 2, None), Err(Error::Dimension(_))));
        let long = GraphEdges::new(300, (0..299).map(|i| (i, i + 1)).collect()).unwrap();
        let mut a = RcamArray::new(bfs_rows(&long), BFS_ROW_WIDTH);
        assert!(matches!(
            bfs(&mut a, &long, 0, None),
            Err(Error::Overflow(_))
        ));
    }
}
