use super::{BinaryMatrix, LiftingMatrix, SCProtograph};
use crate::error::{Error, Result};

/// Provenance of a lifted edge: the protograph position it came from and the
/// circulant exponent applied there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeTag {
    pub check: u32,
    pub var: u32,
    pub proto_row: u32,
    pub proto_col: u32,
    pub shift: u32,
}

/// Sparse bipartite graph between variable nodes (columns) and check nodes (rows).
///
/// Adjacency lists are kept sorted. Equality compares adjacency only.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    var_adj: Vec<Vec<u32>>,
    check_adj: Vec<Vec<u32>>,
    tags: Option<Vec<EdgeTag>>,
}

impl PartialEq for TannerGraph {
    fn eq(&self, other: &Self) -> bool {
        self.var_adj == other.var_adj && self.check_adj == other.check_adj
    }
}

impl Eq for TannerGraph {}

impl TannerGraph {
    /// Builds a graph from `(check, var)` edges. Duplicate edges are rejected.
    pub fn from_edges(n_vars: usize, n_checks: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut var_adj = vec![Vec::new(); n_vars];
        let mut check_adj = vec![Vec::new(); n_checks];
        for &(c, v) in edges {
            if c >= n_checks || v >= n_vars {
                return Err(Error::InvalidArgument(format!(
                    "edge ({c}, {v}) outside {n_checks}x{n_vars}"
                )));
            }
            var_adj[v].push(c as u32);
            check_adj[c].push(v as u32);
        }
        for list in var_adj.iter_mut().chain(check_adj.iter_mut()) {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::InvalidArgument("duplicate edge".into()));
            }
        }
        Ok(TannerGraph {
            var_adj,
            check_adj,
            tags: None,
        })
    }

    /// Graph of a dense parity-check matrix (rows are checks).
    pub fn from_dense(h: &BinaryMatrix) -> Self {
        let mut edges = Vec::with_capacity(h.count_ones());
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                if h.get(i, j) {
                    edges.push((i, j));
                }
            }
        }
        TannerGraph::from_edges(h.cols(), h.rows(), &edges).expect("dense matrix has no duplicate edges")
    }

    pub fn n_vars(&self) -> usize {
        self.var_adj.len()
    }

    pub fn n_checks(&self) -> usize {
        self.check_adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.var_adj.iter().map(Vec::len).sum()
    }

    pub fn var_neighbors(&self, v: usize) -> &[u32] {
        &self.var_adj[v]
    }

    pub fn check_neighbors(&self, c: usize) -> &[u32] {
        &self.check_adj[c]
    }

    pub fn tags(&self) -> Option<&[EdgeTag]> {
        self.tags.as_deref()
    }

    pub fn to_dense(&self) -> BinaryMatrix {
        let mut h = BinaryMatrix::zeros(self.n_checks(), self.n_vars());
        for (v, checks) in self.var_adj.iter().enumerate() {
            for &c in checks {
                h.set(c as usize, v, true);
            }
        }
        h
    }

    /// Subgraph induced by `vars`: those variable nodes plus every check adjacent to
    /// at least one of them. Returns the graph and the original check indices.
    pub fn induced_by_vars(&self, vars: &[usize]) -> (TannerGraph, Vec<usize>) {
        let mut checks: Vec<usize> = vars
            .iter()
            .flat_map(|&v| self.var_adj[v].iter().map(|&c| c as usize))
            .collect();
        checks.sort_unstable();
        checks.dedup();
        let mut edges = Vec::new();
        for (vi, &v) in vars.iter().enumerate() {
            for &c in &self.var_adj[v] {
                let ci = checks.binary_search(&(c as usize)).unwrap();
                edges.push((ci, vi));
            }
        }
        let g = TannerGraph::from_edges(vars.len(), checks.len(), &edges).expect("induced subgraph is simple");
        (g, checks)
    }
}

/// Expands every protograph nonzero descending from base `(i, j)` into the
/// circulant `sigma^{L(i, j)}`: variable copy `c` of a column connects to check
/// copy `(c + f) mod z` of the row.
pub fn lift_to_tanner(proto: &SCProtograph, lifting: &LiftingMatrix, z: usize) -> Result<TannerGraph> {
    if lifting.z() != z {
        return Err(Error::InvalidArgument(format!(
            "lifting matrix built for z = {}, requested z = {z}",
            lifting.z()
        )));
    }
    let h = proto.matrix();
    let n_vars = h.cols() * z;
    let n_checks = h.rows() * z;
    let mut var_adj = vec![Vec::new(); n_vars];
    let mut check_adj = vec![Vec::new(); n_checks];
    let mut tags = Vec::with_capacity(h.count_ones() * z);
    for row in 0..h.rows() {
        for col in 0..h.cols() {
            if !h.get(row, col) {
                continue;
            }
            let o = proto.origin(row, col).ok_or(Error::InvalidArgument(format!(
                "protograph position ({row}, {col}) has no base origin"
            )))?;
            let f = lifting
                .get(o.base_row, o.base_col)
                .ok_or(Error::AbsentEntry {
                    row: o.base_row,
                    col: o.base_col,
                })? as usize;
            if f >= z {
                return Err(Error::EntryOutOfRange {
                    row: o.base_row,
                    col: o.base_col,
                    value: f as i64,
                    allowed: format!("0..{z}"),
                });
            }
            for c in 0..z {
                let var = col * z + c;
                let check = row * z + (c + f) % z;
                var_adj[var].push(check as u32);
                check_adj[check].push(var as u32);
                tags.push(EdgeTag {
                    check: check as u32,
                    var: var as u32,
                    proto_row: row as u32,
                    proto_col: col as u32,
                    shift: f as u32,
                });
            }
        }
    }
    for list in var_adj.iter_mut().chain(check_adj.iter_mut()) {
        list.sort_unstable();
    }
    Ok(TannerGraph {
        var_adj,
        check_adj,
        tags: Some(tags),
    })
}

/// Dense `z x z` circulant permutation matrix `sigma^f`.
pub fn circulant(z: usize, f: usize) -> BinaryMatrix {
    let mut m = BinaryMatrix::zeros(z, z);
    for col in 0..z {
        m.set((col + f) % z, col, true);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_sc_protograph, IntGrid, PartitioningMatrix, SCCodeParams};

    #[test]
    fn cpm_convention() {
        let id = circulant(3, 0);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(id.get(r, c), r == c);
            }
        }
        let s = circulant(3, 1);
        let ones: Vec<(usize, usize)> = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .filter(|&(r, c)| s.get(r, c))
            .collect();
        assert_eq!(ones, vec![(0, 2), (1, 0), (2, 1)]);
    }

    #[test]
    fn lifted_block_matches_circulant() {
        let base = BinaryMatrix::ones(1, 1);
        let proto = super::super::protograph::build_with_replicas(1, 1, 1, 0, &PartitioningMatrix::zeros(&base), &base).unwrap();
        let lift = LiftingMatrix::new(IntGrid::filled(&base, 1), &base, 3).unwrap();
        let g = lift_to_tanner(&proto, &lift, 3).unwrap();
        assert_eq!(g.to_dense(), circulant(3, 1));
    }

    #[test]
    fn code5_variable_count_and_degrees() {
        let p = SCCodeParams::new(3, 7, 11, 30, 5).unwrap();
        let base = BinaryMatrix::ones(3, 7);
        let mut grid = IntGrid::filled(&base, 0);
        for j in 0..7 {
            grid.set(1, j, Some((j % 6) as u32));
            grid.set(2, j, Some(((2 * j) % 6) as u32));
        }
        let part = PartitioningMatrix::new(grid, &base, 5, None).unwrap();
        let proto = build_sc_protograph(&p, &part, &base).unwrap();
        let mut lgrid = IntGrid::filled(&base, 0);
        for j in 0..7 {
            lgrid.set(1, j, Some(j as u32));
            lgrid.set(2, j, Some((3 * j % 11) as u32));
        }
        let lift = LiftingMatrix::new(lgrid, &base, 11).unwrap();
        let g = lift_to_tanner(&proto, &lift, 11).unwrap();
        assert_eq!(g.n_vars(), 2310);
        assert_eq!(g.n_checks(), p.check_count());
        assert_eq!(g.n_edges(), 11 * proto.matrix().count_ones());
        for v in 0..g.n_vars() {
            assert_eq!(g.var_neighbors(v).len(), proto.matrix().col_weight(v / 11));
        }
    }
}
