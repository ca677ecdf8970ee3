use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::{BinaryMatrix, SCProtograph};

/// A cycle-`2g` candidate: the closed alternating traversal
/// `col j1 -> row i1 -> col j2 -> ... -> row ig -> col j1`, whose visited entries
/// are `(i_k, j_k)` and `(i_k, j_{k+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleCandidate {
    /// Interleaved `(i1, j1, i2, j2, ..., ig, jg)`, in canonical form once listed.
    nodes: Vec<u32>,
}

impl CycleCandidate {
    pub fn new(rows: &[u32], cols: &[u32]) -> Result<Self> {
        let g = rows.len();
        if cols.len() != g {
            return Err(Error::InvalidArgument("row and column sequences differ in length".into()));
        }
        if !(2..=4).contains(&g) {
            return Err(Error::UnsupportedHalfLength(g));
        }
        for k in 0..g {
            if rows[k] == rows[(k + 1) % g] || cols[k] == cols[(k + 1) % g] {
                return Err(Error::InvalidArgument(
                    "consecutive rows and columns must differ".into(),
                ));
            }
        }
        let nodes = rows.iter().zip(cols).flat_map(|(&i, &j)| [i, j]).collect();
        Ok(CycleCandidate { nodes })
    }

    pub fn g(&self) -> usize {
        self.nodes.len() / 2
    }

    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    #[inline]
    pub fn row(&self, k: usize) -> usize {
        self.nodes[2 * k] as usize
    }

    #[inline]
    pub fn col(&self, k: usize) -> usize {
        self.nodes[2 * k + 1] as usize
    }

    /// Entry `(i_k, j_k)`.
    pub fn plus_entry(&self, k: usize) -> (usize, usize) {
        (self.row(k), self.col(k))
    }

    /// Entry `(i_k, j_{k+1})`.
    pub fn minus_entry(&self, k: usize) -> (usize, usize) {
        (self.row(k), self.col((k + 1) % self.g()))
    }

    /// All `2g` representations (rotations and reflections).
    fn representations(&self) -> Vec<Vec<u32>> {
        let g = self.g();
        let mut out = Vec::with_capacity(2 * g);
        for s in 0..g {
            let mut fwd = Vec::with_capacity(2 * g);
            let mut rev = Vec::with_capacity(2 * g);
            for k in 0..g {
                fwd.push(self.nodes[2 * ((k + s) % g)]);
                fwd.push(self.nodes[2 * ((k + s) % g) + 1]);
                // reversed traversal: c'[k] = c[(g - k) % g], r'[k] = r[g - 1 - k], then rotated
                let kk = (k + s) % g;
                rev.push(self.nodes[2 * (g - 1 - kk)]);
                rev.push(self.nodes[2 * ((g - kk) % g) + 1]);
            }
            out.push(fwd);
            out.push(rev);
        }
        out
    }

    /// Lexicographically smallest representation.
    pub fn canonical(&self) -> CycleCandidate {
        let nodes = self.representations().into_iter().min().unwrap();
        CycleCandidate { nodes }
    }

    pub fn is_canonical(&self) -> bool {
        self.representations().iter().all(|r| *r >= self.nodes)
    }

    /// Number of representations equal to this one: 2 for traversals that repeat
    /// with period two (possible only for g = 4), otherwise 1.
    pub fn symmetry_order(&self) -> usize {
        self.representations().iter().filter(|r| **r == self.nodes).count()
    }

    fn translated(&self, drow: u32, dcol: u32) -> CycleCandidate {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n + drow } else { n + dcol })
            .collect();
        CycleCandidate { nodes }
    }
}

/// Canonical candidates of one half-length, sorted by canonical sequence.
/// The id of a candidate is its position in the list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateList {
    g: usize,
    candidates: Vec<CycleCandidate>,
}

impl CandidateList {
    pub fn g(&self) -> usize {
        self.g
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, id: usize) -> &CycleCandidate {
        &self.candidates[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CycleCandidate> {
        self.candidates.iter()
    }

    /// One CSV line per candidate: `id,g,i1,j1,...,ig,jg`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (id, c) in self.candidates.iter().enumerate() {
            write!(out, "{id},{}", self.g).unwrap();
            for n in c.nodes() {
                write!(out, ",{n}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

struct Dfs<'a> {
    row_supp: Vec<Vec<u32>>,
    col_supp: Vec<Vec<u32>>,
    g: usize,
    rows: Vec<u32>,
    cols: Vec<u32>,
    out: &'a mut Vec<CycleCandidate>,
}

impl Dfs<'_> {
    // rows[..k] and cols[..=k] are fixed; choose row k (k >= 1).
    fn extend_row(&mut self, k: usize) {
        let j = self.cols[k] as usize;
        for idx in 0..self.col_supp[j].len() {
            let i = self.col_supp[j][idx];
            if i < self.rows[0] || (k > 0 && i == self.rows[k - 1]) {
                continue;
            }
            if k == self.g - 1 {
                if i == self.rows[0] {
                    continue;
                }
                // closing entry (i_g, j_1)
                let j1 = self.cols[0];
                if j1 == self.cols[k] || self.row_supp[i as usize].binary_search(&j1).is_err() {
                    continue;
                }
                self.rows.push(i);
                let cand = CycleCandidate {
                    nodes: self.rows.iter().zip(&self.cols).flat_map(|(&a, &b)| [a, b]).collect(),
                };
                if cand.is_canonical() {
                    self.out.push(cand);
                }
                self.rows.pop();
            } else {
                self.rows.push(i);
                self.extend_col(k);
                self.rows.pop();
            }
        }
    }

    // rows[..=k], cols[..=k] fixed; choose column k + 1 on row k.
    fn extend_col(&mut self, k: usize) {
        let i = self.rows[k] as usize;
        for idx in 0..self.row_supp[i].len() {
            let j = self.row_supp[i][idx];
            if j == self.cols[k] {
                continue;
            }
            self.cols.push(j);
            self.extend_row(k + 1);
            self.cols.pop();
        }
    }
}

/// Enumerates every cycle-`2g` candidate of `matrix` by depth-first search over
/// alternating row/column sequences, keeping one canonical representative per
/// rotation/reflection class.
pub fn enumerate_candidates(matrix: &BinaryMatrix, g: usize) -> Result<CandidateList> {
    if !(2..=4).contains(&g) {
        return Err(Error::UnsupportedHalfLength(g));
    }
    let row_supp: Vec<Vec<u32>> = (0..matrix.rows())
        .map(|i| matrix.row_support(i).into_iter().map(|j| j as u32).collect())
        .collect();
    let col_supp: Vec<Vec<u32>> = (0..matrix.cols())
        .map(|j| matrix.col_support(j).into_iter().map(|i| i as u32).collect())
        .collect();
    let mut out = Vec::new();
    let mut dfs = Dfs {
        row_supp,
        col_supp,
        g,
        rows: Vec::with_capacity(g),
        cols: Vec::with_capacity(g),
        out: &mut out,
    };
    for i1 in 0..matrix.rows() as u32 {
        let supp = dfs.row_supp[i1 as usize].clone();
        dfs.rows.push(i1);
        for &j1 in &supp {
            dfs.cols.push(j1);
            for &j2 in &supp {
                if j2 == j1 {
                    continue;
                }
                dfs.cols.push(j2);
                dfs.extend_row(1);
                dfs.cols.pop();
            }
            dfs.cols.pop();
        }
        dfs.rows.pop();
    }
    out.sort_unstable();
    Ok(CandidateList { g, candidates: out })
}

/// Enumerates candidates of an SC protograph using replica-shift invariance:
/// candidates are found in a window of `min(L, floor(g/2) m + 1)` replicas whose
/// leftmost column block is 0, then translated across all replicas.
pub fn enumerate_protograph_candidates(proto: &SCProtograph, g: usize) -> Result<CandidateList> {
    if !(2..=4).contains(&g) {
        return Err(Error::UnsupportedHalfLength(g));
    }
    let (gamma, kappa, l, m) = (proto.gamma(), proto.kappa(), proto.replicas(), proto.memory());
    let window = l.min((g / 2) * m + 1);
    if window == l {
        return enumerate_candidates(proto.matrix(), g);
    }
    let full = proto.matrix();
    let mut sub = BinaryMatrix::zeros((m + window) * gamma, window * kappa);
    for r in 0..sub.rows() {
        for c in 0..sub.cols() {
            sub.set(r, c, full.get(r, c));
        }
    }
    let local = enumerate_candidates(&sub, g)?;
    let mut out = Vec::new();
    for cand in local.iter() {
        let blocks: Vec<usize> = (0..g).map(|k| cand.col(k) / kappa).collect();
        let lo = *blocks.iter().min().unwrap();
        let hi = *blocks.iter().max().unwrap();
        if lo != 0 {
            continue;
        }
        for r in 0..l - hi {
            out.push(cand.translated((r * gamma) as u32, (r * kappa) as u32));
        }
    }
    out.sort_unstable();
    Ok(CandidateList { g, candidates: out })
}
