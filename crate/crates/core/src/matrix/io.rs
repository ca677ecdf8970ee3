//! Plain-text formats: alist for Tanner graphs and whitespace-separated integer
//! grids for base, partitioning and lifting matrices (`-1` marks absent entries).

use std::fmt::Write as _;
use std::path::Path;

use super::{BinaryMatrix, IntGrid, TannerGraph};
use crate::error::{Error, Result};

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for (k, it) in items.into_iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{it}").unwrap();
    }
    s
}

/// Serializes a graph in alist layout.
/// An empty list is written as a single `0` so every node keeps its own line.
pub fn export_alist(graph: &TannerGraph) -> String {
    let n = graph.n_vars();
    let m = graph.n_checks();
    let col_deg: Vec<usize> = (0..n).map(|v| graph.var_neighbors(v).len()).collect();
    let row_deg: Vec<usize> = (0..m).map(|c| graph.check_neighbors(c).len()).collect();
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "{n} {m}").unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    writeln!(out, "{}", join(&col_deg)).unwrap();
    writeln!(out, "{}", join(&row_deg)).unwrap();
    for v in 0..n {
        let nb = graph.var_neighbors(v);
        let padded = nb
            .iter()
            .map(|&c| c as usize + 1)
            .chain(std::iter::repeat_n(0, max_col.max(1) - nb.len()));
        writeln!(out, "{}", join(padded)).unwrap();
    }
    for c in 0..m {
        let nb = graph.check_neighbors(c);
        let padded = nb
            .iter()
            .map(|&v| v as usize + 1)
            .chain(std::iter::repeat_n(0, max_row.max(1) - nb.len()));
        writeln!(out, "{}", join(padded)).unwrap();
    }
    out
}

struct Tokens<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, t)| !t.is_empty())
            .collect();
        Tokens { lines, pos: 0 }
    }

    fn line(&mut self) -> Result<(usize, Vec<usize>)> {
        let (no, toks) = self.lines.get(self.pos).ok_or(Error::Parse {
            line: self.pos + 1,
            msg: "unexpected end of input".into(),
        })?;
        self.pos += 1;
        let vals = toks
            .iter()
            .map(|t| {
                t.parse::<usize>().map_err(|_| Error::Parse {
                    line: *no,
                    msg: format!("not a nonnegative integer: {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((*no, vals))
    }
}

/// Parses an alist document. Row lists are cross-checked against column lists.
pub fn import_alist(text: &str) -> Result<TannerGraph> {
    let mut t = Tokens::new(text);
    let bad = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let (l1, head) = t.line()?;
    if head.len() != 2 {
        return Err(bad(l1, "expected \"N M\""));
    }
    let (n, m) = (head[0], head[1]);
    let (l2, maxes) = t.line()?;
    if maxes.len() != 2 {
        return Err(bad(l2, "expected maximum degrees"));
    }
    let (l3, col_deg) = t.line()?;
    if col_deg.len() != n {
        return Err(bad(l3, "column degree count mismatch"));
    }
    let (l4, row_deg) = t.line()?;
    if row_deg.len() != m {
        return Err(bad(l4, "row degree count mismatch"));
    }
    let mut edges = Vec::new();
    for (v, &deg) in col_deg.iter().enumerate() {
        let (ln, list) = t.line()?;
        let nz: Vec<usize> = list.into_iter().filter(|&x| x != 0).collect();
        if nz.len() != deg {
            return Err(bad(ln, "column list length does not match its degree"));
        }
        for c in nz {
            if c > m {
                return Err(bad(ln, "check index out of range"));
            }
            edges.push((c - 1, v));
        }
    }
    let graph = TannerGraph::from_edges(n, m, &edges)?;
    for (c, &deg) in row_deg.iter().enumerate() {
        let (ln, list) = t.line()?;
        let mut nz: Vec<u32> = list.into_iter().filter(|&x| x != 0).map(|x| x as u32 - 1).collect();
        nz.sort_unstable();
        if nz.len() != deg || nz.as_slice() != graph.check_neighbors(c) {
            return Err(bad(ln, "row list inconsistent with column lists"));
        }
    }
    Ok(graph)
}

pub fn write_alist(path: &Path, graph: &TannerGraph) -> Result<()> {
    std::fs::write(path, export_alist(graph))?;
    Ok(())
}

pub fn read_alist(path: &Path) -> Result<TannerGraph> {
    import_alist(&std::fs::read_to_string(path)?)
}

/// Writes an integer grid, one row per line, absent entries as `-1`.
pub fn write_int_grid(grid: &IntGrid) -> String {
    let mut out = String::new();
    for row in grid.to_signed_rows() {
        writeln!(out, "{}", join(row)).unwrap();
    }
    out
}

pub fn read_int_grid(text: &str) -> Result<IntGrid> {
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(k, l)| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|_| Error::Parse {
                        line: k + 1,
                        msg: format!("not an integer: {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IntGrid::from_signed_rows(&rows)
}

pub fn write_binary_grid(m: &BinaryMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        writeln!(out, "{}", join((0..m.cols()).map(|j| m.get(i, j) as u8))).unwrap();
    }
    out
}

pub fn read_binary_grid(text: &str) -> Result<BinaryMatrix> {
    let grid = read_int_grid(text)?;
    let rows: Vec<Vec<u8>> = grid
        .to_signed_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.clamp(0, 255) as u8).collect())
        .collect();
    let any_bad = grid.to_signed_rows().iter().flatten().any(|&v| v != 0 && v != 1);
    if any_bad {
        return Err(Error::Parse {
            line: 0,
            msg: "binary grid must contain only 0 and 1".into(),
        });
    }
    BinaryMatrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_alist() {
        let g = TannerGraph::from_dense(&BinaryMatrix::from_rows(&[[1u8, 0], [0, 1]]).unwrap());
        let text = export_alist(&g);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec!["2 2", "1 1", "1 1", "1 1", "1", "2", "1", "2"]);
    }

    #[test]
    fn toy_alist_padding() {
        // column degrees (2,2,2,3), row degrees (3,3,3)
        let h = BinaryMatrix::from_rows(&[[1u8, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 1]]).unwrap();
        let text = export_alist(&TannerGraph::from_dense(&h));
        let expected = "4 3\n3 3\n2 2 2 3\n3 3 3\n1 2 0\n1 3 0\n2 3 0\n1 2 3\n1 2 4\n1 3 4\n2 3 4\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn toy_alist_regular_rows() {
        // all-one 3x4: column degrees 3, row degrees 4, no padding
        let text = export_alist(&TannerGraph::from_dense(&BinaryMatrix::ones(3, 4)));
        let expected = "4 3\n3 4\n3 3 3 3\n4 4 4\n1 2 3\n1 2 3\n1 2 3\n1 2 3\n1 2 3 4\n1 2 3 4\n1 2 3 4\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn malformed_alist() {
        assert!(import_alist("2 2\n1 1\n1 1\n").is_err());
        assert!(import_alist("2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n").is_err());
        assert!(import_alist("x 2\n").is_err());
    }

    #[test]
    fn grid_round_trip_with_absent() {
        let g = IntGrid::from_signed_rows(&[vec![0, -1, 3], vec![2, 1, -1]]).unwrap();
        let text = write_int_grid(&g);
        assert_eq!(text, "0 -1 3\n2 1 -1\n");
        assert_eq!(read_int_grid(&text).unwrap(), g);
    }

    proptest! {
        #[test]
        fn alist_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..60), cols in 1usize..8) {
            let rows = bits.len().div_ceil(cols);
            let mut h = BinaryMatrix::zeros(rows, cols);
            for (k, b) in bits.iter().enumerate() {
                h.set(k / cols, k % cols, *b);
            }
            let g = TannerGraph::from_dense(&h);
            let back = import_alist(&export_alist(&g)).unwrap();
            prop_assert_eq!(back.to_dense(), h);
        }
    }
}
