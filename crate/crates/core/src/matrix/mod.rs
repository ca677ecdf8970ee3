//! Base matrices, partitioning/lifting matrices, SC protographs and lifted
//! Tanner graphs.

mod io;
mod protograph;
mod tanner;

pub use io::{
    export_alist, import_alist, read_alist, read_binary_grid, read_int_grid, write_alist,
    write_binary_grid, write_int_grid,
};
pub use protograph::{build_sc_protograph, protograph_for_block, Origin, SCProtograph};
pub use tanner::{circulant, lift_to_tanner, EdgeTag, TannerGraph};

use crate::error::{Error, Result};

/// The five code parameters `(gamma, kappa, z, L, m)` of a circulant-based SC code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SCCodeParams {
    /// Column weight of the underlying block code (number of base rows).
    pub gamma: usize,
    /// Row weight of the underlying block code (number of base columns).
    pub kappa: usize,
    /// Circulant size.
    pub z: usize,
    /// Coupling length (number of replicas).
    pub coupling_length: usize,
    /// Memory.
    pub memory: usize,
}

impl SCCodeParams {
    pub fn new(gamma: usize, kappa: usize, z: usize, coupling_length: usize, memory: usize) -> Result<Self> {
        let p = SCCodeParams {
            gamma,
            kappa,
            z,
            coupling_length,
            memory,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma < 3 {
            return Err(Error::InvalidParams(format!("gamma = {} < 3", self.gamma)));
        }
        if self.kappa <= self.gamma {
            return Err(Error::InvalidParams(format!(
                "kappa = {} must exceed gamma = {}",
                self.kappa, self.gamma
            )));
        }
        if self.z < 2 {
            return Err(Error::InvalidParams(format!("z = {} < 2", self.z)));
        }
        if self.coupling_length < 1 {
            return Err(Error::InvalidParams("L must be at least 1".into()));
        }
        if self.memory >= self.coupling_length {
            log::warn!(
                "memory m = {} >= coupling length L = {}; coupling is degenerate",
                self.memory,
                self.coupling_length
            );
        }
        Ok(())
    }

    /// `kappa * z * L`.
    pub fn code_length(&self) -> usize {
        self.kappa * self.z * self.coupling_length
    }

    /// Number of check nodes, `(m + L) * gamma * z`.
    pub fn check_count(&self) -> usize {
        (self.memory + self.coupling_length) * self.gamma * self.z
    }

    /// `1 - (m + L) gamma / (L kappa)` as an exact fraction.
    pub fn design_rate(&self) -> Rate {
        let den = (self.coupling_length * self.kappa) as i64;
        let num = den - ((self.memory + self.coupling_length) * self.gamma) as i64;
        Rate::new(num, den)
    }
}

/// A reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rate {
    pub num: i64,
    pub den: i64,
}

impl Rate {
    pub fn new(num: i64, den: i64) -> Self {
        fn gcd(a: i64, b: i64) -> i64 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Rate {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Dense binary matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows,
            cols,
            data: vec![true; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.as_ref().len()).unwrap_or(0);
        let mut m = BinaryMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: format!("{c} columns"),
                    found: format!("{} in row {i}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(i, j, true),
                    _ => {
                        return Err(Error::EntryOutOfRange {
                            row: i,
                            col: j,
                            value: v as i64,
                            allowed: "{0, 1}".into(),
                        })
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.cols + j] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn row_support(&self, i: usize) -> Vec<usize> {
        (0..self.cols).filter(|&j| self.get(i, j)).collect()
    }

    pub fn col_support(&self, j: usize) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.get(i, j)).collect()
    }

    pub fn col_weight(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    pub fn row_weight(&self, i: usize) -> usize {
        (0..self.cols).filter(|&j| self.get(i, j)).count()
    }
}

/// The base matrix of the underlying block code. All-one by default.
pub type BaseMatrix = BinaryMatrix;

/// Integer grid with an "absent" marker for positions outside the base support.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntGrid {
    rows: usize,
    cols: usize,
    data: Vec<Option<u32>>,
}

impl IntGrid {
    pub fn new(rows: usize, cols: usize, data: Vec<Option<u32>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{}", data.len()),
            });
        }
        Ok(IntGrid { rows, cols, data })
    }

    /// Grid with `value` on every nonzero position of `support` and absent elsewhere.
    pub fn filled(support: &BinaryMatrix, value: u32) -> Self {
        let data = (0..support.rows())
            .flat_map(|i| (0..support.cols()).map(move |j| (i, j)))
            .map(|(i, j)| support.get(i, j).then_some(value))
            .collect();
        IntGrid {
            rows: support.rows(),
            cols: support.cols(),
            data,
        }
    }

    pub fn from_signed_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: format!("{c} columns"),
                    found: format!("{} in row {i}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data.push(match v {
                    -1 => None,
                    v if v >= 0 && v <= u32::MAX as i64 => Some(v as u32),
                    v => {
                        return Err(Error::EntryOutOfRange {
                            row: i,
                            col: j,
                            value: v,
                            allowed: "-1 or nonnegative".into(),
                        })
                    }
                });
            }
        }
        Ok(IntGrid {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Option<u32>) {
        self.data[i * self.cols + j] = v;
    }

    /// Rows as signed integers with absent entries as `-1`.
    pub fn to_signed_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).map(|v| v as i64).unwrap_or(-1))
                    .collect()
            })
            .collect()
    }

    fn check_support(&self, base: &BinaryMatrix) -> Result<()> {
        if self.rows != base.rows() || self.cols != base.cols() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", base.rows(), base.cols()),
                found: format!("{}x{}", self.rows, self.cols),
            });
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                match (base.get(i, j), self.get(i, j)) {
                    (true, None) => return Err(Error::AbsentEntry { row: i, col: j }),
                    (false, Some(v)) => {
                        return Err(Error::EntryOutOfRange {
                            row: i,
                            col: j,
                            value: v as i64,
                            allowed: "absent (base entry is zero)".into(),
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Partitioning matrix: component index `y` in `{0, ..., m}` of every base nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitioningMatrix {
    grid: IntGrid,
    memory: usize,
}

impl PartitioningMatrix {
    /// Validates `grid` against the base support and memory. When `allowed` is given
    /// (TC codes) every entry must also belong to it.
    pub fn new(grid: IntGrid, base: &BinaryMatrix, memory: usize, allowed: Option<&[u32]>) -> Result<Self> {
        grid.check_support(base)?;
        for i in 0..grid.rows() {
            for j in 0..grid.cols() {
                if let Some(v) = grid.get(i, j) {
                    if v as usize > memory {
                        return Err(Error::EntryOutOfRange {
                            row: i,
                            col: j,
                            value: v as i64,
                            allowed: format!("0..={memory}"),
                        });
                    }
                    if let Some(set) = allowed {
                        if !set.contains(&v) {
                            return Err(Error::EntryOutOfRange {
                                row: i,
                                col: j,
                                value: v as i64,
                                allowed: format!("TC set {set:?}"),
                            });
                        }
                    }
                }
            }
        }
        Ok(PartitioningMatrix { grid, memory })
    }

    pub fn zeros(base: &BinaryMatrix) -> Self {
        PartitioningMatrix {
            grid: IntGrid::filled(base, 0),
            memory: 0,
        }
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn grid(&self) -> &IntGrid {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.grid.get(i, j)
    }
}

/// Lifting matrix: circulant exponent in `{0, ..., z-1}` of every base nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiftingMatrix {
    grid: IntGrid,
    z: usize,
}

impl LiftingMatrix {
    pub fn new(grid: IntGrid, base: &BinaryMatrix, z: usize) -> Result<Self> {
        grid.check_support(base)?;
        for i in 0..grid.rows() {
            for j in 0..grid.cols() {
                if let Some(v) = grid.get(i, j) {
                    if v as usize >= z {
                        return Err(Error::EntryOutOfRange {
                            row: i,
                            col: j,
                            value: v as i64,
                            allowed: format!("0..{z}"),
                        });
                    }
                }
            }
        }
        Ok(LiftingMatrix { grid, z })
    }

    pub fn zeros(base: &BinaryMatrix, z: usize) -> Self {
        LiftingMatrix {
            grid: IntGrid::filled(base, 0),
            z,
        }
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn grid(&self) -> &IntGrid {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.grid.get(i, j)
    }
}

/// Maps the nonzero positions of a base matrix to consecutive indices of the
/// optimization vector (row-major order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntrySpace {
    rows: usize,
    cols: usize,
    index: Vec<Option<u32>>,
    positions: Vec<(usize, usize)>,
}

impl EntrySpace {
    pub fn new(base: &BinaryMatrix) -> Self {
        let mut index = vec![None; base.rows() * base.cols()];
        let mut positions = Vec::new();
        for i in 0..base.rows() {
            for j in 0..base.cols() {
                if base.get(i, j) {
                    index[i * base.cols() + j] = Some(positions.len() as u32);
                    positions.push((i, j));
                }
            }
        }
        EntrySpace {
            rows: base.rows(),
            cols: base.cols(),
            index,
            positions,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<u32> {
        self.index[i * self.cols + j]
    }

    pub fn position(&self, e: usize) -> (usize, usize) {
        self.positions[e]
    }

    /// Flattens a grid into the optimization vector.
    pub fn vector(&self, grid: &IntGrid) -> Result<Vec<u32>> {
        self.positions
            .iter()
            .map(|&(i, j)| grid.get(i, j).ok_or(Error::AbsentEntry { row: i, col: j }))
            .collect()
    }

    /// Inverse of [`EntrySpace::vector`].
    pub fn grid(&self, x: &[u32]) -> IntGrid {
        let mut data = vec![None; self.rows * self.cols];
        for (e, &(i, j)) in self.positions.iter().enumerate() {
            data[i * self.cols + j] = Some(x[e]);
        }
        IntGrid {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lengths_and_rates() {
        let rows = [
            ((3, 17, 17, 30, 1), 8670, 0.82),
            ((3, 17, 17, 30, 2), 8670, 0.81),
            ((3, 17, 7, 10, 9), 1190, 0.66),
            ((4, 29, 29, 20, 19), 16820, 0.73),
            ((3, 7, 11, 30, 5), 2310, 0.50),
            ((4, 17, 37, 10, 1), 6290, 0.74),
            ((4, 17, 17, 50, 4), 14450, 0.75),
        ];
        for ((g, k, z, l, m), len, rate) in rows {
            let p = SCCodeParams::new(g, k, z, l, m).unwrap();
            assert_eq!(p.code_length(), len);
            assert!((p.design_rate().as_f64() - rate).abs() < 0.005 + 1e-12, "{p:?}");
        }
    }

    #[test]
    fn uncoupled_rate_is_block_rate() {
        let p = SCCodeParams::new(3, 7, 5, 1, 0).unwrap();
        assert_eq!(p.design_rate(), Rate::new(4, 7));
    }

    #[test]
    fn params_validation() {
        assert!(SCCodeParams::new(2, 5, 5, 3, 1).is_err());
        assert!(SCCodeParams::new(3, 3, 5, 3, 1).is_err());
        assert!(SCCodeParams::new(3, 5, 1, 3, 1).is_err());
        assert!(SCCodeParams::new(3, 5, 5, 0, 0).is_err());
        // m >= L only warns
        assert!(SCCodeParams::new(3, 5, 5, 2, 4).is_ok());
    }

    #[test]
    fn partitioning_range_and_tc_set() {
        let base = BinaryMatrix::ones(2, 2);
        let g = IntGrid::from_signed_rows(&[vec![0, 2], vec![1, 0]]).unwrap();
        assert!(PartitioningMatrix::new(g.clone(), &base, 2, None).is_ok());
        assert!(PartitioningMatrix::new(g.clone(), &base, 1, None).is_err());
        assert!(PartitioningMatrix::new(g, &base, 2, Some(&[0, 2])).is_err());
    }

    #[test]
    fn absent_entries_follow_base_support() {
        let base = BinaryMatrix::from_rows(&[[1u8, 0], [1, 1]]).unwrap();
        let good = IntGrid::from_signed_rows(&[vec![0, -1], vec![1, 1]]).unwrap();
        assert!(PartitioningMatrix::new(good, &base, 1, None).is_ok());
        let bad = IntGrid::from_signed_rows(&[vec![0, 0], vec![1, 1]]).unwrap();
        assert!(PartitioningMatrix::new(bad, &base, 1, None).is_err());
        let space = EntrySpace::new(&base);
        assert_eq!(space.len(), 3);
        assert_eq!(space.entry(0, 1), None);
        assert_eq!(space.entry(1, 1), Some(2));
    }
}
