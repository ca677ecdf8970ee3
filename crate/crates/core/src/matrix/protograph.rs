use super::{BinaryMatrix, PartitioningMatrix, SCCodeParams};
use crate::error::{Error, Result};

/// Back-reference from a protograph nonzero to the base position it descends from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Origin {
    pub base_row: usize,
    pub base_col: usize,
    pub replica: usize,
}

/// Binary SC protograph of size `(m + L) gamma x L kappa`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SCProtograph {
    matrix: BinaryMatrix,
    origins: Vec<Option<Origin>>,
    gamma: usize,
    kappa: usize,
    replicas: usize,
    memory: usize,
}

impl SCProtograph {
    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    #[inline]
    pub fn origin(&self, row: usize, col: usize) -> Option<Origin> {
        self.origins[row * self.matrix.cols() + col]
    }

    /// Column block (replica index) of protograph column `col`.
    pub fn column_block(&self, col: usize) -> usize {
        col / self.kappa
    }

    /// Row block of protograph row `row`.
    pub fn row_block(&self, row: usize) -> usize {
        row / self.gamma
    }
}

/// Places base entry `(i, j)` with component `y = P(i, j)` at row block `r + y`,
/// column block `r`, for every replica `r`.
pub fn build_sc_protograph(
    params: &SCCodeParams,
    partition: &PartitioningMatrix,
    base: &BinaryMatrix,
) -> Result<SCProtograph> {
    build_with_replicas(
        params.gamma,
        params.kappa,
        params.coupling_length,
        params.memory,
        partition,
        base,
    )
}

/// Protograph of an uncoupled block code (`L = 1`, `m = 0`): the base matrix itself.
pub fn protograph_for_block(base: &BinaryMatrix) -> SCProtograph {
    build_with_replicas(
        base.rows(),
        base.cols(),
        1,
        0,
        &PartitioningMatrix::zeros(base),
        base,
    )
    .expect("zero partitioning is always valid")
}

pub(crate) fn build_with_replicas(
    gamma: usize,
    kappa: usize,
    replicas: usize,
    memory: usize,
    partition: &PartitioningMatrix,
    base: &BinaryMatrix,
) -> Result<SCProtograph> {
    if base.rows() != gamma || base.cols() != kappa {
        return Err(Error::DimensionMismatch {
            expected: format!("{gamma}x{kappa} base"),
            found: format!("{}x{}", base.rows(), base.cols()),
        });
    }
    let grid = partition.grid();
    if grid.rows() != gamma || grid.cols() != kappa {
        return Err(Error::DimensionMismatch {
            expected: format!("{gamma}x{kappa} partitioning matrix"),
            found: format!("{}x{}", grid.rows(), grid.cols()),
        });
    }
    let rows = (memory + replicas) * gamma;
    let cols = replicas * kappa;
    let mut matrix = BinaryMatrix::zeros(rows, cols);
    let mut origins = vec![None; rows * cols];
    for i in 0..gamma {
        for j in 0..kappa {
            if !base.get(i, j) {
                continue;
            }
            let y = grid.get(i, j).ok_or(Error::AbsentEntry { row: i, col: j })? as usize;
            if y > memory {
                return Err(Error::EntryOutOfRange {
                    row: i,
                    col: j,
                    value: y as i64,
                    allowed: format!("0..={memory}"),
                });
            }
            for r in 0..replicas {
                let row = (r + y) * gamma + i;
                let col = r * kappa + j;
                matrix.set(row, col, true);
                origins[row * cols + col] = Some(Origin {
                    base_row: i,
                    base_col: j,
                    replica: r,
                });
            }
        }
    }
    Ok(SCProtograph {
        matrix,
        origins,
        gamma,
        kappa,
        replicas,
        memory,
    })
}
