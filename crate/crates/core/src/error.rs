use std::fmt;

use thiserror::Error;

/// Which factorization stage of a least-squares solve failed its rank check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrStage {
    /// Per-cell decomposition of the innermost design block (three-level only).
    Cell { group: usize, cell: usize },
    /// Per-group decomposition.
    Group { group: usize },
    /// Final decomposition of the stacked global remainders.
    Global,
}

impl fmt::Display for QrStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QrStage::Cell { group, cell } => write!(f, "cell ({group}, {cell})"),
            QrStage::Group { group } => write!(f, "group {group}"),
            QrStage::Global => f.write_str("global stage"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape error: {0}")]
    Shape(String),

    /// A dense kernel met a (numerically) zero pivot at `index`.
    #[error("singular matrix: pivot {index} below rank tolerance")]
    Singular { index: usize },

    /// A diagonal block `A22` of a group (or of a cell, for three-level problems) is singular.
    #[error("singular A22 block at {}", fmt_block(*group, *cell))]
    SingularBlock { group: usize, cell: Option<usize> },

    #[error("singular H22 matrix for group {group}")]
    SingularH { group: usize },

    #[error("singular Schur complement for the global block")]
    SingularSchur,

    #[error("rank-deficient design: triangular factor of {stage} has near-zero diagonal {index}")]
    RankDeficient { stage: QrStage, index: usize },

    #[error("dense system of order {n} exceeds the ceiling {ceiling}")]
    TooLarge { n: usize, ceiling: usize },

    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_block(group: usize, cell: Option<usize>) -> String {
    match cell {
        Some(cell) => format!("cell ({group}, {cell})"),
        None => format!("group {group}"),
    }
}

impl Error {
    /// True for failures that stem from the numbers rather than from usage or input syntax.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::SingularBlock { .. }
                | Error::SingularH { .. }
                | Error::SingularSchur
                | Error::RankDeficient { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
