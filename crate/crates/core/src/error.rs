use alloc::string::String;

use crate::topology::Side;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Geometry,
    Solver,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("breakpoints must be strictly increasing inside (0, 1)")]
    NonMonotone,
    #[error("multiplicity {multiplicity} is outside [1, {max}]")]
    MultiplicityOutOfRange { multiplicity: usize, max: usize },
    #[error("{breakpoints} breakpoints but {multiplicities} multiplicities")]
    LengthMismatch { breakpoints: usize, multiplicities: usize },
    #[error("invalid knot vector: {0}")]
    InvalidKnotVector(&'static str),
    #[error("knot vector has {found} interior breakpoints, at least {needed} required")]
    TooFewElements { found: usize, needed: usize },
    #[error("degree {degree} is too low, at least {min} required")]
    DegreeTooLow { degree: usize, min: usize },
    #[error("parameter {0} lies outside the domain [0, 1]")]
    OutOfDomain(f64),
    #[error("quadrature order {0} is outside 1..=32")]
    OrderOutOfRange(usize),
    #[error("degenerate geometry: Jacobian determinant {det:e}")]
    DegenerateJacobian { det: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("patch {patch_a} side {side_a:?} and patch {patch_b} side {side_b:?} share a trace but their meshes do not conform")]
    NonConformingInterface {
        patch_a: usize,
        side_a: Side,
        patch_b: usize,
        side_b: Side,
    },
    #[error("interface override between patches {0} and {1} does not name an existing interface")]
    OrientationMismatch(usize, usize),
    #[error("patch {patch} side {side:?} matches more than one other side")]
    DanglingSide { patch: usize, side: Side },
    #[error("boundary data fit is singular")]
    SingularFit,
    #[error("mesh with {elements} elements is too coarse, more than {needed} required")]
    MeshTooCoarse { elements: usize, needed: usize },
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("saddle-point system is singular: multiplier Schur complement has rank {rank} of {size}")]
    SingularSystem { rank: usize, size: usize },
    #[error("relative residual {residual:e} exceeds {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("shape mismatch: {rows} x {cols}")]
    ShapeMismatch { rows: usize, cols: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonMonotone
            | Error::MultiplicityOutOfRange { .. }
            | Error::LengthMismatch { .. }
            | Error::InvalidKnotVector(_)
            | Error::TooFewElements { .. }
            | Error::DegreeTooLow { .. }
            | Error::OutOfDomain(_)
            | Error::OrderOutOfRange(_)
            | Error::MeshTooCoarse { .. }
            | Error::ShapeMismatch { .. } => ErrorKind::Config,
            Error::DegenerateJacobian { .. }
            | Error::InvalidGeometry(_)
            | Error::NonConformingInterface { .. }
            | Error::OrientationMismatch(..)
            | Error::DanglingSide { .. } => ErrorKind::Geometry,
            Error::SingularFit
            | Error::NotPositiveDefinite { .. }
            | Error::SingularSystem { .. }
            | Error::ResidualTooLarge { .. } => ErrorKind::Solver,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
