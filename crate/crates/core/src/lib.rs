//! Exact first- and second-order generalized differentiation for convex
//! piecewise linear (CPWL) functions.
//!
//! A CPWL function is given as a max of affine pieces over a polyhedral
//! domain.  Everything here is computed in exact rational arithmetic:
//! subdifferentials, activity patterns, normal and tangent cones to
//! subgradient sets, prenormal and limiting normal cones to the
//! subdifferential graph, and the domain and values of the second-order
//! subdifferential (generalized Hessian), together with closed-form fast
//! paths for the component max, the sup-norm, box indicators and the 1-norm,
//! and a brute-force polyhedral oracle used for cross-validation.

pub mod closedforms;
pub mod cones;
pub mod cpwl;
pub mod exactla;
pub mod graphgeo;
pub mod lp;
pub mod oracle;
pub mod secondorder;

pub use exactla::{QMatrix, QVector, Rational};

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the ambient dimension must be positive")]
    ZeroDimension,
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
    #[error("zero denominator in rational literal `{0}`")]
    ZeroDenominator(String),
    #[error("function must have at least one affine piece")]
    NoPieces,
    #[error("constraint polyhedron is empty")]
    EmptyDomain,
    #[error("index {index} out of range for {what}")]
    IndexOutOfRange { index: usize, what: &'static str },
    #[error("index sets violate the inclusion {0}")]
    InclusionViolation(&'static str),
    #[error("point lies outside the function domain")]
    OutsideDomain,
    #[error("vector is not a subgradient at the given point")]
    NotASubgradient,
    #[error("direction lies outside the second-order subdifferential domain")]
    OutsideSecondOrderDomain,
    #[error("affine independence qualification fails at the given point")]
    QualificationFailed,
    #[error("dimension {dim} exceeds the double-description bound {bound}")]
    DimensionBound { dim: usize, bound: usize },
    #[error("linear system has strict rows; use strictly_feasible for those")]
    StrictRowsPresent,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a mathematical precondition (as opposed to
    /// malformed input).  The CLI maps these to a distinct exit code.
    pub fn is_math_precondition(&self) -> bool {
        matches!(
            self,
            Error::OutsideDomain
                | Error::NotASubgradient
                | Error::OutsideSecondOrderDomain
                | Error::QualificationFailed
                | Error::DimensionBound { .. }
                | Error::Precondition(_)
        )
    }
}
