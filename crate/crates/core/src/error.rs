use thiserror::Error;

pub type Result<T, E = NctError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NctError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operands live over different theta matrices")]
    ThetaMismatch,
    #[error("axis {axis} out of range for a {dim}-torus")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("invalid theta matrix: {0}")]
    InvalidTheta(String),
    #[error("torus point is not unimodular: |z_{index}| = {modulus}")]
    NotUnimodular { index: usize, modulus: f64 },
    #[error("element is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("h_{index} is not skew-adjoint (defect {defect:e})")]
    NotSkewAdjoint { index: usize, defect: f64 },
    #[error("family does not commute (commutator norm {defect:e})")]
    NotCommuting { defect: f64 },
    #[error("not a permutation: {0:?}")]
    NotPermutation(Vec<usize>),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("connection is not flat (curvature residual {residual:e})")]
    NotFlat { residual: f64 },
    #[error("x*x is not constant (derivative norm {defect:e})")]
    NotConstant { defect: f64 },
    #[error("eigenvalue {value:e} of x*x is too close to the rank cutoff {cutoff:e}")]
    AmbiguousRank { value: f64, cutoff: f64 },
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("no joint eigenvector after {attempts} attempts (best residual {residual:e})")]
    NoJointEigenvector { residual: f64, attempts: usize },
    #[error("gauge fixing stalled: {0}")]
    GaugeFixStalled(String),
    #[error("no perfect matching above threshold {threshold:e}")]
    NoPerfectMatching { threshold: f64 },
    #[error("lattice generator matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularLattice { condition: f64 },
    #[error("dual lattice pairing check failed (defect {defect:e})")]
    DualPairing { defect: f64 },
    #[error("invalid input: {0}")]
    Input(String),
}

/// Coarse failure classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Precondition,
    NonConvergence,
}

impl NctError {
    pub fn class(&self) -> ErrorClass {
        use NctError::*;
        match self {
            Input(_) | DimensionMismatch { .. } | ThetaMismatch | ShapeMismatch(_) | InvalidTheta(_) => {
                ErrorClass::Input
            }
            Eigen(_) | NoJointEigenvector { .. } | GaugeFixStalled(_) => ErrorClass::NonConvergence,
            _ => ErrorClass::Precondition,
        }
    }
}
