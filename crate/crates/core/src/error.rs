use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |H_jk - conj(H_kj)| = {residual:.3e})")]
    NonHermitianInput { residual: f64 },

    #[error("dimension {dim} exceeds the supported maximum of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("vectors are linearly dependent (Gram determinant {det:.3e})")]
    LinearlyDependent { det: f64 },

    #[error("dimension {0} is not prime")]
    NotPrime(usize),

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("moment tr(rho^{power}) has imaginary part {imag:.3e}")]
    NonRealMoment { power: usize, imag: f64 },

    #[error("coefficient grid violates r_jk = conj(r_kj) at ({row}, {col})")]
    HermiticityViolation { row: usize, col: usize },

    #[error("missing expectation value for {0}")]
    MissingLabel(String),

    #[error("probability vector is not normalized: {0}")]
    NotNormalized(String),

    #[error("angle {name} = {value} out of range")]
    AngleOutOfRange { name: String, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expectation of Hermitian operator {label} has imaginary part {imag:.3e}")]
    NonRealExpectation { label: String, imag: f64 },

    #[error("operator spectrum is degenerate (a_min = a_max = {0})")]
    DegenerateSpectrum(f64),

    #[error("expectation value {value} lies outside [{min}, {max}]")]
    ValueOutOfRange { value: f64, min: f64, max: f64 },

    #[error("invalid kappa {0}: must be finite, positive and different from 1")]
    InvalidKappa(f64),

    #[error("measure kind requires a state, not only expectation values")]
    MeasureNeedsState,

    #[error("optimization direction is inconsistent with the measure's curvature")]
    InconsistentDirection,

    #[error("overlap |<a|b>|^2 = {0} must lie strictly between 0 and 1")]
    DegenerateOverlap(f64),

    #[error("operator {0} is not Hermitian")]
    NonHermitianOperator(String),

    #[error("region rasterization supports at most 3 operators, got {0}")]
    TooManyOperators(usize),

    #[error("unknown bound {0}")]
    UnknownBound(String),

    #[error("point has {found} coordinates but the operator set has {expected}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
