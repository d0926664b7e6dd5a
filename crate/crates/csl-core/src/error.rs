use core::fmt;

use crate::bounds::Dimension;

/// Error type shared by every module in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Amplitudes sum to zero norm; the state cannot be normalized.
    ZeroNorm,
    /// An operation requiring a unit-norm state received `norm_sqr` instead.
    NotNormalized { norm_sqr: f64 },
    /// Vector/operator lengths disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// The supplied Hamiltonian is not Hermitian within tolerance.
    NonHermitianHamiltonian { max_residual: f64 },
    /// A density matrix violated one of its invariants on input.
    InvalidDensityMatrix { reason: &'static str },
    /// Basis index outside the valid range.
    IndexOutOfRange { index: usize, len: usize },
    /// A strictly positive input was zero or negative (or non-finite).
    NonPositiveInput { name: &'static str, value: f64 },
    /// Ruin game with no pennies on the table.
    InvalidGame { alice: u64, bob: u64 },
    /// Martingale record with no samples or no trajectories.
    EmptyRecord,
    /// A precondition not covered by a more specific variant failed.
    InvalidInput { what: &'static str },
    /// Arithmetic between incompatible physical dimensions.
    UnitMismatch {
        left: Dimension,
        right: Dimension,
        op: &'static str,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroNorm => write!(f, "state has zero norm"),
            Error::NotNormalized { norm_sqr } => {
                write!(f, "state is not normalized (|psi|^2 = {norm_sqr})")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonHermitianHamiltonian { max_residual } => write!(
                f,
                "Hamiltonian is not Hermitian (max |H - H^dag| entry = {max_residual})"
            ),
            Error::InvalidDensityMatrix { reason } => {
                write!(f, "invalid density matrix: {reason}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for dimension {len}")
            }
            Error::NonPositiveInput { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
            Error::InvalidGame { alice, bob } => {
                write!(f, "ruin game needs at least one penny (a={alice}, b={bob})")
            }
            Error::EmptyRecord => write!(f, "martingale record is empty"),
            Error::InvalidInput { what } => write!(f, "invalid input: {what}"),
            Error::UnitMismatch { left, right, op } => {
                write!(f, "cannot {op} quantities with dimensions {left} and {right}")
            }
        }
    }
}

impl core::error::Error for Error {}

/// Finite and strictly positive, or `NonPositiveInput`.
pub(crate) fn require_positive(name: &'static str, value: f64) -> crate::Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { name, value })
    }
}

/// Finite and at least `min`, or `NonPositiveInput`.
pub(crate) fn require_at_least(name: &'static str, value: f64, min: f64) -> crate::Result<()> {
    if value.is_finite() && value >= min {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { name, value })
    }
}
