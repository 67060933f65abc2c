use alloc::string::String;
use core::fmt;

/// Errors reported by the analysis engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shape mismatch: non-square matrix, wrong vector length, etc.
    Dimension(String),
    /// Input violates a domain invariant (negative or non-finite entry).
    Domain(String),
    /// A sector has zero transaction row sum and zero demand, so no
    /// technical coefficients can be derived for it.
    DegenerateSector { sector: usize },
    /// Factorization or solve hit a (numerically) singular matrix.
    Singular,
    /// Power iteration did not converge within the iteration cap; the
    /// final Collatz-Wielandt bracket is carried for diagnosis.
    SpectralEstimation {
        block: Option<usize>,
        lower: f64,
        upper: f64,
    },
    /// An operation was invoked outside its stated precondition.
    Misuse(String),
    /// A claimed solution does not satisfy its system within tolerance.
    NotASolution { residual: f64 },
    /// Zero demand passed to the open-mode classifier; closed mode handles
    /// homogeneous systems.
    ModeMisuse(String),
    /// The verdict does not grant uniqueness, so no canonical solution or
    /// derivative exists.
    NotUnique(String),
    /// A rank-(n-1) matrix was required.
    RankPrecondition { expected: usize, found: usize },
    /// An internal reduced system turned out singular.
    NumericalDegeneracy(String),
    /// A finite-difference probe left the region where the solution is
    /// unique, so the central difference is meaningless.
    OracleInvalid(String),
    /// Elasticity requested at a base value of zero.
    UndefinedElasticity,
    /// Certificates and numerics disagree; both sides are reported.
    Inconsistency { residual: f64, detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DegenerateSector { sector } => write!(
                f,
                "degenerate sector S_{}: zero transaction row sum and zero demand",
                sector + 1
            ),
            Error::Singular => write!(f, "matrix is singular"),
            Error::SpectralEstimation {
                block,
                lower,
                upper,
            } => match block {
                Some(b) => write!(
                    f,
                    "spectral radius estimation did not converge on block {} (bracket [{lower}, {upper}])",
                    b + 1
                ),
                None => write!(
                    f,
                    "spectral radius estimation did not converge (bracket [{lower}, {upper}])"
                ),
            },
            Error::Misuse(msg) => write!(f, "misuse: {msg}"),
            Error::NotASolution { residual } => {
                write!(f, "vector is not a solution (residual {residual:e})")
            }
            Error::ModeMisuse(msg) => write!(f, "mode misuse: {msg}"),
            Error::NotUnique(msg) => write!(f, "solution not unique: {msg}"),
            Error::RankPrecondition { expected, found } => {
                write!(f, "rank precondition failed: expected {expected}, found {found}")
            }
            Error::NumericalDegeneracy(msg) => write!(f, "numerical degeneracy: {msg}"),
            Error::OracleInvalid(msg) => write!(f, "finite-difference oracle invalid: {msg}"),
            Error::UndefinedElasticity => {
                write!(f, "elasticity undefined: variable is zero at the base point")
            }
            Error::Inconsistency { residual, detail } => {
                write!(f, "internal inconsistency ({detail}, residual {residual:e})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
