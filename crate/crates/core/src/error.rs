use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Numerical,
    Usage,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shifted matrix sI - A is numerically singular at s = {shift}")]
    SingularShift { shift: Complex64 },
    #[error("spectra of the Lyapunov/Sylvester coefficients overlap (|denominator| = {gap:e})")]
    SpectralOverlap { gap: f64 },
    #[error("right-hand side is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("system is not stable: max Re(lambda) = {max_real_part:e}")]
    Unstable { max_real_part: f64 },
    #[error("eigenvector matrix is numerically rank deficient (condition estimate {condition:e})")]
    Defective { condition: f64 },
    #[error("poles are clustered (min separation {separation:e} below {threshold:e})")]
    ClusteredPoles { separation: f64, threshold: f64 },
    #[error("matrix logarithm undefined: monodromy eigenvalue {eigenvalue} lies on the closed negative real axis")]
    LogBranch { eigenvalue: Complex64 },
    #[error("spectral gap violated: max |Im lambda(Q)| = {max_imag} is not below omega0 = {omega0}")]
    SpectralGap { max_imag: f64, omega0: f64 },
    #[error("pole-residue inner product requires both systems to share the state matrix")]
    SharedStateMatrix,
    #[error("fundamental frequencies differ ({left} vs {right})")]
    FrequencyMismatch { left: f64, right: f64 },
    #[error("snapshot matrix is rank deficient: sigma_r / sigma_1 = {ratio:e}")]
    RankDeficient { ratio: f64 },
    #[error("projection bases are not biorthogonalizable (||W^T V - I|| = {defect:e})")]
    Biorthogonality { defect: f64 },
    #[error("IRKA did not converge after {iterations} iterations (shift movement {shift_movement:e})")]
    IrkaNotConverged { iterations: usize, shift_movement: f64 },
    #[error("reduced model is unstable: max Re(lambda) = {max_real_part:e}")]
    UnstableReduction { max_real_part: f64 },
    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Shape(_) | Error::InvalidArgument(_) => ErrorCategory::Usage,
            Error::Io(_) | Error::Parse(_) => ErrorCategory::Io,
            _ => ErrorCategory::Numerical,
        }
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularShift { .. } => "singular_shift",
            Error::SpectralOverlap { .. } => "spectral_overlap",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::Unstable { .. } => "unstable",
            Error::Defective { .. } => "defective",
            Error::ClusteredPoles { .. } => "clustered_poles",
            Error::LogBranch { .. } => "log_branch",
            Error::SpectralGap { .. } => "spectral_gap",
            Error::SharedStateMatrix => "shared_state_matrix",
            Error::FrequencyMismatch { .. } => "frequency_mismatch",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Biorthogonality { .. } => "biorthogonality",
            Error::IrkaNotConverged { .. } => "irka_not_converged",
            Error::UnstableReduction { .. } => "unstable_reduction",
            Error::NoConvergence => "no_convergence",
            Error::Shape(_) => "shape",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
