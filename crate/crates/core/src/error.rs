use thiserror::Error;

use crate::scalar::ScalarField;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{matrix} violates its symmetry structure: residual {residual:e} exceeds bound {bound:e}")]
    StructureViolation {
        matrix: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error("H is not positive definite: smallest eigenvalue {min_eigenvalue:e} is below {delta:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, delta: f64 },

    #[error("packed vector has {found} coordinates, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch {
        expected: ScalarField,
        found: ScalarField,
    },

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("eigenvalue computation did not converge")]
    EigenFailure,

    #[error("{q} minors of order n exceed the enumeration cap {cap}")]
    CombinatorialBlowup { q: u128, cap: u128 },

    #[error("sampler produced a degenerate H after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    #[error("perturbation stayed outside the positive definite cone after {retries} halvings (last epsilon {last_epsilon:e})")]
    PerturbationFailed { retries: usize, last_epsilon: f64 },

    #[error("probe base is controllable (Kalman rank {rank} = n)")]
    BaseNotUncontrollable { rank: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trial {index}: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed system file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_trial(self, index: u64) -> Self {
        Error::Trial {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
