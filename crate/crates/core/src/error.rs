use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A chain or link description violates a structural or definiteness rule.
    #[error("model validation failed for {element}: {reason}")]
    ModelValidation { element: String, reason: String },

    #[error("coordinate size mismatch: expected {expected} {what}, got {actual}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Chains of one manipulator do not close on a common end-effector pose.
    #[error(
        "chain '{chain}' ends {translation_gap:.3e} mm / {rotation_gap:.3e} rad away from the common end pose"
    )]
    InconsistentPose {
        chain: String,
        translation_gap: f64,
        rotation_gap: f64,
    },

    /// The load-modified spring stiffness is no longer positive definite.
    #[error("load-modified spring stiffness of chain '{chain}' is not positive definite (eigenvalue {eigenvalue:.6e})")]
    LoadedInstability { chain: String, eigenvalue: f64 },

    #[error("stiffness matrix is singular (rank {rank} of 6)")]
    SingularStiffness {
        rank: usize,
        null_space: Vec<[f64; 6]>,
    },

    #[error("target ({:.4}, {:.4}, {:.4}) mm is outside the workspace of chain '{chain}' (discriminant {discriminant:.6e} mm^2)", target[0], target[1], target[2])]
    OutOfWorkspace {
        chain: String,
        target: [f64; 3],
        discriminant: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported units: {0}")]
    Units(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(element: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ModelValidation {
            element: element.into(),
            reason: reason.into(),
        }
    }
}
