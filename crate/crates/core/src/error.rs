use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulate, embed and analyze pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state diverged at step {step}: |state| exceeded {guard:e}")]
    Divergence { step: usize, guard: f64 },

    #[error("integrator step size underflow at t = {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("ill-conditioned input: {0}")]
    Conditioning(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("resonant sampling: {0}")]
    Resonance(String),

    #[error("certificate threshold undefined: lower isometry constant {l_phi_y} is not positive")]
    ThresholdUndefined { l_phi_y: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the user's configuration rather than the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
