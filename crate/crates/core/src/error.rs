use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the supported domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violated a documented precondition (non-Hermitian matrix,
    /// unnormalized state, bad time grid, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The adaptive integrator needed a step below the underflow floor.
    #[error("stiffness: required step {step:.3e} at t = {t:.6} is below the floor {floor:.1e}")]
    Stiffness { t: f64, step: f64, floor: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    /// The resonant counter-rotating order is undefined without modulation.
    #[error("undefined sideband order: modulation frequency is zero")]
    UndefinedOrder,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Contract(_)
                | Error::InvalidParams(_)
                | Error::Config(_)
                | Error::UnknownScenario(_)
        )
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
