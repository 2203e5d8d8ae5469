use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or missing configuration value; `path` names the document field.
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("layout infeasible: {0}")]
    InfeasibleLayout(String),

    #[error(
        "stacked warden channels are rank deficient (sigma_min/sigma_max = {ratio:.3e}); \
         regularize or prune the warden set"
    )]
    RankDeficient { ratio: f64 },

    #[error("Bob's channel lies in the span of the warden channels: zero covert rate achievable")]
    ZeroCovertRate,

    #[error("{solver} did not converge: {status}")]
    Solver { solver: &'static str, status: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { path: path.into(), msg: msg.into() }
    }
}
