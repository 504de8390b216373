use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("design parameters violate constraint(s): {}", failed.join(", "))]
    ConstraintViolation { failed: Vec<String> },

    #[error("model is not proper enough for a proper precompensator: n_d = {n_d}, n_n = {n_n}, need n_d >= n_n + 3")]
    NotProper { n_n: usize, n_d: usize },

    #[error("model transfer function has a pole with real part {max_real_part} (not in the open left half-plane)")]
    UnstableModel { max_real_part: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(
        "gain inconsistency on {term}: factored route {factored}, closed-loop route {closed_loop}"
    )]
    GainInconsistency {
        term: String,
        factored: f64,
        closed_loop: f64,
    },

    #[error("quasi-polynomial does not have the characteristic shape: {0}")]
    ShapeError(String),

    #[error("delay query at t = {query} predates retained history starting at {oldest}")]
    QueryOutOfRange { query: f64, oldest: f64 },

    #[error("degenerate plant configuration: {0}")]
    DegenerateConfig(String),

    #[error("time constants are repeated; use the repeated-root step response")]
    DegenerateTimeConstants,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("state left the finite range at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
