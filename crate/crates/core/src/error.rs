use thiserror::Error;

/// Errors raised by the kernels, evaluators and reference solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Bessel batch would exceed the configured order cap.
    #[error("requested Bessel order {requested} exceeds the cap of {cap}")]
    OrderCap { requested: usize, cap: usize },

    /// The reference integrator drifted away from unit norm.
    #[error("integrator failure: norm drift {drift:e} at t = {time}")]
    Integrator { drift: f64, time: f64 },

    /// A grid cell could not be evaluated.
    #[error("cell (x = {site}, t = {time}) failed: {source}")]
    Cell {
        site: i64,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
