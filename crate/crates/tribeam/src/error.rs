use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the physical domain. `margin` is the signed distance to
    /// the violated boundary (negative means outside).
    #[error("domain error: {reason} (margin {margin:.3e})")]
    Domain { reason: String, margin: f64 },

    #[error("{quantity} = {value} outside attainable range [{lo}, {hi}]")]
    Range {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("fit failed: {reason} (residual {residual:.3e})")]
    Fit { reason: String, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(reason: impl Into<String>, margin: f64) -> Self {
        Error::Domain {
            reason: reason.into(),
            margin,
        }
    }
}

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    Convergence { iterations: usize, last_update: f64 },
    Cutoff { beam: usize, tail_mass: f64 },
    Boundary { what: String },
    Clamped { what: String, margin: f64 },
}
