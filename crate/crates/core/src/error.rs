use thiserror::Error;

/// Errors produced by graph generation, spectral solvers, statistics and
/// ensemble orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("realization {index} (seed {seed}, {params}) failed: {source}")]
    Realization {
        seed: u64,
        index: u64,
        params: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} realizations failed, above the 0.1% abort threshold; first failure: {first}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: Box<Error>,
    },

    #[error("degenerate normalization: PE reference {pe} equals RGE reference {rge}")]
    DegenerateNormalization { pe: f64, rge: f64 },

    #[error("degenerate moment ratio: sample mean is zero")]
    DegenerateRatio,

    #[error("bracket [{lo}, {hi}] maps to [{value_lo:.4}, {value_hi:.4}], which does not straddle target {target}")]
    Bracket {
        lo: f64,
        hi: f64,
        value_lo: f64,
        value_hi: f64,
        target: f64,
    },

    #[error("bisection did not reach target {target} within tolerance {tolerance} after {iterations} iterations (last estimate {last:.4} at {param})")]
    Convergence {
        target: f64,
        tolerance: f64,
        iterations: usize,
        param: f64,
        last: f64,
    },

    #[error("curve never exceeds threshold {threshold}")]
    OnsetNotFound { threshold: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
