use thiserror::Error;

/// Errors raised by the estimation and power routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("need at least one case and one control (got {n_cases} cases, {n_controls} controls)")]
    EmptyClass { n_cases: usize, n_controls: usize },

    #[error("score at index {index} is not finite ({value})")]
    NonFiniteScore { index: usize, value: f64 },

    #[error("{name} = {value} is outside its domain: {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("AUROC estimate is {theta_hat}; the asymptotic variance is undefined at the boundary")]
    DegenerateAuroc { theta_hat: f64 },

    #[error(
        "variance of the AUROC difference is {variance:e} (auroc_a = {auroc_a}, auroc_b = {auroc_b}); \
         the DeLong test is undefined"
    )]
    DegenerateComparison {
        auroc_a: f64,
        auroc_b: f64,
        variance: f64,
    },

    #[error("sample size search exceeded {limit} without reaching the target precision")]
    Overflow { limit: usize },

    #[error(
        "resampled datasets at n = {n} were untestable {budget} times in a row \
         (single class or zero-variance comparison)"
    )]
    PilotTooDegenerate { n: usize, budget: usize },

    #[error(
        "simulated datasets at n = {n} were untestable {budget} times in a row \
         (single class or zero-variance comparison)"
    )]
    DegenerateSpec { n: usize, budget: usize },

    #[error("power {power:.4} at n_max = {n_max} is below the target {target}")]
    TargetUnreachable {
        n_max: usize,
        power: f64,
        target: f64,
    },

    #[error("power grid must be non-empty and strictly increasing")]
    InvalidGrid,

    #[error("at grid point n = {n}: {source}")]
    AtGridPoint {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            constraint: "must lie strictly between 0 and 1",
        })
    }
}
