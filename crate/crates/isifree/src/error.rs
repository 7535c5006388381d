use thiserror::Error;

/// Errors surfaced by graph construction, capacity computation, code
/// synthesis, and the codec.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state space too large: {count} states exceed the limit of {limit}")]
    StateLimit { count: usize, limit: usize },

    #[error("power iteration did not converge after {0} iterations")]
    PowerIteration(usize),

    #[error("constraint graph is not strongly connected")]
    NotIrreducible,

    #[error("value iteration did not converge after {0} sweeps")]
    ValueIteration(usize),

    #[error("bisection bracket invalid: {0}")]
    InvalidBracket(String),

    #[error("synthesized rate {analytic} disagrees with bisection root {root} beyond {tol}")]
    RateMismatch { analytic: f64, root: f64, tol: f64 },

    #[error("policy chain has no unique stationary distribution on its recurrent class")]
    NoStationary,

    #[error("enumeration exceeds cap: {0}")]
    EnumerationCap(String),

    #[error("no codeword matches the bit stream at state {state}; code is corrupted")]
    MalformedCode { state: String },

    #[error("symbol stream desynchronized at state {state}: {detail}")]
    Desync { state: String, detail: String },

    #[error("unsupported channel for this scheme: {0}")]
    UnsupportedSpec(String),

    #[error("malformed code file: {0}")]
    ParseCode(String),

    #[error("malformed input: {0}")]
    ParseInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
