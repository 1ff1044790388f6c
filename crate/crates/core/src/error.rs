//! Crate-wide error type. Domain violations are hard errors, never NaN.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An elementary operation was applied outside its domain, e.g. a
    /// fractional power of a non-positive base or a division by zero.
    #[error("{op}: argument {arg} outside domain ({why})")]
    Domain {
        op: &'static str,
        arg: f64,
        why: &'static str,
    },

    /// A field or map was evaluated with the wrong number of coordinates.
    #[error("arity mismatch: expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },

    /// Wraps an evaluation error with the sample at which it occurred.
    #[error("at sample {point:?}: {source}")]
    AtPoint {
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    /// The operation needs closed-form partial derivatives that the field
    /// does not carry.
    #[error("closed-form partials required for {op}")]
    MissingPartials { op: &'static str },

    /// A stated precondition does not hold at the given data.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A flow left the field domain mid-integration.
    #[error("flow aborted at step {step} (t = {t}): {source}")]
    FlowAbort {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// Invalid construction parameters (non-positive scale constants,
    /// degenerate boxes, out-of-range dimensions).
    #[error("{0}")]
    Invalid(String),

    /// Adaptive quadrature did not reach its target between refinements.
    #[error("quadrature did not converge after {halvings} halvings (last delta {last_delta:e})")]
    QuadratureDivergence { halvings: u32, last_delta: f64 },
}

impl Error {
    /// Attach the sample point at which the error surfaced.
    pub fn at_point(self, point: &[f64]) -> Error {
        match self {
            // Already located; keep the innermost point.
            Error::AtPoint { .. } => self,
            other => Error::AtPoint {
                point: point.to_vec(),
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
