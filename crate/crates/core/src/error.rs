use thiserror::Error;

use crate::dyadic::IntervalId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("depth must be between 1 and {max}, got {got}")]
    InvalidDepth { got: u32, max: u32 },

    #[error("expected {expected} leaf values for depth {depth}, got {got}")]
    LeafCount { depth: u32, expected: usize, got: usize },

    #[error("interval {0} is not on a grid of depth {1}")]
    OffGrid(IntervalId, u32),

    #[error("interval {0} has no children")]
    NoChildren(IntervalId),

    #[error("grid depth mismatch: {0} vs {1}")]
    DepthMismatch(u32, u32),

    #[error("weight must be strictly positive and finite; leaf {index} is {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("function must be nonnegative; leaf {index} is {value}")]
    NegativeFunction { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("complexity ({m}, {n}) too large for depth {depth}")]
    ComplexityTooLarge { m: u32, n: u32, depth: u32 },

    #[error("coefficient for L={l}, I={i}, J={j} is {value}, exceeds bound {bound}")]
    CoefficientBound {
        l: IntervalId,
        i: IntervalId,
        j: IntervalId,
        value: f64,
        bound: f64,
    },

    #[error("cannot parse spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },

    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
