use thiserror::Error;

use crate::point::PointRef;

/// Errors raised by space construction, path algebra, solvers and classification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown point {0}")]
    UnknownPoint(PointRef),

    #[error("generator budget exceeded: {0}")]
    Budget(String),

    #[error("enumeration cap {cap} exceeded (reached {reached} paths)")]
    CapExceeded { cap: usize, reached: usize },

    #[error("loop edge at {0}")]
    LoopEdge(PointRef),

    #[error("nonpositive edge weight {weight} on {a}-{b}")]
    NonPositiveWeight { a: PointRef, b: PointRef, weight: String },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("unknown catalog tag `{0}`")]
    UnknownTag(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("path is empty")]
    EmptyPath,

    #[error("endpoint mismatch: {left} does not match {right}")]
    EndpointMismatch { left: PointRef, right: PointRef },

    #[error("delta mismatch: {0} vs {1}")]
    DeltaMismatch(String, String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty window")]
    EmptyWindow,

    #[error("map is not distance-preserving on ({a}, {b}): {before} became {after}")]
    NotIsometric { a: PointRef, b: PointRef, before: String, after: String },

    #[error("iterate domain exhausted: map undefined at {0}")]
    IterateDomain(PointRef),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arithmetic overflow in exact rational computation")]
    Overflow,

    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
