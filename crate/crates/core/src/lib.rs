//! Coarse entropy of metric spaces at finite scale.
//!
//! The crate counts δ-pseudoorbits of the identity (δ-paths), solves the
//! packing and covering problems behind the separated and dense counts
//! `s(n, R, δ, x0)` and `r(n, R, δ, x0)`, measures step-ball growth, builds
//! explicit lower-bound witnesses, and classifies spaces into the
//! zero / infinite coarse-entropy dichotomy.
//!
//! Nothing here evaluates a limit: every quantity is a finite truncation,
//! and every classification records whether its hypothesis was certified or
//! only supported by finite-window evidence.

pub mod dist;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod extremal;
pub mod geometry;
pub mod paths;
pub mod point;
pub mod spaces;

pub use dist::{Dist, Rational};
pub use error::{Error, Result};
pub use exec::Exec;
pub use point::PointRef;
pub use spaces::{MetricSpace, SpaceHandle};
