//! Metric-space abstraction and the concrete spaces: explicit finite metrics,
//! finite (weighted) graphs, and lazily generated catalog spaces.
//!
//! Every space is queried through a distance oracle and a δ-neighbor
//! enumerator. Generated spaces carry a budget window; a query that would
//! need points outside the window fails with [`Error::Budget`] instead of
//! returning a truncated answer.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{Dist, Rational};
use crate::error::{Error, Result};
use crate::point::PointRef;

pub mod catalog;
pub mod finite;
pub mod graph;
pub(crate) mod lazy;

pub use catalog::{make_example, CatalogTag};
pub use finite::MatrixSpace;
pub use graph::{build_graph, build_weighted_graph, read_edge_csv, GraphSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    FiniteMatrix,
    Graph,
    WeightedGraph,
    Generated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthClass {
    Subexponential,
    Exponential,
}

/// Which growth function a catalog annotation describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthQuantity {
    /// `l ↦ sup_x |B(x, l)|` of a bounded-degree graph.
    SupBall,
    /// `l ↦ V_δ(l)` for every δ > 0.
    StepBall,
}

/// Closed-form growth annotation attached to a catalog space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthAnnotation {
    pub quantity: GrowthQuantity,
    pub class: GrowthClass,
    pub formula: String,
}

/// Structural facts known about a space.
///
/// Catalog generators set these from closed-form arguments; finite spaces
/// set `finite` and whatever they can verify exhaustively.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceFlags {
    pub finite: bool,
    pub vertex_transitive: bool,
    pub ultrametric: bool,
    pub bounded_components: bool,
    pub bounded_geometry: Option<bool>,
    pub degree_bound: Option<usize>,
    pub quasi_geodesic: Option<bool>,
    pub coarsely_bounded_geometry: Option<bool>,
    pub growth: Option<GrowthAnnotation>,
    /// Zero entropy follows from the cycle coding-map bound.
    pub coding_map_zero: bool,
    /// For δ at least this value the whole space is a single δ-component.
    pub connected_from: Option<Dist>,
}

/// A metric space exposed through a distance oracle and a δ-neighbor enumerator.
///
/// Implementations must be pure: identical queries return identical answers,
/// and any internal caching is synchronized.
pub trait MetricSpace: Send + Sync + fmt::Debug {
    /// Catalog tag or construction name.
    fn tag(&self) -> &str;

    fn kind(&self) -> SpaceKind;

    fn flags(&self) -> &SpaceFlags;

    /// Canonical basepoint (the origin, root, or lowest vertex).
    fn basepoint(&self) -> PointRef;

    /// Errors if `p` is not a point of the space, or lies outside the budget window.
    fn check_point(&self, p: PointRef) -> Result<()>;

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist>;

    /// Points `y ≠ x` with `d(x, y) ≤ delta`, in any order.
    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>>;

    /// Per-point atomic measure, if the space is measured.
    fn measure(&self, _p: PointRef) -> Option<Rational> {
        None
    }

    fn has_measure(&self) -> bool {
        false
    }

    /// Sorted points of a finite window. `depth` selects a window size for
    /// generated spaces (line coordinate, tree depth, coordinate index);
    /// `None` means the full budget window.
    fn window(&self, depth: Option<u64>) -> Result<Vec<PointRef>>;

    /// Candidate basepoints for window suprema of ball growth up to radius `l_max`.
    fn growth_basepoints(&self, _l_max: u64) -> Vec<PointRef> {
        vec![self.basepoint()]
    }

    /// Centers tried when searching for large separated sets at a window depth.
    fn probe_points(&self, depth: u64) -> Result<Vec<PointRef>> {
        self.window(Some(depth))
    }

    /// Default point pairs for quasi-geodesicity sampling.
    fn sample_pairs(&self) -> Vec<(PointRef, PointRef)> {
        let pts = self.window(None).unwrap_or_default();
        let base = self.basepoint();
        let mut out = Vec::new();
        let mut step = 1usize;
        while step < pts.len() {
            out.push((base, pts[step]));
            step *= 2;
        }
        out
    }

    /// Canonical JSON encoding of a point.
    fn encode(&self, p: PointRef) -> serde_json::Value {
        match p {
            PointRef::Int(v) => serde_json::json!(v),
            PointRef::Pair(a, b) => serde_json::json!([a, b]),
            PointRef::Support(mask) => serde_json::json!(mask),
        }
    }

    /// Construction parameters, echoed into reports.
    fn params(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

pub type SpaceHandle = Arc<dyn MetricSpace>;

/// A space paired with the guarantee that it carries an atomic measure.
#[derive(Debug, Clone)]
pub struct MeasuredSpaceHandle(SpaceHandle);

impl MeasuredSpaceHandle {
    pub fn new(space: SpaceHandle) -> Result<Self> {
        if space.has_measure() {
            Ok(MeasuredSpaceHandle(space))
        } else {
            Err(Error::InvalidParams(format!("space `{}` carries no measure", space.tag())))
        }
    }

    pub fn space(&self) -> &SpaceHandle {
        &self.0
    }

    pub fn measure(&self, p: PointRef) -> Result<Rational> {
        self.0.measure(p).ok_or(Error::UnknownPoint(p))
    }

    /// Sum of point measures over a finite set.
    pub fn measure_of<'a, I: IntoIterator<Item = &'a PointRef>>(&self, set: I) -> Result<Rational> {
        let mut total = Rational::from_integer(0);
        for p in set {
            let m = self.measure(*p)?;
            total = num_traits::CheckedAdd::checked_add(&total, &m).ok_or(Error::Overflow)?;
        }
        Ok(total)
    }
}

/// Exact distance between two points of the space.
pub fn distance(space: &dyn MetricSpace, a: PointRef, b: PointRef) -> Result<Dist> {
    space.check_point(a)?;
    space.check_point(b)?;
    if a == b {
        return Ok(Dist::ZERO);
    }
    space.distance(a, b)
}

/// `{ y : 0 < d(x, y) ≤ delta }`, sorted by [`PointRef`] order.
pub fn delta_neighbors(space: &dyn MetricSpace, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
    if !delta.is_positive() {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    space.check_point(x)?;
    let mut out = space.neighbors_within(x, delta)?;
    out.sort_unstable();
    out.dedup();
    out.retain(|&y| y != x);
    Ok(out)
}

/// Closed metric ball `B(x, r)`, sorted.
pub fn ball(space: &dyn MetricSpace, x: PointRef, r: &Dist) -> Result<Vec<PointRef>> {
    space.check_point(x)?;
    let mut out = if r.is_positive() { space.neighbors_within(x, r)? } else { Vec::new() };
    out.push(x);
    let set: BTreeSet<PointRef> = out.into_iter().collect();
    Ok(set.into_iter().collect())
}

/// Checks the triangle inequality (and the strong version, when `ultra`) on all triples.
/// Returns the first violating triple.
pub fn find_triangle_violation(
    space: &dyn MetricSpace,
    points: &[PointRef],
    ultra: bool,
) -> Result<Option<(PointRef, PointRef, PointRef)>> {
    let n = points.len();
    let mut table = vec![Dist::ZERO; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(space, points[i], points[j])?;
            table[i * n + j] = d;
            table[j * n + i] = d;
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let ab = table[a * n + b];
                let bc = table[b * n + c];
                let ac = table[a * n + c];
                let bound = if ultra { ab.max(bc) } else { ab.checked_add(&bc)? };
                if ac > bound {
                    return Ok(Some((points[a], points[b], points[c])));
                }
            }
        }
    }
    Ok(None)
}
