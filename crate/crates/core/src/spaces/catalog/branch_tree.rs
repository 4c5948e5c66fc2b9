use serde::{Deserialize, Serialize};

use crate::dist::{Dist, Rational};
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::catalog::{window_too_large, WINDOW_POINT_LIMIT};
use crate::spaces::lazy::{bounded_dijkstra, Adjacency};
use crate::spaces::{MetricSpace, SpaceFlags, SpaceKind};

const DEPTH_LIMIT: u32 = 18;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchTreeParams {
    /// Deepest admissible level (at most 18).
    #[serde(default = "default_depth")]
    pub max_depth: u32,
    /// Attach the measure `2^n/(n+1)!` to every depth-`n` vertex.
    #[serde(default)]
    pub measured: bool,
}

fn default_depth() -> u32 {
    12
}

impl Default for BranchTreeParams {
    fn default() -> Self {
        BranchTreeParams { max_depth: default_depth(), measured: false }
    }
}

/// Rooted tree in which every depth-`n` vertex has `n + 2` children.
///
/// Vertices are `Pair(depth, index)` with `index < (depth + 1)!`; the
/// children of `(n, i)` are `(n + 1, i·(n + 2) + c)` for `c < n + 2`.
#[derive(Debug, Clone)]
pub struct BranchTree {
    max_depth: u32,
    measured: bool,
    flags: SpaceFlags,
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

impl BranchTree {
    pub fn new(params: BranchTreeParams) -> Result<Self> {
        if params.max_depth > DEPTH_LIMIT {
            return Err(Error::InvalidParams(format!("branch_tree: max_depth must be at most {DEPTH_LIMIT}")));
        }
        Ok(BranchTree {
            max_depth: params.max_depth,
            measured: params.measured,
            flags: SpaceFlags {
                bounded_geometry: Some(false),
                quasi_geodesic: Some(true),
                coarsely_bounded_geometry: Some(false),
                connected_from: Some(Dist::int(1)),
                ..SpaceFlags::default()
            },
        })
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Number of vertices at depth `n`, `(n + 1)!`.
    pub fn level_size(n: u32) -> u128 {
        factorial(n + 1)
    }

    /// Measure of a depth-`n` vertex, `2^n / (n + 1)!`.
    pub fn depth_measure(n: u32) -> Rational {
        Rational::new(1i128 << n, factorial(n + 1) as i128)
    }

    pub fn parent(p: PointRef) -> Option<PointRef> {
        match p {
            PointRef::Pair(n, i) if n >= 1 => Some(PointRef::Pair(n - 1, i / (n as u64 + 1))),
            _ => None,
        }
    }

    pub fn children(&self, p: PointRef) -> Result<Vec<PointRef>> {
        let (n, i) = self.locate(p)?;
        if n >= self.max_depth {
            return Err(Error::Budget(format!("branch_tree: children of {p} lie beyond depth {}", self.max_depth)));
        }
        let k = n as u64 + 2;
        Ok((0..k).map(|c| PointRef::Pair(n as i64 + 1, i * k + c)).collect())
    }

    fn locate(&self, p: PointRef) -> Result<(u32, u64)> {
        match p {
            PointRef::Pair(n, i) if n >= 0 && n <= self.max_depth as i64 => {
                if (i as u128) < Self::level_size(n as u32) {
                    Ok((n as u32, i))
                } else {
                    Err(Error::UnknownPoint(p))
                }
            }
            PointRef::Pair(n, _) if n > self.max_depth as i64 && n <= DEPTH_LIMIT as i64 + 1 => {
                Err(Error::Budget(format!("branch_tree: {p} deeper than {}", self.max_depth)))
            }
            _ => Err(Error::UnknownPoint(p)),
        }
    }
}

impl Adjacency for BranchTree {
    fn adjacent(&self, v: PointRef, _max_weight: &Dist) -> Result<Vec<(PointRef, Dist)>> {
        let one = Dist::int(1);
        let mut out: Vec<(PointRef, Dist)> = Self::parent(v).into_iter().map(|p| (p, one)).collect();
        out.extend(self.children(v)?.into_iter().map(|c| (c, one)));
        Ok(out)
    }

    fn min_weight(&self) -> Dist {
        Dist::int(1)
    }
}

impl MetricSpace for BranchTree {
    fn tag(&self) -> &str {
        "branch_tree"
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Generated
    }

    fn flags(&self) -> &SpaceFlags {
        &self.flags
    }

    fn basepoint(&self) -> PointRef {
        PointRef::Pair(0, 0)
    }

    fn check_point(&self, p: PointRef) -> Result<()> {
        self.locate(p).map(|_| ())
    }

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist> {
        let (mut da, mut ia) = self.locate(a)?;
        let (mut db, mut ib) = self.locate(b)?;
        let mut d = 0i64;
        while da > db {
            ia /= da as u64 + 1;
            da -= 1;
            d += 1;
        }
        while db > da {
            ib /= db as u64 + 1;
            db -= 1;
            d += 1;
        }
        while ia != ib {
            ia /= da as u64 + 1;
            ib /= da as u64 + 1;
            da -= 1;
            d += 2;
        }
        Ok(Dist::int(d))
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let found = bounded_dijkstra(self, x, delta)?;
        Ok(found.into_keys().filter(|&y| y != x).collect())
    }

    fn measure(&self, p: PointRef) -> Option<Rational> {
        if !self.measured {
            return None;
        }
        self.locate(p).ok().map(|(n, _)| Self::depth_measure(n))
    }

    fn has_measure(&self) -> bool {
        self.measured
    }

    fn window(&self, depth: Option<u64>) -> Result<Vec<PointRef>> {
        let d = depth.map_or(self.max_depth, |d| d.min(self.max_depth as u64) as u32);
        let count: u128 = (0..=d).map(Self::level_size).sum();
        if count > WINDOW_POINT_LIMIT as u128 {
            return Err(window_too_large(self.tag(), count));
        }
        let mut out = Vec::with_capacity(count as usize);
        for n in 0..=d {
            out.extend((0..Self::level_size(n) as u64).map(|i| PointRef::Pair(n as i64, i)));
        }
        Ok(out)
    }

    fn probe_points(&self, depth: u64) -> Result<Vec<PointRef>> {
        let d = depth.min(self.max_depth as u64) as i64;
        Ok((0..=d).map(|n| PointRef::Pair(n, 0)).collect())
    }

    fn sample_pairs(&self) -> Vec<(PointRef, PointRef)> {
        (1..=self.max_depth.min(8) as i64).map(|n| (PointRef::Pair(0, 0), PointRef::Pair(n, 0))).collect()
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "max_depth": self.max_depth, "measured": self.measured })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::lazy::window_graph;
    use crate::spaces::{distance, MeasuredSpaceHandle};
    use std::sync::Arc;

    fn measured(depth: u32) -> BranchTree {
        BranchTree::new(BranchTreeParams { max_depth: depth, measured: true }).unwrap()
    }

    #[test]
    fn depth_one_measure_is_one() {
        let s = measured(4);
        assert_eq!(s.measure(PointRef::Pair(1, 0)).unwrap(), Rational::from_integer(1));
        assert_eq!(s.measure(PointRef::Pair(0, 0)).unwrap(), Rational::from_integer(1));
    }

    #[test]
    fn children_carry_twice_the_measure() {
        let s = measured(6);
        let h = MeasuredSpaceHandle::new(Arc::new(s.clone())).unwrap();
        for v in s.window(Some(5)).unwrap().into_iter().step_by(11) {
            let ch = s.children(v).unwrap();
            assert_eq!(h.measure_of(&ch).unwrap(), h.measure(v).unwrap() * Rational::from_integer(2));
        }
    }

    #[test]
    fn closed_form_matches_bfs() {
        let s = measured(5);
        let pts = s.window(Some(4)).unwrap();
        let g = window_graph(&s, &pts).unwrap();
        for (i, &a) in pts.iter().enumerate().step_by(9) {
            for &b in pts.iter().skip(i).step_by(13) {
                let oracle = g.distance(a, b).unwrap();
                assert_eq!(distance(&s, a, b).unwrap(), oracle, "{a} {b}");
            }
        }
    }

    #[test]
    fn parent_inverts_children() {
        let s = measured(5);
        for v in s.window(Some(3)).unwrap() {
            for c in s.children(v).unwrap() {
                assert_eq!(BranchTree::parent(c), Some(v));
            }
        }
        assert_eq!(BranchTree::parent(PointRef::Pair(0, 0)), None);
    }
}
