use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::catalog::{floor_radius, window_too_large, WINDOW_POINT_LIMIT};
use crate::spaces::{GrowthAnnotation, GrowthClass, GrowthQuantity, MetricSpace, SpaceFlags, SpaceKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegerLineParams {
    /// Largest admissible `|m|`.
    #[serde(default = "default_window")]
    pub window: i64,
}

fn default_window() -> i64 {
    100_000
}

impl Default for IntegerLineParams {
    fn default() -> Self {
        IntegerLineParams { window: default_window() }
    }
}

/// The integers with unit edges (path metric `|m - n|`).
#[derive(Debug, Clone)]
pub struct IntegerLine {
    window: i64,
    flags: SpaceFlags,
}

impl IntegerLine {
    pub fn new(params: IntegerLineParams) -> Result<Self> {
        if params.window < 1 {
            return Err(Error::InvalidParams("integer_line: window must be at least 1".into()));
        }
        Ok(IntegerLine {
            window: params.window,
            flags: SpaceFlags {
                vertex_transitive: true,
                bounded_geometry: Some(true),
                degree_bound: Some(2),
                quasi_geodesic: Some(true),
                coarsely_bounded_geometry: Some(true),
                growth: Some(GrowthAnnotation {
                    quantity: GrowthQuantity::SupBall,
                    class: GrowthClass::Subexponential,
                    formula: "|B(x,l)| = 2l+1".into(),
                }),
                connected_from: Some(Dist::int(1)),
                ..SpaceFlags::default()
            },
        })
    }

    pub fn with_window(window: i64) -> Result<Self> {
        Self::new(IntegerLineParams { window })
    }

    fn coord(&self, p: PointRef) -> Result<i64> {
        match p {
            PointRef::Int(m) if m.abs() <= self.window => Ok(m),
            PointRef::Int(_) => Err(Error::Budget(format!("integer_line: {p} outside window ±{}", self.window))),
            _ => Err(Error::UnknownPoint(p)),
        }
    }
}

impl MetricSpace for IntegerLine {
    fn tag(&self) -> &str {
        "integer_line"
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Generated
    }

    fn flags(&self) -> &SpaceFlags {
        &self.flags
    }

    fn basepoint(&self) -> PointRef {
        PointRef::Int(0)
    }

    fn check_point(&self, p: PointRef) -> Result<()> {
        self.coord(p).map(|_| ())
    }

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist> {
        Ok(Dist::int((self.coord(a)? - self.coord(b)?).abs()))
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let m = self.coord(x)?;
        let k = floor_radius(self.tag(), delta)?.min(i64::MAX as u64 / 2) as i64;
        if m.abs().saturating_add(k) > self.window {
            return Err(Error::Budget(format!("integer_line: {delta}-neighbors of {m} leave window ±{}", self.window)));
        }
        Ok((m - k..=m + k).filter(|&y| y != m).map(PointRef::Int).collect())
    }

    fn window(&self, depth: Option<u64>) -> Result<Vec<PointRef>> {
        let r = depth.map_or(self.window, |d| (d.min(i64::MAX as u64) as i64).min(self.window));
        let count = 2 * r as u128 + 1;
        if count > WINDOW_POINT_LIMIT as u128 {
            return Err(window_too_large(self.tag(), count));
        }
        Ok((-r..=r).map(PointRef::Int).collect())
    }

    fn probe_points(&self, _depth: u64) -> Result<Vec<PointRef>> {
        Ok(vec![PointRef::Int(0)])
    }

    fn sample_pairs(&self) -> Vec<(PointRef, PointRef)> {
        let mut out = Vec::new();
        let mut d = 1i64;
        // the hop-ball search from -d to d/2 reaches -5d/2
        while d <= 1 << 12 && 5 * d <= 2 * self.window {
            out.push((PointRef::Int(0), PointRef::Int(d)));
            out.push((PointRef::Int(-d), PointRef::Int(d / 2)));
            d *= 2;
        }
        out
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "window": self.window })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::delta_neighbors;

    #[test]
    fn neighbors_of_five() {
        let s = IntegerLine::with_window(20).unwrap();
        let nb = delta_neighbors(&s, PointRef::Int(5), &Dist::int(1)).unwrap();
        assert_eq!(nb, vec![PointRef::Int(4), PointRef::Int(6)]);
        assert!(delta_neighbors(&s, PointRef::Int(5), &Dist::ratio(1, 2).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn budget_is_an_error() {
        let s = IntegerLine::with_window(3).unwrap();
        assert!(matches!(s.neighbors_within(PointRef::Int(3), &Dist::int(1)), Err(Error::Budget(_))));
        assert!(matches!(s.check_point(PointRef::Int(4)), Err(Error::Budget(_))));
    }
}
