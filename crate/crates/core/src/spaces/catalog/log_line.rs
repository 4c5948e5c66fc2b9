use serde::{Deserialize, Serialize};

use crate::dist::{Dist, REAL_TOLERANCE};
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::catalog::{window_too_large, WINDOW_POINT_LIMIT};
use crate::spaces::{GrowthAnnotation, GrowthClass, GrowthQuantity, MetricSpace, SpaceFlags, SpaceKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogLineParams {
    /// Largest admissible `|m|`.
    #[serde(default = "default_window")]
    pub window: i64,
}

fn default_window() -> i64 {
    1 << 22
}

impl Default for LogLineParams {
    fn default() -> Self {
        LogLineParams { window: default_window() }
    }
}

/// The integers with `d(m, n) = log2(1 + |m - n|)`.
///
/// Distances are irrational in general and carried as floats.
#[derive(Debug, Clone)]
pub struct LogLine {
    window: i64,
    flags: SpaceFlags,
}

fn log_dist(gap: u64) -> f64 {
    (1.0 + gap as f64).log2()
}

/// Largest gap `k` with `log2(1 + k) ≤ delta` (up to the comparison tolerance).
pub(crate) fn max_gap(delta: f64) -> u64 {
    if delta >= 62.0 {
        return u64::MAX;
    }
    let mut k = (delta.exp2() - 1.0).floor().max(0.0) as u64;
    while log_dist(k + 1) <= delta + REAL_TOLERANCE {
        k += 1;
    }
    while k > 0 && log_dist(k) > delta + REAL_TOLERANCE {
        k -= 1;
    }
    k
}

impl LogLine {
    pub fn new(params: LogLineParams) -> Result<Self> {
        if params.window < 1 {
            return Err(Error::InvalidParams("log_line: window must be at least 1".into()));
        }
        Ok(LogLine {
            window: params.window,
            flags: SpaceFlags {
                vertex_transitive: true,
                bounded_geometry: Some(true),
                quasi_geodesic: Some(false),
                coarsely_bounded_geometry: Some(true),
                growth: Some(GrowthAnnotation {
                    quantity: GrowthQuantity::StepBall,
                    class: GrowthClass::Subexponential,
                    formula: "V_δ(l) = 2kl+1 with k = ⌊2^δ - 1⌋".into(),
                }),
                connected_from: Some(Dist::int(1)),
                ..SpaceFlags::default()
            },
        })
    }

    pub fn with_window(window: i64) -> Result<Self> {
        Self::new(LogLineParams { window })
    }

    fn coord(&self, p: PointRef) -> Result<i64> {
        match p {
            PointRef::Int(m) if m.abs() <= self.window => Ok(m),
            PointRef::Int(_) => Err(Error::Budget(format!("log_line: {p} outside window ±{}", self.window))),
            _ => Err(Error::UnknownPoint(p)),
        }
    }
}

impl MetricSpace for LogLine {
    fn tag(&self) -> &str {
        "log_line"
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
        let gap = self.coord(a)?.abs_diff(self.coord(b)?);
        Ok(if gap == 0 { Dist::ZERO } else { Dist::real(log_dist(gap)) })
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let m = self.coord(x)?;
        if !delta.is_finite() {
            return Err(Error::Budget("log_line: radius is not finite".into()));
        }
        let k = max_gap(delta.to_f64());
        if k > i64::MAX as u64 / 4 || m.unsigned_abs() + k > self.window as u64 {
            return Err(Error::Budget(format!("log_line: {delta}-neighbors of {m} leave window ±{}", self.window)));
        }
        let k = k as i64;
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
        while d <= self.window {
            out.push((PointRef::Int(0), PointRef::Int(d)));
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
    use crate::spaces::{delta_neighbors, distance};

    #[test]
    fn distance_zero_to_seven() {
        let s = LogLine::with_window(100).unwrap();
        let d = distance(&s, PointRef::Int(0), PointRef::Int(7)).unwrap();
        assert_eq!(d, Dist::int(3));
    }

    #[test]
    fn neighbor_radius_matches_distance_predicate() {
        let s = LogLine::with_window(1000).unwrap();
        for delta in [Dist::int(1), Dist::int(2), Dist::real(2.5), Dist::int(8)] {
            let nb = delta_neighbors(&s, PointRef::Int(0), &delta).unwrap();
            let brute: Vec<PointRef> = (-600..=600)
                .filter(|&y| y != 0 && distance(&s, PointRef::Int(0), PointRef::Int(y)).unwrap() <= delta)
                .map(PointRef::Int)
                .collect();
            assert_eq!(nb, brute, "delta {delta}");
        }
        assert_eq!(max_gap(8.0), 255);
        assert_eq!(max_gap(1.0), 1);
        assert_eq!(max_gap(0.5), 0);
    }
}
