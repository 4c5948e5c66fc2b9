use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::catalog::{floor_radius, window_too_large, WINDOW_POINT_LIMIT};
use crate::spaces::{MetricSpace, SpaceFlags, SpaceKind};

/// Largest number of coordinates a single neighbor query may flip.
const MAX_FLIP_BITS: u64 = 22;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UltrametricParams {
    /// Largest admissible coordinate index (at most 63).
    #[serde(default = "default_window")]
    pub window: u32,
}

fn default_window() -> u32 {
    40
}

impl Default for UltrametricParams {
    fn default() -> Self {
        UltrametricParams { window: default_window() }
    }
}

/// Finitely supported sequences `x` with `x_k ∈ {0, k}`, under the sup metric.
///
/// A point is the bitmask of its support: bit `k - 1` set means `x_k = k`.
/// Two points differing first (from the top) in coordinate `k` are at distance `k`.
#[derive(Debug, Clone)]
pub struct UltrametricProduct {
    window: u32,
    flags: SpaceFlags,
}

impl UltrametricProduct {
    pub fn new(params: UltrametricParams) -> Result<Self> {
        if params.window == 0 || params.window > 63 {
            return Err(Error::InvalidParams("ultrametric_product: window must lie in 1..=63".into()));
        }
        Ok(UltrametricProduct {
            window: params.window,
            flags: SpaceFlags {
                vertex_transitive: true,
                ultrametric: true,
                bounded_components: true,
                bounded_geometry: Some(true),
                quasi_geodesic: Some(false),
                coarsely_bounded_geometry: Some(true),
                ..SpaceFlags::default()
            },
        })
    }

    pub fn with_window(window: u32) -> Result<Self> {
        Self::new(UltrametricParams { window })
    }

    /// The point with the given nonzero coordinates.
    pub fn point(coords: &[u32]) -> PointRef {
        PointRef::Support(coords.iter().fold(0u64, |m, &k| m | (1u64 << (k - 1))))
    }

    fn mask(&self, p: PointRef) -> Result<u64> {
        match p {
            PointRef::Support(m) if m >> self.window == 0 => Ok(m),
            PointRef::Support(_) => {
                Err(Error::Budget(format!("ultrametric_product: {p} uses coordinates beyond {}", self.window)))
            }
            _ => Err(Error::UnknownPoint(p)),
        }
    }
}

impl MetricSpace for UltrametricProduct {
    fn tag(&self) -> &str {
        "ultrametric_product"
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Generated
    }

    fn flags(&self) -> &SpaceFlags {
        &self.flags
    }

    fn basepoint(&self) -> PointRef {
        PointRef::Support(0)
    }

    fn check_point(&self, p: PointRef) -> Result<()> {
        self.mask(p).map(|_| ())
    }

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist> {
        let diff = self.mask(a)? ^ self.mask(b)?;
        Ok(Dist::int(64 - diff.leading_zeros() as i64))
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let m = self.mask(x)?;
        let k = floor_radius(self.tag(), delta)?;
        if k > self.window as u64 {
            return Err(Error::Budget(format!(
                "ultrametric_product: {delta}-neighbors need coordinates beyond {}",
                self.window
            )));
        }
        if k > MAX_FLIP_BITS {
            return Err(Error::Budget(format!("ultrametric_product: 2^{k} neighbors exceed the enumeration limit")));
        }
        Ok((1u64..(1u64 << k)).map(|flip| PointRef::Support(m ^ flip)).collect())
    }

    fn window(&self, depth: Option<u64>) -> Result<Vec<PointRef>> {
        let d = depth.map_or(self.window as u64, |d| d.min(self.window as u64));
        let count = 1u128 << d;
        if count > WINDOW_POINT_LIMIT as u128 {
            return Err(window_too_large(self.tag(), count));
        }
        Ok((0..count as u64).map(PointRef::Support).collect())
    }

    fn probe_points(&self, _depth: u64) -> Result<Vec<PointRef>> {
        Ok(vec![PointRef::Support(0)])
    }

    fn sample_pairs(&self) -> Vec<(PointRef, PointRef)> {
        (0..self.window.min(20)).map(|k| (PointRef::Support(0), PointRef::Support(1 << k))).collect()
    }

    fn encode(&self, p: PointRef) -> serde_json::Value {
        match p {
            PointRef::Support(m) => {
                let top = 64 - m.leading_zeros();
                let coords: Vec<u32> = (1..=top).map(|k| if m >> (k - 1) & 1 == 1 { k } else { 0 }).collect();
                serde_json::json!(coords)
            }
            other => serde_json::json!(other.to_string()),
        }
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "window": self.window })
    }
}
