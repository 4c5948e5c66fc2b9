use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::catalog::{window_too_large, WINDOW_POINT_LIMIT};
use crate::spaces::lazy::{bounded_dijkstra, Adjacency};
use crate::spaces::{GrowthAnnotation, GrowthClass, GrowthQuantity, MetricSpace, SpaceFlags, SpaceKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularTreeParams {
    #[serde(default = "default_degree")]
    pub degree: u32,
    /// Deepest admissible level below the root.
    #[serde(default = "default_depth")]
    pub max_depth: u32,
}

fn default_degree() -> u32 {
    3
}

fn default_depth() -> u32 {
    24
}

impl Default for RegularTreeParams {
    fn default() -> Self {
        RegularTreeParams { degree: default_degree(), max_depth: default_depth() }
    }
}

/// The infinite `q`-regular tree, seen from a root.
///
/// Vertices are `Pair(depth, index)`; the root `(0, 0)` has `q` children,
/// every other vertex `q - 1`.
#[derive(Debug, Clone)]
pub struct RegularTree {
    degree: u64,
    max_depth: u32,
    flags: SpaceFlags,
}

impl RegularTree {
    pub fn new(params: RegularTreeParams) -> Result<Self> {
        if params.degree < 3 {
            return Err(Error::InvalidParams("regular_tree: degree must be at least 3".into()));
        }
        let q = params.degree as u64;
        let size = (q as u128) * ((q - 1) as u128).checked_pow(params.max_depth).unwrap_or(u128::MAX);
        if size > u64::MAX as u128 {
            return Err(Error::InvalidParams("regular_tree: max_depth too large for the point encoding".into()));
        }
        let formula = format!("|B(x,l)| = 1 + {q}(({})^l - 1)/{}", q - 1, q - 2);
        Ok(RegularTree {
            degree: q,
            max_depth: params.max_depth,
            flags: SpaceFlags {
                vertex_transitive: true,
                bounded_geometry: Some(true),
                degree_bound: Some(q as usize),
                quasi_geodesic: Some(true),
                coarsely_bounded_geometry: Some(true),
                growth: Some(GrowthAnnotation {
                    quantity: GrowthQuantity::SupBall,
                    class: GrowthClass::Exponential,
                    formula,
                }),
                connected_from: Some(Dist::int(1)),
                ..SpaceFlags::default()
            },
        })
    }

    pub fn with_degree(degree: u32, max_depth: u32) -> Result<Self> {
        Self::new(RegularTreeParams { degree, max_depth })
    }

    fn level_size(&self, n: u32) -> u128 {
        if n == 0 {
            1
        } else {
            self.degree as u128 * ((self.degree - 1) as u128).pow(n - 1)
        }
    }

    fn locate(&self, p: PointRef) -> Result<(u32, u64)> {
        match p {
            PointRef::Pair(n, i) if n >= 0 && n <= self.max_depth as i64 => {
                if (i as u128) < self.level_size(n as u32) {
                    Ok((n as u32, i))
                } else {
                    Err(Error::UnknownPoint(p))
                }
            }
            PointRef::Pair(n, _) if n > self.max_depth as i64 => {
                Err(Error::Budget(format!("regular_tree: {p} deeper than {}", self.max_depth)))
            }
            _ => Err(Error::UnknownPoint(p)),
        }
    }

    fn up(&self, n: u32, i: u64) -> u64 {
        if n <= 1 {
            0
        } else {
            i / (self.degree - 1)
        }
    }
}

impl Adjacency for RegularTree {
    fn adjacent(&self, v: PointRef, _max_weight: &Dist) -> Result<Vec<(PointRef, Dist)>> {
        let (n, i) = self.locate(v)?;
        let one = Dist::int(1);
        let mut out = Vec::new();
        if n > 0 {
            out.push((PointRef::Pair(n as i64 - 1, self.up(n, i)), one));
        }
        if n == self.max_depth {
            return Err(Error::Budget(format!("regular_tree: search reached depth {}", self.max_depth)));
        }
        let k = if n == 0 { self.degree } else { self.degree - 1 };
        out.extend((0..k).map(|c| (PointRef::Pair(n as i64 + 1, i * k + c), one)));
        Ok(out)
    }

    fn min_weight(&self) -> Dist {
        Dist::int(1)
    }
}

impl MetricSpace for RegularTree {
    fn tag(&self) -> &str {
        "regular_tree"
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
            ia = self.up(da, ia);
            da -= 1;
            d += 1;
        }
        while db > da {
            ib = self.up(db, ib);
            db -= 1;
            d += 1;
        }
        while ia != ib {
            ia = self.up(da, ia);
            ib = self.up(da, ib);
            da -= 1;
            d += 2;
        }
        Ok(Dist::int(d))
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let found = bounded_dijkstra(self, x, delta)?;
        Ok(found.into_keys().filter(|&y| y != x).collect())
    }

    fn window(&self, depth: Option<u64>) -> Result<Vec<PointRef>> {
        let d = depth.map_or(self.max_depth, |d| d.min(self.max_depth as u64) as u32);
        let count: u128 = (0..=d).map(|n| self.level_size(n)).sum();
        if count > WINDOW_POINT_LIMIT as u128 {
            return Err(window_too_large(self.tag(), count));
        }
        let mut out = Vec::with_capacity(count as usize);
        for n in 0..=d {
            out.extend((0..self.level_size(n) as u64).map(|i| PointRef::Pair(n as i64, i)));
        }
        Ok(out)
    }

    fn probe_points(&self, _depth: u64) -> Result<Vec<PointRef>> {
        Ok(vec![PointRef::Pair(0, 0)])
    }

    fn sample_pairs(&self) -> Vec<(PointRef, PointRef)> {
        (1..=self.max_depth.min(12) as i64).map(|n| (PointRef::Pair(0, 0), PointRef::Pair(n, 0))).collect()
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "degree": self.degree, "max_depth": self.max_depth })
    }
}
