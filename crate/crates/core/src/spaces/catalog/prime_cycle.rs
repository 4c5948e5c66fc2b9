use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::catalog::{window_too_large, WINDOW_POINT_LIMIT};
use crate::spaces::lazy::{bounded_dijkstra, Adjacency};
use crate::spaces::{MetricSpace, SpaceFlags, SpaceKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeCycleParams {
    /// Largest line coordinate.
    #[serde(default = "default_window")]
    pub window: i64,
}

fn default_window() -> i64 {
    1000
}

impl Default for PrimeCycleParams {
    fn default() -> Self {
        PrimeCycleParams { window: default_window() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleInfo {
    pub prime: i64,
    pub exponent: u32,
    /// Number of cycle vertices, `p·k`.
    pub len: u64,
}

/// The half-line `0, 1, 2, …` with a weighted cycle `G_p^k` on `pk` vertices
/// glued at every prime power `p^k`, plus chords of weight `p` between any
/// two vertices of the cycle.
///
/// Cycle vertex 0 is the line vertex `p^k` itself; the others are
/// `Pair(p^k, i)` for `1 ≤ i < pk`.
#[derive(Debug, Clone)]
pub struct PrimeCycle {
    window: i64,
    cycles: BTreeMap<i64, CycleInfo>,
    flags: SpaceFlags,
}

fn prime_power(v: i64) -> Option<(i64, u32)> {
    if v < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= v && v % p != 0 {
        p += 1;
    }
    if v % p != 0 {
        return Some((v, 1));
    }
    let (mut rest, mut k) = (v, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

impl PrimeCycle {
    pub fn new(params: PrimeCycleParams) -> Result<Self> {
        if params.window < 2 {
            return Err(Error::InvalidParams("prime_cycle: window must be at least 2".into()));
        }
        if params.window > 1_000_000 {
            return Err(Error::InvalidParams("prime_cycle: window must be at most 10^6".into()));
        }
        let cycles = (2..=params.window)
            .filter_map(|v| prime_power(v).map(|(p, k)| (v, CycleInfo { prime: p, exponent: k, len: (p as u64) * k as u64 })))
            .collect();
        Ok(PrimeCycle {
            window: params.window,
            cycles,
            flags: SpaceFlags {
                bounded_geometry: Some(false),
                quasi_geodesic: Some(false),
                coarsely_bounded_geometry: Some(false),
                coding_map_zero: true,
                connected_from: Some(Dist::int(1)),
                ..SpaceFlags::default()
            },
        })
    }

    pub fn with_window(window: i64) -> Result<Self> {
        Self::new(PrimeCycleParams { window })
    }

    /// The cycle glued at line vertex `base`, if `base` is a prime power in the window.
    pub fn cycle(&self, base: i64) -> Option<CycleInfo> {
        self.cycles.get(&base).copied()
    }

    /// Vertex `i` of the cycle glued at `base` (vertex 0 is the line vertex).
    pub fn cycle_vertex(base: i64, i: u64) -> PointRef {
        if i == 0 {
            PointRef::Int(base)
        } else {
            PointRef::Pair(base, i)
        }
    }

    fn locate(&self, p: PointRef) -> Result<Loc> {
        match p {
            PointRef::Int(i) if (0..=self.window).contains(&i) => Ok(Loc::Line(i)),
            PointRef::Int(i) if i > self.window => {
                Err(Error::Budget(format!("prime_cycle: {p} outside window 0..={}", self.window)))
            }
            PointRef::Pair(b, i) => match self.cycles.get(&b) {
                Some(c) if i >= 1 && i < c.len => Ok(Loc::Cycle(b, i, *c)),
                None if b > self.window => {
                    Err(Error::Budget(format!("prime_cycle: {p} outside window 0..={}", self.window)))
                }
                _ => Err(Error::UnknownPoint(p)),
            },
            _ => Err(Error::UnknownPoint(p)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Loc {
    Line(i64),
    Cycle(i64, u64, CycleInfo),
}

fn cycle_dist(c: &CycleInfo, i: u64, j: u64) -> i64 {
    if i == j {
        return 0;
    }
    let gap = i.abs_diff(j);
    (gap.min(c.len - gap) as i64).min(c.prime)
}

impl Adjacency for PrimeCycle {
    fn adjacent(&self, v: PointRef, max_weight: &Dist) -> Result<Vec<(PointRef, Dist)>> {
        let one = Dist::int(1);
        let mut out = Vec::new();
        let (base, idx, info) = match self.locate(v)? {
            Loc::Line(i) => {
                if i > 0 {
                    out.push((PointRef::Int(i - 1), one));
                }
                if i == self.window {
                    return Err(Error::Budget(format!("prime_cycle: search reached window edge {}", self.window)));
                }
                out.push((PointRef::Int(i + 1), one));
                match self.cycles.get(&i) {
                    Some(c) => (i, 0, *c),
                    None => return Ok(out),
                }
            }
            Loc::Cycle(b, i, c) => (b, i, c),
        };
        let m = info.len;
        out.push((Self::cycle_vertex(base, (idx + 1) % m), one));
        out.push((Self::cycle_vertex(base, (idx + m - 1) % m), one));
        let chord = Dist::int(info.prime);
        if chord <= *max_weight {
            for j in 0..m {
                if j != idx {
                    out.push((Self::cycle_vertex(base, j), chord));
                }
            }
        }
        Ok(out)
    }

    fn min_weight(&self) -> Dist {
        Dist::int(1)
    }
}

impl MetricSpace for PrimeCycle {
    fn tag(&self) -> &str {
        "prime_cycle"
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
        self.locate(p).map(|_| ())
    }

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist> {
        let (la, lb) = (self.locate(a)?, self.locate(b)?);
        if let (Loc::Cycle(ba, i, c), Loc::Cycle(bb, j, _)) = (la, lb) {
            if ba == bb {
                return Ok(Dist::int(cycle_dist(&c, i, j)));
            }
        }
        let to_root = |l: Loc| match l {
            Loc::Line(i) => (i, 0),
            Loc::Cycle(b, i, c) => (b, cycle_dist(&c, 0, i)),
        };
        let ((ra, da), (rb, db)) = (to_root(la), to_root(lb));
        Ok(Dist::int(da + (ra - rb).abs() + db))
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let found = bounded_dijkstra(self, x, delta)?;
        Ok(found.into_keys().filter(|&y| y != x).collect())
    }

    fn window(&self, depth: Option<u64>) -> Result<Vec<PointRef>> {
        let n = depth.map_or(self.window, |d| (d.min(i64::MAX as u64) as i64).min(self.window));
        let count: u128 = (n as u128 + 1) + self.cycles.range(..=n).map(|(_, c)| c.len as u128 - 1).sum::<u128>();
        if count > WINDOW_POINT_LIMIT as u128 {
            return Err(window_too_large(self.tag(), count));
        }
        let mut out: Vec<PointRef> = (0..=n).map(PointRef::Int).collect();
        for (&b, c) in self.cycles.range(..=n) {
            out.extend((1..c.len).map(|i| PointRef::Pair(b, i)));
        }
        out.sort_unstable();
        Ok(out)
    }

    fn probe_points(&self, depth: u64) -> Result<Vec<PointRef>> {
        let n = (depth.min(i64::MAX as u64) as i64).min(self.window);
        Ok(self.cycles.range(..=n).map(|(&b, _)| PointRef::Int(b)).collect())
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
