//! Structural tests: bounded-geometry evidence, quasi-geodesicity checks,
//! Rips graphs and net retractions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::extremal::{check_separated, greedy_net, max_separated, Certificate, MatrixItems, MetricItems};
use crate::paths::step_layers;
use crate::point::PointRef;
use crate::spaces::{ball, build_weighted_graph, distance, GraphSpace, MetricSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BGVerdict {
    BoundedEvidence,
    UnboundedEvidence,
    Inconclusive,
}

/// Largest `s`-separated set of diameter `≤ D` found at one window depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BGRecord {
    pub depth: u64,
    pub cardinality: usize,
    pub center: PointRef,
    pub set: Vec<PointRef>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BGEvidence {
    pub s: Dist,
    pub diameter: Dist,
    pub records: Vec<BGRecord>,
    pub verdict: BGVerdict,
}

/// Pairwise distances of `points`, with pairs farther apart than `cap`
/// recorded as 0 so that a packing solver treats them as incompatible.
fn capped_items(space: &dyn MetricSpace, points: &[PointRef], cap: &Dist) -> Result<MatrixItems> {
    let n = points.len();
    let mut m = vec![Dist::ZERO; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(space, points[i], points[j])?;
            let v = if d > *cap { Dist::ZERO } else { d };
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    MatrixItems::new(n, m)
}

/// For each window depth, searches the `D`-balls around the space's probe
/// points for the largest `s`-separated subset of diameter at most `D`.
pub fn bounded_geometry_evidence(
    space: &dyn MetricSpace,
    s: &Dist,
    diameter: &Dist,
    depths: &[u64],
    exact_limit: usize,
    exec: Exec,
) -> Result<BGEvidence> {
    if !s.is_positive() || !diameter.is_positive() {
        return Err(Error::Precondition(format!("s and D must be positive, got s = {s}, D = {diameter}")));
    }
    let mut records = Vec::with_capacity(depths.len());
    for &depth in depths {
        let probes = space.probe_points(depth)?;
        let found = exec.try_map_range(probes.len(), |i| {
            let c = probes[i];
            let pts = ball(space, c, diameter)?;
            let items = capped_items(space, &pts, diameter)?;
            let res = max_separated(&items, s, exact_limit, Exec::Sequential)?;
            let set: Vec<PointRef> = res.selected.iter().map(|&i| pts[i]).collect();
            Ok::<_, Error>(BGRecord { depth, cardinality: set.len(), center: c, set, certificate: res.certificate })
        })?;
        let best = found
            .into_iter()
            .reduce(|a, b| if b.cardinality > a.cardinality { b } else { a })
            .ok_or_else(|| Error::Precondition(format!("no probe points at depth {depth}")))?;
        verify_record(space, &best, s, diameter)?;
        records.push(best);
    }
    let sizes: Vec<usize> = records.iter().map(|r| r.cardinality).collect();
    let verdict = if sizes.len() >= 2 && sizes.windows(2).all(|w| w[0] < w[1]) {
        BGVerdict::UnboundedEvidence
    } else if sizes.len() >= 2 && sizes.windows(2).all(|w| w[0] == w[1]) {
        BGVerdict::BoundedEvidence
    } else {
        BGVerdict::Inconclusive
    };
    Ok(BGEvidence { s: *s, diameter: *diameter, records, verdict })
}

fn verify_record(space: &dyn MetricSpace, rec: &BGRecord, s: &Dist, diameter: &Dist) -> Result<()> {
    for (i, &a) in rec.set.iter().enumerate() {
        for &b in &rec.set[i + 1..] {
            let d = distance(space, a, b)?;
            if d < *s || d > *diameter {
                return Err(Error::Precondition(format!("recorded set fails at {a}, {b}: distance {d}")));
            }
        }
    }
    Ok(())
}

/// Whether `b` is reachable from `a` by a δ-path of length at most `⌈d(a, b)⌉`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QgPair {
    pub a: PointRef,
    pub b: PointRef,
    pub distance: Dist,
    pub bound: u64,
    /// `d_δ(a, b)` when it is at most `bound`.
    pub hops: Option<u64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QgReport {
    pub delta: Dist,
    pub pairs: Vec<QgPair>,
    pub pass: bool,
}

/// Hop-metric test of quasi-geodesicity on sampled pairs.
pub fn quasi_geodesic_check(
    space: &dyn MetricSpace,
    delta: &Dist,
    pairs: &[(PointRef, PointRef)],
    point_cap: usize,
    exec: Exec,
) -> Result<QgReport> {
    let results = exec.try_map_range(pairs.len(), |i| {
        let (a, b) = pairs[i];
        let d = distance(space, a, b)?;
        let bound = d.ceil_u64().ok_or_else(|| Error::Precondition(format!("distance {d} is not finite")))?;
        let layers = step_layers(space, a, delta, bound as usize, point_cap)?;
        let hops = layers.iter().position(|l| l.binary_search(&b).is_ok()).map(|h| h as u64);
        Ok::<_, Error>(QgPair { a, b, distance: d, bound, hops, pass: hops.is_some() })
    })?;
    let pass = results.iter().all(|r| r.pass);
    Ok(QgReport { delta: *delta, pairs: results, pass })
}

/// Graph on `window` with an edge for every pair at distance in `(0, δ]`.
pub fn rips_graph(space: &dyn MetricSpace, delta: &Dist, window: &[PointRef]) -> Result<GraphSpace> {
    let mut pts = window.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let one = crate::dist::Rational::from_integer(1);
    let mut edges = Vec::new();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            let d = distance(space, a, b)?;
            if d.is_positive() && d <= *delta {
                edges.push((a, b, one));
            }
        }
    }
    Ok(build_weighted_graph(&pts, &edges)?.with_tag(format!("rips({}, {delta})", space.tag())))
}

/// A maximal `3r`-separated net and a closest-point retraction onto it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetRetraction {
    pub r: Dist,
    /// Net points in construction order.
    pub net: Vec<PointRef>,
    /// Each window point, sorted, with the index of its net point.
    pub retraction: Vec<(PointRef, usize)>,
}

impl NetRetraction {
    pub fn image(&self, p: PointRef) -> Option<PointRef> {
        let i = self.retraction.binary_search_by(|e| e.0.cmp(&p)).ok()?;
        Some(self.net[self.retraction[i].1])
    }
}

/// Greedy `3r`-net of the window (its first point first) and the retraction
/// sending each point to a nearest net point, ties to the earliest one.
pub fn net_retraction(space: &dyn MetricSpace, r: &Dist, window: &[PointRef]) -> Result<NetRetraction> {
    if !r.is_positive() {
        return Err(Error::Precondition(format!("r must be positive, got {r}")));
    }
    let net = greedy_net(space, window, &r.mul_int(3)?)?;
    let mut retraction = BTreeMap::new();
    for &p in window {
        let mut best = (Dist::Infinite, 0);
        for (i, &z) in net.iter().enumerate() {
            let d = distance(space, p, z)?;
            if d < best.0 {
                best = (d, i);
            }
        }
        retraction.insert(p, best.1);
    }
    Ok(NetRetraction { r: *r, net, retraction: retraction.into_iter().collect() })
}

/// Whether `set` is `s`-separated, checked directly.
pub fn is_separated(space: &dyn MetricSpace, set: &[PointRef], s: &Dist) -> Result<bool> {
    let items = crate::extremal::PointItems::new(space, set.to_vec())?;
    let all: Vec<usize> = (0..items.len()).collect();
    check_separated(&items, &all, s)
}
