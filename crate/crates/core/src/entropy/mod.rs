//! Separated and dense path counts, finite-n rate series, lower-bound
//! witnesses, transfer maps, growth functions and the dichotomy classifier.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::extremal::{
    max_separated, min_dense, Certificate, OrbitItems, DEFAULT_COVERING_LIMIT, DEFAULT_PACKING_LIMIT,
};
use crate::paths::{enumerate_orbits, step_layers, Successors};
use crate::point::PointRef;
use crate::spaces::{distance, MetricSpace};

mod classify;
mod coding;
mod growth;
mod transfer;
mod witness;

pub use classify::{
    classify, obstruct, ClassificationReport, ClassifyConfig, Evidence, ObstructionReport, Rule, Verdict,
    SCHEMA_VERSION,
};
pub use coding::{coding_map_check, CodingReport};
pub use growth::{fit_slope, growth_series, GrowthMeasure, GrowthSeries, SupMode};
pub use transfer::{transfer_orbits, Direction, FiniteMap};
pub use witness::{
    branch_tree_arms, delta_path_between, pad_arms, pingpong_witness, tree_line_arms, PingPongFamily,
    WitnessSummary,
};

/// Enumeration and solver limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    /// Most δ-paths enumerated for one count.
    pub orbit_cap: usize,
    /// Most points a window or step ball may hold.
    pub point_cap: usize,
    /// Largest instance solved exactly by the packing solver.
    pub packing_exact: usize,
    /// Largest instance solved exactly by the covering solver.
    pub covering_exact: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            orbit_cap: 1_000_000,
            point_cap: 10_000,
            packing_exact: DEFAULT_PACKING_LIMIT,
            covering_exact: DEFAULT_COVERING_LIMIT,
            exec: Exec::default(),
        }
    }
}

/// One term `(1/n) ln count` of a rate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub count: u64,
    pub certificate: Certificate,
    pub rate: f64,
    /// Checkpoint covering bound, when step-ball sizes were available.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub covering: Option<CoveringBound>,
}

impl RatePoint {
    pub fn new(n: usize, count: u64, certificate: Certificate) -> Self {
        let rate = if n == 0 || count == 0 { 0.0 } else { (count as f64).ln() / n as f64 };
        RatePoint { n, count, certificate, rate, covering: None }
    }
}

/// Upper bounds on the dense count from concatenating step-ball paths
/// between checkpoints `0, k, 2k, …`, where `k = ⌈R/δ⌉ − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringBound {
    pub k: usize,
    /// `V_δ(k)` at the basepoint's component (exact for vertex-transitive spaces).
    pub v_k: u64,
    /// `ln V_δ(k)^{n/k + 1}`.
    pub ln_bound: f64,
    /// `ln V_δ(k)^{2nδ/R + 1}`.
    pub ln_bound_coarse: f64,
    pub exact_v: bool,
}

/// Which extremal quantity a series tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Separated,
    Dense,
}

fn check_params(delta: &Dist, radius: &Dist) -> Result<()> {
    if !delta.is_positive() {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    if !radius.is_positive() {
        return Err(Error::Precondition(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// True when every point reachable by a δ-path of length `n` from `x0` lies
/// within distance `< R` of every other such point. Then any two paths are
/// closer than `R` and both counts equal 1.
fn reach_is_small(
    space: &dyn MetricSpace,
    x0: PointRef,
    n: usize,
    delta: &Dist,
    radius: &Dist,
    caps: &Caps,
) -> Result<bool> {
    const SHORTCUT_POINTS: usize = 2048;
    let layers = match step_layers(space, x0, delta, n, SHORTCUT_POINTS.min(caps.point_cap)) {
        Ok(l) => l,
        Err(Error::Budget(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let pts: Vec<PointRef> = layers.into_iter().flatten().collect();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            if distance(space, a, b)? >= *radius {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `s(n, R, δ, x0)`: the largest R-separated set of δ-paths of length `n` from `x0`.
pub fn separated_count(
    space: &dyn MetricSpace,
    x0: PointRef,
    n: usize,
    delta: &Dist,
    radius: &Dist,
    caps: &Caps,
) -> Result<RatePoint> {
    check_params(delta, radius)?;
    space.check_point(x0)?;
    if n == 0 || reach_is_small(space, x0, n, delta, radius, caps)? {
        return Ok(RatePoint::new(n, 1, Certificate::Exact));
    }
    let orbits = enumerate_orbits(space, x0, n, delta, caps.orbit_cap, caps.exec)?;
    let items = OrbitItems::new(space, &orbits, caps.exec)?;
    let res = max_separated(&items, radius, caps.packing_exact, caps.exec)?;
    Ok(RatePoint::new(n, res.size() as u64, res.certificate))
}

/// `r(n, R, δ, x0)`: the smallest R-dense set of δ-paths of length `n` from `x0`.
///
/// Beyond the exact solver's reach the result is the smaller of a greedy
/// cover and the checkpoint cover, both upper bounds.
pub fn dense_count(
    space: &dyn MetricSpace,
    x0: PointRef,
    n: usize,
    delta: &Dist,
    radius: &Dist,
    caps: &Caps,
) -> Result<RatePoint> {
    check_params(delta, radius)?;
    space.check_point(x0)?;
    if n == 0 || reach_is_small(space, x0, n, delta, radius, caps)? {
        return Ok(RatePoint::new(n, 1, Certificate::Exact));
    }
    let total = crate::paths::count_orbits(space, x0, n, delta, caps.orbit_cap as u128)?;
    let mut best: Option<u64> = None;
    if total <= crate::extremal::GREEDY_COVER_LIMIT as u128 {
        let orbits = enumerate_orbits(space, x0, n, delta, caps.orbit_cap, caps.exec)?;
        let items = OrbitItems::new(space, &orbits, caps.exec)?;
        let res = min_dense(&items, radius, caps.covering_exact, caps.exec)?;
        if res.certificate == Certificate::Exact {
            return Ok(RatePoint::new(n, res.size() as u64, Certificate::Exact));
        }
        best = Some(res.size() as u64);
    }
    if let Some(c) = checkpoint_cover_size(space, x0, n, delta, radius, caps.orbit_cap as u128)? {
        best = Some(best.map_or(c, |b| b.min(c)));
    }
    match best {
        Some(c) => Ok(RatePoint::new(n, c, Certificate::UpperBound)),
        None => Err(Error::CapExceeded { cap: caps.orbit_cap, reached: total.min(usize::MAX as u128) as usize }),
    }
}

/// Checkpoint spacing `k = ⌈R/δ⌉ − 1`, so that `kδ < R`.
pub fn checkpoint_spacing(delta: &Dist, radius: &Dist) -> Result<usize> {
    let q = radius
        .ceil_div(delta)
        .ok_or_else(|| Error::Precondition(format!("cannot divide {radius} by {delta}")))?;
    Ok(q.saturating_sub(1) as usize)
}

/// Size of the checkpoint cover: one path per reachable tuple of positions
/// at `0, k, 2k, …, n`. Every δ-path agrees with its representative at the
/// checkpoints, so the two stay within `kδ < R` of each other.
/// Returns `None` when `k = 0` or the count exceeds `limit`.
pub fn checkpoint_cover_size(
    space: &dyn MetricSpace,
    x0: PointRef,
    n: usize,
    delta: &Dist,
    radius: &Dist,
    limit: u128,
) -> Result<Option<u64>> {
    let k = checkpoint_spacing(delta, radius)?;
    if k == 0 {
        return Ok(None);
    }
    let succ = Successors::new(space, *delta)?;
    let ball = |y: PointRef, m: usize| -> Result<Vec<PointRef>> {
        let mut seen = std::collections::BTreeSet::from([y]);
        let mut frontier = vec![y];
        for _ in 0..m {
            let mut next = Vec::new();
            for &z in &frontier {
                for &w in succ.get(z)?.iter() {
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        Ok(seen.into_iter().collect())
    };
    let mut layer: std::collections::BTreeMap<PointRef, u128> = [(x0, 1)].into();
    let mut done = 0;
    while done < n {
        let m = k.min(n - done);
        let mut next: std::collections::BTreeMap<PointRef, u128> = Default::default();
        for (&y, &c) in &layer {
            for z in ball(y, m)? {
                let e = next.entry(z).or_insert(0);
                *e = e.saturating_add(c);
            }
        }
        layer = next;
        done += m;
        let total: u128 = layer.values().fold(0, |a, &c| a.saturating_add(c));
        if total > limit {
            return Ok(None);
        }
    }
    let total: u128 = layer.values().fold(0, |a, &c| a.saturating_add(c));
    Ok(u64::try_from(total).ok())
}

/// Rate series for each `n` in `n_list` (ascending). Dense series also
/// carry the checkpoint covering bound.
pub fn rate_series(
    space: &dyn MetricSpace,
    x0: PointRef,
    delta: &Dist,
    radius: &Dist,
    n_list: &[usize],
    quantity: Quantity,
    caps: &Caps,
) -> Result<Vec<RatePoint>> {
    check_params(delta, radius)?;
    if n_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("n_list must be ascending".into()));
    }
    let inner = Caps { exec: Exec::Sequential, ..*caps };
    let mut points = caps.exec.try_map_range(n_list.len(), |i| match quantity {
        Quantity::Separated => separated_count(space, x0, n_list[i], delta, radius, &inner),
        Quantity::Dense => dense_count(space, x0, n_list[i], delta, radius, &inner),
    })?;
    let k = checkpoint_spacing(delta, radius)?;
    if k > 0 {
        if let Some((v_k, exact_v)) = step_ball_sup(space, x0, delta, k, caps.point_cap)? {
            let lnv = (v_k as f64).ln();
            let ratio = delta.to_f64() / radius.to_f64();
            for p in &mut points {
                let nf = p.n as f64;
                p.covering = Some(CoveringBound {
                    k,
                    v_k,
                    ln_bound: lnv * (nf / k as f64 + 1.0),
                    ln_bound_coarse: lnv * (2.0 * nf * ratio + 1.0),
                    exact_v,
                });
            }
        }
    }
    Ok(points)
}

/// `V_δ(k)` from the space's growth basepoints; exact when vertex-transitive.
fn step_ball_sup(
    space: &dyn MetricSpace,
    x0: PointRef,
    delta: &Dist,
    k: usize,
    point_cap: usize,
) -> Result<Option<(u64, bool)>> {
    match growth_series(space, x0, delta, k, GrowthMeasure::Counting, point_cap) {
        Ok(g) => Ok(g.values.last().and_then(|v| v.to_integer().try_into().ok()).map(|v| (v, g.sup_mode == SupMode::TransitiveExact))),
        Err(Error::Budget(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
