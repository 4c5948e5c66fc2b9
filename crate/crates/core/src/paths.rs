//! δ-paths (pseudoorbits of the identity), their algebra, exhaustive
//! enumeration, step balls and δ-components.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::point::PointRef;
use crate::spaces::{delta_neighbors, distance, MetricSpace};

/// A nonempty point sequence whose consecutive points are at most `delta` apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPath {
    points: Vec<PointRef>,
    delta: Dist,
}

impl DeltaPath {
    /// Validates the sequence against the space before wrapping it.
    pub fn new(space: &dyn MetricSpace, points: Vec<PointRef>, delta: Dist) -> Result<Self> {
        if !validate_path(space, &points, &delta)? {
            return Err(Error::Precondition(format!("sequence is not a {delta}-path")));
        }
        Ok(DeltaPath { points, delta })
    }

    /// Wraps a sequence the caller has already validated.
    pub fn from_trusted(points: Vec<PointRef>, delta: Dist) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPath);
        }
        Ok(DeltaPath { points, delta })
    }

    /// The path that stays at `x` for `n` steps.
    pub fn stationary(x: PointRef, n: usize, delta: Dist) -> Self {
        DeltaPath { points: vec![x; n + 1], delta }
    }

    pub fn points(&self) -> &[PointRef] {
        &self.points
    }

    pub fn delta(&self) -> &Dist {
        &self.delta
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first(&self) -> PointRef {
        self.points[0]
    }

    pub fn last(&self) -> PointRef {
        *self.points.last().expect("paths are nonempty")
    }

    /// `self * other`: `other`'s first point is dropped.
    pub fn concat(&self, other: &DeltaPath) -> Result<DeltaPath> {
        if self.delta != other.delta {
            return Err(Error::DeltaMismatch(self.delta.to_string(), other.delta.to_string()));
        }
        if self.last() != other.first() {
            return Err(Error::EndpointMismatch { left: self.last(), right: other.first() });
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points[1..]);
        Ok(DeltaPath { points, delta: self.delta })
    }

    /// The same path traversed backwards.
    pub fn reverse(&self) -> DeltaPath {
        let mut points = self.points.clone();
        points.reverse();
        DeltaPath { points, delta: self.delta }
    }

    /// Lengthens the path to `n` steps by repeating its last point.
    pub fn pad_to(&self, n: usize) -> Result<DeltaPath> {
        if n < self.len() {
            return Err(Error::Precondition(format!("cannot pad a path of length {} to {n}", self.len())));
        }
        let mut points = self.points.clone();
        points.resize(n + 1, self.last());
        Ok(DeltaPath { points, delta: self.delta })
    }
}

/// True iff every consecutive pair of `seq` is within `delta`.
pub fn validate_path(space: &dyn MetricSpace, seq: &[PointRef], delta: &Dist) -> Result<bool> {
    if seq.is_empty() {
        return Err(Error::EmptyPath);
    }
    space.check_point(seq[0])?;
    for w in seq.windows(2) {
        if distance(space, w[0], w[1])? > *delta {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `max_i d(u_i, v_i)` over point sequences of equal length.
pub fn orbit_distance_points(space: &dyn MetricSpace, u: &[PointRef], v: &[PointRef]) -> Result<Dist> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let mut best = Dist::ZERO;
    for (&a, &b) in u.iter().zip(v) {
        if a != b {
            best = best.max(distance(space, a, b)?);
        }
    }
    Ok(best)
}

pub fn orbit_distance(space: &dyn MetricSpace, u: &DeltaPath, v: &DeltaPath) -> Result<Dist> {
    orbit_distance_points(space, &u.points, &v.points)
}

/// A family of δ-paths of common length `n` from a common start point,
/// stored flat with stride `n + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSet {
    n: usize,
    delta: Dist,
    x0: PointRef,
    exhaustive: bool,
    flat: Vec<PointRef>,
}

impl OrbitSet {
    pub fn from_paths(x0: PointRef, n: usize, delta: Dist, paths: &[DeltaPath], exhaustive: bool) -> Result<Self> {
        let mut flat = Vec::with_capacity(paths.len() * (n + 1));
        for p in paths {
            if p.len() != n {
                return Err(Error::LengthMismatch(p.len(), n));
            }
            if p.first() != x0 {
                return Err(Error::EndpointMismatch { left: x0, right: p.first() });
            }
            if p.delta != delta {
                return Err(Error::DeltaMismatch(p.delta.to_string(), delta.to_string()));
            }
            flat.extend_from_slice(&p.points);
        }
        Ok(OrbitSet { n, delta, x0, exhaustive, flat })
    }

    pub(crate) fn from_flat(x0: PointRef, n: usize, delta: Dist, flat: Vec<PointRef>, exhaustive: bool) -> Self {
        debug_assert_eq!(flat.len() % (n + 1), 0);
        OrbitSet { n, delta, x0, exhaustive, flat }
    }

    /// Path length shared by all members.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> &Dist {
        &self.delta
    }

    pub fn x0(&self) -> PointRef {
        self.x0
    }

    pub fn exhaustive(&self) -> bool {
        self.exhaustive
    }

    /// Number of paths.
    pub fn len(&self) -> usize {
        self.flat.len() / (self.n + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn path(&self, i: usize) -> &[PointRef] {
        let s = self.n + 1;
        &self.flat[i * s..(i + 1) * s]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[PointRef]> {
        self.flat.chunks(self.n + 1)
    }

    pub fn to_paths(&self) -> Vec<DeltaPath> {
        self.iter().map(|p| DeltaPath { points: p.to_vec(), delta: self.delta }).collect()
    }

    /// Writes one JSON array of encoded points per line.
    pub fn write_jsonl<W: Write>(&self, space: &dyn MetricSpace, mut out: W) -> std::io::Result<()> {
        for p in self.iter() {
            let enc: Vec<serde_json::Value> = p.iter().map(|&x| space.encode(x)).collect();
            serde_json::to_writer(&mut out, &enc)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Sorted δ-successors `{x} ∪ N_δ(x)`, memoized per point.
pub(crate) struct Successors<'a> {
    space: &'a dyn MetricSpace,
    delta: Dist,
    cache: Mutex<HashMap<PointRef, Arc<Vec<PointRef>>>>,
}

impl<'a> Successors<'a> {
    pub(crate) fn new(space: &'a dyn MetricSpace, delta: Dist) -> Result<Self> {
        if !delta.is_positive() {
            return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
        }
        Ok(Successors { space, delta, cache: Mutex::new(HashMap::new()) })
    }

    pub(crate) fn get(&self, x: PointRef) -> Result<Arc<Vec<PointRef>>> {
        if let Some(v) = self.cache.lock().get(&x) {
            return Ok(v.clone());
        }
        let mut v = delta_neighbors(self.space, x, &self.delta)?;
        let at = v.partition_point(|&y| y < x);
        v.insert(at, x);
        let v = Arc::new(v);
        self.cache.lock().insert(x, v.clone());
        Ok(v)
    }
}

/// Number of δ-paths of length `n` from `x0`, saturating at `limit + 1`.
pub fn count_orbits(space: &dyn MetricSpace, x0: PointRef, n: usize, delta: &Dist, limit: u128) -> Result<u128> {
    space.check_point(x0)?;
    let succ = Successors::new(space, *delta)?;
    count_with(&succ, x0, n, limit)
}

fn count_with(succ: &Successors<'_>, x0: PointRef, n: usize, limit: u128) -> Result<u128> {
    // paths ending at each point after i steps
    let mut layer: HashMap<PointRef, u128> = HashMap::from([(x0, 1)]);
    for _ in 0..n {
        let mut next: HashMap<PointRef, u128> = HashMap::new();
        let mut keys: Vec<PointRef> = layer.keys().copied().collect();
        keys.sort_unstable();
        for y in keys {
            let c = layer[&y];
            for &z in succ.get(y)?.iter() {
                let e = next.entry(z).or_insert(0);
                *e = e.saturating_add(c).min(limit + 1);
            }
        }
        layer = next;
    }
    Ok(layer.values().fold(0u128, |a, &c| a.saturating_add(c)).min(limit + 1))
}

/// The exhaustive set `P(n, δ, x0)` in depth-first order with successors in
/// [`PointRef`] order. Fails with [`Error::CapExceeded`] if it has more than `cap` members.
pub fn enumerate_orbits(
    space: &dyn MetricSpace,
    x0: PointRef,
    n: usize,
    delta: &Dist,
    cap: usize,
    exec: Exec,
) -> Result<OrbitSet> {
    space.check_point(x0)?;
    let succ = Successors::new(space, *delta)?;
    let total = count_with(&succ, x0, n, cap as u128)?;
    if total > cap as u128 {
        return Err(Error::CapExceeded { cap, reached: total.min(usize::MAX as u128) as usize });
    }
    if n == 0 {
        return Ok(OrbitSet::from_flat(x0, 0, *delta, vec![x0], true));
    }
    let first = succ.get(x0)?;
    let branches = exec.try_map_range(first.len(), |b| {
        let mut out = Vec::new();
        let mut prefix = vec![x0, first[b]];
        dfs(&succ, n, &mut prefix, &mut out)?;
        Ok::<_, Error>(out)
    })?;
    Ok(OrbitSet::from_flat(x0, n, *delta, branches.concat(), true))
}

fn dfs(succ: &Successors<'_>, n: usize, prefix: &mut Vec<PointRef>, out: &mut Vec<PointRef>) -> Result<()> {
    if prefix.len() == n + 1 {
        out.extend_from_slice(prefix);
        return Ok(());
    }
    let last = *prefix.last().expect("nonempty prefix");
    for &y in succ.get(last)?.iter() {
        prefix.push(y);
        dfs(succ, n, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}

/// Breadth-first layers of the hop metric `d_δ` from `x`: layer `i` holds
/// the points first reached by a δ-path of length `i`. Stops after `l_max`
/// layers or at a fixed point, and fails with [`Error::Budget`] once more
/// than `point_cap` points have been reached.
pub fn step_layers(
    space: &dyn MetricSpace,
    x: PointRef,
    delta: &Dist,
    l_max: usize,
    point_cap: usize,
) -> Result<Vec<Vec<PointRef>>> {
    space.check_point(x)?;
    let succ = Successors::new(space, *delta)?;
    let mut seen: BTreeSet<PointRef> = BTreeSet::from([x]);
    let mut layers = vec![vec![x]];
    for _ in 0..l_max {
        let mut fresh = BTreeSet::new();
        for &y in layers.last().expect("nonempty") {
            for &z in succ.get(y)?.iter() {
                if !seen.contains(&z) {
                    fresh.insert(z);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        seen.extend(fresh.iter().copied());
        if seen.len() > point_cap {
            return Err(Error::Budget(format!("step ball exceeds {point_cap} points")));
        }
        layers.push(fresh.into_iter().collect());
    }
    Ok(layers)
}

/// `B_δ(x, n)`: endpoints of δ-paths of length `n` from `x`, sorted.
pub fn step_ball(space: &dyn MetricSpace, x: PointRef, n: usize, delta: &Dist) -> Result<Vec<PointRef>> {
    let layers = step_layers(space, x, delta, n, usize::MAX)?;
    let mut out: Vec<PointRef> = layers.into_iter().flatten().collect();
    out.sort_unstable();
    Ok(out)
}

/// The δ-component of `x`, truncated after `hop_cap` expansion rounds.
/// `complete` is true iff expansion reached a fixed point within the cap.
pub fn delta_component(
    space: &dyn MetricSpace,
    x: PointRef,
    delta: &Dist,
    hop_cap: usize,
) -> Result<(Vec<PointRef>, bool)> {
    let rounds = hop_cap.saturating_add(1);
    let layers = step_layers(space, x, delta, rounds, usize::MAX)?;
    let complete = layers.len() <= rounds;
    let mut out: Vec<PointRef> = layers.into_iter().take(rounds).flatten().collect();
    out.sort_unstable();
    Ok((out, complete))
}
