use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::OrbitSet;
use crate::point::PointRef;
use crate::spaces::{distance, MetricSpace};

/// A self-map given by a finite table.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteMap {
    table: BTreeMap<PointRef, PointRef>,
}

impl FiniteMap {
    pub fn new(table: BTreeMap<PointRef, PointRef>) -> Self {
        FiniteMap { table }
    }

    /// Tabulates `f` on `domain`.
    pub fn from_fn<F: Fn(PointRef) -> PointRef>(domain: &[PointRef], f: F) -> Self {
        FiniteMap { table: domain.iter().map(|&p| (p, f(p))).collect() }
    }

    pub fn apply(&self, p: PointRef) -> Result<PointRef> {
        self.table.get(&p).copied().ok_or(Error::IterateDomain(p))
    }

    /// `f^k(p)`.
    pub fn iterate(&self, mut p: PointRef, k: usize) -> Result<PointRef> {
        for _ in 0..k {
            p = self.apply(p)?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// δ-paths `(x_0, …, x_n)` of the identity to δ-pseudoorbits
    /// `(x_0, f(x_1), …, f^n(x_n))` of `f`.
    Forward,
    /// δ-pseudoorbits `(x_0, …, x_n)` of `f` to δ-paths
    /// `(f^n(x_0), f^{n-1}(x_1), …, x_n)` of the identity.
    Backward,
}

const ISOMETRY_CHECK_LIMIT: usize = 4096;

/// Maps an orbit set through the transfer map of an isometric embedding `f`.
///
/// `f` is checked to preserve distances on every pair of points it is
/// applied to, inputs are checked to be pseudoorbits of the source map, and
/// outputs are checked to be pseudoorbits of the target map.
pub fn transfer_orbits(space: &dyn MetricSpace, direction: Direction, f: &FiniteMap, orbits: &OrbitSet) -> Result<OrbitSet> {
    let n = orbits.n();
    let delta = *orbits.delta();
    let power = |i: usize| match direction {
        Direction::Forward => i,
        Direction::Backward => n - i,
    };
    // every point f is applied to, at every stage of iteration
    let mut used: BTreeSet<PointRef> = BTreeSet::new();
    let mut flat = Vec::with_capacity(orbits.len() * (n + 1));
    for path in orbits.iter() {
        for (i, &x) in path.iter().enumerate() {
            let mut y = x;
            for _ in 0..power(i) {
                used.insert(y);
                y = f.apply(y)?;
            }
            flat.push(y);
        }
    }
    if used.len() > ISOMETRY_CHECK_LIMIT {
        return Err(Error::Budget(format!(
            "isometry check needs {} points, limit {ISOMETRY_CHECK_LIMIT}",
            used.len()
        )));
    }
    let used: Vec<PointRef> = used.into_iter().collect();
    for (i, &a) in used.iter().enumerate() {
        for &b in &used[i + 1..] {
            let before = distance(space, a, b)?;
            let after = distance(space, f.apply(a)?, f.apply(b)?)?;
            if before != after {
                return Err(Error::NotIsometric { a, b, before: before.to_string(), after: after.to_string() });
            }
        }
    }
    // input: identity paths (forward) or pseudoorbits of f (backward)
    let step_ok = |path: &[PointRef], through_f: bool| -> Result<bool> {
        for w in path.windows(2) {
            let a = if through_f { f.apply(w[0])? } else { w[0] };
            if distance(space, a, w[1])? > delta {
                return Ok(false);
            }
        }
        Ok(true)
    };
    for path in orbits.iter() {
        if !step_ok(path, direction == Direction::Backward)? {
            return Err(Error::Precondition(format!("input is not a {delta}-pseudoorbit of the source map")));
        }
    }
    let x0 = match direction {
        Direction::Forward => orbits.x0(),
        Direction::Backward => f.iterate(orbits.x0(), n)?,
    };
    let out = OrbitSet::from_flat(x0, n, delta, flat, orbits.exhaustive());
    for path in out.iter() {
        if !step_ok(path, direction == Direction::Forward)? {
            return Err(Error::Precondition(format!("output is not a {delta}-pseudoorbit of the target map")));
        }
    }
    Ok(out)
}
