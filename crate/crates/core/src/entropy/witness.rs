use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::paths::{DeltaPath, OrbitSet, Successors};
use crate::point::PointRef;
use crate::spaces::catalog::{BranchTree, TreeLine};
use crate::spaces::{distance, MetricSpace};

/// The family `{ o * a_1 * a_1⁻¹ * … * a_p * a_p⁻¹ }` over all choices of
/// arms, held implicitly: member `m` picks arm `digit_i(m)` in base `|arms|`.
#[derive(Debug, Clone)]
pub struct PingPongFamily {
    base: DeltaPath,
    arms: Vec<DeltaPath>,
    p: usize,
    radius: Dist,
}

/// Serializable description of a constructed family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub arms: usize,
    pub p: usize,
    pub base_length: usize,
    pub arm_length: usize,
    pub path_length: usize,
    /// `|arms|^p`, or `None` if it overflows.
    pub family_size: Option<u64>,
    pub radius: Dist,
    pub delta: Dist,
    /// `p·ln|arms| / (L + 2pD)`.
    pub rate_bound: f64,
    /// Whether every pair of members was checked to be R-separated.
    pub separation_verified: bool,
}

impl PingPongFamily {
    pub fn arms(&self) -> &[DeltaPath] {
        &self.arms
    }

    pub fn base(&self) -> &DeltaPath {
        &self.base
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn arm_length(&self) -> usize {
        self.arms[0].len()
    }

    /// Length `L + 2pD` of every member.
    pub fn path_length(&self) -> usize {
        self.base.len() + 2 * self.p * self.arm_length()
    }

    pub fn size(&self) -> Option<u64> {
        (self.arms.len() as u64).checked_pow(self.p as u32)
    }

    /// `p·ln|arms| / (L + 2pD)`.
    pub fn rate_bound(&self) -> f64 {
        let len = self.path_length();
        if len == 0 {
            0.0
        } else {
            self.p as f64 * (self.arms.len() as f64).ln() / len as f64
        }
    }

    /// Arm indices chosen by member `m`, most significant first.
    pub fn digits(&self, m: u64) -> Vec<usize> {
        let k = self.arms.len() as u64;
        let mut out = vec![0; self.p];
        let mut rest = m;
        for d in out.iter_mut().rev() {
            *d = (rest % k) as usize;
            rest /= k;
        }
        out
    }

    /// Point at position `pos` of member `m`.
    pub fn point(&self, m: u64, pos: usize) -> PointRef {
        let l = self.base.len();
        if pos <= l {
            return self.base.points()[pos];
        }
        let d = self.arm_length();
        let off = pos - l;
        let (seg, within) = (off / (2 * d), off % (2 * d));
        let (seg, within) = if within == 0 { (seg - 1, 2 * d) } else { (seg, within) };
        let arm = &self.arms[self.digits(m)[seg]];
        let i = if within <= d { within } else { 2 * d - within };
        arm.points()[i]
    }

    pub fn member(&self, m: u64) -> Vec<PointRef> {
        (0..=self.path_length()).map(|pos| self.point(m, pos)).collect()
    }

    /// Materializes the family, refusing more than `point_cap` stored points.
    pub fn to_orbit_set(&self, point_cap: usize) -> Result<OrbitSet> {
        let size = self.size().ok_or(Error::Overflow)?;
        let total = size as u128 * (self.path_length() as u128 + 1);
        if total > point_cap as u128 {
            return Err(Error::CapExceeded { cap: point_cap, reached: total.min(usize::MAX as u128) as usize });
        }
        let paths: Vec<DeltaPath> = (0..size)
            .map(|m| DeltaPath::from_trusted(self.member(m), *self.base.delta()))
            .collect::<Result<_>>()?;
        OrbitSet::from_paths(self.base.first(), self.path_length(), *self.base.delta(), &paths, false)
    }

    /// Checks every pair of members for a position at distance `≥ R`,
    /// scanning the materialized points after the shared base.
    pub fn verify_separated(&self, space: &dyn MetricSpace, max_members: u64, exec: Exec) -> Result<bool> {
        let size = self.size().ok_or(Error::Overflow)?;
        if size > max_members {
            return Err(Error::CapExceeded { cap: max_members as usize, reached: size.min(usize::MAX as u64) as usize });
        }
        let len = self.path_length();
        let start = self.base.len();
        let rows = exec.try_map_range(size as usize, |i| {
            let u = self.member(i as u64);
            for j in (i as u64 + 1)..size {
                let mut far = false;
                for pos in start..=len {
                    let (a, b) = (u[pos], self.point(j, pos));
                    if a != b && distance(space, a, b)? >= self.radius {
                        far = true;
                        break;
                    }
                }
                if !far {
                    return Ok::<_, Error>(false);
                }
            }
            Ok(true)
        })?;
        Ok(rows.into_iter().all(|ok| ok))
    }

    pub fn summary(&self, separation_verified: bool) -> WitnessSummary {
        WitnessSummary {
            arms: self.arms.len(),
            p: self.p,
            base_length: self.base.len(),
            arm_length: self.arm_length(),
            path_length: self.path_length(),
            family_size: self.size(),
            radius: self.radius,
            delta: *self.base.delta(),
            rate_bound: self.rate_bound(),
            separation_verified,
        }
    }
}

/// Builds the ping-pong family after checking its preconditions.
pub fn pingpong_witness(
    space: &dyn MetricSpace,
    x0: PointRef,
    base: &DeltaPath,
    arms: &[DeltaPath],
    p: usize,
    radius: &Dist,
) -> Result<PingPongFamily> {
    if p == 0 {
        return Err(Error::Precondition("p must be positive".into()));
    }
    if base.first() != x0 {
        return Err(Error::Precondition(format!("base starts at {} instead of {x0}", base.first())));
    }
    let first = arms.first().ok_or_else(|| Error::Precondition("no arms given".into()))?;
    for (i, a) in arms.iter().enumerate() {
        if a.first() != base.last() {
            return Err(Error::Precondition(format!(
                "arm {i} starts at {} but the base ends at {}",
                a.first(),
                base.last()
            )));
        }
        if a.len() != first.len() {
            return Err(Error::Precondition(format!(
                "arm {i} has length {} but arm 0 has length {}; pad arms first",
                a.len(),
                first.len()
            )));
        }
        if a.delta() != base.delta() {
            return Err(Error::DeltaMismatch(a.delta().to_string(), base.delta().to_string()));
        }
    }
    for (i, a) in arms.iter().enumerate() {
        for (j, b) in arms.iter().enumerate().skip(i + 1) {
            let d = distance(space, a.last(), b.last())?;
            if d < *radius {
                return Err(Error::Precondition(format!(
                    "arms {i} and {j} end at {} and {}, distance {d} < R = {radius}",
                    a.last(),
                    b.last()
                )));
            }
        }
    }
    for path in std::iter::once(base).chain(arms) {
        if !crate::paths::validate_path(space, path.points(), path.delta())? {
            return Err(Error::Precondition(format!("{:?} is not a {}-path", path.points(), path.delta())));
        }
    }
    Ok(PingPongFamily { base: base.clone(), arms: arms.to_vec(), p, radius: *radius })
}

/// Pads arms to a common length by repeating their last point.
pub fn pad_arms(arms: &[DeltaPath]) -> Result<Vec<DeltaPath>> {
    let d = arms.iter().map(DeltaPath::len).max().unwrap_or(0);
    arms.iter().map(|a| a.pad_to(d)).collect()
}

/// A shortest δ-path from `a` to `b`, preferring lowest [`PointRef`] order,
/// found by breadth-first search over at most `point_cap` points.
pub fn delta_path_between(
    space: &dyn MetricSpace,
    a: PointRef,
    b: PointRef,
    delta: &Dist,
    point_cap: usize,
) -> Result<DeltaPath> {
    space.check_point(a)?;
    space.check_point(b)?;
    let succ = Successors::new(space, *delta)?;
    let mut parent: BTreeMap<PointRef, PointRef> = BTreeMap::from([(a, a)]);
    let mut frontier = vec![a];
    while !parent.contains_key(&b) {
        if frontier.is_empty() {
            return Err(Error::Disconnected);
        }
        let mut next = Vec::new();
        for &y in &frontier {
            for &z in succ.get(y)?.iter() {
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(z) {
                    e.insert(y);
                    next.push(z);
                }
            }
        }
        if parent.len() > point_cap {
            return Err(Error::Budget(format!("path search exceeds {point_cap} points")));
        }
        frontier = next;
    }
    let mut pts = vec![b];
    while *pts.last().expect("nonempty") != a {
        pts.push(parent[pts.last().expect("nonempty")]);
    }
    pts.reverse();
    DeltaPath::from_trusted(pts, *delta)
}

/// `k` evenly spaced samples `min(i·δ, len)` of a geodesic given as a point list.
fn sample_geodesic(geo: &[PointRef], delta: u64) -> Vec<PointRef> {
    let len = geo.len() as u64 - 1;
    let steps = len.div_ceil(delta);
    (0..=steps).map(|i| geo[(i * delta).min(len) as usize]).collect()
}

/// Base path and arms for the tree-decorated line: the base runs from 0 to
/// `x_{2R}` in `⌈x_{2R}/δ⌉` steps; one arm per level-`R` vertex of `T_{2R}`
/// goes down to the leftmost leaf below it in `⌈2R/δ⌉` steps.
pub fn tree_line_arms(space: &TreeLine, delta: u64, radius: u64) -> Result<(DeltaPath, Vec<DeltaPath>)> {
    if delta == 0 || radius == 0 {
        return Err(Error::Precondition("delta and R must be positive".into()));
    }
    let n = u32::try_from(2 * radius).map_err(|_| Error::Overflow)?;
    if n > 62 {
        return Err(Error::Precondition(format!("tree T_{n} too deep")));
    }
    let x = space.root(n).ok_or_else(|| Error::Budget(format!("tree_line: x_{n} outside window")))?;
    let d = Dist::int(delta as i64);
    let line: Vec<PointRef> = (0..=x as i64).map(PointRef::Int).collect();
    let base = DeltaPath::from_trusted(sample_geodesic(&line, delta), d)?;
    let mut arms = Vec::new();
    for y in (1u64 << radius)..(2u64 << radius) {
        let leaf = y << radius;
        let mut geo: Vec<u64> = (0..=n).map(|h| leaf >> (n - h)).collect();
        geo.dedup();
        let pts: Vec<PointRef> = geo.into_iter().map(|h| space.tree_vertex(n, h)).collect::<Result<_>>()?;
        arms.push(DeltaPath::from_trusted(sample_geodesic(&pts, delta), d)?);
    }
    Ok((base, arms))
}

/// Base path from the root to the depth-`k` vertex `(k, 0)` and one
/// length-1 arm to each of its `k + 2` children, all as 1-paths.
pub fn branch_tree_arms(space: &BranchTree, k: u32) -> Result<(DeltaPath, Vec<DeltaPath>)> {
    let one = Dist::int(1);
    let base_pts: Vec<PointRef> = (0..=k as i64).map(|n| PointRef::Pair(n, 0)).collect();
    let v = PointRef::Pair(k as i64, 0);
    let base = DeltaPath::new(space, base_pts, one)?;
    let arms = space
        .children(v)?
        .into_iter()
        .map(|c| DeltaPath::from_trusted(vec![v, c], one))
        .collect::<Result<_>>()?;
    Ok((base, arms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::orbit_distance_points;
    use crate::spaces::catalog::{BranchTreeParams, IntegerLine, TreeLineParams};

    #[test]
    fn single_arm_has_rate_zero() {
        let s = IntegerLine::with_window(50).unwrap();
        let base = DeltaPath::stationary(PointRef::Int(0), 2, Dist::int(1));
        let arm = delta_path_between(&s, PointRef::Int(0), PointRef::Int(3), &Dist::int(1), 1000).unwrap();
        let fam = pingpong_witness(&s, PointRef::Int(0), &base, &[arm], 2, &Dist::int(2)).unwrap();
        assert_eq!(fam.size(), Some(1));
        assert_eq!(fam.rate_bound(), 0.0);
        assert_eq!(fam.member(0).len(), 2 + 2 * 2 * 3 + 1);
    }

    #[test]
    fn members_are_paths_and_separated() {
        let s = IntegerLine::with_window(50).unwrap();
        let d = Dist::int(1);
        let base = DeltaPath::stationary(PointRef::Int(0), 1, d);
        let arms = pad_arms(&[
            delta_path_between(&s, PointRef::Int(0), PointRef::Int(-3), &d, 1000).unwrap(),
            delta_path_between(&s, PointRef::Int(0), PointRef::Int(3), &d, 1000).unwrap(),
            delta_path_between(&s, PointRef::Int(0), PointRef::Int(0), &d, 1000).unwrap(),
        ])
        .unwrap();
        let fam = pingpong_witness(&s, PointRef::Int(0), &base, &arms, 3, &Dist::int(3)).unwrap();
        let set = fam.to_orbit_set(100_000).unwrap();
        assert_eq!(set.len(), 27);
        for i in 0..set.len() {
            assert!(crate::paths::validate_path(&s, set.path(i), &d).unwrap());
            for j in i + 1..set.len() {
                assert!(orbit_distance_points(&s, set.path(i), set.path(j)).unwrap() >= Dist::int(3));
            }
        }
        assert!(fam.verify_separated(&s, 10_000, Exec::Sequential).unwrap());
    }

    #[test]
    fn close_arms_are_named() {
        let s = IntegerLine::with_window(50).unwrap();
        let d = Dist::int(1);
        let base = DeltaPath::stationary(PointRef::Int(0), 0, d);
        let arms = [
            delta_path_between(&s, PointRef::Int(0), PointRef::Int(2), &d, 100).unwrap(),
            delta_path_between(&s, PointRef::Int(0), PointRef::Int(-2), &d, 100).unwrap(),
            DeltaPath::new(&s, vec![0.into(), 1.into(), 1.into()], d).unwrap(),
        ];
        let err = pingpong_witness(&s, PointRef::Int(0), &base, &arms, 1, &Dist::int(3)).unwrap_err();
        assert!(err.to_string().contains("arms 0 and 2"), "{err}");
    }

    #[test]
    fn tree_line_family() {
        let s = TreeLine::new(TreeLineParams { window: 300, base: 2, schedule: None }).unwrap();
        let (base, arms) = tree_line_arms(&s, 2, 2).unwrap();
        assert_eq!(arms.len(), 4);
        assert_eq!(base.len(), 8);
        assert!(arms.iter().all(|a| a.len() == 2));
        let fam = pingpong_witness(&s, PointRef::Int(0), &base, &arms, 2, &Dist::int(2)).unwrap();
        assert!(fam.verify_separated(&s, 10_000, Exec::Sequential).unwrap());
        let expect = 2.0 * 2.0 * 2f64.ln() / (8.0 + 2.0 * 2.0 * 2.0);
        assert!((fam.rate_bound() - expect).abs() < 1e-12);
    }

    #[test]
    fn branch_tree_family() {
        let s = BranchTree::new(BranchTreeParams { max_depth: 8, measured: false }).unwrap();
        for k in 0..=4 {
            let (base, arms) = branch_tree_arms(&s, k).unwrap();
            assert_eq!(arms.len(), k as usize + 2);
            let fam = pingpong_witness(&s, PointRef::Pair(0, 0), &base, &arms, 2, &Dist::int(2)).unwrap();
            assert!(fam.verify_separated(&s, 10_000, Exec::Sequential).unwrap());
        }
    }
}
