use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::catalog::{window_too_large, WINDOW_POINT_LIMIT};
use crate::spaces::lazy::{bounded_dijkstra, Adjacency};
use crate::spaces::{GrowthAnnotation, GrowthClass, GrowthQuantity, MetricSpace, SpaceFlags, SpaceKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeLineParams {
    /// Largest line coordinate.
    #[serde(default = "default_window")]
    pub window: u64,
    /// Geometric schedule `x_n = base^n`; ignored when `schedule` is given.
    #[serde(default = "default_base")]
    pub base: u64,
    /// Explicit attachment points `x_1 < x_2 < …`.
    #[serde(default)]
    pub schedule: Option<Vec<u64>>,
}

fn default_window() -> u64 {
    1 << 20
}

fn default_base() -> u64 {
    4
}

impl Default for TreeLineParams {
    fn default() -> Self {
        TreeLineParams { window: default_window(), base: default_base(), schedule: None }
    }
}

/// The half-line `0, 1, 2, …` with a full binary tree `T_n` of height `n`
/// glued by its root at `x_n`.
///
/// Non-root tree vertices are `Pair(n, h)` with heap index `2 ≤ h < 2^{n+1}`;
/// the root (heap index 1) is the line vertex `x_n`.
#[derive(Debug, Clone)]
pub struct TreeLine {
    window: u64,
    schedule: Vec<u64>,
    flags: SpaceFlags,
}

fn heap_depth(h: u64) -> u32 {
    63 - h.leading_zeros()
}

/// Distance between heap indices in a binary tree.
fn heap_distance(mut a: u64, mut b: u64) -> u64 {
    let mut d = 0;
    while heap_depth(a) > heap_depth(b) {
        a /= 2;
        d += 1;
    }
    while heap_depth(b) > heap_depth(a) {
        b /= 2;
        d += 1;
    }
    while a != b {
        a /= 2;
        b /= 2;
        d += 2;
    }
    d
}

impl TreeLine {
    pub fn new(params: TreeLineParams) -> Result<Self> {
        let schedule = match params.schedule {
            Some(s) => {
                if s.is_empty() {
                    return Err(Error::InvalidParams("tree_line: schedule is empty".into()));
                }
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParams("tree_line: schedule must be strictly increasing".into()));
                }
                s.into_iter().take_while(|&x| x <= params.window).collect()
            }
            None => {
                if params.base < 2 {
                    return Err(Error::InvalidParams("tree_line: base must be at least 2".into()));
                }
                let mut out = Vec::new();
                let mut x = params.base;
                while x <= params.window {
                    out.push(x);
                    x = match x.checked_mul(params.base) {
                        Some(v) => v,
                        None => break,
                    };
                }
                out
            }
        };
        if schedule.len() > 60 {
            return Err(Error::InvalidParams("tree_line: at most 60 trees fit the point encoding".into()));
        }
        Ok(TreeLine {
            window: params.window,
            schedule,
            flags: SpaceFlags {
                bounded_geometry: Some(true),
                degree_bound: Some(4),
                quasi_geodesic: Some(true),
                coarsely_bounded_geometry: Some(true),
                growth: Some(GrowthAnnotation {
                    quantity: GrowthQuantity::SupBall,
                    class: GrowthClass::Exponential,
                    formula: "sup_x |B(x,l)| ≥ 2^{l+1}-1 (ball at the root of T_n, n ≥ l)".into(),
                }),
                connected_from: Some(Dist::int(1)),
                ..SpaceFlags::default()
            },
        })
    }

    /// Attachment point `x_n` (1-based), if inside the window.
    pub fn root(&self, n: u32) -> Option<u64> {
        (n >= 1).then(|| self.schedule.get(n as usize - 1).copied()).flatten()
    }

    pub fn schedule(&self) -> &[u64] {
        &self.schedule
    }

    pub fn window_size(&self) -> u64 {
        self.window
    }

    /// Tree vertex of `T_n` with heap index `h` (index 1 is the root on the line).
    pub fn tree_vertex(&self, n: u32, h: u64) -> Result<PointRef> {
        let x = self.root(n).ok_or_else(|| Error::Budget(format!("tree_line: tree {n} outside window")))?;
        if h == 0 || heap_depth(h) > n {
            return Err(Error::InvalidParams(format!("tree_line: heap index {h} not in T_{n}")));
        }
        Ok(if h == 1 { PointRef::Int(x as i64) } else { PointRef::Pair(n as i64, h) })
    }

    /// Tree index whose root is at line coordinate `x`.
    fn tree_at(&self, x: u64) -> Option<u32> {
        self.schedule.binary_search(&x).ok().map(|i| i as u32 + 1)
    }

    fn locate(&self, p: PointRef) -> Result<Loc> {
        match p {
            PointRef::Int(i) if i >= 0 && (i as u64) <= self.window => Ok(Loc::Line(i as u64)),
            PointRef::Int(i) if i >= 0 => {
                Err(Error::Budget(format!("tree_line: {p} outside window 0..={}", self.window)))
            }
            PointRef::Pair(n, h) if n >= 1 && h >= 2 && heap_depth(h) as i64 <= n => match self.root(n as u32) {
                Some(_) => Ok(Loc::Tree(n as u32, h)),
                None if n <= 62 => Err(Error::Budget(format!("tree_line: {p} outside window"))),
                None => Err(Error::UnknownPoint(p)),
            },
            _ => Err(Error::UnknownPoint(p)),
        }
    }

    fn to_root(&self, l: Loc) -> (u64, u64) {
        match l {
            Loc::Line(i) => (i, 0),
            Loc::Tree(n, h) => (self.schedule[n as usize - 1], heap_depth(h) as u64),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Loc {
    Line(u64),
    Tree(u32, u64),
}

impl Adjacency for TreeLine {
    fn adjacent(&self, v: PointRef, _max_weight: &Dist) -> Result<Vec<(PointRef, Dist)>> {
        let one = Dist::int(1);
        let mut out = Vec::new();
        match self.locate(v)? {
            Loc::Line(i) => {
                if i > 0 {
                    out.push((PointRef::Int(i as i64 - 1), one));
                }
                if i == self.window {
                    return Err(Error::Budget(format!("tree_line: search reached window edge {}", self.window)));
                }
                out.push((PointRef::Int(i as i64 + 1), one));
                if let Some(n) = self.tree_at(i) {
                    out.push((PointRef::Pair(n as i64, 2), one));
                    out.push((PointRef::Pair(n as i64, 3), one));
                }
            }
            Loc::Tree(n, h) => {
                out.push((self.tree_vertex(n, h / 2)?, one));
                if heap_depth(h) < n {
                    out.push((PointRef::Pair(n as i64, 2 * h), one));
                    out.push((PointRef::Pair(n as i64, 2 * h + 1), one));
                }
            }
        }
        Ok(out)
    }

    fn min_weight(&self) -> Dist {
        Dist::int(1)
    }
}

impl MetricSpace for TreeLine {
    fn tag(&self) -> &str {
        "tree_line"
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
        if let (Loc::Tree(na, ha), Loc::Tree(nb, hb)) = (la, lb) {
            if na == nb {
                return Ok(Dist::int(heap_distance(ha, hb) as i64));
            }
        }
        let ((ra, da), (rb, db)) = (self.to_root(la), self.to_root(lb));
        Ok(Dist::int((da + ra.abs_diff(rb) + db) as i64))
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let found = bounded_dijkstra(self, x, delta)?;
        Ok(found.into_keys().filter(|&y| y != x).collect())
    }

    fn window(&self, depth: Option<u64>) -> Result<Vec<PointRef>> {
        let n = depth.map_or(self.window, |d| d.min(self.window));
        let trees: Vec<u32> = (1..=self.schedule.len() as u32).filter(|&t| self.schedule[t as usize - 1] <= n).collect();
        let count: u128 = n as u128 + 1 + trees.iter().map(|&t| (1u128 << (t + 1)) - 2).sum::<u128>();
        if count > WINDOW_POINT_LIMIT as u128 {
            return Err(window_too_large(self.tag(), count));
        }
        let mut out: Vec<PointRef> = (0..=n as i64).map(PointRef::Int).collect();
        for t in trees {
            out.extend((2..(1u64 << (t + 1))).map(|h| PointRef::Pair(t as i64, h)));
        }
        out.sort_unstable();
        Ok(out)
    }

    fn growth_basepoints(&self, _l_max: u64) -> Vec<PointRef> {
        let mut out = vec![PointRef::Int(0)];
        out.extend(self.schedule.iter().map(|&x| PointRef::Int(x as i64)));
        out
    }

    fn probe_points(&self, _depth: u64) -> Result<Vec<PointRef>> {
        Ok(self.growth_basepoints(0))
    }

    fn sample_pairs(&self) -> Vec<(PointRef, PointRef)> {
        let mut out = Vec::new();
        let mut d = 1u64;
        while d < self.window {
            out.push((PointRef::Int(0), PointRef::Int(d as i64)));
            d *= 2;
        }
        for (i, &x) in self.schedule.iter().enumerate().take(8) {
            let n = i as u32 + 1;
            out.push((PointRef::Int(0), PointRef::Pair(n as i64, 1u64 << n)));
            if x > 0 {
                out.push((PointRef::Pair(n as i64, (1u64 << (n + 1)) - 1), PointRef::Pair(n as i64, 1u64 << n)));
            }
        }
        out
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "window": self.window, "schedule": self.schedule })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::lazy::window_graph;
    use crate::spaces::{distance, find_triangle_violation};

    fn small() -> TreeLine {
        TreeLine::new(TreeLineParams { window: 80, base: 4, schedule: None }).unwrap()
    }

    #[test]
    fn default_schedule_and_tree_sizes() {
        let s = small();
        assert_eq!(s.schedule(), &[4, 16, 64]);
        let pts = s.window(None).unwrap();
        for n in 1..=3u32 {
            let tree = pts.iter().filter(|p| matches!(p, PointRef::Pair(t, _) if *t == n as i64)).count();
            // the root is the line vertex x_n
            assert_eq!(tree + 1, (1usize << (n + 1)) - 1);
        }
    }

    #[test]
    fn rejects_non_increasing_schedule() {
        let p = TreeLineParams { window: 100, base: 4, schedule: Some(vec![3, 3, 9]) };
        assert!(matches!(TreeLine::new(p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn closed_form_matches_bfs() {
        let s = small();
        let pts = s.window(Some(70)).unwrap();
        let g = window_graph(&s, &pts).unwrap();
        for (i, &a) in pts.iter().enumerate().step_by(4) {
            for &b in pts.iter().skip(i).step_by(7) {
                let oracle = g.distance(a, b).unwrap();
                assert_eq!(distance(&s, a, b).unwrap(), oracle, "{a} {b}");
            }
        }
    }

    #[test]
    fn triangle_inequality() {
        let s = TreeLine::new(TreeLineParams { window: 12, base: 3, schedule: None }).unwrap();
        let pts = s.window(None).unwrap();
        assert_eq!(find_triangle_violation(&s, &pts, false).unwrap(), None);
    }

    #[test]
    fn leaves_under_distinct_level_vertices_are_far_apart() {
        let s = small();
        // T_2 rooted at 16: leaves 4 and 6 sit under different level-1 vertices
        let a = s.tree_vertex(2, 4).unwrap();
        let b = s.tree_vertex(2, 6).unwrap();
        assert_eq!(distance(&s, a, b).unwrap(), Dist::int(4));
    }
}
