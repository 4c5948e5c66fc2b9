//! Maximum R-separated (packing) and minimum R-dense (covering) subsets of
//! finite metric collections.
//!
//! Separation is non-strict (`d ≥ R`) and density strict (`d < R`), so both
//! problems share the closeness predicate `d < R`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::paths::OrbitSet;
use crate::point::PointRef;
use crate::spaces::{distance, MetricSpace};

pub const DEFAULT_PACKING_LIMIT: usize = 40;
pub const DEFAULT_COVERING_LIMIT: usize = 32;

/// Above this many items the dense fallback switches from greedy cover to a greedy net.
pub const GREEDY_COVER_LIMIT: usize = 4096;

/// A finite indexed collection with a symmetric distance on index pairs.
pub trait MetricItems: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dist(&self, i: usize, j: usize) -> Result<Dist>;

    /// `d(i, j) < r`.
    fn closer_than(&self, i: usize, j: usize, r: &Dist) -> Result<bool> {
        Ok(i == j || self.dist(i, j)? < *r)
    }
}

/// Points of a space under its metric.
pub struct PointItems<'a> {
    space: &'a dyn MetricSpace,
    points: Vec<PointRef>,
}

impl<'a> PointItems<'a> {
    pub fn new(space: &'a dyn MetricSpace, points: Vec<PointRef>) -> Result<Self> {
        for &p in &points {
            space.check_point(p)?;
        }
        Ok(PointItems { space, points })
    }

    pub fn points(&self) -> &[PointRef] {
        &self.points
    }
}

impl MetricItems for PointItems<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, i: usize, j: usize) -> Result<Dist> {
        distance(self.space, self.points[i], self.points[j])
    }
}

/// Largest number of distinct points for which [`OrbitItems`] tabulates distances.
const ORBIT_TABLE_LIMIT: usize = 4096;

/// Members of an [`OrbitSet`] under the orbit distance `max_i d(u_i, v_i)`.
///
/// Distances between the distinct points occurring in the set are tabulated
/// once, so each orbit comparison is a table scan.
pub struct OrbitItems<'a> {
    space: &'a dyn MetricSpace,
    orbits: &'a OrbitSet,
    codes: Vec<u32>,
    distinct: Vec<PointRef>,
    table: Option<Vec<Dist>>,
}

impl<'a> OrbitItems<'a> {
    pub fn new(space: &'a dyn MetricSpace, orbits: &'a OrbitSet, exec: Exec) -> Result<Self> {
        let mut distinct: Vec<PointRef> = orbits.iter().flatten().copied().collect();
        distinct.sort_unstable();
        distinct.dedup();
        let codes = orbits
            .iter()
            .flatten()
            .map(|p| distinct.binary_search(p).expect("point collected above") as u32)
            .collect();
        let m = distinct.len();
        let table = if m <= ORBIT_TABLE_LIMIT {
            let rows = exec.try_map_range(m, |i| {
                (0..m).map(|j| distance(space, distinct[i], distinct[j])).collect::<Result<Vec<Dist>>>()
            })?;
            Some(rows.concat())
        } else {
            None
        };
        Ok(OrbitItems { space, orbits, codes, distinct, table })
    }

    pub fn orbits(&self) -> &OrbitSet {
        self.orbits
    }

    fn point_dist(&self, a: u32, b: u32) -> Result<Dist> {
        match &self.table {
            Some(t) => Ok(t[a as usize * self.distinct.len() + b as usize]),
            None => distance(self.space, self.distinct[a as usize], self.distinct[b as usize]),
        }
    }

    fn row(&self, i: usize) -> &[u32] {
        let s = self.orbits.n() + 1;
        &self.codes[i * s..(i + 1) * s]
    }
}

impl MetricItems for OrbitItems<'_> {
    fn len(&self) -> usize {
        self.orbits.len()
    }

    fn dist(&self, i: usize, j: usize) -> Result<Dist> {
        let mut best = Dist::ZERO;
        for (&a, &b) in self.row(i).iter().zip(self.row(j)) {
            if a != b {
                best = best.max(self.point_dist(a, b)?);
            }
        }
        Ok(best)
    }

    fn closer_than(&self, i: usize, j: usize, r: &Dist) -> Result<bool> {
        for (&a, &b) in self.row(i).iter().zip(self.row(j)) {
            if a != b && self.point_dist(a, b)? >= *r {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// An explicit symmetric distance matrix.
#[derive(Debug, Clone)]
pub struct MatrixItems {
    n: usize,
    matrix: Vec<Dist>,
}

impl MatrixItems {
    pub fn new(n: usize, matrix: Vec<Dist>) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::LengthMismatch(matrix.len(), n * n));
        }
        Ok(MatrixItems { n, matrix })
    }
}

impl MetricItems for MatrixItems {
    fn len(&self) -> usize {
        self.n
    }

    fn dist(&self, i: usize, j: usize) -> Result<Dist> {
        Ok(self.matrix[i * self.n + j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalKind {
    Separated,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    Exact,
    LowerBound,
    UpperBound,
}

impl Certificate {
    /// Certificate of a quantity derived from two inputs.
    pub fn combine(self, other: Certificate) -> Result<Certificate> {
        match (self, other) {
            (a, b) if a == b => Ok(a),
            (Certificate::Exact, b) | (b, Certificate::Exact) => Ok(b),
            _ => Err(Error::Precondition("cannot combine lower and upper bounds".into())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes: u64,
    /// Wall-clock time; not serialized so that reports stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalResult {
    pub kind: ExtremalKind,
    pub radius: Dist,
    pub selected: Vec<usize>,
    pub certificate: Certificate,
    pub stats: SolverStats,
}

impl ExtremalResult {
    pub fn size(&self) -> usize {
        self.selected.len()
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Self {
        let mut b = Bits::empty(n);
        for i in 0..n {
            b.insert(i);
        }
        b
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn first(&self) -> Option<usize> {
        self.0.iter().enumerate().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }
}

/// `close[i]` = items `j` (including `i`) with `d(i, j) < r`.
fn closeness<I: MetricItems + ?Sized>(items: &I, r: &Dist, exec: Exec) -> Result<Vec<Bits>> {
    let n = items.len();
    exec.try_map_range(n, |i| {
        let mut b = Bits::empty(n);
        for j in 0..n {
            if items.closer_than(i, j, r)? {
                b.insert(j);
            }
        }
        Ok(b)
    })
}

fn check_radius(r: &Dist) -> Result<()> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("radius must be positive, got {r}")))
    }
}

/// Maximum R-separated subset: exact branch and bound (max clique in the
/// "far apart" graph) up to `exact_limit` items, index-order greedy beyond.
pub fn max_separated<I: MetricItems + ?Sized>(
    items: &I,
    r: &Dist,
    exact_limit: usize,
    exec: Exec,
) -> Result<ExtremalResult> {
    check_radius(r)?;
    let start = Instant::now();
    let n = items.len();
    let close = closeness(items, r, exec)?;
    let (selected, certificate, nodes) = if n <= exact_limit {
        let far: Vec<Bits> = close.iter().map(|c| Bits::full(n).and_not(c)).collect();
        let mut solver = Clique { far: &far, best: greedy_separated(&close, n), nodes: 0 };
        solver.expand(&mut Vec::new(), Bits::full(n));
        let mut best = solver.best;
        best.sort_unstable();
        (best, Certificate::Exact, solver.nodes)
    } else {
        (greedy_separated(&close, n), Certificate::LowerBound, 0)
    };
    Ok(ExtremalResult {
        kind: ExtremalKind::Separated,
        radius: *r,
        selected,
        certificate,
        stats: SolverStats { nodes, elapsed: start.elapsed() },
    })
}

fn greedy_separated(close: &[Bits], n: usize) -> Vec<usize> {
    let mut blocked = Bits::empty(n);
    let mut out = Vec::new();
    for i in 0..n {
        if !blocked.contains(i) {
            out.push(i);
            for (k, w) in close[i].0.iter().enumerate() {
                blocked.0[k] |= w;
            }
        }
    }
    out
}

struct Clique<'a> {
    far: &'a [Bits],
    best: Vec<usize>,
    nodes: u64,
}

impl Clique<'_> {
    /// Greedy colouring of `p`: vertices in colour order with their colour numbers.
    fn colour(&self, p: &Bits) -> (Vec<usize>, Vec<usize>) {
        let mut rest = p.clone();
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut k = 0;
        while !rest.is_empty() {
            k += 1;
            let mut q = rest.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                q = q.and_not(&self.far[v]);
                rest.remove(v);
                order.push(v);
                colours.push(k);
            }
        }
        (order, colours)
    }

    fn expand(&mut self, chosen: &mut Vec<usize>, mut p: Bits) {
        self.nodes += 1;
        let (order, colours) = self.colour(&p);
        for idx in (0..order.len()).rev() {
            if chosen.len() + colours[idx] <= self.best.len() {
                return;
            }
            let v = order[idx];
            chosen.push(v);
            let np = p.and(&self.far[v]);
            if np.is_empty() {
                if chosen.len() > self.best.len() {
                    self.best = chosen.clone();
                }
            } else {
                self.expand(chosen, np);
            }
            chosen.pop();
            p.remove(v);
        }
    }
}

/// Minimum R-dense subset: exact branch and bound set cover up to
/// `exact_limit` items; greedy cover (or a greedy net for very large inputs) beyond.
pub fn min_dense<I: MetricItems + ?Sized>(
    items: &I,
    r: &Dist,
    exact_limit: usize,
    exec: Exec,
) -> Result<ExtremalResult> {
    check_radius(r)?;
    let start = Instant::now();
    let n = items.len();
    let close = closeness(items, r, exec)?;
    let (selected, certificate, nodes) = if n == 0 {
        (Vec::new(), Certificate::Exact, 0)
    } else if n <= exact_limit {
        let mut solver = Cover { close: &close, best: greedy_cover(&close, n), nodes: 0 };
        solver.search(&mut Vec::new(), Bits::full(n));
        let mut best = solver.best;
        best.sort_unstable();
        (best, Certificate::Exact, solver.nodes)
    } else if n <= GREEDY_COVER_LIMIT {
        (greedy_cover(&close, n), Certificate::UpperBound, 0)
    } else {
        (greedy_separated(&close, n), Certificate::UpperBound, 0)
    };
    Ok(ExtremalResult {
        kind: ExtremalKind::Dense,
        radius: *r,
        selected,
        certificate,
        stats: SolverStats { nodes, elapsed: start.elapsed() },
    })
}

fn greedy_cover(close: &[Bits], n: usize) -> Vec<usize> {
    let mut uncovered = Bits::full(n);
    let mut out = Vec::new();
    while !uncovered.is_empty() {
        let mut best = (0, usize::MAX);
        for (i, c) in close.iter().enumerate() {
            let gain = c.and(&uncovered).count();
            if gain > best.0 {
                best = (gain, i);
            }
        }
        out.push(best.1);
        uncovered = uncovered.and_not(&close[best.1]);
    }
    out.sort_unstable();
    out
}

struct Cover<'a> {
    close: &'a [Bits],
    best: Vec<usize>,
    nodes: u64,
}

impl Cover<'_> {
    fn search(&mut self, chosen: &mut Vec<usize>, uncovered: Bits) {
        self.nodes += 1;
        if uncovered.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        if chosen.len() + 1 >= self.best.len() {
            return;
        }
        let gains: Vec<usize> = self.close.iter().map(|c| c.and(&uncovered).count()).collect();
        let max_gain = *gains.iter().max().expect("nonempty");
        if chosen.len() + uncovered.count().div_ceil(max_gain) >= self.best.len() {
            return;
        }
        // branch on the uncovered item with the fewest candidates covering it
        let mut pivot = (usize::MAX, 0);
        for e in uncovered.iter() {
            let k = self.close[e].count();
            if k < pivot.0 {
                pivot = (k, e);
            }
        }
        let mut cands: Vec<usize> = self.close[pivot.1].iter().collect();
        cands.sort_by_key(|&c| (std::cmp::Reverse(gains[c]), c));
        for c in cands {
            chosen.push(c);
            self.search(chosen, uncovered.and_not(&self.close[c]));
            chosen.pop();
        }
    }
}

/// Pairwise distances of `selected` are all at least `r`.
pub fn check_separated<I: MetricItems + ?Sized>(items: &I, selected: &[usize], r: &Dist) -> Result<bool> {
    for (a, &i) in selected.iter().enumerate() {
        for &j in &selected[a + 1..] {
            if i == j || items.closer_than(i, j, r)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every item is within distance `< r` of some selected item.
pub fn check_dense<I: MetricItems + ?Sized>(items: &I, selected: &[usize], r: &Dist) -> Result<bool> {
    for j in 0..items.len() {
        let mut hit = false;
        for &i in selected {
            if items.closer_than(i, j, r)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Maximal `s`-separated subset of `window`, greedy with the window's first
/// point first and the rest in [`PointRef`] order. Maximality makes it `s`-dense.
pub fn greedy_net(space: &dyn MetricSpace, window: &[PointRef], s: &Dist) -> Result<Vec<PointRef>> {
    check_radius(s)?;
    let (&first, rest) = window.split_first().ok_or(Error::EmptyWindow)?;
    let mut order: Vec<PointRef> = rest.iter().copied().filter(|&p| p != first).collect();
    order.sort_unstable();
    order.dedup();
    let mut net = vec![first];
    space.check_point(first)?;
    for p in order {
        let mut ok = true;
        for &q in &net {
            if distance(space, p, q)? < *s {
                ok = false;
                break;
            }
        }
        if ok {
            net.push(p);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::catalog::IntegerLine;

    fn interval(n: i64) -> (IntegerLine, Vec<PointRef>) {
        (IntegerLine::with_window(1000).unwrap(), (0..n).map(PointRef::Int).collect())
    }

    #[test]
    fn packing_on_interval() {
        let (s, pts) = interval(11);
        let items = PointItems::new(&s, pts).unwrap();
        let res = max_separated(&items, &Dist::int(3), 40, Exec::Sequential).unwrap();
        assert_eq!(res.size(), 4);
        assert_eq!(res.certificate, Certificate::Exact);
        assert!(check_separated(&items, &res.selected, &Dist::int(3)).unwrap());
        let all = max_separated(&items, &Dist::int(1), 40, Exec::Sequential).unwrap();
        assert_eq!(all.size(), 11);
        let greedy = max_separated(&items, &Dist::int(3), 5, Exec::Sequential).unwrap();
        assert_eq!(greedy.certificate, Certificate::LowerBound);
        assert_eq!(greedy.selected, vec![0, 3, 6, 9]);
    }

    #[test]
    fn covering_on_interval() {
        let (s, pts) = interval(11);
        let items = PointItems::new(&s, pts).unwrap();
        let res = min_dense(&items, &Dist::int(3), 25, Exec::Sequential).unwrap();
        assert_eq!(res.size(), 3);
        assert!(check_dense(&items, &res.selected, &Dist::int(3)).unwrap());
        let one = min_dense(&items, &Dist::int(11), 25, Exec::Sequential).unwrap();
        assert_eq!(one.size(), 1);
    }

    #[test]
    fn singleton() {
        let (s, _) = interval(1);
        let items = PointItems::new(&s, vec![PointRef::Int(0)]).unwrap();
        for r in [1, 5, 100] {
            assert_eq!(max_separated(&items, &Dist::int(r), 40, Exec::Sequential).unwrap().size(), 1);
            assert_eq!(min_dense(&items, &Dist::int(r), 25, Exec::Sequential).unwrap().size(), 1);
        }
    }

    #[test]
    fn nets() {
        let (s, pts) = interval(10);
        let net = greedy_net(&s, &pts, &Dist::int(3)).unwrap();
        assert_eq!(net, vec![PointRef::Int(0), PointRef::Int(3), PointRef::Int(6), PointRef::Int(9)]);
        assert_eq!(greedy_net(&s, &pts, &Dist::int(20)).unwrap(), vec![PointRef::Int(0)]);
        assert!(matches!(greedy_net(&s, &[], &Dist::int(1)), Err(Error::EmptyWindow)));
    }

    #[test]
    fn modes_agree() {
        let (s, pts) = interval(30);
        let items = PointItems::new(&s, pts).unwrap();
        for r in 1..6 {
            let a = max_separated(&items, &Dist::int(r), 40, Exec::Sequential).unwrap();
            let b = max_separated(&items, &Dist::int(r), 40, Exec::Parallel).unwrap();
            assert_eq!(a.selected, b.selected);
        }
    }
}
