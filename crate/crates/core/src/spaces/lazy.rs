//! Bounded shortest-path search over lazily generated weighted adjacency.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::dist::Dist;
use crate::error::Result;
use crate::point::PointRef;

/// Weighted adjacency of a (possibly infinite) locally finite graph.
pub(crate) trait Adjacency {
    /// Edges out of `v` whose weight is at most `max_weight`. May fail with a
    /// budget error when `v` sits on the window boundary.
    fn adjacent(&self, v: PointRef, max_weight: &Dist) -> Result<Vec<(PointRef, Dist)>>;

    /// Lower bound on every edge weight.
    fn min_weight(&self) -> Dist;
}

struct Entry {
    dist: Dist,
    point: PointRef,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // min-heap on (dist, point)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.compare(&self.dist).then_with(|| other.point.cmp(&self.point))
    }
}

/// All points within `radius` of `source`, with their exact distances.
pub(crate) fn bounded_dijkstra<A: Adjacency + ?Sized>(
    adj: &A,
    source: PointRef,
    radius: &Dist,
) -> Result<BTreeMap<PointRef, Dist>> {
    let mut settled: BTreeMap<PointRef, Dist> = BTreeMap::new();
    let mut best: BTreeMap<PointRef, Dist> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    let min_w = adj.min_weight();
    best.insert(source, Dist::ZERO);
    heap.push(Entry { dist: Dist::ZERO, point: source });
    while let Some(Entry { dist, point }) = heap.pop() {
        if settled.contains_key(&point) {
            continue;
        }
        settled.insert(point, dist);
        if dist.checked_add(&min_w)? > *radius {
            continue;
        }
        for (next, w) in adj.adjacent(point, radius)? {
            if settled.contains_key(&next) {
                continue;
            }
            let nd = dist.checked_add(&w)?;
            if nd > *radius {
                continue;
            }
            let improved = match best.get(&next) {
                Some(old) => nd < *old,
                None => true,
            };
            if improved {
                best.insert(next, nd);
                heap.push(Entry { dist: nd, point: next });
            }
        }
    }
    Ok(settled)
}

/// The finite weighted graph spanned by `points`, keeping only edges inside the set.
/// Test oracle for closed-form distances on ancestor- or geodesic-closed windows.
#[cfg(test)]
pub(crate) fn window_graph<A: Adjacency + ?Sized>(
    adj: &A,
    points: &[PointRef],
) -> Result<crate::spaces::GraphSpace> {
    let inside: std::collections::BTreeSet<PointRef> = points.iter().copied().collect();
    let mut edges = Vec::new();
    for &v in points {
        for (w, d) in adj.adjacent(v, &Dist::Infinite)? {
            if inside.contains(&w) {
                edges.push((v, w, d.exact().expect("exact weight")));
            }
        }
    }
    crate::spaces::build_weighted_graph(points, &edges)
}
