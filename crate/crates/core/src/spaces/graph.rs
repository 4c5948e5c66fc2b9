//! Finite graphs with the path metric and finite weighted graphs with the
//! weighted (infimal path weight) metric.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::io::Read;
use std::sync::Arc;

use parking_lot::Mutex;

use crate::dist::{parse_rational, Dist, Rational};
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::{MetricSpace, SpaceFlags, SpaceKind};

type Row = Arc<Vec<Option<Rational>>>;

#[derive(Debug)]
pub struct GraphSpace {
    tag: String,
    weighted: bool,
    vertices: Vec<PointRef>,
    index: HashMap<PointRef, usize>,
    adj: Vec<Vec<(usize, Rational)>>,
    labels: Option<Vec<String>>,
    flags: SpaceFlags,
    rows: Mutex<HashMap<usize, Row>>,
}

/// Unweighted graph on `points ∪ endpoints(edges)`. Duplicate edges are merged.
pub fn build_graph(points: &[PointRef], edges: &[(PointRef, PointRef)]) -> Result<GraphSpace> {
    let weighted: Vec<_> = edges.iter().map(|&(a, b)| (a, b, Rational::from_integer(1))).collect();
    GraphSpace::build(points, &weighted, false)
}

/// Weighted graph; all weights must be positive, and among parallel edges the minimum weight wins.
pub fn build_weighted_graph(points: &[PointRef], edges: &[(PointRef, PointRef, Rational)]) -> Result<GraphSpace> {
    GraphSpace::build(points, edges, true)
}

impl GraphSpace {
    fn build(points: &[PointRef], edges: &[(PointRef, PointRef, Rational)], weighted: bool) -> Result<Self> {
        let mut set: BTreeSet<PointRef> = points.iter().copied().collect();
        let mut merged: BTreeMap<(PointRef, PointRef), Rational> = BTreeMap::new();
        for &(a, b, w) in edges {
            if a == b {
                return Err(Error::LoopEdge(a));
            }
            if *w.numer() <= 0 {
                return Err(Error::NonPositiveWeight { a, b, weight: crate::dist::format_rational(&w) });
            }
            set.insert(a);
            set.insert(b);
            let key = if a < b { (a, b) } else { (b, a) };
            merged.entry(key).and_modify(|old| *old = (*old).min(w)).or_insert(w);
        }
        if set.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let vertices: Vec<PointRef> = set.into_iter().collect();
        let index: HashMap<PointRef, usize> = vertices.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut adj = vec![Vec::new(); vertices.len()];
        for (&(a, b), &w) in &merged {
            let (i, j) = (index[&a], index[&b]);
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(j, _)| j);
        }
        let degree_bound = adj.iter().map(Vec::len).max();
        let mut g = GraphSpace {
            tag: if weighted { "weighted-graph".into() } else { "graph".into() },
            weighted,
            vertices,
            index,
            adj,
            labels: None,
            flags: SpaceFlags {
                finite: true,
                bounded_components: true,
                bounded_geometry: Some(true),
                degree_bound,
                ..SpaceFlags::default()
            },
            rows: Mutex::new(HashMap::new()),
        };
        if g.is_connected() {
            g.flags.quasi_geodesic = Some(true);
            let max_w = merged.values().max().copied().unwrap_or_else(|| Rational::from_integer(1));
            g.flags.connected_from = Some(Dist::Exact(max_w));
        }
        Ok(g)
    }

    /// Fails with [`Error::Disconnected`] unless every pair of vertices is joined by a path.
    pub fn require_connected(self) -> Result<Self> {
        if self.is_connected() {
            Ok(self)
        } else {
            Err(Error::Disconnected)
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertices.len() {
            return Err(Error::LengthMismatch(labels.len(), self.vertices.len()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Marks the graph vertex-transitive. The caller vouches for it.
    pub fn assume_vertex_transitive(mut self) -> Self {
        self.flags.vertex_transitive = true;
        self
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn vertices(&self) -> &[PointRef] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, p: PointRef) -> Result<usize> {
        Ok(self.adj[self.idx(p)?].len())
    }

    /// Sorted edge list as vertex pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(PointRef, PointRef, Rational)> {
        let mut out = Vec::new();
        for (i, list) in self.adj.iter().enumerate() {
            for &(j, w) in list {
                if i < j {
                    out.push((self.vertices[i], self.vertices[j], w));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    fn idx(&self, p: PointRef) -> Result<usize> {
        self.index.get(&p).copied().ok_or(Error::UnknownPoint(p))
    }

    /// Single-source distances, bounded by `radius` when given.
    fn search(&self, source: usize, radius: Option<&Dist>) -> Vec<Option<Rational>> {
        let n = self.vertices.len();
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        if !self.weighted {
            // breadth-first search on hop counts
            dist[source] = Some(Rational::from_integer(0));
            let mut queue = VecDeque::from([source]);
            while let Some(v) = queue.pop_front() {
                let dv = dist[v].unwrap();
                let next = dv + Rational::from_integer(1);
                if let Some(r) = radius {
                    if Dist::Exact(next) > *r {
                        continue;
                    }
                }
                for &(w, _) in &self.adj[v] {
                    if dist[w].is_none() {
                        dist[w] = Some(next);
                        queue.push_back(w);
                    }
                }
            }
            return dist;
        }
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(Rational::from_integer(0));
        heap.push(Reverse((Rational::from_integer(0), source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for &(w, wt) in &self.adj[v] {
                let nd = d + wt;
                if let Some(r) = radius {
                    if Dist::Exact(nd) > *r {
                        continue;
                    }
                }
                if dist[w].map_or(true, |old| nd < old) {
                    dist[w] = Some(nd);
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        dist
    }

    fn row(&self, source: usize) -> Row {
        if let Some(r) = self.rows.lock().get(&source) {
            return Arc::clone(r);
        }
        let computed = Arc::new(self.search(source, None));
        self.rows.lock().entry(source).or_insert_with(|| Arc::clone(&computed));
        computed
    }
}

impl MetricSpace for GraphSpace {
    fn tag(&self) -> &str {
        &self.tag
    }

    fn kind(&self) -> SpaceKind {
        if self.weighted {
            SpaceKind::WeightedGraph
        } else {
            SpaceKind::Graph
        }
    }

    fn flags(&self) -> &SpaceFlags {
        &self.flags
    }

    fn basepoint(&self) -> PointRef {
        self.vertices[0]
    }

    fn check_point(&self, p: PointRef) -> Result<()> {
        self.idx(p).map(|_| ())
    }

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist> {
        let (i, j) = (self.idx(a)?, self.idx(b)?);
        Ok(match self.row(i)[j] {
            Some(q) => Dist::Exact(q),
            None => Dist::Infinite,
        })
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let i = self.idx(x)?;
        let found = self.search(i, Some(delta));
        Ok(found
            .iter()
            .enumerate()
            .filter(|&(j, d)| j != i && d.is_some())
            .map(|(j, _)| self.vertices[j])
            .collect())
    }

    fn window(&self, _depth: Option<u64>) -> Result<Vec<PointRef>> {
        Ok(self.vertices.clone())
    }

    fn growth_basepoints(&self, _l_max: u64) -> Vec<PointRef> {
        self.vertices.clone()
    }

    fn encode(&self, p: PointRef) -> serde_json::Value {
        match (&self.labels, self.index.get(&p)) {
            (Some(labels), Some(&i)) => serde_json::json!(labels[i]),
            _ => match p {
                PointRef::Int(v) => serde_json::json!(v),
                PointRef::Pair(a, b) => serde_json::json!([a, b]),
                PointRef::Support(m) => serde_json::json!(m),
            },
        }
    }
}

/// Parsed edge-list file: header `src,dst[,weight]`.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub edges: Vec<(PointRef, PointRef, Option<Rational>)>,
    /// Original labels indexed by vertex id, when labels were not all integers.
    pub labels: Option<Vec<String>>,
    pub weighted: bool,
}

impl EdgeList {
    pub fn into_graph(self) -> Result<GraphSpace> {
        let points: Vec<PointRef> = match &self.labels {
            Some(l) => (0..l.len() as i64).map(PointRef::Int).collect(),
            None => Vec::new(),
        };
        let g = if self.weighted {
            let edges: Vec<_> = self
                .edges
                .iter()
                .map(|&(a, b, w)| (a, b, w.unwrap_or_else(|| Rational::from_integer(1))))
                .collect();
            build_weighted_graph(&points, &edges)?
        } else {
            let edges: Vec<_> = self.edges.iter().map(|&(a, b, _)| (a, b)).collect();
            build_graph(&points, &edges)?
        };
        match self.labels {
            Some(l) => g.with_labels(l),
            None => Ok(g),
        }
    }
}

/// Reads a CSV edge list. Integer labels become `PointRef::Int` directly;
/// otherwise labels are numbered in sorted order. Weights may be decimal or `p/q`.
pub fn read_edge_csv<R: Read>(reader: R) -> Result<EdgeList> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let weighted = match names.as_slice() {
        ["src", "dst"] => false,
        ["src", "dst", "weight"] => true,
        _ => return Err(Error::Input(format!("expected header `src,dst[,weight]`, got `{}`", names.join(",")))),
    };
    let mut raw = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Input(e.to_string()))?;
        let src = record.get(0).unwrap_or_default().to_string();
        let dst = record.get(1).unwrap_or_default().to_string();
        let w = if weighted {
            let text = record
                .get(2)
                .ok_or_else(|| Error::Input(format!("row {}: missing weight", line + 2)))?;
            Some(parse_rational(text)?)
        } else {
            None
        };
        raw.push((src, dst, w));
    }
    let all_int = raw.iter().all(|(a, b, _)| a.parse::<i64>().is_ok() && b.parse::<i64>().is_ok());
    if all_int {
        let edges = raw
            .into_iter()
            .map(|(a, b, w)| (PointRef::Int(a.parse().unwrap()), PointRef::Int(b.parse().unwrap()), w))
            .collect();
        return Ok(EdgeList { edges, labels: None, weighted });
    }
    let labels: Vec<String> = raw
        .iter()
        .flat_map(|(a, b, _)| [a.clone(), b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ids: HashMap<&str, i64> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i as i64)).collect();
    let edges = raw
        .iter()
        .map(|(a, b, w)| (PointRef::Int(ids[a.as_str()]), PointRef::Int(ids[b.as_str()]), *w))
        .collect();
    Ok(EdgeList { edges, labels: Some(labels), weighted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{delta_neighbors, distance};

    fn p(v: i64) -> PointRef {
        PointRef::Int(v)
    }

    #[test]
    fn path_graph_distance() {
        let g = build_graph(&[], &[(p(0), p(1)), (p(1), p(2)), (p(2), p(3))]).unwrap();
        assert_eq!(distance(&g, p(0), p(3)).unwrap(), Dist::int(3));
        let g = build_graph(&[], &[(p(0), p(1)), (p(1), p(2))]).unwrap();
        assert_eq!(distance(&g, p(0), p(2)).unwrap(), Dist::int(2));
    }

    #[test]
    fn single_point_graph() {
        let g = build_graph(&[p(0)], &[]).unwrap();
        assert_eq!(distance(&g, p(0), p(0)).unwrap(), Dist::ZERO);
        assert!(g.is_connected());
    }

    #[test]
    fn four_cycle() {
        let g = build_graph(&[], &[(p(0), p(1)), (p(1), p(2)), (p(2), p(3)), (p(3), p(0))]).unwrap();
        assert_eq!(distance(&g, p(0), p(2)).unwrap(), Dist::int(2));
    }

    #[test]
    fn loop_edges_rejected() {
        assert_eq!(build_graph(&[], &[(p(1), p(1))]).unwrap_err(), Error::LoopEdge(p(1)));
    }

    #[test]
    fn duplicate_edges_merged() {
        let g = build_graph(&[], &[(p(0), p(1)), (p(1), p(0)), (p(0), p(1))]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn disconnected_components_are_infinitely_far() {
        let g = build_graph(&[], &[(p(0), p(1)), (p(5), p(6))]).unwrap();
        assert_eq!(distance(&g, p(0), p(6)).unwrap(), Dist::Infinite);
        assert_eq!(g.require_connected().unwrap_err(), Error::Disconnected);
    }

    #[test]
    fn weighted_triangle() {
        let q = |v| Rational::from_integer(v);
        let g = build_weighted_graph(&[], &[(p(0), p(1), q(1)), (p(1), p(2), q(1)), (p(0), p(2), q(3))]).unwrap();
        assert_eq!(distance(&g, p(0), p(2)).unwrap(), Dist::int(2));
    }

    #[test]
    fn weighted_half_edge_is_exact() {
        let g = build_weighted_graph(&[], &[(p(0), p(1), Rational::new(1, 2))]).unwrap();
        assert_eq!(distance(&g, p(0), p(1)).unwrap(), Dist::ratio(1, 2).unwrap());
    }

    #[test]
    fn parallel_routes_take_the_cheaper() {
        let q = |v| Rational::from_integer(v);
        let g = build_weighted_graph(&[], &[(p(0), p(1), q(5)), (p(0), p(9), q(1)), (p(9), p(1), q(1))]).unwrap();
        assert_eq!(distance(&g, p(0), p(1)).unwrap(), Dist::int(2));
    }

    #[test]
    fn minimum_weight_wins_on_duplicates() {
        let q = |v| Rational::from_integer(v);
        let g = build_weighted_graph(&[], &[(p(0), p(1), q(5)), (p(1), p(0), q(2))]).unwrap();
        assert_eq!(distance(&g, p(0), p(1)).unwrap(), Dist::int(2));
    }

    #[test]
    fn nonpositive_weight_rejected() {
        let err = build_weighted_graph(&[], &[(p(0), p(1), Rational::from_integer(0))]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { .. }));
    }

    #[test]
    fn bounded_neighbor_search() {
        let edges: Vec<_> = (0..10).map(|i| (p(i), p(i + 1))).collect();
        let g = build_graph(&[], &edges).unwrap();
        assert_eq!(delta_neighbors(&g, p(5), &Dist::int(1)).unwrap(), vec![p(4), p(6)]);
        assert_eq!(delta_neighbors(&g, p(5), &Dist::ratio(1, 2).unwrap()).unwrap(), vec![]);
    }

    #[test]
    fn csv_ingestion() {
        let text = "src,dst,weight\na,b,1/2\nb,c,0.25\n";
        let list = read_edge_csv(text.as_bytes()).unwrap();
        assert!(list.weighted);
        let g = list.into_graph().unwrap();
        assert_eq!(distance(&g, p(0), p(2)).unwrap(), Dist::ratio(3, 4).unwrap());
        assert_eq!(g.encode(p(2)), serde_json::json!("c"));

        let text = "src,dst\n3,4\n4,5\n";
        let g = read_edge_csv(text.as_bytes()).unwrap().into_graph().unwrap();
        assert_eq!(distance(&g, p(3), p(5)).unwrap(), Dist::int(2));

        assert!(read_edge_csv("from,to\n1,2\n".as_bytes()).is_err());
    }
}
