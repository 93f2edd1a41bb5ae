//! Discrete temporal graph: an ordered sequence of equal-length network
//! snapshots with bandwidth/delay annotated edges, plus single-snapshot
//! routing (widest path and minimum-delay path).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::NodeId;

/// An undirected link available during one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub bandwidth_mbps: f64,
    pub delay_ms: f64,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId, bandwidth_mbps: f64, delay_ms: f64) -> Self {
        Self { u, v, bandwidth_mbps, delay_ms }
    }

    /// Endpoints in ascending id order.
    pub fn key(&self) -> (NodeId, NodeId) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Criterion used to pick a single route inside a snapshot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMetric {
    /// Maximize the bottleneck bandwidth.
    #[default]
    Widest,
    /// Minimize the summed propagation delay.
    MinDelay,
}

/// The network during one window `[window_start_s, window_start_s + window_length_s)`.
///
/// Immutable once built; adjacency is indexed at construction so routing
/// queries never allocate more than their own frontier.
#[derive(Debug, Clone)]
pub struct SnapshotGraph {
    window_index: u32,
    window_start_s: f64,
    window_length_s: f64,
    vertices: Vec<NodeId>,
    edges: Vec<Edge>,
    // per vertex index: (neighbour index, edge index), sorted by neighbour id
    adjacency: Vec<Vec<(usize, usize)>>,
    edge_index: HashMap<(NodeId, NodeId), usize>,
}

impl PartialEq for SnapshotGraph {
    fn eq(&self, other: &Self) -> bool {
        self.window_index == other.window_index
            && self.window_start_s.to_bits() == other.window_start_s.to_bits()
            && self.window_length_s.to_bits() == other.window_length_s.to_bits()
            && self.vertices == other.vertices
            && self.edges == other.edges
    }
}

impl SnapshotGraph {
    /// Builds a snapshot, checking the edge invariants: positive bandwidth,
    /// non-negative delay, known endpoints, no self-loops and at most one
    /// edge per unordered pair.
    pub fn new(
        window_index: u32,
        window_start_s: f64,
        window_length_s: f64,
        mut vertices: Vec<NodeId>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if !(window_length_s > 0.0) || !window_length_s.is_finite() {
            return Err(Error::invalid("window_length_s", "must be positive and finite"));
        }
        vertices.sort_unstable();
        vertices.dedup();
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.u == e.v {
                return Err(Error::invalid("edges", format!("self-loop at {}", e.u)));
            }
            if !(e.bandwidth_mbps > 0.0) || !e.bandwidth_mbps.is_finite() {
                return Err(Error::invalid(
                    "edges",
                    format!("bandwidth of {}-{} must be positive", e.u, e.v),
                ));
            }
            if !(e.delay_ms >= 0.0) || !e.delay_ms.is_finite() {
                return Err(Error::invalid(
                    "edges",
                    format!("delay of {}-{} must be non-negative", e.u, e.v),
                ));
            }
            let (a, b) = e.key();
            let ia = vertices
                .binary_search(&a)
                .map_err(|_| Error::invalid("edges", format!("unknown vertex {a}")))?;
            let ib = vertices
                .binary_search(&b)
                .map_err(|_| Error::invalid("edges", format!("unknown vertex {b}")))?;
            if edge_index.insert((a, b), i).is_some() {
                return Err(Error::invalid("edges", format!("duplicate edge {a}-{b}")));
            }
            adjacency[ia].push((ib, i));
            adjacency[ib].push((ia, i));
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|&(n, _)| n);
        }
        Ok(Self {
            window_index,
            window_start_s,
            window_length_s,
            vertices,
            edges,
            adjacency,
            edge_index,
        })
    }

    pub fn window_index(&self) -> u32 {
        self.window_index
    }

    pub fn window_start_s(&self) -> f64 {
        self.window_start_s
    }

    pub fn window_length_s(&self) -> f64 {
        self.window_length_s
    }

    pub fn window_end_s(&self) -> f64 {
        self.window_start_s + self.window_length_s
    }

    pub fn vertices(&self) -> &[NodeId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.vertices.binary_search(&n).is_ok()
    }

    /// Looks up the edge between `a` and `b` in either orientation.
    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<&Edge> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.edge_index.get(&key).map(|&i| &self.edges[i])
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.index_of(n).map_or(0, |i| self.adjacency[i].len())
    }

    /// Copy of this snapshot without the edge between `a` and `b`.
    pub fn without_edge(&self, a: NodeId, b: NodeId) -> Self {
        let key = if a <= b { (a, b) } else { (b, a) };
        let edges = self.edges.iter().copied().filter(|e| e.key() != key).collect();
        Self::new(
            self.window_index,
            self.window_start_s,
            self.window_length_s,
            self.vertices.clone(),
            edges,
        )
        .expect("subgraph of a valid snapshot is valid")
    }

    fn index_of(&self, n: NodeId) -> Option<usize> {
        self.vertices.binary_search(&n).ok()
    }

    fn check_endpoints(&self, src: NodeId, dst: NodeId) -> Result<(usize, usize)> {
        if src == dst {
            return Err(Error::invalid("route", format!("source equals destination ({src})")));
        }
        let s = self
            .index_of(src)
            .ok_or_else(|| Error::invalid("route", format!("{src} not in snapshot")))?;
        let d = self
            .index_of(dst)
            .ok_or_else(|| Error::invalid("route", format!("{dst} not in snapshot")))?;
        Ok((s, d))
    }

    fn no_route(&self, src: NodeId, dst: NodeId) -> Error {
        Error::NoRoute { src, dst, window: self.window_index }
    }

    /// Simple path maximizing the bottleneck bandwidth.
    ///
    /// Among all paths attaining the optimal bottleneck, the one with fewest
    /// hops is returned, then the lexicographically smallest node sequence.
    /// The optimum is found with a max-heap variant of Dijkstra; the
    /// tie-breaking runs a BFS on the subgraph of edges at least as wide as
    /// the optimum, then walks greedily from the source to the smallest
    /// neighbour that is one hop closer to the destination.
    pub fn widest_path(&self, src: NodeId, dst: NodeId) -> Result<RoutePath> {
        let (s, d) = self.check_endpoints(src, dst)?;
        let n = self.vertices.len();

        let mut width = vec![f64::NEG_INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        width[s] = f64::INFINITY;
        heap.push(WidthEntry { width: f64::INFINITY, node: s });
        while let Some(WidthEntry { width: w, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            if node == d {
                break;
            }
            for &(next, ei) in &self.adjacency[node] {
                let cand = w.min(self.edges[ei].bandwidth_mbps);
                if !done[next] && cand > width[next] {
                    width[next] = cand;
                    heap.push(WidthEntry { width: cand, node: next });
                }
            }
        }
        if !done[d] {
            return Err(self.no_route(src, dst));
        }
        let best = width[d];

        // hop distance to dst over edges with bandwidth >= best
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        dist[d] = 0;
        queue.push_back(d);
        while let Some(node) = queue.pop_front() {
            if node == s {
                break;
            }
            for &(next, ei) in &self.adjacency[node] {
                if dist[next] == usize::MAX && self.edges[ei].bandwidth_mbps >= best {
                    dist[next] = dist[node] + 1;
                    queue.push_back(next);
                }
            }
        }
        debug_assert!(dist[s] != usize::MAX);

        let mut nodes = vec![src];
        let mut edges = Vec::with_capacity(dist[s]);
        let mut cur = s;
        while cur != d {
            let (next, ei) = self.adjacency[cur]
                .iter()
                .copied()
                .find(|&(next, ei)| {
                    dist[next] != usize::MAX
                        && dist[next] + 1 == dist[cur]
                        && self.edges[ei].bandwidth_mbps >= best
                })
                .expect("BFS layer has a successor");
            nodes.push(self.vertices[next]);
            edges.push(self.edges[ei]);
            cur = next;
        }
        Ok(RoutePath::from_parts(self.window_index, nodes, edges))
    }

    /// Simple path minimizing total propagation delay. Ties go to the
    /// smaller predecessor id, so results are deterministic.
    pub fn min_delay_path(&self, src: NodeId, dst: NodeId) -> Result<RoutePath> {
        let (s, d) = self.check_endpoints(src, dst)?;
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(DelayEntry { delay: 0.0, node: s });
        while let Some(DelayEntry { delay, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            if node == d {
                break;
            }
            for &(next, ei) in &self.adjacency[node] {
                if done[next] {
                    continue;
                }
                let cand = delay + self.edges[ei].delay_ms;
                let better = cand < dist[next]
                    || (cand == dist[next] && pred[next].is_some_and(|(p, _)| node < p));
                if better {
                    dist[next] = cand;
                    pred[next] = Some((node, ei));
                    heap.push(DelayEntry { delay: cand, node: next });
                }
            }
        }
        if !done[d] {
            return Err(self.no_route(src, dst));
        }
        let mut nodes = vec![self.vertices[d]];
        let mut edges = Vec::new();
        let mut cur = d;
        while let Some((p, ei)) = pred[cur] {
            nodes.push(self.vertices[p]);
            edges.push(self.edges[ei]);
            cur = p;
        }
        nodes.reverse();
        edges.reverse();
        Ok(RoutePath::from_parts(self.window_index, nodes, edges))
    }

    pub fn route(&self, metric: PathMetric, src: NodeId, dst: NodeId) -> Result<RoutePath> {
        match metric {
            PathMetric::Widest => self.widest_path(src, dst),
            PathMetric::MinDelay => self.min_delay_path(src, dst),
        }
    }

    /// Checks that `path` is a simple path of this snapshot whose recorded
    /// edges (including bandwidths) match the graph.
    pub fn check_path(&self, path: &RoutePath) -> std::result::Result<(), String> {
        if path.window_index != self.window_index {
            return Err(format!(
                "path belongs to window {}, snapshot is {}",
                path.window_index, self.window_index
            ));
        }
        if path.edges.is_empty() || path.nodes.len() != path.edges.len() + 1 {
            return Err("path nodes and edges are inconsistent".into());
        }
        let mut seen = path.nodes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != path.nodes.len() {
            return Err("path repeats a node".into());
        }
        for (i, e) in path.edges.iter().enumerate() {
            let (a, b) = (path.nodes[i], path.nodes[i + 1]);
            if e.key() != Edge::new(a, b, 1.0, 0.0).key() {
                return Err(format!("edge {i} does not join {a} and {b}"));
            }
            match self.edge_between(a, b) {
                Some(g) if g.bandwidth_mbps == e.bandwidth_mbps && g.delay_ms == e.delay_ms => {}
                Some(_) => return Err(format!("edge {a}-{b} attributes differ from snapshot")),
                None => return Err(format!("edge {a}-{b} absent from snapshot")),
            }
        }
        let bn = bottleneck(&path.edges).map_err(|e| e.to_string())?;
        if bn != path.bottleneck_mbps {
            return Err("recorded bottleneck differs from edge minimum".into());
        }
        Ok(())
    }
}

#[derive(PartialEq)]
struct WidthEntry {
    width: f64,
    node: usize,
}

impl Eq for WidthEntry {}

impl Ord for WidthEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .total_cmp(&other.width)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for WidthEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(PartialEq)]
struct DelayEntry {
    delay: f64,
    node: usize,
}

impl Eq for DelayEntry {}

impl Ord for DelayEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .delay
            .total_cmp(&self.delay)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for DelayEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// End-to-end route inside one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePath {
    pub window_index: u32,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
    pub bottleneck_mbps: f64,
    pub total_delay_ms: f64,
}

impl RoutePath {
    /// Assembles a path from consecutive edges; `edges` must be non-empty.
    pub fn from_parts(window_index: u32, nodes: Vec<NodeId>, edges: Vec<Edge>) -> Self {
        let bottleneck_mbps = bottleneck(&edges).expect("route has at least one edge");
        let total_delay_ms = edges.iter().map(|e| e.delay_ms).sum();
        Self { window_index, nodes, edges, bottleneck_mbps, total_delay_ms }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().expect("non-empty path")
    }

    pub fn hops(&self) -> usize {
        self.edges.len()
    }

    /// Directed links traversed, as `(from, to)` pairs.
    pub fn directed_links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Minimum bandwidth over the edges of a path.
pub fn bottleneck(edges: &[Edge]) -> Result<f64> {
    edges
        .iter()
        .map(|e| e.bandwidth_mbps)
        .reduce(f64::min)
        .ok_or(Error::EmptyPath)
}

/// Ordered, gap-free sequence of equal-length snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    snapshots: Vec<SnapshotGraph>,
    window_length_s: f64,
}

impl TemporalGraph {
    pub fn new(snapshots: Vec<SnapshotGraph>) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::invalid("snapshots", "temporal graph needs at least one window"))?;
        let window_length_s = first.window_length_s;
        for (i, s) in snapshots.iter().enumerate() {
            if s.window_index as usize != i {
                return Err(Error::invalid(
                    "snapshots",
                    format!("expected window {i}, found {}", s.window_index),
                ));
            }
            if s.window_length_s != window_length_s {
                return Err(Error::invalid("snapshots", "window lengths differ"));
            }
            let expected_start = i as f64 * window_length_s;
            if (s.window_start_s - expected_start).abs() > 1e-9 * expected_start.max(1.0) {
                return Err(Error::invalid(
                    "snapshots",
                    format!("window {i} starts at {} s, expected {expected_start}", s.window_start_s),
                ));
            }
        }
        Ok(Self { snapshots, window_length_s })
    }

    pub fn snapshots(&self) -> &[SnapshotGraph] {
        &self.snapshots
    }

    pub fn window_length_s(&self) -> f64 {
        self.window_length_s
    }

    pub fn num_windows(&self) -> usize {
        self.snapshots.len()
    }

    pub fn horizon_s(&self) -> f64 {
        self.snapshots.len() as f64 * self.window_length_s
    }

    pub fn window(&self, index: u32) -> Option<&SnapshotGraph> {
        self.snapshots.get(index as usize)
    }

    /// Snapshot whose half-open interval contains `time_s`.
    pub fn snapshot_at(&self, time_s: f64) -> Result<&SnapshotGraph> {
        let horizon_s = self.horizon_s();
        if !(time_s >= 0.0) || time_s >= horizon_s {
            return Err(Error::OutOfHorizon { time_s, horizon_s });
        }
        let mut idx = (time_s / self.window_length_s).floor() as usize;
        // guard against rounding at window boundaries
        idx = idx.min(self.snapshots.len() - 1);
        while idx > 0 && time_s < self.snapshots[idx].window_start_s {
            idx -= 1;
        }
        while idx + 1 < self.snapshots.len() && time_s >= self.snapshots[idx + 1].window_start_s {
            idx += 1;
        }
        Ok(&self.snapshots[idx])
    }
}
