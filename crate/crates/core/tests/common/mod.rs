#![allow(dead_code)]

pub mod toy;

use fedsched_core::{Edge, NodeId, SnapshotGraph, TemporalGraph};

pub fn n(i: u32) -> NodeId {
    NodeId(i)
}

pub fn snapshot(nodes: u32, edges: &[(u32, u32, f64)]) -> SnapshotGraph {
    snapshot_at(0, 0.0, 1e6, nodes, edges)
}

pub fn snapshot_at(window: u32, start: f64, len: f64, nodes: u32, edges: &[(u32, u32, f64)]) -> SnapshotGraph {
    let es = edges.iter().map(|&(u, v, b)| Edge::new(n(u), n(v), b, 1.0)).collect();
    SnapshotGraph::new(window, start, len, (0..nodes).map(n).collect(), es).unwrap()
}

pub fn single_window(nodes: u32, edges: &[(u32, u32, f64)]) -> TemporalGraph {
    TemporalGraph::new(vec![snapshot(nodes, edges)]).unwrap()
}

/// Every simple path from `src` to `dst`, as node sequences.
pub fn simple_paths(snap: &SnapshotGraph, src: NodeId, dst: NodeId) -> Vec<Vec<NodeId>> {
    fn dfs(snap: &SnapshotGraph, at: NodeId, dst: NodeId, stack: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if at == dst {
            out.push(stack.clone());
            return;
        }
        for e in snap.edges() {
            let next = if e.u == at {
                e.v
            } else if e.v == at {
                e.u
            } else {
                continue;
            };
            if stack.contains(&next) {
                continue;
            }
            stack.push(next);
            dfs(snap, next, dst, stack, out);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    if src != dst {
        dfs(snap, src, dst, &mut vec![src], &mut out);
    }
    out
}

pub fn path_bottleneck(snap: &SnapshotGraph, nodes: &[NodeId]) -> f64 {
    nodes.windows(2).map(|w| snap.edge_between(w[0], w[1]).unwrap().bandwidth_mbps).fold(f64::INFINITY, f64::min)
}

pub fn path_delay(snap: &SnapshotGraph, nodes: &[NodeId]) -> f64 {
    nodes.windows(2).map(|w| snap.edge_between(w[0], w[1]).unwrap().delay_ms).sum()
}
