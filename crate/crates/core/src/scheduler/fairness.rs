//! Max-min fair rate allocation by progressive filling.

use std::collections::BTreeMap;

use crate::ids::NodeId;
use crate::temporal_graph::{RoutePath, SnapshotGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub flow_id: u64,
    pub path: RoutePath,
}

/// Progressive filling over arbitrary capacity-limited resources.
///
/// `flows[i]` lists the resources flow `i` consumes; each must appear in
/// `capacities`. Every unfrozen flow is raised at the same pace until a
/// resource saturates; flows crossing a saturated resource freeze. Returns
/// rates in the order of `flows`. A flow touching no resource gets an
/// infinite rate.
pub fn progressive_fill<K: Ord + Clone>(capacities: &BTreeMap<K, f64>, flows: &[Vec<K>]) -> Vec<f64> {
    let keys: Vec<&K> = capacities.keys().collect();
    let mut remaining: Vec<f64> = capacities.values().copied().collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); keys.len()];
    for (f, links) in flows.iter().enumerate() {
        for l in links {
            let idx = keys.binary_search(&l).expect("flow uses a resource without capacity");
            members[idx].push(f);
        }
    }
    let mut active: Vec<usize> = members.iter().map(Vec::len).collect();
    let mut rates = vec![0.0; flows.len()];
    let mut frozen: Vec<bool> = flows.iter().map(|l| l.is_empty()).collect();
    for (f, links) in flows.iter().enumerate() {
        if links.is_empty() {
            rates[f] = f64::INFINITY;
        }
    }

    while frozen.iter().any(|&z| !z) {
        let inc = (0..keys.len())
            .filter(|&r| active[r] > 0)
            .map(|r| remaining[r].max(0.0) / active[r] as f64)
            .fold(f64::INFINITY, f64::min);
        for (f, rate) in rates.iter_mut().enumerate() {
            if !frozen[f] {
                *rate += inc;
            }
        }
        let mut saturated = Vec::new();
        for r in 0..keys.len() {
            if active[r] == 0 {
                continue;
            }
            let share = remaining[r].max(0.0) / active[r] as f64;
            remaining[r] -= inc * active[r] as f64;
            if share <= inc {
                remaining[r] = 0.0;
                saturated.push(r);
            }
        }
        for r in saturated {
            for &f in &members[r] {
                if !frozen[f] {
                    frozen[f] = true;
                    for l in &flows[f] {
                        let idx = keys.binary_search(&l).expect("known resource");
                        active[idx] -= 1;
                    }
                }
            }
        }
    }
    rates
}

/// Max-min fair rates for flows routed inside one snapshot. Each direction
/// of an edge is a separate resource with the edge's bandwidth.
pub fn max_min_rates(snapshot: &SnapshotGraph, flows: &[FlowSpec]) -> BTreeMap<u64, f64> {
    let mut capacities: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    let links: Vec<Vec<(NodeId, NodeId)>> = flows
        .iter()
        .map(|f| {
            f.path
                .directed_links()
                .map(|(a, b)| {
                    let e = snapshot.edge_between(a, b).expect("path edge exists in snapshot");
                    capacities.insert((a, b), e.bandwidth_mbps);
                    (a, b)
                })
                .collect()
        })
        .collect();
    let rates = progressive_fill(&capacities, &links);
    flows.iter().zip(rates).map(|(f, r)| (f.flow_id, r)).collect()
}
