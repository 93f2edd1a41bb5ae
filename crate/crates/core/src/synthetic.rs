//! Seeded toy instances for fuzzing, acceptance checks and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fl_task::{model_catalog, ClientSpec, FlTask, ModelSpec};
use crate::ids::{ClientId, NodeId};
use crate::temporal_graph::{Edge, SnapshotGraph, TemporalGraph};

/// One temporal graph plus a task on it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: TemporalGraph,
    pub task: FlTask,
}

/// Upper bound on a round's makespan under either policy: every route has
/// bottleneck at least `min_mbps` and at most `clients` flows share a link,
/// so each transfer phase drains within `clients * bits / min_mbps`.
pub fn round_time_bound(model: &ModelSpec, clients: usize, min_mbps: f64, max_multiplier: f64) -> f64 {
    let per_transfer = model.size_megabits() / min_mbps;
    2.0 * clients as f64 * per_transfer + model.training_time_s * max_multiplier + 1.0
}

fn random_model(rng: &mut ChaCha8Rng) -> ModelSpec {
    let catalog = model_catalog();
    if rng.random_bool(0.8) {
        catalog[rng.random_range(0..catalog.len())].clone()
    } else {
        ModelSpec {
            name: "custom".into(),
            size_mb: rng.random_range(0.5..60.0),
            training_time_s: rng.random_range(1.0..400.0),
        }
    }
}

fn connected_edges(rng: &mut ChaCha8Rng, nodes: u32, extra: usize) -> Vec<(NodeId, NodeId)> {
    let mut order: Vec<u32> = (0..nodes).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 1..order.len() {
        let parent = order[rng.random_range(0..i)];
        pairs.push((NodeId(order[i]), NodeId(parent)));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a != b {
            pairs.push((NodeId(a), NodeId(b)));
        }
    }
    let mut keyed: Vec<(NodeId, NodeId)> = pairs.into_iter().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
    keyed.sort_unstable();
    keyed.dedup();
    keyed
}

fn windows_with(
    rng: &mut ChaCha8Rng,
    nodes: u32,
    pairs: &[(NodeId, NodeId)],
    num_windows: u32,
    window_length_s: f64,
    bandwidth: impl Fn(&mut ChaCha8Rng, NodeId, NodeId) -> f64,
) -> TemporalGraph {
    let vertices: Vec<NodeId> = (0..nodes).map(NodeId).collect();
    let snapshots = (0..num_windows)
        .map(|w| {
            let edges = pairs
                .iter()
                .map(|&(a, b)| {
                    let bw = bandwidth(rng, a, b);
                    Edge::new(a, b, bw, rng.random_range(1.0..20.0))
                })
                .collect();
            SnapshotGraph::new(w, w as f64 * window_length_s, window_length_s, vertices.clone(), edges)
                .expect("generated snapshot is valid")
        })
        .collect();
    TemporalGraph::new(snapshots).expect("generated windows are contiguous")
}

/// Random connected graph with 4–30 nodes, 1–8 clients, bandwidths
/// `U[10, 30]` redrawn in each of 1–3 windows, random model and training
/// multipliers in `[0, 2]`. Node 0 is the server.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = rng.random_range(4..=30u32);
    let clients = rng.random_range(1..=8usize.min(nodes as usize - 1));
    let extra = rng.random_range(0..=2 * nodes as usize);
    let pairs = connected_edges(&mut rng, nodes, extra);
    let model = random_model(&mut rng);

    let mut sites: Vec<u32> = (1..nodes).collect();
    sites.shuffle(&mut rng);
    let specs: Vec<ClientSpec> = sites[..clients]
        .iter()
        .enumerate()
        .map(|(i, &s)| ClientSpec {
            id: ClientId(i as u32 + 1),
            site: NodeId(s),
            training_multiplier: if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.2..2.0) },
        })
        .collect();
    let task = FlTask::new(NodeId(0), specs, model.clone()).expect("valid task");

    let num_windows = rng.random_range(1..=3u32);
    let window = round_time_bound(&model, clients, 10.0, 2.0);
    // windows split the bound so later uploads land in later snapshots
    let window_length_s = (window / num_windows as f64).max(1.0) * 1.01;
    let graph = windows_with(&mut rng, nodes, &pairs, num_windows.max(1) + 1, window_length_s, |r, _, _| {
        r.random_range(10.0..=30.0)
    });
    Instance { graph, task }
}

/// Every client route crosses the server's single access link, which is
/// strictly narrower than any other link. One window.
pub fn shared_bottleneck_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let relays = rng.random_range(2..=12u32);
    let clients = rng.random_range(1..=8usize);
    let nodes = 2 + relays + clients as u32;
    let access = rng.random_range(10.0..20.0);
    let hub = NodeId(1);

    // server 0 - hub 1; relays 2..; clients after relays
    let mut pairs = vec![(NodeId(0), hub)];
    let relay_ids: Vec<u32> = (2..2 + relays).collect();
    for &r in &relay_ids {
        pairs.push((hub, NodeId(r)));
    }
    for _ in 0..relays {
        let a = relay_ids[rng.random_range(0..relay_ids.len())];
        let b = relay_ids[rng.random_range(0..relay_ids.len())];
        if a != b {
            pairs.push((NodeId(a.min(b)), NodeId(a.max(b))));
        }
    }
    let client_sites: Vec<NodeId> = (2 + relays..nodes).map(NodeId).collect();
    for &c in &client_sites {
        let r = relay_ids[rng.random_range(0..relay_ids.len())];
        pairs.push((NodeId(r), c));
    }
    pairs.sort_unstable();
    pairs.dedup();

    let model = random_model(&mut rng);
    let specs = client_sites
        .iter()
        .enumerate()
        .map(|(i, &site)| ClientSpec {
            id: ClientId(i as u32 + 1),
            site,
            training_multiplier: rng.random_range(0.0..2.0),
        })
        .collect();
    let task = FlTask::new(NodeId(0), specs, model.clone()).expect("valid task");
    let window = round_time_bound(&model, clients, access, 2.0);
    let graph = windows_with(&mut rng, nodes, &pairs, 1, window, move |r, a, _| {
        if a == NodeId(0) {
            access
        } else {
            r.random_range(access + 0.5..access + 30.0)
        }
    });
    Instance { graph, task }
}

/// Star through a hub where every client sees the same route bandwidth and
/// the same training time, so every ordering yields the same makespan.
pub fn homogeneous_instance(seed: u64, clients: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bw = rng.random_range(10.0..=30.0);
    let nodes = 2 + clients as u32;
    let mut pairs = vec![(NodeId(0), NodeId(1))];
    pairs.extend((2..nodes).map(|c| (NodeId(1), NodeId(c))));
    let model = random_model(&mut rng);
    let sites: Vec<NodeId> = (2..nodes).map(NodeId).collect();
    let task = FlTask::homogeneous(NodeId(0), &sites, model.clone()).expect("valid task");
    let window = round_time_bound(&model, clients, bw, 1.0);
    let graph = windows_with(&mut rng, nodes, &pairs, 1, window, move |_, _, _| bw);
    Instance { graph, task }
}

/// Fixed layered mesh of `mesh` relay nodes (toroidal grid, 4-regular)
/// with `clients` client sites and one server, each attached to three
/// relays. Single window; deterministic in `seed`.
pub fn mesh_instance(seed: u64, side: u32, clients: usize, model: ModelSpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = side * side;
    let server = NodeId(mesh);
    let mut pairs = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let id = r * side + c;
            let right = r * side + (c + 1) % side;
            let down = ((r + 1) % side) * side + c;
            for other in [right, down] {
                if other != id {
                    pairs.push((NodeId(id.min(other)), NodeId(id.max(other))));
                }
            }
        }
    }
    let sites: Vec<NodeId> = (0..clients as u32).map(|i| NodeId(mesh + 1 + i)).collect();
    for &site in std::iter::once(&server).chain(&sites) {
        for _ in 0..3 {
            let relay = rng.random_range(0..mesh);
            pairs.push((NodeId(relay), site));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let nodes = mesh + 1 + clients as u32;
    let task = FlTask::homogeneous(server, &sites, model.clone()).expect("valid task");
    let window = round_time_bound(&model, clients, 10.0, 1.0);
    let graph = windows_with(&mut rng, nodes, &pairs, 1, window, |r, _, _| r.random_range(10.0..=30.0));
    Instance { graph, task }
}
