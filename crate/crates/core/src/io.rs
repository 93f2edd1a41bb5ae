//! Interchange files: the temporal graph written by `generate`, and
//! schedule exports (JSON with metadata, flat CSV).

use serde::{Deserialize, Serialize};

use crate::constellation::SiteRole;
use crate::error::{Error, Result};
use crate::ids::NodeId;
use crate::scenario::{check_version, parse_json, Scenario, FORMAT_VERSION};
use crate::scheduler::{ChannelModel, RoundSchedule};
use crate::temporal_graph::{Edge, SnapshotGraph, TemporalGraph};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Satellite,
    Server,
    Client,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: NodeId,
    pub kind: NodeKind,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub u: NodeId,
    pub v: NodeId,
    pub mbps: f64,
    pub delay_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowEntry {
    pub window_index: u32,
    pub window_start_s: f64,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub format_version: u32,
    pub config_hash: String,
    pub window_length_s: f64,
    pub num_windows: u32,
    pub nodes: Vec<NodeEntry>,
    pub windows: Vec<WindowEntry>,
}

impl GraphFile {
    pub fn from_scenario(scenario: &Scenario, tg: &TemporalGraph) -> Self {
        let mut nodes: Vec<NodeEntry> = scenario
            .elements
            .iter()
            .map(|e| NodeEntry { id: e.id, kind: NodeKind::Satellite, name: format!("sat-{}-{}", e.plane_index, e.slot_index) })
            .collect();
        nodes.extend(scenario.sites.iter().map(|s| NodeEntry {
            id: s.id,
            kind: match s.role {
                SiteRole::Server => NodeKind::Server,
                SiteRole::Client => NodeKind::Client,
            },
            name: s.name.clone(),
        }));
        let windows = tg
            .snapshots()
            .iter()
            .map(|s| WindowEntry {
                window_index: s.window_index(),
                window_start_s: s.window_start_s(),
                edges: s
                    .edges()
                    .iter()
                    .map(|e| EdgeEntry { u: e.u, v: e.v, mbps: e.bandwidth_mbps, delay_ms: e.delay_ms })
                    .collect(),
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            config_hash: scenario.config_hash(),
            window_length_s: tg.window_length_s(),
            num_windows: tg.num_windows() as u32,
            nodes,
            windows,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = parse_json(text)?;
        check_version(file.format_version)?;
        if file.windows.len() != file.num_windows as usize {
            return Err(Error::invalid(
                "num_windows",
                format!("header says {}, file has {} windows", file.num_windows, file.windows.len()),
            ));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn temporal_graph(&self) -> Result<TemporalGraph> {
        let vertices: Vec<NodeId> = self.nodes.iter().map(|n| n.id).collect();
        let snapshots = self
            .windows
            .iter()
            .map(|w| {
                let edges = w.edges.iter().map(|e| Edge::new(e.u, e.v, e.mbps, e.delay_ms)).collect();
                SnapshotGraph::new(w.window_index, w.window_start_s, self.window_length_s, vertices.clone(), edges)
            })
            .collect::<Result<Vec<_>>>()?;
        TemporalGraph::new(snapshots)
    }

    /// Checks that the scenario's sites map to the same ids and kinds.
    pub fn check_compatible(&self, scenario: &Scenario) -> Result<()> {
        for site in &scenario.sites {
            let entry = self
                .nodes
                .iter()
                .find(|n| n.id == site.id)
                .ok_or_else(|| Error::invalid("nodes", format!("site `{}` ({}) missing from graph", site.name, site.id)))?;
            if entry.name != site.name || entry.kind == NodeKind::Satellite {
                return Err(Error::invalid(
                    "nodes",
                    format!("node {} is `{}` in the graph but site `{}` in the scenario", site.id, entry.name, site.name),
                ));
            }
        }
        Ok(())
    }
}

/// Schedule with the metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub format_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub channel: ChannelModel,
    pub config_hash: String,
    pub schedule: RoundSchedule,
}

impl ScheduleFile {
    pub fn new(schedule: RoundSchedule, seed: u64, config_hash: String) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            seed,
            channel: schedule.channel,
            config_hash,
            schedule,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = parse_json(text)?;
        check_version(file.format_version)?;
        if file.schedule.intervals.is_empty() {
            return Err(Error::invalid("schedule.intervals", "schedule has no intervals"));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    policy: &'a str,
    client_id: u32,
    phase: &'a str,
    start_s: f64,
    end_s: f64,
    bottleneck_mbps: Option<f64>,
    mean_rate_mbps: Option<f64>,
    path_nodes: String,
}

/// One row per interval. `path_nodes` lists node ids separated by spaces;
/// bandwidth columns are empty for training.
pub fn schedule_csv(schedule: &RoundSchedule) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for iv in &schedule.intervals {
        let mean = iv.mean_rate_mbps.or_else(|| {
            let d = iv.duration_s();
            iv.payload_mb.filter(|_| d > 0.0).map(|mb| mb * crate::fl_task::MEGABITS_PER_MB / d)
        });
        let row = CsvRow {
            policy: schedule.policy.as_str(),
            client_id: iv.client_id.0,
            phase: iv.phase.as_str(),
            start_s: iv.start_s,
            end_s: iv.end_s,
            bottleneck_mbps: iv.path.as_ref().map(|p| p.bottleneck_mbps),
            mean_rate_mbps: mean,
            path_nodes: iv
                .path
                .as_ref()
                .map(|p| p.nodes.iter().map(|n| n.0.to_string()).collect::<Vec<_>>().join(" "))
                .unwrap_or_default(),
        };
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
