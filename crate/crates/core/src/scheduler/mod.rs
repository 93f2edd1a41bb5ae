//! Round scheduling: the serial on-demand policy, the statistical
//! multiplexing baseline, an exhaustive ordering oracle and a schedule
//! validator.

mod fairness;
mod multiplexed;
mod on_demand;
mod oracle;
mod serial;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ids::ClientId;
use crate::temporal_graph::{PathMetric, RoutePath};

pub use fairness::{max_min_rates, progressive_fill, FlowSpec};
pub use multiplexed::schedule_multiplexed;
pub use on_demand::schedule_on_demand;
pub use oracle::{oracle_schedule, ORACLE_CLIENT_LIMIT};
pub use validate::{validate, Precedence, Violation};

/// Absolute tolerance for every time comparison, in seconds.
pub const TIME_TOLERANCE_S: f64 = 1e-9;
/// Absolute tolerance for rate comparisons, in Mbps.
pub const RATE_TOLERANCE_MBPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Distribute,
    Train,
    Upload,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Distribute, Phase::Train, Phase::Upload];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Distribute => "distribute",
            Phase::Train => "train",
            Phase::Upload => "upload",
        }
    }

    pub fn is_transfer(self) -> bool {
        self != Phase::Train
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    OnDemand,
    StatisticalMultiplexing,
    OracleOptimal,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::OnDemand => "on_demand",
            Policy::StatisticalMultiplexing => "statistical_multiplexing",
            Policy::OracleOptimal => "oracle_optimal",
        }
    }

    /// Serial policies hold the server channel exclusively.
    pub fn is_serial(self) -> bool {
        self != Policy::StatisticalMultiplexing
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "on_demand" => Ok(Policy::OnDemand),
            "statistical_multiplexing" => Ok(Policy::StatisticalMultiplexing),
            "oracle_optimal" => Ok(Policy::OracleOptimal),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

/// How the server's exclusive channel is shared between the two directions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    /// Independent serial downlink and uplink.
    #[default]
    PerDirection,
    /// One serial resource for downloads and uploads together.
    Joint,
}

impl ChannelModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelModel::PerDirection => "per_direction",
            ChannelModel::Joint => "joint",
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_direction" => Ok(ChannelModel::PerDirection),
            "joint" => Ok(ChannelModel::Joint),
            other => Err(format!("unknown channel model `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    #[serde(default)]
    pub channel: ChannelModel,
    #[serde(default)]
    pub path_metric: PathMetric,
    /// Adds the one-way path delay to every transfer.
    #[serde(default)]
    pub include_propagation_delay: bool,
    /// Fail instead of warning when a transfer outlives the window its path was taken from.
    #[serde(default)]
    pub strict_windows: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            channel: ChannelModel::PerDirection,
            path_metric: PathMetric::Widest,
            include_propagation_delay: false,
            strict_windows: false,
        }
    }
}

impl SchedulerConfig {
    pub fn with_channel(channel: ChannelModel) -> Self {
        Self { channel, ..Self::default() }
    }

    pub(crate) fn path_delay_s(&self, path: &RoutePath) -> f64 {
        if self.include_propagation_delay {
            path.total_delay_ms / 1e3
        } else {
            0.0
        }
    }
}

/// Piece of a fluid flow transmitted at a constant rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub rate_mbps: f64,
}

impl RateSegment {
    pub fn megabits(&self) -> f64 {
        self.rate_mbps * (self.end_s - self.start_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseInterval {
    pub client_id: ClientId,
    pub phase: Phase,
    pub start_s: f64,
    pub end_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<RoutePath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_rate_mbps: Option<f64>,
    /// Transferred model size in MB; absent for training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_mb: Option<f64>,
    /// Piecewise-constant rates of a multiplexed flow.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rate_segments: Vec<RateSegment>,
}

impl PhaseInterval {
    pub fn train(client_id: ClientId, start_s: f64, end_s: f64) -> Self {
        Self {
            client_id,
            phase: Phase::Train,
            start_s,
            end_s,
            path: None,
            mean_rate_mbps: None,
            payload_mb: None,
            rate_segments: Vec::new(),
        }
    }

    pub fn transfer(client_id: ClientId, phase: Phase, start_s: f64, end_s: f64, path: RoutePath, payload_mb: f64) -> Self {
        Self {
            client_id,
            phase,
            start_s,
            end_s,
            path: Some(path),
            mean_rate_mbps: None,
            payload_mb: Some(payload_mb),
            rate_segments: Vec::new(),
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSchedule {
    pub policy: Policy,
    pub channel: ChannelModel,
    pub round_start_s: f64,
    pub makespan_s: f64,
    #[serde(default)]
    pub include_propagation_delay: bool,
    /// Transfers that ended after the window their route was computed in.
    #[serde(default)]
    pub window_overruns: u32,
    pub intervals: Vec<PhaseInterval>,
}

impl RoundSchedule {
    pub fn interval(&self, client: ClientId, phase: Phase) -> Option<&PhaseInterval> {
        self.intervals.iter().find(|i| i.client_id == client && i.phase == phase)
    }

    pub fn phase_intervals(&self, phase: Phase) -> impl Iterator<Item = &PhaseInterval> {
        self.intervals.iter().filter(move |i| i.phase == phase)
    }

    /// Summed duration of every interval of `phase`.
    pub fn phase_total_s(&self, phase: Phase) -> f64 {
        self.phase_intervals(phase).map(PhaseInterval::duration_s).sum()
    }

    /// Clients ordered by the start of their `phase` interval (ties by id).
    pub fn start_order(&self, phase: Phase) -> Vec<ClientId> {
        let mut v: Vec<_> = self.phase_intervals(phase).map(|i| (i.start_s, i.client_id)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        v.into_iter().map(|(_, c)| c).collect()
    }

    pub(crate) fn finish(
        policy: Policy,
        config: &SchedulerConfig,
        round_start_s: f64,
        mut intervals: Vec<PhaseInterval>,
        window_overruns: u32,
    ) -> Self {
        intervals.sort_by(|a, b| a.client_id.cmp(&b.client_id).then(a.phase.cmp(&b.phase)));
        let last = intervals
            .iter()
            .filter(|i| i.phase == Phase::Upload)
            .map(|i| i.end_s)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            policy,
            channel: config.channel,
            round_start_s,
            makespan_s: last - round_start_s,
            include_propagation_delay: config.include_propagation_delay,
            window_overruns,
            intervals,
        }
    }
}
