//! Scheduling federated-learning rounds over LEO satellite constellations.
//!
//! The crate models the constellation as a discrete temporal graph of
//! per-window snapshots, routes transfers on widest (max-bottleneck) paths
//! and schedules a round (distribute, train, upload) either serially on
//! demand or as max-min fair concurrent flows.

pub mod constellation;
pub mod error;
pub mod experiment;
pub mod fl_task;
pub mod gantt;
pub mod ids;
pub mod io;
pub mod scenario;
pub mod scheduler;
pub mod synthetic;
pub mod temporal_graph;

pub use error::{Error, Result};
pub use fl_task::{model_catalog, transmission_time, ClientSpec, FlTask, ModelSpec};
pub use ids::{ClientId, NodeId};
pub use scheduler::{
    oracle_schedule, schedule_multiplexed, schedule_on_demand, validate, ChannelModel, Phase, PhaseInterval,
    Policy, RoundSchedule, SchedulerConfig, Violation,
};
pub use temporal_graph::{bottleneck, Edge, PathMetric, RoutePath, SnapshotGraph, TemporalGraph};
