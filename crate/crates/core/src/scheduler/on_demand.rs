use super::serial::SerialRound;
use super::{Policy, RoundSchedule, SchedulerConfig};
use crate::error::Result;
use crate::fl_task::FlTask;
use crate::temporal_graph::TemporalGraph;

/// On-demand serial schedule for one round starting at `t0`.
///
/// Download routes are computed on the snapshot at `t0`; clients are served
/// one at a time in ascending download time (ties by client id). Each client
/// trains as soon as its download completes, and uploads are served
/// first-finish first-upload on an exclusive uplink, each routed on the
/// snapshot at its actual start.
pub fn schedule_on_demand(tg: &TemporalGraph, task: &FlTask, config: &SchedulerConfig, t0: f64) -> Result<RoundSchedule> {
    let round = SerialRound::new(tg, task, config, t0)?;

    let mut download_order: Vec<usize> = (0..round.len()).collect();
    download_order.sort_by(|&a, &b| {
        round.downloads[a]
            .duration_s
            .total_cmp(&round.downloads[b].duration_s)
            .then(task.clients[a].id.cmp(&task.clients[b].id))
    });

    let train_end = round.train_ends(&round.download_timeline(&download_order));
    let mut upload_order: Vec<usize> = (0..round.len()).collect();
    upload_order.sort_by(|&a, &b| {
        train_end[a]
            .total_cmp(&train_end[b])
            .then(task.clients[a].id.cmp(&task.clients[b].id))
    });

    round.build(Policy::OnDemand, &download_order, &upload_order)
}
