use std::cell::RefCell;
use std::collections::HashMap;

use log::warn;

use super::{Phase, PhaseInterval, Policy, RoundSchedule, SchedulerConfig, TIME_TOLERANCE_S};
use crate::error::{Error, Result};
use crate::fl_task::{transmission_time, FlTask};
use crate::temporal_graph::{RoutePath, TemporalGraph};

#[derive(Debug, Clone)]
pub(crate) struct Transfer {
    pub path: RoutePath,
    pub duration_s: f64,
}

/// Timing inputs shared by every serial (exclusive-channel) ordering of one
/// round: download routes fixed at the round start, training durations,
/// and upload routes looked up lazily at their actual start window.
pub(crate) struct SerialRound<'a> {
    tg: &'a TemporalGraph,
    task: &'a FlTask,
    config: &'a SchedulerConfig,
    pub t0: f64,
    pub downloads: Vec<Transfer>,
    pub training: Vec<f64>,
    uploads: RefCell<HashMap<(usize, u32), Result<Transfer>>>,
}

pub(crate) fn transfer_on(path: RoutePath, size_mb: f64, config: &SchedulerConfig) -> Result<Transfer> {
    let duration_s = transmission_time(size_mb, path.bottleneck_mbps)? + config.path_delay_s(&path);
    Ok(Transfer { path, duration_s })
}

impl<'a> SerialRound<'a> {
    pub fn new(tg: &'a TemporalGraph, task: &'a FlTask, config: &'a SchedulerConfig, t0: f64) -> Result<Self> {
        task.validate()?;
        let snap = tg.snapshot_at(t0)?;
        let mut downloads = Vec::with_capacity(task.clients.len());
        let mut unreachable = Vec::new();
        for c in &task.clients {
            match snap.route(config.path_metric, task.server, c.site) {
                Ok(path) => downloads.push(transfer_on(path, task.model.size_mb, config)?),
                Err(Error::NoRoute { .. }) => unreachable.push(c.id),
                Err(e) => return Err(e),
            }
        }
        if !unreachable.is_empty() {
            unreachable.sort_unstable();
            return Err(Error::Unreachable { clients: unreachable, window: snap.window_index() });
        }
        let training = task
            .clients
            .iter()
            .map(|c| task.model.training_time_s * c.training_multiplier)
            .collect();
        Ok(Self { tg, task, config, t0, downloads, training, uploads: RefCell::new(HashMap::new()) })
    }

    pub fn len(&self) -> usize {
        self.downloads.len()
    }

    /// Upload transfer for client `idx` starting at `start_s`.
    pub fn upload(&self, idx: usize, start_s: f64) -> Result<Transfer> {
        let snap = self.tg.snapshot_at(start_s)?;
        let key = (idx, snap.window_index());
        if let Some(hit) = self.uploads.borrow().get(&key) {
            return hit.clone();
        }
        let client = &self.task.clients[idx];
        let result = match snap.route(self.config.path_metric, client.site, self.task.server) {
            Ok(path) => transfer_on(path, self.task.model.size_mb, self.config),
            Err(Error::NoRoute { window, .. }) => Err(Error::Unreachable { clients: vec![client.id], window }),
            Err(e) => Err(e),
        };
        self.uploads.borrow_mut().insert(key, result.clone());
        result
    }

    /// Serial download intervals `(start, end)` indexed by client, for the
    /// given service order.
    pub fn download_timeline(&self, order: &[usize]) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.len()];
        let mut free = self.t0;
        for &i in order {
            let end = free + self.downloads[i].duration_s;
            out[i] = (free, end);
            free = end;
        }
        out
    }

    pub fn train_ends(&self, downloads: &[(f64, f64)]) -> Vec<f64> {
        downloads.iter().zip(&self.training).map(|(&(_, end), &tau)| end + tau).collect()
    }

    /// Earliest time the upload channel may be used at all.
    pub fn upload_floor(&self, downloads: &[(f64, f64)]) -> f64 {
        match self.config.channel {
            super::ChannelModel::PerDirection => self.t0,
            super::ChannelModel::Joint => downloads.iter().map(|d| d.1).fold(self.t0, f64::max),
        }
    }

    /// Assembles the schedule for explicit download and upload orders.
    pub fn build(&self, policy: Policy, download_order: &[usize], upload_order: &[usize]) -> Result<RoundSchedule> {
        let downloads = self.download_timeline(download_order);
        let train_end = self.train_ends(&downloads);
        let mut free = self.upload_floor(&downloads);
        let size = self.task.model.size_mb;
        let mut intervals = Vec::with_capacity(3 * self.len());
        let mut overruns = 0u32;
        for (i, c) in self.task.clients.iter().enumerate() {
            let (s, e) = downloads[i];
            intervals.push(PhaseInterval::transfer(c.id, Phase::Distribute, s, e, self.downloads[i].path.clone(), size));
            intervals.push(PhaseInterval::train(c.id, e, train_end[i]));
        }
        for &i in upload_order {
            let start = free.max(train_end[i]);
            let up = self.upload(i, start)?;
            let end = start + up.duration_s;
            intervals.push(PhaseInterval::transfer(self.task.clients[i].id, Phase::Upload, start, end, up.path, size));
            free = end;
        }
        for iv in &intervals {
            if iv.end_s > self.tg.horizon_s() + TIME_TOLERANCE_S {
                return Err(Error::OutOfHorizon { time_s: iv.end_s, horizon_s: self.tg.horizon_s() });
            }
            if let Some(path) = &iv.path {
                overruns += check_overrun(self.tg, self.config, iv.client_id, path, iv.end_s)?;
            }
        }
        Ok(RoundSchedule::finish(policy, self.config, self.t0, intervals, overruns))
    }
}

/// Returns 1 when a transfer ends past the window its route came from.
pub(crate) fn check_overrun(
    tg: &TemporalGraph,
    config: &SchedulerConfig,
    client: crate::ids::ClientId,
    path: &RoutePath,
    end_s: f64,
) -> Result<u32> {
    let window_end = tg
        .window(path.window_index)
        .map_or(f64::INFINITY, |w| w.window_end_s());
    if end_s <= window_end + TIME_TOLERANCE_S {
        return Ok(0);
    }
    if config.strict_windows {
        return Err(Error::WindowOverrun { client, window: path.window_index, end_s });
    }
    warn!(
        "transfer for {client} on window {} route ends at {end_s:.3} s, after window end {window_end:.3} s",
        path.window_index
    );
    Ok(1)
}
