use std::collections::BTreeMap;

use super::fairness::progressive_fill;
use super::serial::check_overrun;
use super::{Phase, PhaseInterval, Policy, RateSegment, RoundSchedule, SchedulerConfig, TIME_TOLERANCE_S};
use crate::error::{Error, Result};
use crate::fl_task::FlTask;
use crate::ids::NodeId;
use crate::temporal_graph::{RoutePath, TemporalGraph};

/// Directed link of a given window. Routes are pinned to the window they
/// were computed in, so the same pair in two windows is two resources.
type LinkKey = (u32, NodeId, NodeId);

struct Flow {
    client: usize,
    phase: Phase,
    path: RoutePath,
    /// Time the flow was requested (interval start).
    requested_s: f64,
    /// Time bits begin to flow (request plus optional propagation delay).
    active_s: f64,
    remaining_mb: f64,
    segments: Vec<RateSegment>,
    end_s: Option<f64>,
}

/// Statistical-multiplexing baseline as a fluid simulation.
///
/// Every download starts at `t0` along its route on the snapshot at `t0`;
/// each upload is requested when its client finishes training and is routed
/// on the snapshot at that instant. Concurrent flows receive max-min fair
/// rates, recomputed whenever a flow arrives or completes.
pub fn schedule_multiplexed(tg: &TemporalGraph, task: &FlTask, config: &SchedulerConfig, t0: f64) -> Result<RoundSchedule> {
    task.validate()?;
    let size_mb = task.model.size_mb;
    let payload = task.model.size_megabits();
    let snap = tg.snapshot_at(t0)?;

    let mut flows: Vec<Flow> = Vec::with_capacity(2 * task.clients.len());
    let mut unreachable = Vec::new();
    for (i, c) in task.clients.iter().enumerate() {
        match snap.route(config.path_metric, task.server, c.site) {
            Ok(path) => {
                let active_s = t0 + config.path_delay_s(&path);
                flows.push(Flow {
                    client: i,
                    phase: Phase::Distribute,
                    path,
                    requested_s: t0,
                    active_s,
                    remaining_mb: payload,
                    segments: Vec::new(),
                    end_s: None,
                });
            }
            Err(Error::NoRoute { .. }) => unreachable.push(c.id),
            Err(e) => return Err(e),
        }
    }
    if !unreachable.is_empty() {
        unreachable.sort_unstable();
        return Err(Error::Unreachable { clients: unreachable, window: snap.window_index() });
    }

    let mut train: Vec<Option<(f64, f64)>> = vec![None; task.clients.len()];
    let mut now = t0;
    loop {
        let active: Vec<usize> = (0..flows.len())
            .filter(|&f| flows[f].end_s.is_none() && flows[f].active_s <= now)
            .collect();
        let next_arrival = flows
            .iter()
            .filter(|f| f.end_s.is_none() && f.active_s > now)
            .map(|f| f.active_s)
            .fold(f64::INFINITY, f64::min);
        if active.is_empty() {
            if next_arrival.is_finite() {
                now = next_arrival;
                continue;
            }
            break;
        }

        let mut capacities: BTreeMap<LinkKey, f64> = BTreeMap::new();
        let links: Vec<Vec<LinkKey>> = active
            .iter()
            .map(|&f| {
                let p = &flows[f].path;
                p.edges
                    .iter()
                    .zip(p.directed_links())
                    .map(|(e, (a, b))| {
                        let key = (p.window_index, a, b);
                        capacities.insert(key, e.bandwidth_mbps);
                        key
                    })
                    .collect()
            })
            .collect();
        let rates = progressive_fill(&capacities, &links);

        let next_completion = active
            .iter()
            .zip(&rates)
            .map(|(&f, &r)| now + flows[f].remaining_mb / r)
            .fold(f64::INFINITY, f64::min);
        let next = next_completion.min(next_arrival);
        let dt = next - now;

        let mut completed = Vec::new();
        for (&f, &rate) in active.iter().zip(&rates) {
            let flow = &mut flows[f];
            let sent = rate * dt;
            flow.segments.push(RateSegment { start_s: now, end_s: next, rate_mbps: rate });
            if flow.remaining_mb - sent <= 1e-12 * payload {
                flow.remaining_mb = 0.0;
                flow.end_s = Some(next);
                completed.push(f);
            } else {
                flow.remaining_mb -= sent;
            }
        }
        now = next;

        for f in completed {
            if flows[f].phase != Phase::Distribute {
                continue;
            }
            let ci = flows[f].client;
            let c = &task.clients[ci];
            let train_end = now + task.model.training_time_s * c.training_multiplier;
            train[ci] = Some((now, train_end));
            let up_snap = tg.snapshot_at(train_end)?;
            let path = match up_snap.route(config.path_metric, c.site, task.server) {
                Ok(p) => p,
                Err(Error::NoRoute { window, .. }) => {
                    return Err(Error::Unreachable { clients: vec![c.id], window });
                }
                Err(e) => return Err(e),
            };
            let active_s = train_end + config.path_delay_s(&path);
            flows.push(Flow {
                client: ci,
                phase: Phase::Upload,
                path,
                requested_s: train_end,
                active_s,
                remaining_mb: payload,
                segments: Vec::new(),
                end_s: None,
            });
        }
    }

    let mut intervals = Vec::with_capacity(3 * task.clients.len());
    let mut overruns = 0;
    for flow in flows {
        let c = &task.clients[flow.client];
        let end = flow.end_s.expect("simulation drains every flow");
        if end > tg.horizon_s() + TIME_TOLERANCE_S {
            return Err(Error::OutOfHorizon { time_s: end, horizon_s: tg.horizon_s() });
        }
        overruns += check_overrun(tg, config, c.id, &flow.path, end)?;
        let duration = end - flow.requested_s;
        let mut iv = PhaseInterval::transfer(c.id, flow.phase, flow.requested_s, end, flow.path, size_mb);
        iv.mean_rate_mbps = Some(if duration > 0.0 { payload / duration } else { f64::INFINITY });
        iv.rate_segments = flow.segments;
        intervals.push(iv);
    }
    for (ci, t) in train.into_iter().enumerate() {
        let (s, e) = t.expect("every download completes");
        intervals.push(PhaseInterval::train(task.clients[ci].id, s, e));
    }
    Ok(RoundSchedule::finish(Policy::StatisticalMultiplexing, config, t0, intervals, overruns))
}
