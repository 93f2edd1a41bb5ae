use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{ChannelModel, Phase, PhaseInterval, RoundSchedule, RATE_TOLERANCE_MBPS, TIME_TOLERANCE_S};
use crate::fl_task::{transmission_time, FlTask};
use crate::ids::{ClientId, NodeId};
use crate::temporal_graph::TemporalGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precedence {
    /// Training may not start before the model has arrived.
    TrainAfterDistribution,
    /// Upload may not start before training has finished.
    UploadAfterTraining,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingInterval { client: ClientId, phase: Phase },
    DuplicateInterval { client: ClientId, phase: Phase },
    UnknownClient { client: ClientId },
    MalformedInterval { client: ClientId, phase: Phase, reason: String },
    DurationMismatch { client: ClientId, phase: Phase, expected_s: f64, actual_s: f64 },
    DeliveredBitsMismatch { client: ClientId, phase: Phase, expected_mb: f64, delivered_mb: f64 },
    PayloadMismatch { client: ClientId, download_mb: f64, upload_mb: f64, model_mb: f64 },
    PrecedenceViolation { constraint: Precedence, client: ClientId },
    ChannelConflict { phase: Phase, first: ClientId, second: ClientId },
    LinkOverCapacity { window: u32, from: NodeId, to: NodeId, at_s: f64, load_mbps: f64, capacity_mbps: f64 },
    MakespanMismatch { recorded_s: f64, expected_s: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingInterval { client, phase } => write!(f, "{client}: missing {phase} interval"),
            Violation::DuplicateInterval { client, phase } => write!(f, "{client}: duplicate {phase} interval"),
            Violation::UnknownClient { client } => write!(f, "{client}: not part of the task"),
            Violation::MalformedInterval { client, phase, reason } => write!(f, "{client} {phase}: {reason}"),
            Violation::DurationMismatch { client, phase, expected_s, actual_s } => {
                write!(f, "{client} {phase}: lasts {actual_s} s, expected {expected_s} s")
            }
            Violation::DeliveredBitsMismatch { client, phase, expected_mb, delivered_mb } => {
                write!(f, "{client} {phase}: delivered {delivered_mb} Mb of {expected_mb} Mb")
            }
            Violation::PayloadMismatch { client, download_mb, upload_mb, model_mb } => write!(
                f,
                "{client}: download {download_mb} MB / upload {upload_mb} MB differ from model {model_mb} MB"
            ),
            Violation::PrecedenceViolation { constraint, client } => write!(f, "{client}: precedence {constraint:?} broken"),
            Violation::ChannelConflict { phase, first, second } => {
                write!(f, "{phase} of {second} overlaps an exclusive transfer of {first}")
            }
            Violation::LinkOverCapacity { window, from, to, at_s, load_mbps, capacity_mbps } => write!(
                f,
                "link {from}->{to} (window {window}) carries {load_mbps} Mbps > {capacity_mbps} Mbps at {at_s} s"
            ),
            Violation::MakespanMismatch { recorded_s, expected_s } => {
                write!(f, "makespan {recorded_s} s, intervals imply {expected_s} s")
            }
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_TOLERANCE_S
}

/// Checks a complete schedule against the round constraints: per-phase
/// durations, payload identity, precedence, exclusivity of the server
/// channel for serial policies, link capacities for multiplexed flows, and
/// the recorded makespan. Returns every violation found.
pub fn validate(schedule: &RoundSchedule, task: &FlTask, tg: &TemporalGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_key: BTreeMap<(ClientId, Phase), &PhaseInterval> = BTreeMap::new();
    for iv in &schedule.intervals {
        if task.client(iv.client_id).is_err() {
            out.push(Violation::UnknownClient { client: iv.client_id });
            continue;
        }
        if by_key.insert((iv.client_id, iv.phase), iv).is_some() {
            out.push(Violation::DuplicateInterval { client: iv.client_id, phase: iv.phase });
        }
    }
    let model_mb = task.model.size_mb;
    let model_bits = task.model.size_megabits();

    for c in &task.clients {
        let mut found = [None; 3];
        for (slot, phase) in Phase::ALL.into_iter().enumerate() {
            match by_key.get(&(c.id, phase)) {
                Some(iv) => found[slot] = Some(*iv),
                None => out.push(Violation::MissingInterval { client: c.id, phase }),
            }
        }
        for iv in found.iter().flatten() {
            check_interval(schedule, task, tg, iv, c.site, &mut out);
        }
        let [Some(dl), Some(tr), Some(ul)] = found else { continue };

        // training duration
        let tau = task.model.training_time_s * c.training_multiplier;
        if !close(tr.duration_s(), tau) {
            out.push(Violation::DurationMismatch { client: c.id, phase: Phase::Train, expected_s: tau, actual_s: tr.duration_s() });
        }
        // payload identity
        let (d, u) = (dl.payload_mb.unwrap_or(f64::NAN), ul.payload_mb.unwrap_or(f64::NAN));
        if d != model_mb || u != model_mb {
            out.push(Violation::PayloadMismatch { client: c.id, download_mb: d, upload_mb: u, model_mb });
        }
        for iv in [dl, ul] {
            let Some(path) = &iv.path else { continue };
            if schedule.policy.is_serial() {
                let mut expected = transmission_time(iv.payload_mb.unwrap_or(model_mb), path.bottleneck_mbps).unwrap_or(f64::NAN);
                if schedule.include_propagation_delay {
                    expected += path.total_delay_ms / 1e3;
                }
                if !close(iv.duration_s(), expected) {
                    out.push(Violation::DurationMismatch { client: c.id, phase: iv.phase, expected_s: expected, actual_s: iv.duration_s() });
                }
            } else {
                let delivered: f64 = iv.rate_segments.iter().map(|s| s.megabits()).sum();
                // one bit of slack, or 1e-9 relative for very large payloads
                let tol = (1e-6f64).max(1e-9 * model_bits);
                if (delivered - model_bits).abs() > tol {
                    out.push(Violation::DeliveredBitsMismatch {
                        client: c.id,
                        phase: iv.phase,
                        expected_mb: model_bits,
                        delivered_mb: delivered,
                    });
                }
            }
        }
        if dl.end_s > tr.start_s + TIME_TOLERANCE_S {
            out.push(Violation::PrecedenceViolation { constraint: Precedence::TrainAfterDistribution, client: c.id });
        }
        if tr.end_s > ul.start_s + TIME_TOLERANCE_S {
            out.push(Violation::PrecedenceViolation { constraint: Precedence::UploadAfterTraining, client: c.id });
        }
    }

    if schedule.policy.is_serial() {
        check_exclusive(schedule, &[Phase::Distribute], &mut out);
        check_exclusive(schedule, &[Phase::Upload], &mut out);
        if schedule.channel == ChannelModel::Joint {
            check_cross_conflicts(schedule, &mut out);
        }
    } else {
        check_link_loads(schedule, tg, &mut out);
    }

    let uploads: Vec<f64> = schedule.phase_intervals(Phase::Upload).map(|i| i.end_s).collect();
    if !uploads.is_empty() {
        let expected = uploads.iter().copied().fold(f64::NEG_INFINITY, f64::max) - schedule.round_start_s;
        if !close(expected, schedule.makespan_s) {
            out.push(Violation::MakespanMismatch { recorded_s: schedule.makespan_s, expected_s: expected });
        }
    }
    out
}

fn check_interval(
    schedule: &RoundSchedule,
    task: &FlTask,
    tg: &TemporalGraph,
    iv: &PhaseInterval,
    site: NodeId,
    out: &mut Vec<Violation>,
) {
    let bad = |reason: String| Violation::MalformedInterval { client: iv.client_id, phase: iv.phase, reason };
    if !(iv.start_s >= 0.0 && iv.end_s >= iv.start_s) || iv.start_s < schedule.round_start_s - TIME_TOLERANCE_S {
        out.push(bad(format!("invalid bounds [{}, {}]", iv.start_s, iv.end_s)));
    }
    match (&iv.path, iv.phase.is_transfer()) {
        (None, true) => out.push(bad("transfer without a route".into())),
        (Some(_), false) => out.push(bad("training carries a route".into())),
        (Some(path), true) => {
            let (src, dst) = if iv.phase == Phase::Distribute { (task.server, site) } else { (site, task.server) };
            if path.nodes.first() != Some(&src) || path.nodes.last() != Some(&dst) {
                out.push(bad(format!("route does not join {src} to {dst}")));
            }
            match tg.window(path.window_index) {
                Some(snap) => {
                    if let Err(reason) = snap.check_path(path) {
                        out.push(bad(reason));
                    }
                }
                None => out.push(bad(format!("route window {} outside horizon", path.window_index))),
            }
        }
        (None, false) => {}
    }
    let mut t = iv.start_s;
    for seg in &iv.rate_segments {
        if seg.start_s < t - TIME_TOLERANCE_S || seg.end_s < seg.start_s || seg.rate_mbps < 0.0 {
            out.push(bad("rate segments out of order".into()));
            break;
        }
        t = seg.end_s;
    }
    if !iv.rate_segments.is_empty() && !close(t, iv.end_s) {
        out.push(bad("rate segments do not end with the interval".into()));
    }
}

fn overlapping(mut items: Vec<&PhaseInterval>) -> Vec<(&PhaseInterval, &PhaseInterval)> {
    items.sort_by(|a, b| a.start_s.total_cmp(&b.start_s).then(a.client_id.cmp(&b.client_id)));
    let mut out = Vec::new();
    let mut latest: Option<&PhaseInterval> = None;
    for iv in items {
        if let Some(prev) = latest {
            if prev.end_s > iv.start_s + TIME_TOLERANCE_S && iv.end_s > iv.start_s {
                out.push((prev, iv));
            }
            if iv.end_s > prev.end_s {
                latest = Some(iv);
            }
        } else {
            latest = Some(iv);
        }
    }
    out
}

fn check_exclusive(schedule: &RoundSchedule, phases: &[Phase], out: &mut Vec<Violation>) {
    let items = schedule.intervals.iter().filter(|i| phases.contains(&i.phase)).collect();
    for (a, b) in overlapping(items) {
        out.push(Violation::ChannelConflict { phase: b.phase, first: a.client_id, second: b.client_id });
    }
}

fn check_cross_conflicts(schedule: &RoundSchedule, out: &mut Vec<Violation>) {
    for d in schedule.phase_intervals(Phase::Distribute) {
        for u in schedule.phase_intervals(Phase::Upload) {
            let overlap = d.start_s.max(u.start_s) + TIME_TOLERANCE_S < d.end_s.min(u.end_s);
            if overlap {
                out.push(Violation::ChannelConflict { phase: Phase::Upload, first: d.client_id, second: u.client_id });
            }
        }
    }
}

/// Sum of multiplexed rates per directed link must stay within capacity in
/// every epoch between consecutive rate changes.
fn check_link_loads(schedule: &RoundSchedule, tg: &TemporalGraph, out: &mut Vec<Violation>) {
    let mut epochs = BTreeSet::new();
    for iv in &schedule.intervals {
        for s in &iv.rate_segments {
            epochs.insert(s.start_s.to_bits());
        }
    }
    let mut reported = BTreeSet::new();
    for bits in epochs {
        let at = f64::from_bits(bits);
        let mut load: BTreeMap<(u32, NodeId, NodeId), f64> = BTreeMap::new();
        for iv in &schedule.intervals {
            let Some(path) = &iv.path else { continue };
            let Some(seg) = iv.rate_segments.iter().find(|s| s.start_s <= at && at < s.end_s) else { continue };
            for (a, b) in path.directed_links() {
                *load.entry((path.window_index, a, b)).or_default() += seg.rate_mbps;
            }
        }
        for ((w, a, b), l) in load {
            let cap = tg.window(w).and_then(|s| s.edge_between(a, b)).map_or(0.0, |e| e.bandwidth_mbps);
            if l > cap + RATE_TOLERANCE_MBPS && reported.insert((w, a, b)) {
                out.push(Violation::LinkOverCapacity { window: w, from: a, to: b, at_s: at, load_mbps: l, capacity_mbps: cap });
            }
        }
    }
}

