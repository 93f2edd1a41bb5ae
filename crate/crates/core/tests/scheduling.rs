mod common;

use common::*;
use fedsched_core::scheduler::{max_min_rates, FlowSpec, Precedence, ORACLE_CLIENT_LIMIT};
use fedsched_core::synthetic::{homogeneous_instance, random_instance};
use fedsched_core::*;
use proptest::prelude::*;

fn model(size_mb: f64, tau: f64) -> ModelSpec {
    ModelSpec::new("toy", size_mb, tau).unwrap()
}

fn spans(s: &RoundSchedule, c: u32) -> [(f64, f64); 3] {
    Phase::ALL.map(|p| {
        let iv = s.interval(ClientId(c), p).unwrap();
        (iv.start_s, iv.end_s)
    })
}

/// Server 0 behind a 20 Mbps access link to hub 1; clients at 2 and 3 on wide spokes.
fn shared_access() -> (TemporalGraph, FlTask) {
    let tg = single_window(4, &[(0, 1, 20.0), (1, 2, 100.0), (1, 3, 100.0)]);
    let task = FlTask::homogeneous(n(0), &[n(2), n(3)], model(10.0, 10.0)).unwrap();
    (tg, task)
}

#[test]
fn single_client_round_is_download_train_upload() {
    let tg = single_window(2, &[(0, 1, 20.0)]);
    let task = FlTask::homogeneous(n(0), &[n(1)], model(10.0, 10.0)).unwrap();
    let od = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    assert_eq!(spans(&od, 1), [(0.0, 4.0), (4.0, 14.0), (14.0, 18.0)]);
    assert_eq!(od.makespan_s, 18.0);
    let mux = schedule_multiplexed(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    assert_eq!(spans(&mux, 1), spans(&od, 1));
    let oracle = oracle_schedule(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    assert_eq!(spans(&oracle, 1), spans(&od, 1));
}

#[test]
fn shared_access_on_demand_both_channel_modes() {
    let (tg, task) = shared_access();
    for channel in [ChannelModel::PerDirection, ChannelModel::Joint] {
        let s = schedule_on_demand(&tg, &task, &SchedulerConfig::with_channel(channel), 0.0).unwrap();
        assert_eq!(spans(&s, 1), [(0.0, 4.0), (4.0, 14.0), (14.0, 18.0)]);
        assert_eq!(spans(&s, 2), [(4.0, 8.0), (8.0, 18.0), (18.0, 22.0)]);
        assert_eq!(s.makespan_s, 22.0);
        assert!(validate(&s, &task, &tg).is_empty());
    }
}

#[test]
fn shared_access_multiplexed_splits_the_link() {
    let (tg, task) = shared_access();
    let s = schedule_multiplexed(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    for c in [1, 2] {
        assert_eq!(spans(&s, c), [(0.0, 8.0), (8.0, 18.0), (18.0, 26.0)]);
        assert_eq!(s.interval(ClientId(c), Phase::Distribute).unwrap().mean_rate_mbps, Some(10.0));
    }
    assert_eq!(s.makespan_s, 26.0);
    assert!(validate(&s, &task, &tg).is_empty());
}

#[test]
fn joint_channel_delays_uploads_behind_downloads() {
    // second download is long enough to overlap the first client's training end
    let tg = single_window(3, &[(0, 1, 80.0), (0, 2, 4.0)]);
    let task = FlTask::homogeneous(n(0), &[n(1), n(2)], model(10.0, 5.0)).unwrap();
    let per = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    let joint = schedule_on_demand(&tg, &task, &SchedulerConfig::with_channel(ChannelModel::Joint), 0.0).unwrap();
    // downloads [0,1] and [1,21]; client 1 trains until 6
    assert_eq!(per.interval(ClientId(1), Phase::Upload).unwrap().start_s, 6.0);
    assert_eq!(joint.interval(ClientId(1), Phase::Upload).unwrap().start_s, 21.0);
    assert!(validate(&joint, &task, &tg).is_empty());
}

#[test]
fn disjoint_paths_make_multiplexing_no_worse() {
    let tg = single_window(3, &[(0, 1, 20.0), (0, 2, 10.0)]);
    let task = FlTask::homogeneous(n(0), &[n(1), n(2)], model(10.0, 10.0)).unwrap();
    let od = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    let mux = schedule_multiplexed(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    assert_eq!(mux.interval(ClientId(1), Phase::Distribute).unwrap().start_s, 0.0);
    assert_eq!(mux.interval(ClientId(2), Phase::Distribute).unwrap().end_s, 8.0);
    assert!(mux.makespan_s <= od.makespan_s);
}

#[test]
fn oracle_examples() {
    // download times 2, 4, 6 s; uploads equal; tau = 5
    let tg = single_window(4, &[(0, 1, 40.0), (0, 2, 20.0), (0, 3, 80.0 / 6.0)]);
    let task = FlTask::homogeneous(n(0), &[n(1), n(2), n(3)], model(10.0, 5.0)).unwrap();
    let od = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    let oracle = oracle_schedule(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    assert!(oracle.makespan_s <= od.makespan_s);
    assert!(validate(&oracle, &task, &tg).is_empty());

    let sites: Vec<NodeId> = (1..=ORACLE_CLIENT_LIMIT as u32 + 1).map(n).collect();
    let edges: Vec<(u32, u32, f64)> = sites.iter().map(|s| (0, s.0, 20.0)).collect();
    let big = single_window(sites.len() as u32 + 1, &edges);
    let task = FlTask::homogeneous(n(0), &sites, model(1.0, 1.0)).unwrap();
    assert_eq!(
        oracle_schedule(&big, &task, &SchedulerConfig::default(), 0.0).unwrap_err(),
        Error::TooManyClients { count: 9, limit: 8 }
    );
}

#[test]
fn unreachable_clients_are_listed() {
    let tg = single_window(4, &[(0, 1, 20.0)]);
    let task = FlTask::homogeneous(n(0), &[n(1), n(2), n(3)], model(1.0, 1.0)).unwrap();
    for r in [
        schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0),
        schedule_multiplexed(&tg, &task, &SchedulerConfig::default(), 0.0),
    ] {
        assert_eq!(r.unwrap_err(), Error::Unreachable { clients: vec![ClientId(2), ClientId(3)], window: 0 });
    }
}

#[test]
fn round_past_horizon_is_rejected() {
    let tg = TemporalGraph::new(vec![snapshot_at(0, 0.0, 10.0, 2, &[(0, 1, 20.0)])]).unwrap();
    let task = FlTask::homogeneous(n(0), &[n(1)], model(10.0, 10.0)).unwrap();
    assert!(matches!(
        schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0),
        Err(Error::OutOfHorizon { .. })
    ));
}

#[test]
fn upload_uses_the_snapshot_at_its_start() {
    let w0 = snapshot_at(0, 0.0, 10.0, 2, &[(0, 1, 20.0)]);
    let w1 = snapshot_at(1, 10.0, 10.0, 2, &[(0, 1, 40.0)]);
    let w2 = snapshot_at(2, 20.0, 10.0, 2, &[(0, 1, 40.0)]);
    let tg = TemporalGraph::new(vec![w0, w1, w2]).unwrap();
    let task = FlTask::homogeneous(n(0), &[n(1)], model(10.0, 10.0)).unwrap();
    let s = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    let up = s.interval(ClientId(1), Phase::Upload).unwrap();
    assert_eq!((up.start_s, up.end_s), (14.0, 16.0));
    assert_eq!(up.path.as_ref().unwrap().window_index, 1);
}

#[test]
fn strict_windows_turns_overruns_into_errors() {
    let w0 = snapshot_at(0, 0.0, 3.0, 2, &[(0, 1, 20.0)]);
    let rest: Vec<SnapshotGraph> = (1..10).map(|w| snapshot_at(w, 3.0 * w as f64, 3.0, 2, &[(0, 1, 20.0)])).collect();
    let tg = TemporalGraph::new(std::iter::once(w0).chain(rest).collect()).unwrap();
    let task = FlTask::homogeneous(n(0), &[n(1)], model(10.0, 10.0)).unwrap();
    let lax = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    assert_eq!(lax.window_overruns, 2);
    let strict = SchedulerConfig { strict_windows: true, ..SchedulerConfig::default() };
    assert!(matches!(schedule_on_demand(&tg, &task, &strict, 0.0), Err(Error::WindowOverrun { .. })));
}

#[test]
fn propagation_delay_extends_transfers() {
    let tg = single_window(2, &[(0, 1, 20.0)]); // 1 ms per edge
    let task = FlTask::homogeneous(n(0), &[n(1)], model(10.0, 10.0)).unwrap();
    let cfg = SchedulerConfig { include_propagation_delay: true, ..SchedulerConfig::default() };
    for s in [
        schedule_on_demand(&tg, &task, &cfg, 0.0).unwrap(),
        schedule_multiplexed(&tg, &task, &cfg, 0.0).unwrap(),
    ] {
        assert!((s.makespan_s - 18.002).abs() < 1e-9, "{}", s.makespan_s);
        assert!(validate(&s, &task, &tg).is_empty(), "{:?}", validate(&s, &task, &tg));
    }
}

#[test]
fn validator_flags_early_training() {
    let (tg, task) = shared_access();
    let mut s = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    let iv = s.intervals.iter_mut().find(|i| i.client_id == ClientId(2) && i.phase == Phase::Train).unwrap();
    iv.start_s -= 1.0;
    iv.end_s -= 1.0;
    assert_eq!(
        validate(&s, &task, &tg),
        vec![Violation::PrecedenceViolation { constraint: Precedence::TrainAfterDistribution, client: ClientId(2) }]
    );
}

#[test]
fn validator_flags_overlapping_downloads() {
    let tg = single_window(3, &[(0, 1, 20.0), (0, 2, 20.0)]);
    let task = FlTask::homogeneous(n(0), &[n(1), n(2)], model(10.0, 10.0)).unwrap();
    let mut s = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    let iv = s.intervals.iter_mut().find(|i| i.client_id == ClientId(2) && i.phase == Phase::Distribute).unwrap();
    iv.start_s -= 1.0;
    iv.end_s -= 1.0;
    assert_eq!(
        validate(&s, &task, &tg),
        vec![Violation::ChannelConflict { phase: Phase::Distribute, first: ClientId(1), second: ClientId(2) }]
    );
}

#[test]
fn validator_flags_short_transfer_and_bad_makespan() {
    let (tg, task) = shared_access();
    let mut s = schedule_on_demand(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    s.makespan_s += 1.0;
    let iv = s.intervals.iter_mut().find(|i| i.client_id == ClientId(1) && i.phase == Phase::Distribute).unwrap();
    iv.end_s -= 0.5;
    let v = validate(&s, &task, &tg);
    assert!(v.iter().any(|x| matches!(x, Violation::DurationMismatch { phase: Phase::Distribute, .. })), "{v:?}");
    assert!(v.iter().any(|x| matches!(x, Violation::MakespanMismatch { .. })), "{v:?}");
}

#[test]
fn validator_flags_missing_interval() {
    let (tg, task) = shared_access();
    let mut s = schedule_multiplexed(&tg, &task, &SchedulerConfig::default(), 0.0).unwrap();
    s.intervals.retain(|i| !(i.client_id == ClientId(1) && i.phase == Phase::Upload));
    assert!(validate(&s, &task, &tg).contains(&Violation::MissingInterval { client: ClientId(1), phase: Phase::Upload }));
}

#[test]
fn homogeneous_instances_make_oracle_and_on_demand_agree() {
    for seed in 0..20 {
        let inst = homogeneous_instance(seed, 4);
        let od = schedule_on_demand(&inst.graph, &inst.task, &SchedulerConfig::default(), 0.0).unwrap();
        let or = oracle_schedule(&inst.graph, &inst.task, &SchedulerConfig::default(), 0.0).unwrap();
        assert_eq!(od.makespan_s, or.makespan_s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn downloads_start_in_ascending_transfer_time(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let s = schedule_on_demand(&inst.graph, &inst.task, &SchedulerConfig::default(), 0.0).unwrap();
        let snap = inst.graph.snapshot_at(0.0).unwrap();
        let mut expected: Vec<(f64, ClientId)> = inst
            .task
            .clients
            .iter()
            .map(|c| {
                let p = snap.widest_path(inst.task.server, c.site).unwrap();
                (transmission_time(inst.task.model.size_mb, p.bottleneck_mbps).unwrap(), c.id)
            })
            .collect();
        expected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let expected: Vec<ClientId> = expected.into_iter().map(|(_, c)| c).collect();
        prop_assert_eq!(s.start_order(Phase::Distribute), expected);
    }

    #[test]
    fn uploads_follow_training_completion(seed in any::<u64>()) {
        let inst = random_instance(seed);
        for channel in [ChannelModel::PerDirection, ChannelModel::Joint] {
            let s = schedule_on_demand(&inst.graph, &inst.task, &SchedulerConfig::with_channel(channel), 0.0).unwrap();
            let mut by_train: Vec<(f64, ClientId)> = s.phase_intervals(Phase::Train).map(|i| (i.end_s, i.client_id)).collect();
            by_train.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let by_train: Vec<ClientId> = by_train.into_iter().map(|(_, c)| c).collect();
            prop_assert_eq!(s.start_order(Phase::Upload), by_train);
        }
    }

    #[test]
    fn oracle_never_loses_to_on_demand(seed in any::<u64>()) {
        let inst = random_instance(seed);
        prop_assume!(inst.task.clients.len() <= 5);
        let cfg = SchedulerConfig::default();
        let od = schedule_on_demand(&inst.graph, &inst.task, &cfg, 0.0).unwrap();
        let or = oracle_schedule(&inst.graph, &inst.task, &cfg, 0.0).unwrap();
        prop_assert!(or.makespan_s <= od.makespan_s);
        prop_assert!(validate(&or, &inst.task, &inst.graph).is_empty());
    }

    #[test]
    fn max_min_rates_respect_capacity_and_bottleneck_every_flow(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let snap = inst.graph.snapshot_at(0.0).unwrap();
        let mut flows = Vec::new();
        for (i, c) in inst.task.clients.iter().enumerate() {
            flows.push(FlowSpec { flow_id: 2 * i as u64, path: snap.widest_path(inst.task.server, c.site).unwrap() });
            flows.push(FlowSpec { flow_id: 2 * i as u64 + 1, path: snap.widest_path(c.site, inst.task.server).unwrap() });
        }
        let rates = max_min_rates(snap, &flows);
        let mut load = std::collections::BTreeMap::new();
        for f in &flows {
            for l in f.path.directed_links() {
                *load.entry(l).or_insert(0.0) += rates[&f.flow_id];
            }
        }
        for (&(a, b), &sum) in &load {
            prop_assert!(sum <= snap.edge_between(a, b).unwrap().bandwidth_mbps + 1e-9);
        }
        for f in &flows {
            let saturated = f.path.directed_links().any(|(a, b)| {
                load[&(a, b)] >= snap.edge_between(a, b).unwrap().bandwidth_mbps - 1e-9
            });
            prop_assert!(saturated, "flow {} has no saturated link", f.flow_id);
        }
        let mut shuffled = flows.clone();
        shuffled.reverse();
        prop_assert_eq!(max_min_rates(snap, &shuffled), rates);
    }

    #[test]
    fn multiplexed_flows_deliver_the_model(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let s = schedule_multiplexed(&inst.graph, &inst.task, &SchedulerConfig::default(), 0.0).unwrap();
        let bits = inst.task.model.size_megabits();
        for iv in s.intervals.iter().filter(|i| i.phase.is_transfer()) {
            let delivered: f64 = iv.rate_segments.iter().map(|r| r.megabits()).sum();
            prop_assert!((delivered - bits).abs() <= 1e-6 * bits);
        }
    }
}
