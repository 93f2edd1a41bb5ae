use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fedsched_bench::{full_shell, mesh};
use fedsched_core::scheduler::{max_min_rates, FlowSpec};
use fedsched_core::{schedule_multiplexed, schedule_on_demand, SchedulerConfig};

fn widest_path(c: &mut Criterion) {
    let (tg, task) = full_shell(12, 1);
    let snap = &tg.snapshots()[0];
    c.bench_function("widest_path/full_shell", |b| {
        b.iter(|| {
            for client in &task.clients {
                black_box(snap.widest_path(task.server, client.site).ok());
            }
        })
    });
}

fn policies(c: &mut Criterion) {
    let (tg, task) = full_shell(12, 60);
    let cfg = SchedulerConfig::default();
    c.bench_function("on_demand/full_shell_12", |b| b.iter(|| schedule_on_demand(&tg, &task, &cfg, 0.0).unwrap()));
    c.bench_function("multiplexed/full_shell_12", |b| b.iter(|| schedule_multiplexed(&tg, &task, &cfg, 0.0).unwrap()));

    let mut group = c.benchmark_group("on_demand/mesh");
    for n in [2, 4, 8, 16, 32] {
        let inst = mesh(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| schedule_on_demand(&inst.graph, &inst.task, &cfg, 0.0).unwrap())
        });
    }
    group.finish();
}

fn max_min(c: &mut Criterion) {
    let inst = mesh(32);
    let snap = &inst.graph.snapshots()[0];
    let flows: Vec<FlowSpec> = inst
        .task
        .clients
        .iter()
        .enumerate()
        .map(|(i, cl)| FlowSpec { flow_id: i as u64, path: snap.widest_path(inst.task.server, cl.site).unwrap() })
        .collect();
    c.bench_function("max_min_rates/mesh_32_flows", |b| b.iter(|| max_min_rates(snap, black_box(&flows))));
}

criterion_group!(benches, widest_path, policies, max_min);
criterion_main!(benches);
