//! Fixtures shared by the benchmarks.

use fedsched_core::experiment::bundled_plan;
use fedsched_core::fl_task::catalog_model;
use fedsched_core::scenario::Scenario;
use fedsched_core::synthetic::{mesh_instance, Instance};
use fedsched_core::{FlTask, TemporalGraph};

/// Full bundled shell with the first `clients` cities and MobileNetV2.
pub fn full_shell(clients: usize, windows: u32) -> (TemporalGraph, FlTask) {
    let plan = bundled_plan("fig5").expect("bundled plan");
    let scenario = Scenario::from_file(plan.scenario).expect("valid scenario");
    let task = scenario.task_for(clients, catalog_model("MobileNetV2").unwrap()).expect("task");
    let tg = scenario.build_temporal_graph_with(windows).expect("graph");
    (tg, task)
}

/// Fixed 32x32 toroidal relay mesh with `clients` attached sites.
pub fn mesh(clients: usize) -> Instance {
    mesh_instance(7, 32, clients, catalog_model("MobileNetV2").unwrap())
}
