mod common;

use common::toy;
use fedsched_core::experiment::{bundled_plan, reduction_report, run_sweep, ExperimentPlan, Sweep};
use fedsched_core::{Error, Policy};

fn both() -> &'static str {
    r#"["on_demand", "statistical_multiplexing"]"#
}

#[test]
fn one_seed_one_policy_one_value_gives_one_row() {
    let plan = ExperimentPlan::parse(&toy::plan(r#"{"client_count": [3]}"#, r#"["on_demand"]"#, "[1]")).unwrap();
    let r = run_sweep(&plan, Some(1)).unwrap();
    assert_eq!(r.rows.len() + r.failures.len(), 1);
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    assert!(r.reductions.is_empty());
    assert_eq!(reduction_report(&r), Err(Error::MissingPolicy("statistical_multiplexing".into())));
}

#[test]
fn sweep_is_deterministic_and_independent_of_jobs() {
    let plan = ExperimentPlan::parse(&toy::plan(r#"{"client_count": [1, 2, 3]}"#, both(), "[1, 2, 3, 4]")).unwrap();
    let a = run_sweep(&plan, Some(1)).unwrap();
    let b = run_sweep(&plan, Some(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.rows_csv(), b.rows_csv());
    assert_eq!(a.rows.len() + a.failures.len(), 3 * 2 * 4);
}

#[test]
fn changing_one_seed_leaves_other_rows_alone() {
    let a = ExperimentPlan::parse(&toy::plan(r#"{"client_count": [2, 3]}"#, both(), "[5, 6, 7]")).unwrap();
    let b = ExperimentPlan::parse(&toy::plan(r#"{"client_count": [2, 3]}"#, both(), "[5, 99, 7]")).unwrap();
    let ra = run_sweep(&a, None).unwrap();
    let rb = run_sweep(&b, None).unwrap();
    let keep = |rows: &[fedsched_core::experiment::SweepRow]| -> Vec<_> {
        rows.iter().filter(|r| r.seed != 6 && r.seed != 99).cloned().collect()
    };
    assert_eq!(keep(&ra.rows), keep(&rb.rows));
    assert_ne!(ra.rows, rb.rows);
}

#[test]
fn summary_means_match_rows() {
    let plan = ExperimentPlan::parse(&toy::plan(r#"{"model": ["LeNet-5", "MobileNetV2"]}"#, both(), "[1, 2, 3]")).unwrap();
    let r = run_sweep(&plan, None).unwrap();
    for s in &r.summary {
        let xs: Vec<f64> =
            r.rows.iter().filter(|x| x.sweep_value == s.sweep_value && x.policy == s.policy).map(|x| x.makespan_s).collect();
        assert_eq!(xs.len(), s.count);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - s.mean_s).abs() <= 1e-9 * mean);
    }
    for red in &r.reductions {
        assert!(red.relative > -1.0 && red.relative < 1.0);
    }
    // larger model, longer round
    assert!(r.mean("MobileNetV2", Policy::OnDemand).unwrap() > r.mean("LeNet-5", Policy::OnDemand).unwrap());
}

#[test]
fn plan_validation_names_the_problem() {
    let dup = toy::plan(r#"{"client_count": [2]}"#, both(), "[1, 1]");
    assert!(matches!(ExperimentPlan::parse(&dup), Err(Error::Invalid { field, .. }) if field == "seeds"));
    let empty = toy::plan(r#"{"client_count": []}"#, both(), "[1]");
    assert!(matches!(ExperimentPlan::parse(&empty), Err(Error::Invalid { field, .. }) if field == "sweep"));
    let too_many = toy::plan(r#"{"client_count": [4]}"#, both(), "[1]");
    assert!(matches!(ExperimentPlan::parse(&too_many), Err(Error::Invalid { field, .. }) if field == "sweep.client_count"));
    let model = toy::plan(r#"{"model": ["VGG-16"]}"#, both(), "[1]");
    assert!(matches!(ExperimentPlan::parse(&model), Err(Error::Invalid { field, .. }) if field == "sweep.model"));
}

#[test]
fn bundled_plans_cover_the_expected_grid() {
    let fig5 = bundled_plan("fig5").unwrap();
    assert_eq!(fig5.sweep, Sweep::ClientCount((2..=12).collect()));
    assert_eq!(fig5.scenario.sites.len(), 13);
    assert_eq!(fig5.scenario.constellation.num_satellites, 1000);
    let fig6 = bundled_plan("fig6").unwrap();
    assert_eq!(fig6.scenario.task.client_sites.len(), 5);
    match fig6.sweep {
        Sweep::Model(m) => assert_eq!(m.len(), 5),
        other => panic!("unexpected sweep {other:?}"),
    }
    assert_eq!(fig6.seeds, (1..=50).collect::<Vec<u64>>());
}
