//! Seeded parameter sweeps comparing scheduling policies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fl_task::{catalog_model, FlTask};
use crate::io::TOOL_VERSION;
use crate::scenario::{canonical_hash, check_version, parse_json, Scenario, ScenarioFile, FORMAT_VERSION};
use crate::scheduler::{
    oracle_schedule, schedule_multiplexed, schedule_on_demand, ChannelModel, Policy, RoundSchedule, SchedulerConfig,
};
use crate::synthetic::round_time_bound;
use crate::temporal_graph::TemporalGraph;

/// Parameter varied along the sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// Uses the first `n` client sites of the scenario for each `n`.
    ClientCount(Vec<usize>),
    /// Catalog model names.
    Model(Vec<String>),
}

impl Sweep {
    pub fn kind(&self) -> &'static str {
        match self {
            Sweep::ClientCount(_) => "client_count",
            Sweep::Model(_) => "model",
        }
    }

    pub fn values(&self) -> Vec<String> {
        match self {
            Sweep::ClientCount(v) => v.iter().map(|n| n.to_string()).collect(),
            Sweep::Model(v) => v.clone(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Sweep::ClientCount(v) => v.len(),
            Sweep::Model(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub format_version: u32,
    pub scenario: ScenarioFile,
    pub sweep: Sweep,
    pub policies: Vec<Policy>,
    pub seeds: Vec<u64>,
    /// Overrides the scenario's channel model.
    pub channel: ChannelModel,
}

const FIG5: &str = include_str!("../plans/fig5.json");
const FIG6: &str = include_str!("../plans/fig6.json");

/// Names of the plans shipped with the crate.
pub const BUNDLED_PLANS: [&str; 2] = ["fig5", "fig6"];

pub fn bundled_plan(name: &str) -> Option<ExperimentPlan> {
    let text = match name {
        "fig5" => FIG5,
        "fig6" => FIG6,
        _ => return None,
    };
    Some(ExperimentPlan::parse(text).expect("bundled plan is valid"))
}

impl ExperimentPlan {
    pub fn parse(text: &str) -> Result<Self> {
        let plan: Self = parse_json(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.format_version)?;
        let scenario = Scenario::from_file(self.scenario.clone())?;
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds", "at least one seed required"));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(Error::invalid("seeds", "seeds must be distinct"));
        }
        if self.policies.is_empty() {
            return Err(Error::invalid("policies", "at least one policy required"));
        }
        if self.policies.iter().collect::<BTreeSet<_>>().len() != self.policies.len() {
            return Err(Error::invalid("policies", "policies must be distinct"));
        }
        if self.sweep.len() == 0 {
            return Err(Error::invalid("sweep", "sweep values must be non-empty"));
        }
        let values = self.sweep.values();
        if values.iter().collect::<BTreeSet<_>>().len() != values.len() {
            return Err(Error::invalid("sweep", "sweep values must be distinct"));
        }
        match &self.sweep {
            Sweep::ClientCount(counts) => {
                let listed = scenario.file.task.client_sites.len();
                if let Some(n) = counts.iter().find(|&&n| n == 0 || n > listed) {
                    return Err(Error::invalid(
                        "sweep.client_count",
                        format!("{n} clients requested, scenario lists {listed}"),
                    ));
                }
            }
            Sweep::Model(names) => {
                if let Some(n) = names.iter().find(|n| catalog_model(n).is_none()) {
                    return Err(Error::invalid("sweep.model", format!("unknown model `{n}`")));
                }
            }
        }
        Ok(())
    }

    pub fn plan_hash(&self) -> String {
        canonical_hash(self)
    }

    /// Copy restricted to the first `n` seeds.
    pub fn with_max_seeds(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.seeds.truncate(n.max(1));
        out
    }

    fn scheduler_config(&self) -> SchedulerConfig {
        SchedulerConfig { channel: self.channel, ..self.scenario.scheduling.scheduler_config() }
    }

    fn tasks(&self, scenario: &Scenario) -> Result<Vec<(String, FlTask)>> {
        match &self.sweep {
            Sweep::ClientCount(counts) => {
                let model = scenario.model()?;
                counts.iter().map(|&n| Ok((n.to_string(), scenario.task_for(n, model.clone())?))).collect()
            }
            Sweep::Model(names) => {
                let n = scenario.file.task.client_sites.len();
                names
                    .iter()
                    .map(|name| {
                        let model = catalog_model(name).ok_or_else(|| Error::invalid("sweep.model", name.clone()))?;
                        Ok((name.clone(), scenario.task_for(n, model)?))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: String,
    pub policy: Policy,
    pub seed: u64,
    pub makespan_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_value: String,
    pub policy: Policy,
    pub count: usize,
    pub mean_s: f64,
    /// Sample standard deviation; zero for a single sample.
    pub std_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub sweep_value: String,
    pub multiplexed_mean_s: f64,
    pub on_demand_mean_s: f64,
    /// `(multiplexed - on_demand) / multiplexed`.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub sweep_value: String,
    pub policy: Policy,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub format_version: u32,
    pub tool_version: String,
    pub plan_hash: String,
    pub sweep_kind: String,
    pub sweep_values: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
    pub reductions: Vec<Reduction>,
    pub failures: Vec<CellFailure>,
}

fn schedule(policy: Policy, tg: &TemporalGraph, task: &FlTask, config: &SchedulerConfig) -> Result<RoundSchedule> {
    match policy {
        Policy::OnDemand => schedule_on_demand(tg, task, config, 0.0),
        Policy::StatisticalMultiplexing => schedule_multiplexed(tg, task, config, 0.0),
        Policy::OracleOptimal => oracle_schedule(tg, task, config, 0.0),
    }
}

/// Windows needed so that no cell of the plan can run past the horizon.
fn horizon_windows(plan: &ExperimentPlan, tasks: &[(String, FlTask)]) -> u32 {
    let sched = &plan.scenario.scheduling;
    let min_mbps = plan.scenario.constellation.bandwidth_dist.min_mbps;
    let needed = tasks
        .iter()
        .map(|(_, t)| {
            let max_mult = t.clients.iter().map(|c| c.training_multiplier).fold(0.0, f64::max);
            let mut bound = round_time_bound(&t.model, t.clients.len(), min_mbps, max_mult);
            if sched.include_propagation_delay {
                // generous allowance for one-way delays on a handful of hops per transfer
                bound += 2.0 * t.clients.len() as f64;
            }
            (bound / sched.window_length_s).ceil() as u32 + 1
        })
        .max()
        .unwrap_or(1);
    needed.max(sched.horizon_windows)
}

type SeedOutcome = (Vec<SweepRow>, Vec<CellFailure>);

fn run_seed(plan: &ExperimentPlan, base: &Scenario, tasks: &[(String, FlTask)], windows: u32, seed: u64) -> SeedOutcome {
    let config = plan.scheduler_config();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let fail_all = |failures: &mut Vec<CellFailure>, e: &Error| {
        for (value, _) in tasks {
            for &policy in &plan.policies {
                failures.push(CellFailure { sweep_value: value.clone(), policy, seed, error: e.to_string() });
            }
        }
    };
    let tg = match base.with_seed(seed).build_temporal_graph_with(windows) {
        Ok(tg) => tg,
        Err(e) => {
            fail_all(&mut failures, &e);
            return (rows, failures);
        }
    };
    for (value, task) in tasks {
        for &policy in &plan.policies {
            match schedule(policy, &tg, task, &config) {
                Ok(s) => rows.push(SweepRow { sweep_value: value.clone(), policy, seed, makespan_s: s.makespan_s }),
                Err(e) => {
                    log::info!("sweep cell {value}/{policy}/seed {seed} failed: {e}");
                    failures.push(CellFailure { sweep_value: value.clone(), policy, seed, error: e.to_string() });
                }
            }
        }
    }
    (rows, failures)
}

/// Runs every (sweep value, policy, seed) cell. Each seed regenerates the
/// constellation bandwidths, and every round starts at `t0 = 0`. Seeds run
/// in parallel on a pool of `jobs` threads (all cores when `None`); the
/// result does not depend on `jobs`.
pub fn run_sweep(plan: &ExperimentPlan, jobs: Option<usize>) -> Result<SweepResult> {
    plan.validate()?;
    let base = Scenario::from_file(plan.scenario.clone())?;
    let tasks = plan.tasks(&base)?;
    let windows = horizon_windows(plan, &tasks);

    let work = || -> Vec<SeedOutcome> {
        plan.seeds.par_iter().map(|&seed| run_seed(plan, &base, &tasks, windows, seed)).collect()
    };
    let outcomes = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?
            .install(work),
        None => work(),
    };

    let values = plan.sweep.values();
    let position: BTreeMap<&str, usize> = values.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in outcomes {
        rows.extend(r);
        failures.extend(f);
    }
    rows.sort_by(|a, b| {
        position[a.sweep_value.as_str()]
            .cmp(&position[b.sweep_value.as_str()])
            .then(a.policy.cmp(&b.policy))
            .then(a.seed.cmp(&b.seed))
    });
    failures.sort_by(|a, b| {
        position[a.sweep_value.as_str()]
            .cmp(&position[b.sweep_value.as_str()])
            .then(a.policy.cmp(&b.policy))
            .then(a.seed.cmp(&b.seed))
    });

    let summary = summarize(&values, &plan.policies, &rows);
    let reductions = reductions(&values, &summary);
    Ok(SweepResult {
        format_version: FORMAT_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        plan_hash: plan.plan_hash(),
        sweep_kind: plan.sweep.kind().to_string(),
        sweep_values: values,
        rows,
        summary,
        reductions,
        failures,
    })
}

fn summarize(values: &[String], policies: &[Policy], rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut sorted: Vec<Policy> = policies.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for value in values {
        for &policy in &sorted {
            let xs: Vec<f64> = rows
                .iter()
                .filter(|r| &r.sweep_value == value && r.policy == policy)
                .map(|r| r.makespan_s)
                .collect();
            if xs.is_empty() {
                continue;
            }
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let std = if xs.len() > 1 {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            out.push(SummaryRow { sweep_value: value.clone(), policy, count: xs.len(), mean_s: mean, std_s: std });
        }
    }
    out
}

fn find<'a>(summary: &'a [SummaryRow], value: &str, policy: Policy) -> Option<&'a SummaryRow> {
    summary.iter().find(|s| s.sweep_value == value && s.policy == policy)
}

fn reductions(values: &[String], summary: &[SummaryRow]) -> Vec<Reduction> {
    values
        .iter()
        .filter_map(|v| {
            let mux = find(summary, v, Policy::StatisticalMultiplexing)?;
            let od = find(summary, v, Policy::OnDemand)?;
            Some(Reduction {
                sweep_value: v.clone(),
                multiplexed_mean_s: mux.mean_s,
                on_demand_mean_s: od.mean_s,
                relative: (mux.mean_s - od.mean_s) / mux.mean_s,
            })
        })
        .collect()
}

impl SweepResult {
    pub fn mean(&self, value: &str, policy: Policy) -> Option<f64> {
        find(&self.summary, value, policy).map(|s| s.mean_s)
    }

    pub fn reduction(&self, value: &str) -> Option<f64> {
        self.reductions.iter().find(|r| r.sweep_value == value).map(|r| r.relative)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let r: Self = parse_json(text)?;
        check_version(r.format_version)?;
        Ok(r)
    }

    /// One row per successful cell, each carrying the plan hash and tool version.
    pub fn rows_csv(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            sweep_kind: &'a str,
            sweep_value: &'a str,
            policy: &'a str,
            seed: u64,
            makespan_s: f64,
            plan_hash: &'a str,
            tool_version: &'a str,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(Row {
                sweep_kind: &self.sweep_kind,
                sweep_value: &r.sweep_value,
                policy: r.policy.as_str(),
                seed: r.seed,
                makespan_s: r.makespan_s,
                plan_hash: &self.plan_hash,
                tool_version: &self.tool_version,
            })
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Text table comparing the two policies at every sweep value.
pub fn reduction_report(result: &SweepResult) -> Result<String> {
    for policy in [Policy::StatisticalMultiplexing, Policy::OnDemand] {
        if !result.rows.iter().any(|r| r.policy == policy) {
            return Err(Error::MissingPolicy(policy.as_str().to_string()));
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>14} {:>14} {:>12} {:>10} {:>4}",
        result.sweep_kind, "multiplexed_s", "on_demand_s", "saved_s", "reduction", "n"
    );
    for value in &result.sweep_values {
        let mux = find(&result.summary, value, Policy::StatisticalMultiplexing);
        let od = find(&result.summary, value, Policy::OnDemand);
        match (mux, od) {
            (Some(m), Some(o)) => {
                let rel = (m.mean_s - o.mean_s) / m.mean_s;
                let _ = writeln!(
                    out,
                    "{:<16} {:>14.3} {:>14.3} {:>12.3} {:>9.2}% {:>4}",
                    value,
                    m.mean_s,
                    o.mean_s,
                    m.mean_s - o.mean_s,
                    rel * 100.0,
                    m.count.min(o.count)
                );
            }
            _ => {
                let _ = writeln!(out, "{value:<16} {:>14} {:>14} {:>12} {:>10} {:>4}", "-", "-", "-", "-", 0);
            }
        }
    }
    Ok(out)
}
