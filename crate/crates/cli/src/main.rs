use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fedsched_core::experiment::{bundled_plan, reduction_report, run_sweep, ExperimentPlan, BUNDLED_PLANS};
use fedsched_core::gantt::render_svg;
use fedsched_core::io::{schedule_csv, GraphFile, ScheduleFile};
use fedsched_core::scenario::Scenario;
use fedsched_core::{
    oracle_schedule, schedule_multiplexed, schedule_on_demand, ChannelModel, Error, Phase, Policy, RoundSchedule,
};

#[derive(Parser)]
#[command(name = "fedsched", version, about = "Schedule federated-learning rounds over LEO satellite networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the temporal graph of a scenario and write it to a file.
    Generate(GenerateArgs),
    /// Schedule one round on a generated graph.
    Schedule(ScheduleArgs),
    /// Run an experiment plan and print the reduction table.
    Sweep(SweepArgs),
    /// Render a schedule file as an SVG Gantt chart.
    Gantt(GanttArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's bandwidth seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "on_demand")]
    policy: Policy,
    /// Round start time in seconds.
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// Overrides the scenario's channel model.
    #[arg(long)]
    channel: Option<ChannelModel>,
    /// Seed recorded in the output; defaults to the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix; writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Plan file.
    #[arg(long, conflicts_with = "bundled", required_unless_present = "bundled")]
    plan: Option<PathBuf>,
    /// Name of a plan shipped with the tool (fig5, fig6).
    #[arg(long)]
    bundled: Option<String>,
    /// Output directory for sweep.csv and sweep.json.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Run only the first N seeds of the plan.
    #[arg(long)]
    max_seeds: Option<usize>,
}

#[derive(Args)]
struct GanttArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: 3, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoRoute { .. } | Error::Unreachable { .. } => 4,
            Error::OutOfHorizon { .. } | Error::WindowOverrun { .. } => 5,
            Error::TooManyClients { .. } => 6,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn load_scenario(path: &Path) -> CliResult<Scenario> {
    Scenario::parse(&read(path)?).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })
}

fn generate(args: GenerateArgs) -> CliResult {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario = scenario.with_seed(seed);
    }
    let tg = scenario.build_temporal_graph()?;
    write(&args.out, &GraphFile::from_scenario(&scenario, &tg).to_json())?;
    for snap in tg.snapshots() {
        println!(
            "window {} start_s={} nodes={} edges={}",
            snap.window_index(),
            snap.window_start_s(),
            snap.vertices().len(),
            snap.edges().len()
        );
    }
    Ok(())
}

fn summary_line(s: &RoundSchedule) -> String {
    format!(
        "policy={} makespan_s={:.3} distribute_s={:.3} train_s={:.3} upload_s={:.3} window_overruns={}",
        s.policy,
        s.makespan_s,
        s.phase_total_s(Phase::Distribute),
        s.phase_total_s(Phase::Train),
        s.phase_total_s(Phase::Upload),
        s.window_overruns
    )
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn schedule(args: ScheduleArgs) -> CliResult {
    let scenario = load_scenario(&args.scenario)?;
    let graph_file = GraphFile::parse(&read(&args.graph)?)
        .map_err(|e| Failure { code: 2, message: format!("{}: {e}", args.graph.display()) })?;
    graph_file.check_compatible(&scenario)?;
    let seed = args.seed.unwrap_or(scenario.file.constellation.rng_seed);
    let scenario = scenario.with_seed(seed);
    if graph_file.config_hash != scenario.config_hash() {
        log::warn!("graph was generated from a different scenario or seed");
    }
    let tg = graph_file.temporal_graph()?;
    let task = scenario.task()?;
    let mut config = scenario.scheduler_config();
    if let Some(channel) = args.channel {
        config.channel = channel;
    }
    let s = match args.policy {
        Policy::OnDemand => schedule_on_demand(&tg, &task, &config, args.t0),
        Policy::StatisticalMultiplexing => schedule_multiplexed(&tg, &task, &config, args.t0),
        Policy::OracleOptimal => oracle_schedule(&tg, &task, &config, args.t0),
    }?;
    let line = summary_line(&s);
    write(&with_suffix(&args.out, "csv"), &schedule_csv(&s))?;
    write(&with_suffix(&args.out, "json"), &ScheduleFile::new(s, seed, scenario.config_hash()).to_json())?;
    println!("{line}");
    Ok(())
}

fn sweep(args: SweepArgs) -> CliResult {
    let plan = match (&args.plan, &args.bundled) {
        (Some(path), _) => ExperimentPlan::parse(&read(path)?)
            .map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })?,
        (None, Some(name)) => bundled_plan(name).ok_or_else(|| Failure {
            code: 2,
            message: format!("unknown bundled plan `{name}` (available: {})", BUNDLED_PLANS.join(", ")),
        })?,
        (None, None) => unreachable!("clap requires --plan or --bundled"),
    };
    let plan = match args.max_seeds {
        Some(n) => plan.with_max_seeds(n),
        None => plan,
    };
    let result = run_sweep(&plan, args.jobs)?;
    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    write(&args.out.join("sweep.csv"), &result.rows_csv())?;
    write(&args.out.join("sweep.json"), &result.to_json())?;
    match reduction_report(&result) {
        Ok(table) => print!("{table}"),
        Err(e) => log::info!("no reduction table: {e}"),
    }
    if !result.failures.is_empty() {
        eprintln!("{} sweep cells failed; see `failures` in sweep.json", result.failures.len());
    }
    Ok(())
}

fn gantt(args: GanttArgs) -> CliResult {
    let file = ScheduleFile::parse(&read(&args.schedule)?)
        .map_err(|e| Failure { code: 2, message: format!("{}: {e}", args.schedule.display()) })?;
    write(&args.out, &render_svg(&file.schedule))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FEDSCHED_LOG", "error")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Schedule(a) => schedule(a),
        Command::Sweep(a) => sweep(a),
        Command::Gantt(a) => gantt(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
