mod error;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fabric_snn::faults::{default_campaign, zone_campaign, Campaign};
use fabric_snn::learning::{improve_margins, learn, LearningConfig, SearchStrategy};
use fabric_snn::netlist::{
    build_reference_network, parse_network, FabricNetwork, GroundingMode, InputPattern, TruthTable,
    WeightAssignment,
};
use fabric_snn::oracle::relax_solve;
use fabric_snn::perturbation::{monte_carlo, scenario_sweep, Execution, PerturbationSpec};
use fabric_snn::reference::{wearability_scenarios, REFERENCE_ASSIGNMENT_JSON};
use fabric_snn::sensors::{event_log, run_scenarios, touch_scenarios, InputMode, PressureSensorModel, TriggerBinding};
use fabric_snn::solver::{
    evaluate_truth_table, pattern_drives, solve_pattern, solve_transient_with, TransientOptions,
};

use crate::error::{CliError, CliResult};
use crate::io::{configure_threads, emit, parse_duration, report_json, write_atomic, RunManifest};

#[derive(Parser)]
#[command(name = "fabric-snn", version, about = "Fabric spiking neural network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one input pattern and print node voltages and outputs.
    Eval(EvalArgs),
    /// Print the realized truth table with margins.
    Table(TableArgs),
    /// Search resistor selections for a target table.
    Learn(LearnArgs),
    /// Run a disconnection campaign.
    Fault(FaultArgs),
    /// Monte Carlo resistance jitter statistics.
    Mc(McArgs),
    /// Write an RC transient trace as CSV.
    Transient(TransientArgs),
    /// Run pressure-sensor scenarios and log trigger events.
    Scenario(ScenarioArgs),
    /// Cross-check the direct solver against relaxation on all patterns.
    Verify(VerifyArgs),
    /// Write the reference network and its default input files.
    Reference(ReferenceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Grounded,
    Floating,
}

#[derive(Args)]
struct NetArgs {
    /// Network JSON file.
    #[arg(long)]
    net: PathBuf,
    /// Assignment JSON file; defaults to the selections stored in the network.
    #[arg(long)]
    assignment: Option<PathBuf>,
    /// Override the network's grounding mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Input bits A, B, C, e.g. 010.
    #[arg(long)]
    input: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Target table to score against.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Steepest,
    Annealing,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Sweeps per restart.
    #[arg(long, default_value_t = 5000)]
    iterations: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Steepest)]
    strategy: Strategy,
    /// Widen margins of an exact result without breaking any row.
    #[arg(long)]
    polish: bool,
    /// Exit 1 unless the target is realized exactly.
    #[arg(long)]
    require_exact: bool,
    /// Where to write the learned assignment.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the summary report; stdout if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct FaultArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Campaign JSON; defaults to the named N5/N8 experiments.
    #[arg(long)]
    campaign: Option<PathBuf>,
    /// Target table; defaults to the network's own unfaulted table.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per fault x pattern x node CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    net: NetArgs,
    /// One perturbation spec, or a list of scenario specs.
    #[arg(long)]
    spec: PathBuf,
    /// Seed for every spec in the file.
    #[arg(long)]
    seed: u64,
    /// Override the sample count of every spec.
    #[arg(long)]
    samples: Option<usize>,
    /// Run samples on one thread.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct TransientArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long)]
    input: String,
    /// Trace length, e.g. 10ms.
    #[arg(long, value_parser = parse_duration)]
    t_end: f64,
    /// Step, e.g. 1us.
    #[arg(long, value_parser = parse_duration)]
    dt: f64,
    /// Discharge outputs to 0 V on each threshold crossing.
    #[arg(long)]
    reset: bool,
    /// CSV trace; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary with crossing times and time constants.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Scenario list; defaults to the eight touch scenarios.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Sensor model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Drive terminals with sensor voltages instead of logic levels.
    #[arg(long)]
    analog: bool,
    #[arg(long, default_value = "111")]
    trigger_pattern: String,
    #[arg(long, default_value = "X")]
    trigger_output: String,
    /// Trigger events as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Relaxation stopping tolerance, volts.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_sweeps: usize,
    /// Largest accepted disagreement, volts.
    #[arg(long, default_value_t = 1e-9)]
    max_diff: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReferenceArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    dir: PathBuf,
}

struct Loaded {
    network: FabricNetwork,
    assignment: WeightAssignment,
}

fn load(args: &NetArgs, manifest: &mut RunManifest) -> CliResult<Loaded> {
    let mut network = parse_network(&manifest.read(&args.net)?)?;
    if let Some(mode) = args.mode {
        network.grounding_mode = match mode {
            Mode::Grounded => GroundingMode::GroundedZeros,
            Mode::Floating => GroundingMode::FloatingZeros,
        };
    }
    let assignment = match &args.assignment {
        Some(p) => WeightAssignment::parse(&network, &manifest.read(p)?)?,
        None => WeightAssignment::from_network(&network),
    };
    let network = network.with_assignment(&assignment)?;
    Ok(Loaded { network, assignment })
}

fn read_table(path: &Path, manifest: &mut RunManifest) -> CliResult<TruthTable> {
    Ok(TruthTable::parse(&manifest.read(path)?)?)
}

fn pattern(text: &str) -> CliResult<InputPattern> {
    text.parse()
        .map_err(|_| CliError::input(format!("--input must be three bits such as 010, got {text:?}")))
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let mut m = RunManifest::new("eval");
    let l = load(&args.net, &mut m)?;
    let p = pattern(&args.input)?;
    let solution = solve_pattern(&l.network, p, &l.assignment)?;
    #[derive(Serialize)]
    struct Report<'a> {
        pattern: String,
        outputs: String,
        solution: &'a fabric_snn::DcSolution,
    }
    let report = Report {
        pattern: p.to_string(),
        outputs: bits(&solution.output_bits()),
        solution: &solution,
    };
    emit(args.out.as_deref(), &report_json(&m, &report))
}

fn bits(b: &[bool]) -> String {
    b.iter().map(|&x| if x { '1' } else { '0' }).collect()
}

fn cmd_table(args: TableArgs) -> CliResult<()> {
    let mut m = RunManifest::new("table");
    let l = load(&args.net, &mut m)?;
    let target = args.target.as_deref().map(|p| read_table(p, &mut m)).transpose()?;
    let eval = evaluate_truth_table(&l.network, &l.assignment)?;
    #[derive(Serialize)]
    struct Report<'a> {
        table: &'a TruthTable,
        rows: &'a [fabric_snn::solver::RowEvaluation],
        min_abs_margin: f64,
        target_error: Option<u32>,
    }
    let report = Report {
        table: &eval.table,
        rows: &eval.rows,
        min_abs_margin: eval.min_abs_margin(),
        target_error: target.map(|t| fabric_snn::learning::table_error(&eval.table, &t)),
    };
    emit(args.out.as_deref(), &report_json(&m, &report))
}

fn cmd_learn(args: LearnArgs) -> CliResult<()> {
    let mut m = RunManifest::new("learn");
    let l = load(&args.net, &mut m)?;
    let target = read_table(&args.target, &mut m)?;
    m.seeds.push(args.seed);
    let config = LearningConfig {
        seed: args.seed,
        restarts: args.restarts,
        max_iterations: args.iterations,
        strategy: match args.strategy {
            Strategy::Steepest => SearchStrategy::SteepestSwap,
            Strategy::Annealing => SearchStrategy::annealing(),
        },
        ..LearningConfig::default()
    };
    let mut result = learn(&l.network, &target, &config)?;
    if args.polish && result.error == 0 {
        let polished = improve_margins(&l.network, &result.assignment, &target, &config)?;
        result.assignment = polished.assignment;
        result.min_margin = polished.min_margin;
    }
    write_atomic(&args.out, &result.assignment.to_json(&l.network))?;
    emit(args.report.as_deref(), &report_json(&m, &result))?;
    if args.require_exact && result.error > 0 {
        return Err(CliError::objective(format!(
            "best assignment misses {} output bits",
            result.error
        )));
    }
    Ok(())
}

fn cmd_fault(args: FaultArgs) -> CliResult<()> {
    let mut m = RunManifest::new("fault");
    let l = load(&args.net, &mut m)?;
    let campaign = match &args.campaign {
        Some(p) => Campaign::parse(&m.read(p)?)?,
        None => default_campaign(&l.network, &l.assignment)?,
    };
    let target = match &args.target {
        Some(p) => read_table(p, &mut m)?,
        None => evaluate_truth_table(&l.network, &l.assignment)?.table,
    };
    let report = zone_campaign(&l.network, &l.assignment, &campaign, &target)?;
    if let Some(csv) = &args.csv {
        write_atomic(csv, &report.to_csv())?;
    }
    emit(args.out.as_deref(), &report_json(&m, &report))
}

fn cmd_mc(args: McArgs) -> CliResult<()> {
    let mut m = RunManifest::new("mc");
    let l = load(&args.net, &mut m)?;
    let doc = m.read(&args.spec)?;
    let (mut specs, single) = match PerturbationSpec::parse_list(&doc) {
        Ok(list) => (list, false),
        Err(_) => (vec![PerturbationSpec::parse(&doc)?], true),
    };
    for s in &mut specs {
        s.seed = args.seed;
        if let Some(n) = args.samples {
            s.samples = n;
        }
        s.validate()?;
    }
    m.seeds.push(args.seed);
    let execution = if args.serial { Execution::Serial } else { Execution::Parallel };
    if single {
        let report = monte_carlo(&l.network, &l.assignment, &specs[0], execution)?;
        if let Some(csv) = &args.csv {
            write_atomic(csv, &report.to_csv())?;
        }
        emit(args.out.as_deref(), &report_json(&m, &report))
    } else {
        let report = scenario_sweep(&l.network, &l.assignment, &specs, execution)?;
        if let Some(csv) = &args.csv {
            let mut out = String::from("scenario,");
            out.push_str("pattern,output,vmin,vmax,mean,flip_rate\n");
            for s in &report.scenarios {
                for line in s.to_csv().lines().skip(1) {
                    out.push_str(&format!("{},{line}\n", s.label));
                }
            }
            write_atomic(csv, &out)?;
        }
        emit(args.out.as_deref(), &report_json(&m, &report))
    }
}

fn cmd_transient(args: TransientArgs) -> CliResult<()> {
    let mut m = RunManifest::new("transient");
    let l = load(&args.net, &mut m)?;
    let p = pattern(&args.input)?;
    let options = TransientOptions {
        initial_voltages: None,
        reset_on_crossing: args.reset,
    };
    let trace = solve_transient_with(
        &l.network,
        &pattern_drives(&l.network, p),
        &l.assignment,
        args.t_end,
        args.dt,
        &options,
    )?;
    emit(args.out.as_deref(), &trace.to_csv())?;
    if let Some(path) = &args.report {
        #[derive(Serialize)]
        struct Report<'a> {
            pattern: String,
            t_end: f64,
            dt: f64,
            steps: usize,
            max_time_constant: f64,
            crossings: &'a [fabric_snn::solver::Crossing],
            node_ids: &'a [String],
            steady_state: &'a [f64],
            final_voltages: &'a [f64],
            /// Largest |final - steady state|, volts.
            settle_error: f64,
        }
        let settle_error = trace
            .final_voltages()
            .iter()
            .zip(&trace.steady_state)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let report = Report {
            pattern: p.to_string(),
            t_end: args.t_end,
            dt: args.dt,
            steps: trace.times.len().saturating_sub(1),
            max_time_constant: trace.max_time_constant,
            crossings: &trace.crossings,
            node_ids: &trace.node_ids,
            steady_state: &trace.steady_state,
            final_voltages: trace.final_voltages(),
            settle_error,
        };
        write_atomic(path, &report_json(&m, &report))?;
    }
    Ok(())
}

fn cmd_scenario(args: ScenarioArgs) -> CliResult<()> {
    let mut m = RunManifest::new("scenario");
    let l = load(&args.net, &mut m)?;
    let scenarios = match &args.scenarios {
        Some(p) => fabric_snn::sensors::parse_scenarios(&m.read(p)?)?,
        None => touch_scenarios(),
    };
    let model: PressureSensorModel = match &args.model {
        Some(p) => serde_json::from_str(&m.read(p)?).map_err(|e| CliError::input(format!("sensor model: {e}")))?,
        None => PressureSensorModel::default(),
    };
    pattern(&args.trigger_pattern)?;
    let binding = TriggerBinding {
        pattern: args.trigger_pattern.clone(),
        output: args.trigger_output.clone(),
        ..TriggerBinding::default()
    };
    let mode = if args.analog { InputMode::Analog } else { InputMode::Logic };
    let (results, events) = run_scenarios(&l.network, &l.assignment, &model, &scenarios, mode, &binding)?;
    if let Some(path) = &args.events {
        write_atomic(path, &event_log(&events))?;
    }
    #[derive(Serialize)]
    struct Report<'a> {
        model: PressureSensorModel,
        binding: &'a TriggerBinding,
        scenarios: &'a [fabric_snn::sensors::ScenarioResult],
        events: &'a [fabric_snn::sensors::TriggerEvent],
    }
    let report = Report {
        model,
        binding: &binding,
        scenarios: &results,
        events: &events,
    };
    emit(args.out.as_deref(), &report_json(&m, &report))
}

fn cmd_verify(args: VerifyArgs) -> CliResult<()> {
    let mut m = RunManifest::new("verify");
    let l = load(&args.net, &mut m)?;
    #[derive(Serialize)]
    struct Row {
        pattern: String,
        max_diff: f64,
        worst_node: String,
        sweeps: usize,
    }
    let mut rows = Vec::new();
    for p in InputPattern::all() {
        let direct = solve_pattern(&l.network, p, &l.assignment)?;
        let relaxed = relax_solve(&l.network, p, &l.assignment, args.tol, args.max_sweeps)?;
        let (worst, diff) = direct
            .voltages
            .iter()
            .zip(&relaxed.voltages)
            .map(|(a, b)| (a - b).abs())
            .enumerate()
            .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
        rows.push(Row {
            pattern: p.to_string(),
            max_diff: diff,
            worst_node: direct.node_ids.get(worst).cloned().unwrap_or_default(),
            sweeps: relaxed.iterations,
        });
    }
    let max_diff = rows.iter().map(|r| r.max_diff).fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Report {
        rows: Vec<Row>,
        max_diff: f64,
        limit: f64,
        agree: bool,
    }
    let agree = max_diff <= args.max_diff;
    emit(
        args.out.as_deref(),
        &report_json(
            &m,
            &Report {
                rows,
                max_diff,
                limit: args.max_diff,
                agree,
            },
        ),
    )?;
    if !agree {
        return Err(CliError::objective(format!(
            "solver and relaxation disagree by {max_diff:e} V (limit {:e} V)",
            args.max_diff
        )));
    }
    Ok(())
}

fn cmd_reference(args: ReferenceArgs) -> CliResult<()> {
    std::fs::create_dir_all(&args.dir).map_err(|e| CliError::input(format!("{}: {e}", args.dir.display())))?;
    let net = build_reference_network();
    let weights = WeightAssignment::parse(&net, REFERENCE_ASSIGNMENT_JSON)?;
    let files: Vec<(&str, String)> = vec![
        ("ref.json", net.to_json()),
        ("target_table.json", TruthTable::reference().to_json()),
        ("ref_weights.json", weights.to_json(&net)),
        ("campaign.json", default_campaign(&net, &weights)?.to_json()),
        ("mc.json", json(&PerturbationSpec::new(10_000, 1))),
        ("wearability.json", json(&wearability_scenarios(10_000, 1))),
        ("scenarios.json", json(&touch_scenarios())),
        ("sensor_model.json", json(&PressureSensorModel::default())),
    ];
    for (name, body) in files {
        let mut body = body;
        if !body.ends_with('\n') {
            body.push('\n');
        }
        write_atomic(&args.dir.join(name), &body)?;
        println!("{}", args.dir.join(name).display());
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Table(a) => cmd_table(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Fault(a) => cmd_fault(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Transient(a) => cmd_transient(a),
        Command::Scenario(a) => cmd_scenario(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Reference(a) => cmd_reference(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}
