//! Command-line interface for the solvers and the sweep harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qag_cli::{emit_results, run_scheme, EmitFormat, Scheme, SweepSpec};
use qag_core::baselines::{RnfConfigSelector, DEFAULT_ORACLE_BUDGET};
use qag_core::cost::AppAssignment;
use qag_core::fixtures::{fixture_large_scenario, fixture_small_example};
use qag_core::orchestrator::{OrchestrationResult, QaoaSettings};
use qag_core::scenario::{load_scenario, save_scenario, Scenario};

#[derive(Parser)]
#[command(
    name = "qag",
    about = "Energy-aware assignment of applications to (configuration, compute node) pairs",
    version
)]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Variational circuit layers (p).
    #[arg(long, global = true, default_value_t = 2)]
    layers: usize,

    /// Measurement shots per partition step.
    #[arg(long, global = true, default_value_t = 100)]
    shots: u32,

    /// Optimizer iterations per partition step.
    #[arg(long = "qaoa-iters", global = true, default_value_t = 100)]
    qaoa_iters: usize,

    /// Largest graph simulated on the statevector; bigger graphs use the
    /// classical max-cut fallback.
    #[arg(long, global = true, env = "QAG_QUBIT_BUDGET", default_value_t = 20)]
    qubit_budget: usize,

    /// Output format for result files: csv or json.
    #[arg(long, global = true, default_value = "csv")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario with one scheme and print per-app outcomes.
    Solve(SolveArgs),
    /// Run a (latency x loss) target sweep and write a results table.
    Sweep(SweepArgs),
    /// Exhaustive-search optimum only.
    Oracle(OracleArgs),
    /// Write the bundled reference scenarios to disk.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Scenario: a file path, `fixture:small`, or `fixture:large`.
    #[arg(long)]
    scenario: String,

    /// Scheme: qag, opt, or rnf.
    #[arg(long, default_value = "qag")]
    scheme: String,

    /// Override every application's latency target (seconds).
    #[arg(long = "tau-max")]
    tau_max: Option<f64>,

    /// Override every application's loss target (MAPE percent).
    #[arg(long = "loss-max")]
    loss_max: Option<f64>,

    /// Fixed-configuration selector for rnf: pretrained, max-train, or a
    /// configuration index.
    #[arg(long = "rnf-config", default_value = "pretrained")]
    rnf_config: String,

    /// Candidate budget for the exhaustive search.
    #[arg(long = "oracle-budget", default_value_t = DEFAULT_ORACLE_BUDGET)]
    oracle_budget: f64,

    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario: a file path, `fixture:small`, or `fixture:large`.
    #[arg(long)]
    scenario: String,

    /// Comma-separated schemes to run (qag, opt, rnf).
    #[arg(long, default_value = "qag,rnf")]
    schemes: String,

    /// Comma-separated latency targets in seconds.
    #[arg(long = "tau-grid", required = true)]
    tau_grid: String,

    /// Comma-separated loss targets in MAPE percent.
    #[arg(long = "loss-grid", required = true)]
    loss_grid: String,

    /// Instances per grid cell.
    #[arg(long, default_value_t = 200)]
    iterations: usize,

    #[arg(long = "rnf-config", default_value = "pretrained")]
    rnf_config: String,

    #[arg(long = "oracle-budget", default_value_t = DEFAULT_ORACLE_BUDGET)]
    oracle_budget: f64,

    /// Record measured wall time per solve in the wall_time_s column.
    /// Off by default so repeated runs produce byte-identical files.
    #[arg(long)]
    timing: bool,

    /// Results file.
    #[arg(long, required = true)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    scenario: String,

    #[arg(long = "tau-max")]
    tau_max: Option<f64>,

    #[arg(long = "loss-max")]
    loss_max: Option<f64>,

    #[arg(long = "oracle-budget", default_value_t = DEFAULT_ORACLE_BUDGET)]
    oracle_budget: f64,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    /// Output directory for small.json and large.json.
    #[arg(long)]
    out: PathBuf,
}

fn load_named_scenario(spec: &str, seed: u64) -> anyhow::Result<Scenario<f64>> {
    match spec {
        "fixture:small" => Ok(fixture_small_example()),
        "fixture:large" => Ok(fixture_large_scenario(seed)),
        path => load_scenario(Path::new(path))
            .with_context(|| format!("loading scenario from `{path}`")),
    }
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid grid value `{v}`"))
        })
        .collect()
}

fn parse_rnf_selector(s: &str, scenario: &Scenario<f64>) -> anyhow::Result<RnfConfigSelector> {
    match s.trim().to_ascii_lowercase().as_str() {
        "pretrained" => Ok(RnfConfigSelector::Pretrained),
        "max-train" => Ok(RnfConfigSelector::MaxTraining),
        other => {
            let index: usize = other
                .parse()
                .with_context(|| format!("rnf-config must be pretrained, max-train, or an index; got `{other}`"))?;
            if index >= scenario.configurations.len() {
                bail!("rnf-config index {index} out of range");
            }
            Ok(RnfConfigSelector::Fixed(vec![index; scenario.applications.len()]))
        }
    }
}

fn qaoa_settings(cli: &Cli) -> QaoaSettings<f64> {
    QaoaSettings {
        layers: cli.layers,
        shots: cli.shots,
        max_iters: cli.qaoa_iters,
        qubit_budget: cli.qubit_budget,
        ..QaoaSettings::default()
    }
}

/// Plain-text per-application report.
fn render_solve_report(
    scheme: &str,
    scenario: &Scenario<f64>,
    result: &OrchestrationResult<f64>,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("scheme: {scheme}\n"));
    out.push_str("app\tstatus\tconfig\tnode\trate_tops\tlatency_s\tloss_mape\tenergy_j\tfeasible\n");
    for (app, row) in result.assignment.rows.iter().enumerate() {
        let app_id = &scenario.applications[app].id;
        match (*row, &result.per_app[app]) {
            (AppAssignment::Served { config, node, rate_tops }, Some(outcome)) => {
                out.push_str(&format!(
                    "{}\tserved\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\n",
                    app_id,
                    scenario.configurations[config].id,
                    scenario.nodes[node].id,
                    rate_tops,
                    outcome.latency_s,
                    outcome.loss_mape,
                    outcome.energy_j,
                    if outcome.feasible { "yes" } else { "no" },
                ));
            }
            _ => out.push_str(&format!("{app_id}\tchurned\t-\t-\t-\t-\t-\t-\t-\n")),
        }
    }
    out.push_str(&format!("system_energy_j: {:.6}\n", result.system_energy_j));
    out.push_str(&format!(
        "served: {}/{}\n",
        result.served_count(),
        result.assignment.rows.len()
    ));
    out.push_str(&format!("churn_rate: {:.6}\n", result.churn_rate()));
    if result.diagnostics.used_classical_fallback() {
        out.push_str("partitioning: classical fallback engaged\n");
    }
    out
}

fn write_or_print(text: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing `{}`", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Solve(args) => {
            let mut scenario = load_named_scenario(&args.scenario, cli.seed)?;
            if let Some(tau) = args.tau_max {
                for a in &mut scenario.applications {
                    a.latency_max = tau;
                }
            }
            if let Some(loss) = args.loss_max {
                for a in &mut scenario.applications {
                    a.loss_max = loss;
                }
            }
            let scheme = Scheme::parse(&args.scheme)?;
            let spec = SweepSpec {
                qaoa: qaoa_settings(&cli),
                rnf_selector: parse_rnf_selector(&args.rnf_config, &scenario)?,
                oracle_budget: args.oracle_budget,
                ..SweepSpec::default()
            };
            let result = run_scheme(scheme, &scenario, &spec, cli.seed)?;
            write_or_print(&render_solve_report(scheme.as_str(), &scenario, &result), args.out.as_ref())
        }
        Command::Sweep(args) => {
            let scenario = load_named_scenario(&args.scenario, cli.seed)?;
            let schemes = args
                .schemes
                .split(',')
                .map(Scheme::parse)
                .collect::<Result<Vec<_>, _>>()?;
            let spec = SweepSpec {
                schemes,
                tau_grid: parse_grid(&args.tau_grid)?,
                loss_grid: parse_grid(&args.loss_grid)?,
                iterations: args.iterations,
                base_seed: cli.seed,
                qaoa: qaoa_settings(&cli),
                rnf_selector: parse_rnf_selector(&args.rnf_config, &scenario)?,
                oracle_budget: args.oracle_budget,
                record_wall_time: args.timing,
            };
            let result = qag_cli::run_sweep(&spec, &scenario)?;
            let format = EmitFormat::parse(&cli.format)?;
            emit_results(&result, &args.out, format)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), args.out.display());
            Ok(())
        }
        Command::Oracle(args) => {
            let mut scenario = load_named_scenario(&args.scenario, cli.seed)?;
            if let Some(tau) = args.tau_max {
                for a in &mut scenario.applications {
                    a.latency_max = tau;
                }
            }
            if let Some(loss) = args.loss_max {
                for a in &mut scenario.applications {
                    a.loss_max = loss;
                }
            }
            let result = qag_core::baselines::optimal_solve(&scenario, args.oracle_budget)?;
            write_or_print(&render_solve_report("opt", &scenario, &result), args.out.as_ref())
        }
        Command::Fixtures(args) => {
            std::fs::create_dir_all(&args.out)
                .with_context(|| format!("creating `{}`", args.out.display()))?;
            let small = fixture_small_example::<f64>();
            let large = fixture_large_scenario::<f64>(cli.seed);
            save_scenario(&small, &args.out.join("small.json"))?;
            save_scenario(&large, &args.out.join("large.json"))?;
            eprintln!("wrote small.json and large.json to {}", args.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
