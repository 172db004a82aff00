//! Sweep harness: seeded Monte Carlo evaluation of the solvers over latency
//! and loss target grids, with confidence intervals and churn rates.
//!
//! Each grid cell runs `iterations` seeded instances drawn from the
//! scenario's configuration and node pools (with replacement); every scheme
//! solves the same instance so comparisons are paired. Aggregation is
//! deterministic given the base seed.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use qag_core::baselines::{optimal_solve, rnf_solve, RnfConfigSelector};
use qag_core::error::{Error, Result};
use qag_core::orchestrator::{solve, OrchestrationResult, QaoaSettings};
use qag_core::scenario::Scenario;

/// Solver schemes the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Qag,
    Opt,
    Rnf,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Qag => "qag",
            Scheme::Opt => "opt",
            Scheme::Rnf => "rnf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qag" => Ok(Scheme::Qag),
            "opt" => Ok(Scheme::Opt),
            "rnf" => Ok(Scheme::Rnf),
            other => Err(Error::Validation(format!("unknown scheme `{other}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sweep description: which schemes to run over which target grids.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub schemes: Vec<Scheme>,
    pub tau_grid: Vec<f64>,
    pub loss_grid: Vec<f64>,
    pub iterations: usize,
    pub base_seed: u64,
    pub qaoa: QaoaSettings<f64>,
    pub rnf_selector: RnfConfigSelector,
    pub oracle_budget: f64,
    /// Record measured wall time per solve. Off by default so emitted files
    /// are byte-identical across runs.
    pub record_wall_time: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Qag, Scheme::Rnf],
            tau_grid: vec![5.0],
            loss_grid: vec![20.0],
            iterations: 200,
            base_seed: 42,
            qaoa: QaoaSettings::default(),
            rnf_selector: RnfConfigSelector::Pretrained,
            oracle_budget: qag_core::baselines::DEFAULT_ORACLE_BUDGET,
            record_wall_time: false,
        }
    }
}

/// One aggregated result row: a (scheme, cell) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub tau_max: f64,
    pub loss_max: f64,
    pub mean_energy_j: f64,
    pub ci95_j: f64,
    pub churn_rate: f64,
    pub wall_time_s: f64,
    /// Mean energy per served application instance (not emitted; NaN when
    /// nothing was served in the cell).
    #[serde(skip)]
    pub mean_energy_per_served_j: f64,
}

/// Aggregated sweep output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// splitmix64, used to derive independent per-iteration seeds.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for one (cell, iteration) pair, derived from the base seed.
pub fn derive_seed(base_seed: u64, cell: usize, iteration: usize) -> u64 {
    splitmix64(
        splitmix64(base_seed)
            ^ splitmix64(cell as u64 ^ 0x5851F42D4C957F2D)
            ^ splitmix64(iteration as u64 ^ 0x14057B7EF767814F),
    )
}

/// Draws one instance: configurations and nodes are sampled with replacement
/// from the scenario pools, profiles follow the drawn configurations.
pub fn draw_instance(scenario: &Scenario<f64>, seed: u64) -> Scenario<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut configurations = Vec::with_capacity(scenario.configurations.len());
    let mut sources = Vec::with_capacity(scenario.configurations.len());
    for i in 0..scenario.configurations.len() {
        let pick = rng.gen_range(0..scenario.configurations.len());
        let mut config = scenario.configurations[pick].clone();
        sources.push(config.id.clone());
        config.id = format!("{}#{}", config.id, i);
        configurations.push(config);
    }

    let mut nodes = Vec::with_capacity(scenario.nodes.len());
    for i in 0..scenario.nodes.len() {
        let pick = rng.gen_range(0..scenario.nodes.len());
        let mut node = scenario.nodes[pick].clone();
        node.id = format!("{}#{}", node.id, i);
        nodes.push(node);
    }

    let mut profiles = Vec::with_capacity(scenario.applications.len() * configurations.len());
    for app in &scenario.applications {
        for (config, source) in configurations.iter().zip(&sources) {
            let entry = scenario
                .profiles
                .iter()
                .find(|p| &p.app == &app.id && &p.config == source)
                .expect("validated scenario has all profile entries");
            let mut entry = entry.clone();
            entry.config = config.id.clone();
            profiles.push(entry);
        }
    }

    Scenario {
        schema_version: scenario.schema_version,
        applications: scenario.applications.clone(),
        configurations,
        nodes,
        profiles,
    }
}

fn oracle_space(scenario: &Scenario<f64>) -> f64 {
    let h = scenario.applications.len() as i32;
    (scenario.configurations.len() as f64).powi(h)
        * (scenario.nodes.len() as f64).powi(h)
        * scenario.applications.len() as f64
}

/// Runs the sweep. Rows come out cell-major (tau outer, loss inner), one row
/// per scheme within a cell. Deterministic given `spec.base_seed`.
pub fn run_sweep(spec: &SweepSpec, scenario: &Scenario<f64>) -> Result<SweepResult> {
    if spec.iterations == 0 {
        return Err(Error::Validation("iterations must be >= 1".into()));
    }
    if spec.tau_grid.is_empty() || spec.loss_grid.is_empty() {
        return Err(Error::Validation("tau and loss grids must be non-empty".into()));
    }
    if spec.schemes.is_empty() {
        return Err(Error::Validation("at least one scheme required".into()));
    }
    scenario.validate()?;
    if spec.schemes.contains(&Scheme::Opt) {
        let space = oracle_space(scenario);
        if space > spec.oracle_budget {
            return Err(Error::OracleBudget { space, budget: spec.oracle_budget });
        }
    }

    let n_apps = scenario.applications.len();
    let mut rows = Vec::new();
    let mut cell = 0usize;
    for &tau in &spec.tau_grid {
        for &loss in &spec.loss_grid {
            let mut per_scheme: Vec<CellAccumulator> =
                spec.schemes.iter().map(|_| CellAccumulator::default()).collect();
            for iteration in 0..spec.iterations {
                let seed = derive_seed(spec.base_seed, cell, iteration);
                let instance = draw_instance(scenario, seed).with_targets(tau, loss);
                for (slot, scheme) in spec.schemes.iter().enumerate() {
                    let start = Instant::now();
                    let result = run_scheme(*scheme, &instance, spec, seed)?;
                    let wall = start.elapsed().as_secs_f64();
                    per_scheme[slot].add(&result, wall, n_apps);
                }
            }
            for (slot, scheme) in spec.schemes.iter().enumerate() {
                rows.push(per_scheme[slot].finish(
                    *scheme,
                    tau,
                    loss,
                    spec.iterations,
                    n_apps,
                    spec.record_wall_time,
                ));
            }
            cell += 1;
        }
    }
    Ok(SweepResult { rows })
}

/// Runs one scheme on one instance.
pub fn run_scheme(
    scheme: Scheme,
    instance: &Scenario<f64>,
    spec: &SweepSpec,
    seed: u64,
) -> Result<OrchestrationResult<f64>> {
    match scheme {
        Scheme::Qag => solve(instance, &spec.qaoa, splitmix64(seed ^ 0xA5A5_A5A5_A5A5_A5A5)),
        Scheme::Opt => optimal_solve(instance, spec.oracle_budget),
        Scheme::Rnf => rnf_solve(instance, &spec.rnf_selector),
    }
}

#[derive(Default)]
struct CellAccumulator {
    energies: Vec<f64>,
    churned_apps: usize,
    served_apps: usize,
    wall: f64,
}

impl CellAccumulator {
    fn add(&mut self, result: &OrchestrationResult<f64>, wall: f64, _n_apps: usize) {
        self.energies.push(result.system_energy_j);
        self.churned_apps += result.churned.len();
        self.served_apps += result.served_count();
        self.wall += wall;
    }

    fn finish(
        &self,
        scheme: Scheme,
        tau: f64,
        loss: f64,
        iterations: usize,
        n_apps: usize,
        record_wall_time: bool,
    ) -> SweepRow {
        let n = self.energies.len() as f64;
        let mean = self.energies.iter().sum::<f64>() / n;
        let ci95 = if self.energies.len() > 1 {
            let var = self
                .energies
                .iter()
                .map(|e| (e - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            1.96 * (var / n).sqrt()
        } else {
            0.0
        };
        let total_energy: f64 = self.energies.iter().sum();
        SweepRow {
            scheme,
            tau_max: tau,
            loss_max: loss,
            mean_energy_j: mean,
            ci95_j: ci95,
            churn_rate: self.churned_apps as f64 / (iterations * n_apps) as f64,
            wall_time_s: if record_wall_time { self.wall / n } else { 0.0 },
            mean_energy_per_served_j: if self.served_apps > 0 {
                total_energy / self.served_apps as f64
            } else {
                f64::NAN
            },
        }
    }
}

/// Output format of [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl EmitFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(Error::Validation(format!("unknown format `{other}`"))),
        }
    }
}

/// Fixed column order of the CSV output.
pub const CSV_HEADER: &str = "scheme,tau_max,loss_max,mean_energy_j,ci95_j,churn_rate,wall_time_s";

/// Renders the result table. CSV uses the fixed header; JSON is a pretty
/// array of row objects. Idempotent and byte-stable for identical inputs.
pub fn render_results(result: &SweepResult, format: EmitFormat) -> Result<String> {
    match format {
        EmitFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in &result.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.scheme,
                    row.tau_max,
                    row.loss_max,
                    row.mean_energy_j,
                    row.ci95_j,
                    row.churn_rate,
                    row.wall_time_s
                ));
            }
            Ok(out)
        }
        EmitFormat::Json => {
            let mut out = serde_json::to_string_pretty(&result.rows)
                .map_err(|e| Error::Parse(e.to_string()))?;
            out.push('\n');
            Ok(out)
        }
    }
}

/// Writes the rendered results to `path`.
pub fn emit_results(result: &SweepResult, path: &Path, format: EmitFormat) -> Result<()> {
    std::fs::write(path, render_results(result, format)?)?;
    Ok(())
}

/// Parses a CSV results file back into rows (used by tests and tooling).
pub fn parse_results_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!("line {}: expected 7 fields", lineno + 2)));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        rows.push(SweepRow {
            scheme: Scheme::parse(fields[0])?,
            tau_max: num(1)?,
            loss_max: num(2)?,
            mean_energy_j: num(3)?,
            ci95_j: num(4)?,
            churn_rate: num(5)?,
            wall_time_s: num(6)?,
            mean_energy_per_served_j: f64::NAN,
        });
    }
    Ok(SweepResult { rows })
}
