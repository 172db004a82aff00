//! Benchmark solvers: exhaustive optimum and the fixed-configuration policy.

use crate::cost::{AppAssignment, Assignment};
use crate::error::{Error, Result};
use crate::graph::build_graph;
use crate::orchestrator::{finalize_result, Diagnostics, OrchestrationResult};
use crate::scalar::Scalar;
use crate::scenario::{Scenario, MODE_PRETRAINED};

/// Default cap on the exhaustive search space.
pub const DEFAULT_ORACLE_BUDGET: f64 = 1e7;

/// Configuration selector of the fixed-configuration baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RnfConfigSelector {
    /// Lowest-index pre-trained (load-and-infer) configuration.
    Pretrained,
    /// Highest-training-volume configuration (the fixed thorough recipe).
    MaxTraining,
    /// Explicit configuration index per application.
    Fixed(Vec<usize>),
}

impl Default for RnfConfigSelector {
    fn default() -> Self {
        Self::Pretrained
    }
}

impl RnfConfigSelector {
    fn select<T: Scalar>(&self, scenario: &Scenario<T>, app: usize) -> usize {
        match self {
            Self::Pretrained => scenario
                .configurations
                .iter()
                .position(|c| c.mode == MODE_PRETRAINED)
                .unwrap_or(0),
            Self::MaxTraining => {
                let mut best = 0usize;
                for (i, c) in scenario.configurations.iter().enumerate() {
                    if c.training_volume() > scenario.configurations[best].training_volume() {
                        best = i;
                    }
                }
                best
            }
            Self::Fixed(ids) => ids[app],
        }
    }
}

/// Brute-force exhaustive optimum over the solution space the orchestration
/// model admits: each application is either churned or served on its own
/// node at full capacity (the greedy allocation policy grants a node's whole
/// remaining capacity, so no two applications share a node).
///
/// Enumerates every such joint choice, keeps the ones whose loss and latency
/// targets hold, and returns the minimum-energy assignment among those
/// serving the most applications. Refuses scenarios whose search space
/// exceeds `budget` candidates.
pub fn optimal_solve<T: Scalar>(
    scenario: &Scenario<T>,
    budget: f64,
) -> Result<OrchestrationResult<T>> {
    scenario.validate()?;
    let n_apps = scenario.applications.len();
    let n_configs = scenario.configurations.len();
    let n_nodes = scenario.nodes.len();

    let space = (n_configs as f64).powi(n_apps as i32)
        * (n_nodes as f64).powi(n_apps as i32)
        * n_apps as f64;
    if space > budget {
        return Err(Error::OracleBudget { space, budget });
    }

    let table = scenario.profile_table()?;
    let graph = build_graph(scenario)?;

    // Per-app serving options that meet the loss target and, at full node
    // capacity, the latency target.
    let mut options: Vec<Vec<(usize, usize, T)>> = Vec::with_capacity(n_apps);
    for app in 0..n_apps {
        let req = &scenario.applications[app];
        let mut opts = Vec::new();
        for config in 0..n_configs {
            let (cost, loss) = table[app][config];
            if loss > req.loss_max {
                continue;
            }
            for (node, spec) in scenario.nodes.iter().enumerate() {
                let latency = cost / spec.capacity_tops;
                if latency <= req.latency_max {
                    opts.push((config, node, latency * spec.max_power_w));
                }
            }
        }
        options.push(opts);
    }

    struct Search<'a, T> {
        options: &'a [Vec<(usize, usize, T)>],
        rows: Vec<AppAssignment<T>>,
        used_nodes: u64,
        best: Option<(usize, T, Vec<AppAssignment<T>>)>,
    }

    impl<T: Scalar> Search<'_, T> {
        fn run(&mut self, app: usize, served: usize, energy: T, capacities: &[T]) {
            if app == self.options.len() {
                let better = match &self.best {
                    None => true,
                    Some((best_served, best_energy, _)) => {
                        served > *best_served
                            || (served == *best_served && energy < *best_energy)
                    }
                };
                if better {
                    self.best = Some((served, energy, self.rows.clone()));
                }
                return;
            }
            for &(config, node, app_energy) in &self.options[app] {
                if self.used_nodes & (1u64 << node) != 0 {
                    continue;
                }
                self.used_nodes |= 1u64 << node;
                self.rows[app] =
                    AppAssignment::Served { config, node, rate_tops: capacities[node] };
                self.run(app + 1, served + 1, energy + app_energy, capacities);
                self.rows[app] = AppAssignment::Churned;
                self.used_nodes &= !(1u64 << node);
            }
            // Churn branch.
            self.run(app + 1, served, energy, capacities);
        }
    }

    let capacities: Vec<T> = scenario.nodes.iter().map(|s| s.capacity_tops).collect();
    let mut search = Search {
        options: &options,
        rows: vec![AppAssignment::Churned; n_apps],
        used_nodes: 0,
        best: None,
    };
    search.run(0, 0, T::zero(), &capacities);

    let assignment = search
        .best
        .map(|(_, _, rows)| Assignment { rows })
        .unwrap_or_else(|| Assignment::all_churned(n_apps));
    finalize_result(scenario, &graph, assignment, Diagnostics::default())
}

/// Fixed-configuration baseline.
///
/// Every application deploys its designated configuration regardless of its
/// targets; the node is the first (by index) with spare capacity on which the
/// latency target holds. Loss or latency failures count as churn.
pub fn rnf_solve<T: Scalar>(
    scenario: &Scenario<T>,
    selector: &RnfConfigSelector,
) -> Result<OrchestrationResult<T>> {
    scenario.validate()?;
    let table = scenario.profile_table()?;
    let graph = build_graph(scenario)?;

    let mut remaining: Vec<T> = scenario.nodes.iter().map(|s| s.capacity_tops).collect();
    let mut rows = Vec::with_capacity(scenario.applications.len());
    for (app, req) in scenario.applications.iter().enumerate() {
        let config = selector.select(scenario, app);
        let (cost, loss) = table[app][config];
        if loss > req.loss_max {
            rows.push(AppAssignment::Churned);
            continue;
        }
        let mut row = AppAssignment::Churned;
        for (node, spec) in scenario.nodes.iter().enumerate() {
            let granted = remaining[node].min(spec.capacity_tops);
            if granted <= T::zero() {
                continue;
            }
            if cost / granted > req.latency_max {
                continue;
            }
            remaining[node] = remaining[node] - granted;
            row = AppAssignment::Served { config, node, rate_tops: granted };
            break;
        }
        rows.push(row);
    }

    finalize_result(scenario, &graph, Assignment { rows }, Diagnostics::default())
}
