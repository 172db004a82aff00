//! Latency, energy, and feasibility semantics over an assignment.
//!
//! Task time on a node is `cost [T-ops] / rate [TOPS]`; configuration vertices
//! have unbounded rate, so only the (configuration, node) hop contributes.
//! Energy charges the node's maximum power for the task duration; idle draw is
//! assignment-independent and excluded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TripartiteGraph;
use crate::scalar::Scalar;

/// Compute-node description: power envelope in watts and capacity in TOPS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeNodeSpec<T> {
    pub id: String,
    pub node_type: String,
    pub idle_power_w: T,
    pub max_power_w: T,
    pub capacity_tops: T,
}

/// Per-application targets: maximum loss (MAPE percent) and latency (seconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppRequirements<T> {
    pub id: String,
    pub loss_max: T,
    pub latency_max: T,
}

/// One application's slot in an assignment: either a served
/// (configuration, node, granted rate) triple or a churn marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AppAssignment<T> {
    Served { config: usize, node: usize, rate_tops: T },
    Churned,
}

impl<T> AppAssignment<T> {
    pub fn is_served(&self) -> bool {
        matches!(self, AppAssignment::Served { .. })
    }
}

/// Assignment of every application, indexed by application number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment<T> {
    pub rows: Vec<AppAssignment<T>>,
}

impl<T: Scalar> Assignment<T> {
    pub fn all_churned(n_apps: usize) -> Self {
        Self { rows: vec![AppAssignment::Churned; n_apps] }
    }

    pub fn served_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_served()).count()
    }

    pub fn churned_apps(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_served())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Time in seconds to execute `cost` tera-operations at `rate` TOPS.
/// An unbounded rate (infinity) models configuration vertices and yields zero.
pub fn edge_time<T: Scalar>(cost: T, rate: T) -> Result<T> {
    if rate == T::zero() {
        return Err(Error::ZeroRate);
    }
    if rate == T::infinity() {
        return Ok(T::zero());
    }
    Ok(cost / rate)
}

/// Latency of a served application: the sum over its two active edges, which
/// reduces to the (configuration, node) task time at the granted rate.
pub fn app_latency<T: Scalar>(
    graph: &TripartiteGraph<T>,
    app: usize,
    config: usize,
    node: usize,
    rate_tops: T,
) -> Result<T> {
    let (app_config_cost, _) = graph
        .app_config_weight(app, config)
        .ok_or_else(|| Error::Validation(format!("no (app {app}, config {config}) edge")))?;
    let node_cost = graph
        .config_node_cost(app, config, node)
        .ok_or_else(|| Error::Validation(format!("no (config {config}, node {node}) edge")))?;
    // Configuration vertices carry no rate limit.
    let t_config = edge_time(app_config_cost, T::infinity())?;
    let t_node = edge_time(node_cost, rate_tops)?;
    Ok(t_config + t_node)
}

/// Energy in joules of a served application: task time scaled by the node's
/// maximum power. Vertices outside the compute-node class draw no power.
pub fn app_energy<T: Scalar>(
    graph: &TripartiteGraph<T>,
    app: usize,
    config: usize,
    node: usize,
    rate_tops: T,
    spec: &ComputeNodeSpec<T>,
) -> Result<T> {
    let latency = app_latency(graph, app, config, node, rate_tops)?;
    Ok(latency * spec.max_power_w)
}

/// Total energy of an assignment: the sum over served applications.
pub fn system_energy<T: Scalar>(
    assignment: &Assignment<T>,
    graph: &TripartiteGraph<T>,
    node_specs: &[ComputeNodeSpec<T>],
) -> Result<T> {
    let mut total = T::zero();
    for (app, row) in assignment.rows.iter().enumerate() {
        if let AppAssignment::Served { config, node, rate_tops } = *row {
            total = total + app_energy(graph, app, config, node, rate_tops, &node_specs[node])?;
        }
    }
    Ok(total)
}

/// Per-application feasibility verdicts for one assignment row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppVerdict {
    pub latency_ok: bool,
    pub loss_ok: bool,
    pub resource_ok: bool,
    pub cardinality_ok: bool,
}

impl AppVerdict {
    pub fn feasible(&self) -> bool {
        self.latency_ok && self.loss_ok && self.resource_ok && self.cardinality_ok
    }

    fn churned() -> Self {
        // A churned application imposes no constraint.
        Self { latency_ok: true, loss_ok: true, resource_ok: true, cardinality_ok: true }
    }
}

/// Feasibility report for a full assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub per_app: Vec<AppVerdict>,
}

impl FeasibilityReport {
    /// True when every served application passes all verdicts.
    pub fn feasible(&self) -> bool {
        self.per_app.iter().all(AppVerdict::feasible)
    }
}

/// Checks the latency, loss, resource, and cardinality constraints of an
/// assignment. Verdicts, not exceptions: infeasibility is a result.
///
/// The resource verdict requires each served application's demanded rate
/// (`cost / latency_max`) to be covered by its granted rate, and the granted
/// rates on every node to sum within that node's capacity.
pub fn check_feasibility<T: Scalar>(
    assignment: &Assignment<T>,
    graph: &TripartiteGraph<T>,
    requirements: &[AppRequirements<T>],
    node_specs: &[ComputeNodeSpec<T>],
) -> Result<FeasibilityReport> {
    let mut granted_per_node = vec![T::zero(); node_specs.len()];
    for row in &assignment.rows {
        if let AppAssignment::Served { node, rate_tops, .. } = *row {
            granted_per_node[node] = granted_per_node[node] + rate_tops;
        }
    }

    let mut per_app = Vec::with_capacity(assignment.rows.len());
    for (app, row) in assignment.rows.iter().enumerate() {
        let verdict = match *row {
            AppAssignment::Churned => AppVerdict::churned(),
            AppAssignment::Served { config, node, rate_tops } => {
                let req = &requirements[app];
                let latency = app_latency(graph, app, config, node, rate_tops)?;
                let (_, loss) = graph.app_config_weight(app, config).ok_or_else(|| {
                    Error::Validation(format!("no (app {app}, config {config}) edge"))
                })?;
                let cost = graph.config_node_cost(app, config, node).ok_or_else(|| {
                    Error::Validation(format!("no (config {config}, node {node}) edge"))
                })?;
                let demanded = cost / req.latency_max;
                AppVerdict {
                    latency_ok: latency <= req.latency_max,
                    loss_ok: loss <= req.loss_max,
                    resource_ok: demanded <= rate_tops
                        && granted_per_node[node] <= node_specs[node].capacity_tops,
                    // Exactly one configuration and one node per served app is
                    // structural in this representation.
                    cardinality_ok: true,
                }
            }
        };
        per_app.push(verdict);
    }
    Ok(FeasibilityReport { per_app })
}
