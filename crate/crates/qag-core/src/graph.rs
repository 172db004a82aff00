//! Application-load-resource tripartite graph.
//!
//! Vertices split into three classes: applications, model configurations, and
//! compute nodes. Edges exist only on (application, configuration) and
//! (configuration, node) pairs and carry per-application weight vectors of
//! compute cost (tera-operations) and inference loss (MAPE percent). The
//! global qubit ordering used by the partitioning engine is all application
//! vertices in declaration order, then all configuration vertices, then all
//! compute-node vertices.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cost::{AppRequirements, ComputeNodeSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::Scenario;

/// Vertex class. The derived ordering (applications before configurations
/// before compute nodes) fixes the qubit ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexClass {
    Application,
    Configuration,
    ComputeNode,
}

/// A vertex, identified by its class and its index within that class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId {
    pub class: VertexClass,
    pub index: usize,
}

impl VertexId {
    pub fn application(index: usize) -> Self {
        Self { class: VertexClass::Application, index }
    }
    pub fn configuration(index: usize) -> Self {
        Self { class: VertexClass::Configuration, index }
    }
    pub fn compute_node(index: usize) -> Self {
        Self { class: VertexClass::ComputeNode, index }
    }
}

/// Multidimensional edge weight: per-application compute cost (tera-operations)
/// and loss (MAPE percent).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeight<T> {
    pub cost_per_app: BTreeMap<usize, T>,
    pub loss_per_app: BTreeMap<usize, T>,
}

/// Edge payload: the weight vector plus the set of applications for which the
/// edge is still a feasible candidate. Pruning narrows `feasible_for`; the
/// edge is physically deleted only once the set is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData<T> {
    pub weight: EdgeWeight<T>,
    pub feasible_for: BTreeSet<usize>,
}

fn edge_key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Weighted tripartite graph over application, configuration, and compute-node
/// vertices. Immutable after construction; operations return new graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteGraph<T> {
    applications: Vec<usize>,
    configurations: Vec<usize>,
    compute_nodes: Vec<usize>,
    edges: BTreeMap<(VertexId, VertexId), EdgeData<T>>,
}

impl<T: Scalar> TripartiteGraph<T> {
    pub fn applications(&self) -> &[usize] {
        &self.applications
    }

    pub fn configurations(&self) -> &[usize] {
        &self.configurations
    }

    pub fn compute_nodes(&self) -> &[usize] {
        &self.compute_nodes
    }

    /// All vertices in global qubit order.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.vertex_count());
        out.extend(self.applications.iter().map(|&i| VertexId::application(i)));
        out.extend(self.configurations.iter().map(|&i| VertexId::configuration(i)));
        out.extend(self.compute_nodes.iter().map(|&i| VertexId::compute_node(i)));
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.applications.len() + self.configurations.len() + self.compute_nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&(VertexId, VertexId), &EdgeData<T>)> {
        self.edges.iter()
    }

    pub fn edge(&self, a: VertexId, b: VertexId) -> Option<&EdgeData<T>> {
        self.edges.get(&edge_key(a, b))
    }

    pub fn contains_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains_key(&edge_key(a, b))
    }

    /// Configurations that remain candidates for application `app`.
    pub fn config_candidates(&self, app: usize) -> Vec<usize> {
        let av = VertexId::application(app);
        self.configurations
            .iter()
            .copied()
            .filter(|&c| {
                self.edge(av, VertexId::configuration(c))
                    .map_or(false, |e| e.feasible_for.contains(&app))
            })
            .collect()
    }

    /// Surviving (configuration, node) candidate pairs for application `app`:
    /// the (app, config) edge and the (config, node) edge must both be present
    /// and feasible for `app`.
    pub fn pair_candidates(&self, app: usize) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for config in self.config_candidates(app) {
            let cv = VertexId::configuration(config);
            for &node in &self.compute_nodes {
                if let Some(e) = self.edge(cv, VertexId::compute_node(node)) {
                    if e.feasible_for.contains(&app) {
                        pairs.push((config, node));
                    }
                }
            }
        }
        pairs
    }

    /// Cost and loss of configuration `config` for application `app`, read
    /// from the (app, config) edge.
    pub fn app_config_weight(&self, app: usize, config: usize) -> Option<(T, T)> {
        let e = self.edge(VertexId::application(app), VertexId::configuration(config))?;
        let cost = *e.weight.cost_per_app.get(&app)?;
        let loss = *e.weight.loss_per_app.get(&app)?;
        Some((cost, loss))
    }

    /// Compute cost of running `app`'s task for configuration `config` on
    /// `node`, read from the (config, node) edge.
    pub fn config_node_cost(&self, app: usize, config: usize, node: usize) -> Option<T> {
        let e = self.edge(VertexId::configuration(config), VertexId::compute_node(node))?;
        e.weight.cost_per_app.get(&app).copied()
    }
}

/// Builds the complete tripartite graph for a validated scenario.
///
/// Every application connects to every configuration with that application's
/// (cost, loss) profile entry; every configuration connects to every node
/// carrying the per-application weight vectors of that configuration.
pub fn build_graph<T: Scalar>(scenario: &Scenario<T>) -> Result<TripartiteGraph<T>> {
    scenario.validate()?;

    let n_apps = scenario.applications.len();
    let n_configs = scenario.configurations.len();
    let n_nodes = scenario.nodes.len();

    let mut edges = BTreeMap::new();

    for app in 0..n_apps {
        for config in 0..n_configs {
            let (cost, loss) = scenario.profile(app, config)?;
            let mut cost_per_app = BTreeMap::new();
            let mut loss_per_app = BTreeMap::new();
            cost_per_app.insert(app, cost);
            loss_per_app.insert(app, loss);
            edges.insert(
                edge_key(VertexId::application(app), VertexId::configuration(config)),
                EdgeData {
                    weight: EdgeWeight { cost_per_app, loss_per_app },
                    feasible_for: BTreeSet::from([app]),
                },
            );
        }
    }

    for config in 0..n_configs {
        let mut cost_per_app = BTreeMap::new();
        let mut loss_per_app = BTreeMap::new();
        for app in 0..n_apps {
            let (cost, loss) = scenario.profile(app, config)?;
            cost_per_app.insert(app, cost);
            loss_per_app.insert(app, loss);
        }
        for node in 0..n_nodes {
            edges.insert(
                edge_key(VertexId::configuration(config), VertexId::compute_node(node)),
                EdgeData {
                    weight: EdgeWeight {
                        cost_per_app: cost_per_app.clone(),
                        loss_per_app: loss_per_app.clone(),
                    },
                    feasible_for: (0..n_apps).collect(),
                },
            );
        }
    }

    Ok(TripartiteGraph {
        applications: (0..n_apps).collect(),
        configurations: (0..n_configs).collect(),
        compute_nodes: (0..n_nodes).collect(),
        edges,
    })
}

/// Removes infeasible edges.
///
/// For each application `h`, an (app, config) edge leaves `h`'s candidate set
/// when the configuration's loss exceeds `h`'s loss target, and a
/// (config, node) edge leaves it when the task time at the node's full
/// capacity exceeds `h`'s latency target. An edge is physically deleted only
/// when it is infeasible for every application.
pub fn prune_edges<T: Scalar>(
    graph: &TripartiteGraph<T>,
    requirements: &[AppRequirements<T>],
    node_specs: &[ComputeNodeSpec<T>],
) -> TripartiteGraph<T> {
    let mut edges = BTreeMap::new();
    for (&(a, b), data) in &graph.edges {
        let mut feasible_for = BTreeSet::new();
        for &app in &data.feasible_for {
            let req = &requirements[app];
            let keep = match (a.class, b.class) {
                (VertexClass::Application, VertexClass::Configuration) => data
                    .weight
                    .loss_per_app
                    .get(&app)
                    .map_or(false, |&loss| loss <= req.loss_max),
                (VertexClass::Configuration, VertexClass::ComputeNode) => {
                    data.weight.cost_per_app.get(&app).map_or(false, |&cost| {
                        let capacity = node_specs[b.index].capacity_tops;
                        cost / capacity <= req.latency_max
                    })
                }
                _ => false,
            };
            if keep {
                feasible_for.insert(app);
            }
        }
        if !feasible_for.is_empty() {
            edges.insert((a, b), EdgeData { weight: data.weight.clone(), feasible_for });
        }
    }
    TripartiteGraph {
        applications: graph.applications.clone(),
        configurations: graph.configurations.clone(),
        compute_nodes: graph.compute_nodes.clone(),
        edges,
    }
}

/// Complement edge list: all two-element vertex subsets absent from the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplementEdgeList {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

/// Builds the complement of the graph over the same vertex set. Intra-class
/// pairs, (application, node) pairs, and any pruned cross-class pairs all land
/// in the complement.
pub fn complement<T: Scalar>(graph: &TripartiteGraph<T>) -> ComplementEdgeList {
    let vertices = graph.vertices();
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            if !graph.contains_edge(vertices[i], vertices[j]) {
                edges.push((vertices[i], vertices[j]));
            }
        }
    }
    ComplementEdgeList { vertices, edges }
}

/// Restricts the graph to `subset`, keeping exactly the edges with both
/// endpoints inside it. Weights are unchanged; candidate annotations are
/// narrowed to the applications that remain.
pub fn induced_subgraph<T: Scalar>(
    graph: &TripartiteGraph<T>,
    subset: &BTreeSet<VertexId>,
) -> Result<TripartiteGraph<T>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    for v in subset {
        let present = match v.class {
            VertexClass::Application => graph.applications.contains(&v.index),
            VertexClass::Configuration => graph.configurations.contains(&v.index),
            VertexClass::ComputeNode => graph.compute_nodes.contains(&v.index),
        };
        if !present {
            return Err(Error::Validation(format!("vertex {v:?} not in graph")));
        }
    }

    let apps: Vec<usize> = graph
        .applications
        .iter()
        .copied()
        .filter(|&i| subset.contains(&VertexId::application(i)))
        .collect();
    let app_set: BTreeSet<usize> = apps.iter().copied().collect();

    let mut edges = BTreeMap::new();
    for (&(a, b), data) in &graph.edges {
        if subset.contains(&a) && subset.contains(&b) {
            let feasible_for: BTreeSet<usize> =
                data.feasible_for.intersection(&app_set).copied().collect();
            edges.insert((a, b), EdgeData { weight: data.weight.clone(), feasible_for });
        }
    }

    Ok(TripartiteGraph {
        applications: apps,
        configurations: graph
            .configurations
            .iter()
            .copied()
            .filter(|&i| subset.contains(&VertexId::configuration(i)))
            .collect(),
        compute_nodes: graph
            .compute_nodes
            .iter()
            .copied()
            .filter(|&i| subset.contains(&VertexId::compute_node(i)))
            .collect(),
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_small_example;

    fn small_graph() -> TripartiteGraph<f64> {
        build_graph(&fixture_small_example::<f64>()).unwrap()
    }

    #[test]
    fn small_example_graph_shape() {
        let g = small_graph();
        assert_eq!(g.vertex_count(), 8);
        // 2 apps x 4 configs + 4 configs x 2 nodes
        assert_eq!(g.edge_count(), 16);
        let app_config_edges = g
            .edges()
            .filter(|((a, b), _)| {
                a.class == VertexClass::Application && b.class == VertexClass::Configuration
            })
            .count();
        assert_eq!(app_config_edges, 8);
    }

    #[test]
    fn small_example_edge_weights() {
        let g = small_graph();
        let (cost, loss) = g.app_config_weight(0, 0).unwrap();
        assert_eq!(cost, 50.0);
        assert_eq!(loss, 15.0);
    }

    #[test]
    fn minimal_scenario_graph() {
        let mut s = fixture_small_example::<f64>();
        s.applications.truncate(1);
        s.configurations.truncate(1);
        s.nodes.truncate(1);
        s.profiles.retain(|p| p.app == "h1" && p.config == "s1");
        let g = build_graph(&s).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn missing_profile_is_reported() {
        let mut s = fixture_small_example::<f64>();
        s.profiles.retain(|p| !(p.app == "h2" && p.config == "s3"));
        match build_graph(&s) {
            Err(Error::MissingProfile { app, config }) => {
                assert_eq!(app, "h2");
                assert_eq!(config, "s3");
            }
            other => panic!("expected MissingProfile, got {other:?}"),
        }
    }

    #[test]
    fn tight_loss_target_prunes_all_configs_for_app() {
        let s = fixture_small_example::<f64>();
        let g = build_graph(&s).unwrap();
        let mut reqs = s.applications.clone();
        reqs[0].loss_max = 10.0; // below the minimum loss of 15
        let pruned = prune_edges(&g, &reqs, &s.nodes);
        assert!(pruned.config_candidates(0).is_empty());
        // h2 candidates unaffected by h1's target
        assert!(!pruned.config_candidates(1).is_empty());
    }

    #[test]
    fn vacuous_targets_prune_nothing() {
        let s = fixture_small_example::<f64>();
        let g = build_graph(&s).unwrap();
        let mut reqs = s.applications.clone();
        for r in &mut reqs {
            r.loss_max = f64::INFINITY;
            r.latency_max = f64::INFINITY;
        }
        let pruned = prune_edges(&g, &reqs, &s.nodes);
        assert_eq!(pruned.edge_count(), g.edge_count());
        for ((_, _), data) in pruned.edges() {
            assert!(!data.feasible_for.is_empty());
        }
    }

    #[test]
    fn latency_prune_uses_full_node_capacity() {
        // c = 100 T-ops on the 2-TOPS CPU takes 50 s > 40 s.
        let s = fixture_small_example::<f64>();
        let g = build_graph(&s).unwrap();
        let mut reqs = s.applications.clone();
        reqs[1].latency_max = 40.0;
        let pruned = prune_edges(&g, &reqs, &s.nodes);
        let e = pruned
            .edge(VertexId::configuration(0), VertexId::compute_node(0))
            .expect("edge survives via h1");
        assert!(!e.feasible_for.contains(&1));
        assert!(e.feasible_for.contains(&0));
    }

    #[test]
    fn complement_of_small_example() {
        let g = small_graph();
        let c = complement(&g);
        // C(8,2) - 16 edges
        assert_eq!(c.edges.len(), 12);
    }

    #[test]
    fn complement_partition_is_exact() {
        let g = small_graph();
        let c = complement(&g);
        let vs = g.vertices();
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                let in_graph = g.contains_edge(vs[i], vs[j]);
                let in_complement = c.edges.contains(&(vs[i], vs[j]));
                assert!(in_graph ^ in_complement, "pair ({i},{j}) must be in exactly one set");
            }
        }
    }

    #[test]
    fn complement_of_two_vertices_with_edge_is_empty() {
        let mut s = fixture_small_example::<f64>();
        s.applications.truncate(1);
        s.configurations.truncate(1);
        s.nodes.clear();
        s.profiles.retain(|p| p.app == "h1" && p.config == "s1");
        let g = build_graph(&s).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(complement(&g).edges.len(), 0);
    }

    #[test]
    fn complement_of_empty_graph_is_complete() {
        // Three vertices, all edges pruned away.
        let s = fixture_small_example::<f64>();
        let g = build_graph(&s).unwrap();
        let mut reqs = s.applications.clone();
        for r in &mut reqs {
            r.loss_max = 0.001;
            r.latency_max = 0.000001;
        }
        let pruned = prune_edges(&g, &reqs, &s.nodes);
        assert_eq!(pruned.edge_count(), 0);
        let sub = induced_subgraph(
            &pruned,
            &BTreeSet::from([
                VertexId::application(0),
                VertexId::configuration(0),
                VertexId::compute_node(0),
            ]),
        )
        .unwrap();
        assert_eq!(complement(&sub).edges.len(), 3);
    }

    #[test]
    fn induced_subgraph_keeps_inner_edges() {
        let g = small_graph();
        let subset = BTreeSet::from([
            VertexId::application(0),
            VertexId::configuration(0),
            VertexId::configuration(1),
            VertexId::compute_node(0),
        ]);
        let sub = induced_subgraph(&g, &subset).unwrap();
        assert_eq!(sub.vertex_count(), 4);
        assert_eq!(sub.edge_count(), 4);
        assert!(sub.contains_edge(VertexId::application(0), VertexId::configuration(0)));
        assert!(sub.contains_edge(VertexId::application(0), VertexId::configuration(1)));
        assert!(sub.contains_edge(VertexId::configuration(0), VertexId::compute_node(0)));
        assert!(sub.contains_edge(VertexId::configuration(1), VertexId::compute_node(0)));
    }

    #[test]
    fn induced_subgraph_full_set_is_identity() {
        let g = small_graph();
        let subset: BTreeSet<VertexId> = g.vertices().into_iter().collect();
        let sub = induced_subgraph(&g, &subset).unwrap();
        assert_eq!(sub, g);
    }

    #[test]
    fn induced_subgraph_single_vertex() {
        let g = small_graph();
        let subset = BTreeSet::from([VertexId::application(0)]);
        let sub = induced_subgraph(&g, &subset).unwrap();
        assert_eq!(sub.vertex_count(), 1);
        assert_eq!(sub.edge_count(), 0);
    }

    #[test]
    fn induced_subgraph_rejects_empty_subset() {
        let g = small_graph();
        assert!(matches!(induced_subgraph(&g, &BTreeSet::new()), Err(Error::EmptySubset)));
    }
}
