//! Constraint-aware selection of the measured bipartition.

use super::statevector::ShotCounts;
use super::{canonical_split, cut_value, qubit_bit, CutProblem};
use crate::error::{Error, Result};
use crate::graph::VertexClass;

/// Class counts on both sides of a split.
#[derive(Debug, Default, Clone, Copy)]
struct SideCounts {
    apps: [usize; 2],
    configs: [usize; 2],
    nodes: [usize; 2],
}

fn side_counts(state: u64, problem: &CutProblem) -> SideCounts {
    let n = problem.num_qubits();
    let mut counts = SideCounts::default();
    for (qubit, class) in problem.classes().iter().enumerate() {
        let side = qubit_bit(state, qubit, n) as usize;
        match class {
            VertexClass::Application => counts.apps[side] += 1,
            VertexClass::Configuration => counts.configs[side] += 1,
            VertexClass::ComputeNode => counts.nodes[side] += 1,
        }
    }
    counts
}

/// A split is valid when both sides are non-empty, both keep at least one
/// application vertex, and any side that would become a leaf (exactly one
/// application) also keeps at least one configuration and one compute-node
/// vertex. Each class rule applies only when the graph contains vertices of
/// that class, so plain benchmark graphs reduce to ordinary max-cut over
/// non-trivial splits. Symmetric under complementing the bitstring.
pub fn is_valid_split(state: u64, problem: &CutProblem) -> bool {
    let c = side_counts(state, problem);
    let size = |s: usize| c.apps[s] + c.configs[s] + c.nodes[s];
    if size(0) == 0 || size(1) == 0 {
        return false;
    }
    let total_apps = c.apps[0] + c.apps[1];
    let has_configs = c.configs[0] + c.configs[1] > 0;
    let has_nodes = c.nodes[0] + c.nodes[1] > 0;
    if total_apps >= 2 && (c.apps[0] < 1 || c.apps[1] < 1) {
        return false;
    }
    (0..2).all(|s| {
        c.apps[s] != 1 || ((!has_configs || c.configs[s] >= 1) && (!has_nodes || c.nodes[s] >= 1))
    })
}

/// Picks the best valid bipartition from sampled measurement counts.
///
/// A bitstring and its complement describe the same bipartition, so counts are
/// folded onto the lexicographically smaller representative before ranking.
/// Ranking is by folded count, then cut value, then the lexicographically
/// smallest bitstring. When no sampled state is valid the full basis is
/// enumerated for the highest-cut valid state; if none exists at all the
/// partition fails.
pub fn best_valid_state(counts: &ShotCounts, problem: &CutProblem) -> Result<u64> {
    let n = problem.num_qubits();
    debug_assert_eq!(n, counts.n);

    let mut folded = std::collections::BTreeMap::<u64, u32>::new();
    for (&state, &count) in &counts.counts {
        *folded.entry(canonical_split(state, n)).or_insert(0) += count;
    }

    let best = folded
        .iter()
        .filter(|(&state, _)| is_valid_split(state, problem))
        .map(|(&state, &count)| (count, cut_value(state, problem), std::cmp::Reverse(state)))
        .max();
    if let Some((_, _, std::cmp::Reverse(state))) = best {
        return Ok(state);
    }

    highest_cut_valid_state(problem)
}

/// Exhaustively searches all bipartitions for the valid one with the highest
/// cut (ties to the lexicographically smallest bitstring).
pub(crate) fn highest_cut_valid_state(problem: &CutProblem) -> Result<u64> {
    let n = problem.num_qubits();
    let mut best: Option<(usize, u64)> = None;
    // Fixing qubit 0 to side 0 halves the work and lands on the canonical
    // representative directly.
    for state in 0..(1u64 << (n - 1)) {
        if !is_valid_split(state, problem) {
            continue;
        }
        let cut = cut_value(state, problem);
        match best {
            Some((best_cut, best_state)) if best_cut > cut || (best_cut == cut && best_state <= state) => {}
            _ => best = Some((cut, state)),
        }
    }
    best.map(|(_, state)| state).ok_or(Error::PartitionFailure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::{parse_bitstring, sample, Statevector};

    fn one_per_class() -> CutProblem {
        CutProblem::new(
            3,
            vec![(0, 1), (1, 2)],
            vec![
                VertexClass::Application,
                VertexClass::Configuration,
                VertexClass::ComputeNode,
            ],
        )
        .unwrap()
    }

    #[test]
    fn one_app_graphs_have_no_valid_split() {
        let p = one_per_class();
        for state in 0..8u64 {
            assert!(!is_valid_split(state, &p), "state {state:03b} should be invalid");
        }
        assert!(matches!(highest_cut_valid_state(&p), Err(Error::PartitionFailure)));
    }

    #[test]
    fn two_leaf_sides_need_config_and_node() {
        // h h s s n n
        let classes = vec![
            VertexClass::Application,
            VertexClass::Application,
            VertexClass::Configuration,
            VertexClass::Configuration,
            VertexClass::ComputeNode,
            VertexClass::ComputeNode,
        ];
        let p = CutProblem::new(6, vec![(0, 1)], classes).unwrap();
        let (valid, _) = parse_bitstring("010101").unwrap();
        assert!(is_valid_split(valid, &p));
        // h2 alone on side 1 without config or node.
        let (leafless, _) = parse_bitstring("010000").unwrap();
        assert!(!is_valid_split(leafless, &p));
        // Both applications on one side: the other side has none.
        let (empty_side, _) = parse_bitstring("001101").unwrap();
        assert!(!is_valid_split(empty_side, &p));
    }

    #[test]
    fn invalid_concentrated_counts_fall_back_to_enumeration() {
        let classes = vec![
            VertexClass::Application,
            VertexClass::Application,
            VertexClass::Configuration,
            VertexClass::Configuration,
            VertexClass::ComputeNode,
            VertexClass::ComputeNode,
        ];
        let p = CutProblem::new(6, vec![(0, 1), (2, 3), (4, 5)], classes).unwrap();
        // All shots on the all-zeros string, whose sides are {} and everything.
        let sv = Statevector::<f64>::basis(6, 0);
        let counts = sample(&sv, 100, 1);
        let state = best_valid_state(&counts, &p).unwrap();
        assert!(is_valid_split(state, &p));
        assert_eq!(cut_value(state, &p), 3);
    }

    #[test]
    fn folding_prefers_partition_weight_over_raw_counts() {
        let classes = vec![
            VertexClass::Application,
            VertexClass::Application,
            VertexClass::Configuration,
            VertexClass::Configuration,
            VertexClass::ComputeNode,
            VertexClass::ComputeNode,
        ];
        let p = CutProblem::new(6, vec![(0, 1)], classes).unwrap();
        let (a, _) = parse_bitstring("010101").unwrap();
        let (b, _) = parse_bitstring("101010").unwrap(); // complement of a
        let (c, _) = parse_bitstring("011010").unwrap();
        let counts = ShotCounts {
            counts: [(a, 30u32), (b, 30), (c, 40)].into_iter().collect(),
            shots: 100,
            n: 6,
        };
        // c alone outcounts a and b individually but not their folded sum.
        assert_eq!(best_valid_state(&counts, &p).unwrap(), a);
    }

    #[test]
    fn ties_break_on_cut_then_lexicographic() {
        let classes = vec![
            VertexClass::Application,
            VertexClass::Application,
            VertexClass::Configuration,
            VertexClass::Configuration,
            VertexClass::Configuration,
            VertexClass::ComputeNode,
            VertexClass::ComputeNode,
        ];
        let p = CutProblem::new(7, vec![(2, 3)], classes.clone()).unwrap();
        let (low_cut, _) = parse_bitstring("0100101").unwrap(); // config pair together
        let (high_cut, _) = parse_bitstring("0101001").unwrap(); // config pair split
        let counts = ShotCounts {
            counts: [(low_cut, 50u32), (high_cut, 50)].into_iter().collect(),
            shots: 100,
            n: 7,
        };
        // Equal counts: the higher cut wins.
        assert_eq!(best_valid_state(&counts, &p).unwrap(), high_cut);

        // Equal counts and equal (zero) cut: lexicographically smallest wins.
        let edgeless = CutProblem::new(7, vec![], classes).unwrap();
        assert_eq!(best_valid_state(&counts, &edgeless).unwrap(), low_cut.min(high_cut));
    }
}
