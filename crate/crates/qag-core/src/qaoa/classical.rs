//! Classical max-cut for graphs beyond the qubit budget; exact on small
//! instances, where it doubles as the oracle for the quantum path.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::selection::{highest_cut_valid_state, is_valid_split};
use super::{canonical_split, cut_value, qubit_bit, CutProblem};
use crate::error::{Error, Result};
use crate::graph::VertexClass;

/// Exact enumeration threshold; above it a seeded greedy local search runs.
const EXACT_LIMIT: usize = 20;
/// Local-search restarts.
const RESTARTS: usize = 16;

/// Finds a maximum (or locally maximal) valid cut.
///
/// Instances up to 20 vertices are solved exactly by enumeration; larger ones
/// by single-vertex-flip hill climbing from 16 seeded random valid starts,
/// keeping the best result. Both paths apply the same validity constraints as
/// [`super::best_valid_state`] and are deterministic given the seed.
pub fn classical_maxcut(problem: &CutProblem, seed: u64) -> Result<u64> {
    if problem.num_qubits() <= EXACT_LIMIT {
        highest_cut_valid_state(problem)
    } else {
        local_search_maxcut(problem, seed)
    }
}

fn local_search_maxcut(problem: &CutProblem, seed: u64) -> Result<u64> {
    let n = problem.num_qubits();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in problem.edges() {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, u64)> = None;

    for _ in 0..RESTARTS {
        let Some(mut state) = random_valid_state(problem, &mut rng) else {
            break;
        };
        let mut counts = SideTally::new(state, problem);
        let mut cut = cut_value(state, problem);

        loop {
            let mut improved = false;
            for qubit in 0..n {
                let delta = flip_delta(state, qubit, n, &adjacency);
                if delta <= 0 {
                    continue;
                }
                if !counts.flip_keeps_valid(qubit, state, problem) {
                    continue;
                }
                counts.apply_flip(qubit, state, problem);
                state ^= 1u64 << (n - 1 - qubit);
                cut = (cut as i64 + delta) as usize;
                improved = true;
            }
            if !improved {
                break;
            }
        }

        let canonical = canonical_split(state, n);
        match best {
            Some((best_cut, best_state))
                if best_cut > cut || (best_cut == cut && best_state <= canonical) => {}
            _ => best = Some((cut, canonical)),
        }
    }

    best.map(|(_, state)| state).ok_or(Error::PartitionFailure)
}

/// Cut change from flipping `qubit`: uncut incident edges become cut and
/// vice versa.
fn flip_delta(state: u64, qubit: usize, n: usize, adjacency: &[Vec<usize>]) -> i64 {
    let own = qubit_bit(state, qubit, n);
    let mut delta = 0i64;
    for &other in &adjacency[qubit] {
        if qubit_bit(state, other, n) == own {
            delta += 1;
        } else {
            delta -= 1;
        }
    }
    delta
}

/// Per-side class counts, maintained incrementally across flips.
struct SideTally {
    apps: [usize; 2],
    configs: [usize; 2],
    nodes: [usize; 2],
}

impl SideTally {
    fn new(state: u64, problem: &CutProblem) -> Self {
        let n = problem.num_qubits();
        let mut tally = Self { apps: [0; 2], configs: [0; 2], nodes: [0; 2] };
        for (qubit, class) in problem.classes().iter().enumerate() {
            let side = qubit_bit(state, qubit, n) as usize;
            tally.slot(*class)[side] += 1;
        }
        tally
    }

    fn side_size(&self, s: usize) -> usize {
        self.apps[s] + self.configs[s] + self.nodes[s]
    }

    fn slot(&mut self, class: VertexClass) -> &mut [usize; 2] {
        match class {
            VertexClass::Application => &mut self.apps,
            VertexClass::Configuration => &mut self.configs,
            VertexClass::ComputeNode => &mut self.nodes,
        }
    }

    fn apply_flip(&mut self, qubit: usize, state: u64, problem: &CutProblem) {
        let n = problem.num_qubits();
        let from = qubit_bit(state, qubit, n) as usize;
        let slot = self.slot(problem.classes()[qubit]);
        slot[from] -= 1;
        slot[1 - from] += 1;
    }

    fn flip_keeps_valid(&mut self, qubit: usize, state: u64, problem: &CutProblem) -> bool {
        self.apply_flip(qubit, state, problem);
        let ok = self.is_valid();
        // Undo.
        let n = problem.num_qubits();
        let to = 1 - qubit_bit(state, qubit, n) as usize;
        let slot = self.slot(problem.classes()[qubit]);
        slot[to] -= 1;
        slot[1 - to] += 1;
        ok
    }

    // Mirrors `is_valid_split`.
    fn is_valid(&self) -> bool {
        if self.side_size(0) == 0 || self.side_size(1) == 0 {
            return false;
        }
        let total_apps = self.apps[0] + self.apps[1];
        let has_configs = self.configs[0] + self.configs[1] > 0;
        let has_nodes = self.nodes[0] + self.nodes[1] > 0;
        if total_apps >= 2 && (self.apps[0] < 1 || self.apps[1] < 1) {
            return false;
        }
        (0..2).all(|s| {
            self.apps[s] != 1
                || ((!has_configs || self.configs[s] >= 1)
                    && (!has_nodes || self.nodes[s] >= 1))
        })
    }
}

/// Draws a random valid split, falling back to a deterministic round-robin
/// construction when rejection sampling runs dry.
fn random_valid_state(problem: &CutProblem, rng: &mut ChaCha8Rng) -> Option<u64> {
    let n = problem.num_qubits();
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for _ in 0..256 {
        let state = rng.gen::<u64>() & mask;
        if is_valid_split(state, problem) {
            return Some(state);
        }
    }
    // Alternate every class across the two sides.
    let mut state = 0u64;
    let mut per_class = [0usize; 3];
    for (qubit, class) in problem.classes().iter().enumerate() {
        let slot = match class {
            VertexClass::Application => 0,
            VertexClass::Configuration => 1,
            VertexClass::ComputeNode => 2,
        };
        if per_class[slot] % 2 == 1 {
            state |= 1u64 << (n - 1 - qubit);
        }
        per_class[slot] += 1;
    }
    is_valid_split(state, problem).then_some(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::format_bitstring;

    fn apps(n: usize) -> Vec<VertexClass> {
        vec![VertexClass::Application; n]
    }

    #[test]
    fn triangle_cut_is_two() {
        let p = CutProblem::new(3, vec![(0, 1), (1, 2), (0, 2)], apps(3)).unwrap();
        let state = classical_maxcut(&p, 0).unwrap();
        assert_eq!(cut_value(state, &p), 2);
    }

    #[test]
    fn single_edge_cut() {
        let p = CutProblem::new(2, vec![(0, 1)], apps(2)).unwrap();
        let state = classical_maxcut(&p, 0).unwrap();
        assert_eq!(cut_value(state, &p), 1);
        assert_eq!(format_bitstring(state, 2), "01");
    }

    #[test]
    fn empty_graph_returns_a_valid_split() {
        let p = CutProblem::new(4, vec![], apps(4)).unwrap();
        let state = classical_maxcut(&p, 0).unwrap();
        assert!(is_valid_split(state, &p));
        assert_eq!(cut_value(state, &p), 0);
    }

    #[test]
    fn local_search_matches_exact_on_a_lifted_instance() {
        // 22 vertices forces the local-search path; a disjoint union of 11
        // two-vertex edges has a known maximum cut of 11.
        let edges: Vec<(usize, usize)> = (0..11).map(|i| (2 * i, 2 * i + 1)).collect();
        let p = CutProblem::new(22, edges, apps(22)).unwrap();
        let state = classical_maxcut(&p, 3).unwrap();
        assert_eq!(cut_value(state, &p), 11);
    }

    #[test]
    fn local_search_is_seed_deterministic() {
        let mut edges = std::collections::BTreeSet::new();
        for i in 0..21usize {
            for step in [1, 4] {
                let j = (i + step) % 21;
                edges.insert((i.min(j), i.max(j)));
            }
        }
        let p = CutProblem::new(21, edges.into_iter().collect(), apps(21)).unwrap();
        let a = classical_maxcut(&p, 9).unwrap();
        let b = classical_maxcut(&p, 9).unwrap();
        assert_eq!(a, b);
    }
}
