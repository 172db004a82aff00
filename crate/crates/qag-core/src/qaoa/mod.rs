//! Simulated QAOA max-cut over the complement graph.
//!
//! The engine builds the standard p-layer circuit — a Hadamard wall, then
//! alternating cost-phase and X-mixer layers — on a dense statevector, tunes
//! the 2p angles with a derivative-free simplex search, samples measurement
//! shots, and post-selects the best bipartition that keeps at least one
//! application vertex on each side. A classical max-cut (exact below 21
//! vertices, seeded greedy local search above) covers graphs beyond the qubit
//! budget and doubles as the test oracle.

mod classical;
mod optimizer;
mod selection;
mod statevector;

pub use classical::classical_maxcut;
pub use optimizer::{optimize_params, OptimizeOptions};
pub use selection::{best_valid_state, is_valid_split};
pub use statevector::{expectation, sample, simulate, CutTable, ShotCounts, Statevector};

use crate::error::{Error, Result};
use crate::graph::{ComplementEdgeList, VertexClass};
use crate::scalar::Scalar;

/// Default number of qubits the statevector simulator will take on.
pub const DEFAULT_QUBIT_BUDGET: usize = 20;

/// Max-cut instance over `n` qubits. Qubit order follows the global vertex
/// order (applications, then configurations, then compute nodes); qubit 0 is
/// the leftmost — most significant — position of a bitstring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutProblem {
    n: usize,
    edges: Vec<(usize, usize)>,
    classes: Vec<VertexClass>,
}

impl CutProblem {
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize)>,
        classes: Vec<VertexClass>,
    ) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::Validation(format!("qubit count {n} out of range 1..=64")));
        }
        if classes.len() != n {
            return Err(Error::Validation("class vector length must equal qubit count".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop on qubit {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Validation(format!("edge ({a},{b}) out of range")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::Validation(format!("duplicate edge ({a},{b})")));
            }
            normalized.push(key);
        }
        Ok(Self { n, edges: normalized, classes })
    }

    /// Builds the cut problem for a complement edge list; qubits take the
    /// vertex order of the source graph.
    pub fn from_complement(complement: &ComplementEdgeList) -> Result<Self> {
        let index: std::collections::BTreeMap<_, _> = complement
            .vertices
            .iter()
            .enumerate()
            .map(|(q, &v)| (v, q))
            .collect();
        let classes = complement.vertices.iter().map(|v| v.class).collect();
        let edges = complement
            .edges
            .iter()
            .map(|&(a, b)| (index[&a], index[&b]))
            .collect();
        Self::new(complement.vertices.len(), edges, classes)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn classes(&self) -> &[VertexClass] {
        &self.classes
    }
}

/// Variational angles of a p-layer circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParams<T> {
    pub gammas: Vec<T>,
    pub betas: Vec<T>,
}

impl<T: Scalar> QaoaParams<T> {
    /// Replicates one (gamma, beta) pair across `layers` layers.
    pub fn replicated(layers: usize, gamma: T, beta: T) -> Self {
        Self { gammas: vec![gamma; layers], betas: vec![beta; layers] }
    }

    pub fn layers(&self) -> usize {
        debug_assert_eq!(self.gammas.len(), self.betas.len());
        self.gammas.len()
    }
}

/// Bit of `qubit` (0-based, leftmost first) in basis-state index `state`.
#[inline]
pub fn qubit_bit(state: u64, qubit: usize, n: usize) -> u64 {
    (state >> (n - 1 - qubit)) & 1
}

/// Renders a basis-state index as a bitstring, qubit 0 leftmost.
pub fn format_bitstring(state: u64, n: usize) -> String {
    (0..n).map(|q| if qubit_bit(state, q, n) == 1 { '1' } else { '0' }).collect()
}

/// Parses a bitstring into (basis-state index, qubit count).
pub fn parse_bitstring(s: &str) -> Result<(u64, usize)> {
    let n = s.len();
    if n == 0 || n > 64 {
        return Err(Error::Validation(format!("bitstring length {n} out of range 1..=64")));
    }
    let mut state = 0u64;
    for c in s.chars() {
        state <<= 1;
        match c {
            '0' => {}
            '1' => state |= 1,
            other => {
                return Err(Error::Validation(format!("invalid bitstring character `{other}`")))
            }
        }
    }
    Ok((state, n))
}

/// Number of problem edges whose endpoints land on different sides.
pub fn cut_value(state: u64, problem: &CutProblem) -> usize {
    problem
        .edges
        .iter()
        .filter(|&&(a, b)| qubit_bit(state, a, problem.n) != qubit_bit(state, b, problem.n))
        .count()
}

/// [`cut_value`] over a textual bitstring; errors on length mismatch.
pub fn cut_value_str(bits: &str, problem: &CutProblem) -> Result<usize> {
    let (state, n) = parse_bitstring(bits)?;
    if n != problem.n {
        return Err(Error::BitstringLength { got: n, expected: problem.n });
    }
    Ok(cut_value(state, problem))
}

/// Folds a bitstring with its complement: both describe the same bipartition,
/// so the numerically smaller of the two is the canonical representative.
#[inline]
pub fn canonical_split(state: u64, n: usize) -> u64 {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    state.min(!state & mask)
}
