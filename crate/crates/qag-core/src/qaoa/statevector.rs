//! Dense statevector simulation of the max-cut circuit.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CutProblem, QaoaParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Precomputed cut count per basis state. Shared across circuit evaluations
/// of one problem so the cost layer and the expectation are O(2^n) each.
#[derive(Debug, Clone)]
pub struct CutTable {
    counts: Vec<u16>,
    max_cut: u16,
}

impl CutTable {
    pub fn new(problem: &CutProblem) -> Self {
        let n = problem.num_qubits();
        let size = 1usize << n;
        let mut counts = vec![0u16; size];
        for &(a, b) in problem.edges() {
            let bit_a = 1u64 << (n - 1 - a);
            let bit_b = 1u64 << (n - 1 - b);
            for (k, count) in counts.iter_mut().enumerate() {
                let k = k as u64;
                if ((k & bit_a) == 0) != ((k & bit_b) == 0) {
                    *count += 1;
                }
            }
        }
        let max_cut = counts.iter().copied().max().unwrap_or(0);
        Self { counts, max_cut }
    }

    #[inline]
    pub fn cut(&self, state: u64) -> u16 {
        self.counts[state as usize]
    }

    pub fn max_cut(&self) -> u16 {
        self.max_cut
    }
}

/// Complex amplitudes of an n-qubit register; index bits follow the qubit
/// order (qubit 0 is the most significant bit).
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> Statevector<T> {
    /// Uniform superposition: the Hadamard wall applied to |0...0>.
    pub fn uniform(n: usize) -> Self {
        let size = 1usize << n;
        let amp = T::one() / T::from_usize(size).unwrap().sqrt();
        Self { n, amps: vec![Complex::new(amp, T::zero()); size] }
    }

    /// A single computational basis state.
    pub fn basis(n: usize, state: u64) -> Self {
        let size = 1usize << n;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); size];
        amps[state as usize] = Complex::new(T::one(), T::zero());
        Self { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn probability(&self, state: u64) -> T {
        self.amps[state as usize].norm_sqr()
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Phase-separation layer: each basis state picks up exp(-i * gamma * cut).
    pub fn apply_cost_layer(&mut self, table: &CutTable, gamma: T) {
        let mut phases = Vec::with_capacity(usize::from(table.max_cut()) + 1);
        for c in 0..=table.max_cut() {
            let angle = -gamma * T::from_u16(c).unwrap();
            phases.push(Complex::new(angle.cos(), angle.sin()));
        }
        for (k, amp) in self.amps.iter_mut().enumerate() {
            *amp = *amp * phases[usize::from(table.counts[k])];
        }
    }

    /// Mixer layer: an X-rotation of angle 2*beta on every qubit.
    pub fn apply_mixer_layer(&mut self, beta: T) {
        let cos = beta.cos();
        let sin = beta.sin();
        for qubit in 0..self.n {
            let bit = 1usize << (self.n - 1 - qubit);
            for k in 0..self.amps.len() {
                if k & bit == 0 {
                    let a = self.amps[k];
                    let b = self.amps[k | bit];
                    // RX(2*beta) = [[cos b, -i sin b], [-i sin b, cos b]]
                    self.amps[k] = Complex::new(
                        cos * a.re + sin * b.im,
                        cos * a.im - sin * b.re,
                    );
                    self.amps[k | bit] = Complex::new(
                        sin * a.im + cos * b.re,
                        -sin * a.re + cos * b.im,
                    );
                }
            }
        }
    }
}

/// Runs the p-layer circuit and returns the final statevector. Deterministic.
///
/// Refuses problems above `qubit_budget`, directing the caller to the
/// classical max-cut fallback.
pub fn simulate<T: Scalar>(
    problem: &CutProblem,
    params: &QaoaParams<T>,
    qubit_budget: usize,
) -> Result<Statevector<T>> {
    let n = problem.num_qubits();
    if n > qubit_budget {
        return Err(Error::QubitBudget { qubits: n, budget: qubit_budget });
    }
    let table = CutTable::new(problem);
    Ok(simulate_with_table(&table, n, params))
}

/// Circuit execution against a prebuilt cut table.
pub(crate) fn simulate_with_table<T: Scalar>(
    table: &CutTable,
    n: usize,
    params: &QaoaParams<T>,
) -> Statevector<T> {
    let mut sv = Statevector::uniform(n);
    for layer in 0..params.layers() {
        sv.apply_cost_layer(table, params.gammas[layer]);
        sv.apply_mixer_layer(params.betas[layer]);
    }
    sv
}

/// Expected objective value under the state's measurement distribution:
/// the negated expected cut, so minimization maximizes the cut.
pub fn expectation<T: Scalar>(statevector: &Statevector<T>, problem: &CutProblem) -> T {
    let table = CutTable::new(problem);
    expectation_with_table(statevector, &table)
}

pub(crate) fn expectation_with_table<T: Scalar>(
    statevector: &Statevector<T>,
    table: &CutTable,
) -> T {
    let mut acc = T::zero();
    for (k, amp) in statevector.amplitudes().iter().enumerate() {
        acc = acc + amp.norm_sqr() * T::from_u16(table.counts[k]).unwrap();
    }
    -acc
}

/// Measurement outcomes of a seeded multinomial draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    pub counts: BTreeMap<u64, u32>,
    pub shots: u32,
    pub n: usize,
}

impl ShotCounts {
    pub fn count(&self, state: u64) -> u32 {
        self.counts.get(&state).copied().unwrap_or(0)
    }
}

/// Draws `shots` measurements from |amplitude|^2. Deterministic given `seed`.
pub fn sample<T: Scalar>(statevector: &Statevector<T>, shots: u32, seed: u64) -> ShotCounts {
    assert!(shots > 0, "shots must be positive");
    // Cumulative distribution in f64 regardless of the scalar type.
    let mut cumulative = Vec::with_capacity(statevector.amps.len());
    let mut acc = 0.0f64;
    for amp in &statevector.amps {
        acc += amp.norm_sqr().to_f64_lossy();
        cumulative.push(acc);
    }
    let total = acc;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        *counts.entry(idx as u64).or_insert(0u32) += 1;
    }
    ShotCounts { counts, shots, n: statevector.num_qubits() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexClass;
    use approx::assert_relative_eq;

    fn problem(n: usize, edges: Vec<(usize, usize)>) -> CutProblem {
        CutProblem::new(n, edges, vec![VertexClass::Application; n]).unwrap()
    }

    #[test]
    fn no_layers_gives_uniform_amplitudes() {
        let p = problem(3, vec![(0, 1), (1, 2)]);
        let sv = simulate(&p, &QaoaParams::replicated(0, 0.0f64, 0.0), 20).unwrap();
        let expected = 1.0 / (8.0f64).sqrt();
        for amp in sv.amplitudes() {
            assert!((amp.re - expected).abs() < 1e-12);
            assert!(amp.im.abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_mixer_preserves_norm() {
        let p = problem(1, vec![]);
        let sv = simulate(&p, &QaoaParams::replicated(1, -1.0f64, -3.0), 20).unwrap();
        assert_relative_eq!(sv.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn norm_preserved_across_many_layers() {
        let p = problem(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]);
        let params = QaoaParams {
            gammas: vec![0.7f64, -1.3, 2.9, 0.1],
            betas: vec![-0.4, 1.9, -2.2, 0.8],
        };
        let sv = simulate(&p, &params, 20).unwrap();
        assert_relative_eq!(sv.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn budget_violation_is_reported() {
        let p = problem(6, vec![(0, 1)]);
        match simulate(&p, &QaoaParams::replicated(1, 0.5f64, 0.5), 5) {
            Err(Error::QubitBudget { qubits, budget }) => {
                assert_eq!((qubits, budget), (6, 5));
            }
            other => panic!("expected QubitBudget, got {other:?}"),
        }
    }

    #[test]
    fn expectation_of_uniform_state_is_half_edges() {
        let p = problem(2, vec![(0, 1)]);
        let sv = Statevector::<f64>::uniform(2);
        assert_relative_eq!(expectation(&sv, &p), -0.5, epsilon = 1e-12);

        // Every cut edge counts -1 on a deterministic basis state.
        let cut = Statevector::<f64>::basis(2, 0b01);
        assert_relative_eq!(expectation(&cut, &p), -1.0);

        let empty = problem(2, vec![]);
        assert_eq!(expectation(&sv, &empty), 0.0);
    }

    #[test]
    fn expectation_matches_direct_summation() {
        // Cross-check against an edge-by-edge recomputation.
        let p = problem(6, vec![(0, 1), (0, 2), (1, 4), (2, 3), (3, 5), (4, 5), (1, 5)]);
        let params = QaoaParams { gammas: vec![0.9f64, -0.3], betas: vec![0.2, 1.1] };
        let sv = simulate(&p, &params, 20).unwrap();
        let mut direct = 0.0;
        for (k, amp) in sv.amplitudes().iter().enumerate() {
            let cut = super::super::cut_value(k as u64, &p);
            direct += amp.norm_sqr() * cut as f64;
        }
        assert_relative_eq!(expectation(&sv, &p), -direct, epsilon = 1e-12);
    }

    #[test]
    fn sampling_basis_state_is_deterministic() {
        let sv = Statevector::<f64>::basis(2, 0b01);
        let counts = sample(&sv, 100, 7);
        assert_eq!(counts.count(0b01), 100);
        assert_eq!(counts.counts.len(), 1);
    }

    #[test]
    fn sampling_uniform_qubit_is_balanced() {
        let sv = Statevector::<f64>::uniform(1);
        let shots = 100_000;
        let counts = sample(&sv, shots, 42);
        // Binomial(1e5, 0.5): 3 sigma ~ 474.
        let half = f64::from(shots) / 2.0;
        let sigma3 = 3.0 * (f64::from(shots) * 0.25).sqrt();
        for state in 0..2u64 {
            let c = f64::from(counts.count(state));
            assert!((c - half).abs() <= sigma3, "count {c} outside 3 sigma of {half}");
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let p = problem(4, vec![(0, 1), (2, 3), (1, 2)]);
        let sv = simulate(&p, &QaoaParams::replicated(2, -1.0f64, -3.0), 20).unwrap();
        let a = sample(&sv, 100, 99);
        let b = sample(&sv, 100, 99);
        assert_eq!(a, b);
        let c = sample(&sv, 100, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn f32_instantiation_behaves() {
        let p = problem(3, vec![(0, 1), (1, 2), (0, 2)]);
        let sv = simulate(&p, &QaoaParams::replicated(2, -1.0f32, -3.0), 20).unwrap();
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-5);
    }
}
