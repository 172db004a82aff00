//! Derivative-free tuning of the variational angles.

use super::statevector::{expectation_with_table, simulate_with_table, CutTable};
use super::{CutProblem, QaoaParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Settings for [`optimize_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions<T> {
    pub layers: usize,
    /// Initial (gamma, beta) pair, replicated across layers.
    pub init: (T, T),
    pub max_iters: usize,
    pub qubit_budget: usize,
}

impl<T: Scalar> Default for OptimizeOptions<T> {
    fn default() -> Self {
        Self {
            layers: 2,
            init: (T::from_f64_lossy(-1.0), T::from_f64_lossy(-3.0)),
            max_iters: 100,
            qubit_budget: super::DEFAULT_QUBIT_BUDGET,
        }
    }
}

/// Minimizes the circuit expectation with a Nelder-Mead simplex over the 2p
/// angles. Deterministic. Returns the best parameters found together with the
/// best-so-far objective trace (one entry for the initial simplex plus one per
/// iteration; monotone non-increasing by construction).
pub fn optimize_params<T: Scalar>(
    problem: &CutProblem,
    options: &OptimizeOptions<T>,
) -> Result<(QaoaParams<T>, Vec<T>)> {
    let n = problem.num_qubits();
    if n > options.qubit_budget {
        return Err(Error::QubitBudget { qubits: n, budget: options.qubit_budget });
    }
    let table = CutTable::new(problem);
    let p = options.layers;
    let dims = 2 * p;

    let unpack = |x: &[T]| QaoaParams::<T> {
        gammas: x[..p].to_vec(),
        betas: x[p..].to_vec(),
    };
    let objective = |x: &[T]| -> T {
        if p == 0 {
            return expectation_with_table(&super::Statevector::uniform(n), &table);
        }
        let sv = simulate_with_table(&table, n, &unpack(x));
        expectation_with_table(&sv, &table)
    };

    let mut x0 = Vec::with_capacity(dims);
    x0.extend(std::iter::repeat(options.init.0).take(p));
    x0.extend(std::iter::repeat(options.init.1).take(p));

    if dims == 0 {
        let value = objective(&x0);
        return Ok((unpack(&x0), vec![value; options.max_iters + 1]));
    }

    // Standard coefficients: reflection 1, expansion 2, contraction 1/2,
    // shrink 1/2; initial simplex offset 0.5 per coordinate.
    let alpha = T::one();
    let gamma_exp = T::from_f64_lossy(2.0);
    let rho = T::from_f64_lossy(0.5);
    let sigma = T::from_f64_lossy(0.5);
    let step = T::from_f64_lossy(0.5);

    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(dims + 1);
    simplex.push(x0.clone());
    for i in 0..dims {
        let mut v = x0.clone();
        v[i] = v[i] + step;
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| objective(v)).collect();

    let best_of = |values: &[T]| values.iter().copied().fold(T::infinity(), T::min);
    let mut best_so_far = best_of(&values);
    let mut trace = Vec::with_capacity(options.max_iters + 1);
    trace.push(best_so_far);

    for _ in 0..options.max_iters {
        // Order the simplex by objective value.
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[dims];
        let second_worst = order[dims - 1];

        let mut centroid = vec![T::zero(); dims];
        for &i in &order[..dims] {
            for (c, xi) in centroid.iter_mut().zip(&simplex[i]) {
                *c = *c + *xi;
            }
        }
        let inv = T::one() / T::from_usize(dims).unwrap();
        for c in &mut centroid {
            *c = *c * inv;
        }

        let blend = |scale: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + scale * (c - w))
                .collect()
        };

        let reflected = blend(alpha);
        let f_reflected = objective(&reflected);

        if f_reflected < values[best] {
            let expanded = blend(alpha * gamma_exp);
            let f_expanded = objective(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = if f_reflected < values[worst] {
                blend(alpha * rho)
            } else {
                blend(-rho)
            };
            let f_contracted = objective(&contracted);
            if f_contracted < values[worst].min(f_reflected) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best].clone();
                for i in 0..simplex.len() {
                    if i == best {
                        continue;
                    }
                    for (xi, &ai) in simplex[i].iter_mut().zip(&anchor) {
                        *xi = ai + sigma * (*xi - ai);
                    }
                    values[i] = objective(&simplex[i]);
                }
            }
        }

        best_so_far = best_so_far.min(best_of(&values));
        trace.push(best_so_far);
    }

    let mut best_idx = 0;
    for i in 1..values.len() {
        if values[i] < values[best_idx] {
            best_idx = i;
        }
    }
    Ok((unpack(&simplex[best_idx]), trace))
}
