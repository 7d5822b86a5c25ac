//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::rngs::StdRng;
use rand::Rng;
use wforms::DiscreteMeasure;

pub fn random_points(rng: &mut StdRng, n: usize, d: usize, spread: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-spread..spread)).collect())
        .collect()
}

pub fn random_uniform(rng: &mut StdRng, n: usize, d: usize) -> DiscreteMeasure {
    DiscreteMeasure::uniform(random_points(rng, n, d, 2.0)).unwrap()
}

pub fn random_weighted(rng: &mut StdRng, n: usize, d: usize) -> DiscreteMeasure {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::new(random_points(rng, n, d, 2.0), raw.iter().map(|w| w / total).collect()).unwrap()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over all permutation couplings of two uniform measures of equal
/// size; the Birkhoff–von Neumann theorem makes this the transport optimum.
pub fn permutation_oracle(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let n = mu.len();
    assert_eq!(n, nu.len());
    permutations(n)
        .iter()
        .map(|p| (0..n).map(|i| sq(mu.atom(i), nu.atom(p[i]))).sum::<f64>() / n as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Transport cost as a generic LP over the couplings.
pub fn primal_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = (0..mu.len())
        .map(|i| {
            (0..nu.len())
                .map(|j| lp.add_var(sq(mu.atom(i), nu.atom(j)), (0.0, f64::INFINITY)))
                .collect()
        })
        .collect();
    for i in 0..mu.len() {
        let row: Vec<_> = vars[i].iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, mu.weights()[i]);
    }
    for j in 0..nu.len() {
        let col: Vec<_> = vars.iter().map(|r| (r[j], 1.0)).collect();
        lp.add_constraint(col.as_slice(), ComparisonOp::Eq, nu.weights()[j]);
    }
    lp.solve().unwrap().objective()
}

/// Kantorovich dual `max Σ a_i u_i + Σ b_j v_j` s.t. `u_i + v_j ≤ c_ij`.
/// Some optimal pair lies in a box of side `2 max c`; the solver needs
/// finite bounds.
pub fn dual_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let cmax = (0..mu.len())
        .flat_map(|i| (0..nu.len()).map(move |j| sq(mu.atom(i), nu.atom(j))))
        .fold(0.0, f64::max);
    let bound = (-2.0 * cmax - 1.0, 2.0 * cmax + 1.0);
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let u: Vec<_> = mu.weights().iter().map(|&a| lp.add_var(a, bound)).collect();
    let v: Vec<_> = nu.weights().iter().map(|&b| lp.add_var(b, bound)).collect();
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            lp.add_constraint([(u[i], 1.0), (v[j], 1.0)], ComparisonOp::Le, sq(mu.atom(i), nu.atom(j)));
        }
    }
    lp.solve().unwrap().objective()
}
