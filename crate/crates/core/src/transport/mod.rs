//! Exact optimal transport between discrete measures for the quadratic cost.
//!
//! Plans are vertex solutions of the transportation LP found by
//! [`simplex`]; the same run yields Kantorovich potentials whose dual value
//! equals the primal cost. Identical inputs in identical order always give
//! the same vertex.

pub mod simplex;

use serde::Serialize;

use crate::calculus::MeasureCurve;
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, TangentField};
use crate::numeric::{dist2, pairwise_sum};

/// Plan entries at or below this mass are dropped from supports.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TransportPlan {
    gamma: Vec<Vec<f64>>,
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    cost: f64,
    u: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanJson {
    pub gamma: Vec<Vec<f64>>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn gamma(&self) -> &[Vec<f64>] {
        &self.gamma
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    /// `Σ γ_ij |x_i − y_j|²`
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Kantorovich potentials certified by this plan.
    pub fn potentials(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.v)
    }

    /// Cost recomputed from `gamma`.
    pub fn recomputed_cost(&self) -> f64 {
        plan_cost(&self.gamma, &self.source, &self.target)
    }

    /// Largest deviation of row/column sums from the marginals.
    pub fn marginal_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (row, a) in self.gamma.iter().zip(self.source.weights()) {
            worst = worst.max((pairwise_sum(row) - a).abs());
        }
        for (j, b) in self.target.weights().iter().enumerate() {
            let col: Vec<f64> = self.gamma.iter().map(|r| r[j]).collect();
            worst = worst.max((pairwise_sum(&col) - b).abs());
        }
        worst
    }

    /// Largest cost decrease obtainable by swapping the targets of two
    /// support cells; ≤ 0 (up to roundoff) for a cyclically monotone support.
    pub fn best_two_swap_gain(&self) -> f64 {
        let cells: Vec<(usize, usize)> = self.support();
        let x = self.source.atoms();
        let y = self.target.atoms();
        let mut best = f64::NEG_INFINITY;
        for (a, &(i, j)) in cells.iter().enumerate() {
            for &(k, l) in &cells[a + 1..] {
                let now = dist2(&x[i], &y[j]) + dist2(&x[k], &y[l]);
                let swapped = dist2(&x[i], &y[l]) + dist2(&x[k], &y[j]);
                best = best.max(now - swapped);
            }
        }
        best
    }

    /// Cells with mass above [`SUPPORT_THRESHOLD`].
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for (i, row) in self.gamma.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if g > SUPPORT_THRESHOLD {
                    cells.push((i, j));
                }
            }
        }
        cells
    }

    pub fn to_json(&self) -> PlanJson {
        PlanJson {
            gamma: self.gamma.clone(),
            cost: self.cost,
        }
    }
}

fn plan_cost(gamma: &[Vec<f64>], mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let mut terms = Vec::with_capacity(mu.len() * nu.len());
    for (i, row) in gamma.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            terms.push(g * dist2(mu.atom(i), nu.atom(j)));
        }
    }
    pairwise_sum(&terms)
}

fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<f64> {
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for x in mu.atoms() {
        for y in nu.atoms() {
            c.push(dist2(x, y));
        }
    }
    c
}

fn check_dims(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    Ok(())
}

/// Zero-cost coupling by greedy matching of identical atoms, when one
/// exists.
fn identity_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Option<Vec<Vec<f64>>> {
    let mut rem_a = mu.weights().to_vec();
    let mut rem_b = nu.weights().to_vec();
    let mut gamma = vec![vec![0.0; nu.len()]; mu.len()];
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            if rem_a[i] <= 0.0 {
                break;
            }
            if rem_b[j] > 0.0 && mu.atom(i) == nu.atom(j) {
                let q = rem_a[i].min(rem_b[j]);
                gamma[i][j] += q;
                rem_a[i] -= q;
                rem_b[j] -= q;
            }
        }
    }
    let left = rem_a.iter().chain(&rem_b).fold(0.0f64, |m, r| m.max(*r));
    (left <= 1e-15).then_some(gamma)
}

fn plan_from_solution(mu: &DiscreteMeasure, nu: &DiscreteMeasure, sol: &simplex::Solution) -> TransportPlan {
    let m = nu.len();
    let gamma: Vec<Vec<f64>> = (0..mu.len()).map(|i| sol.flow[i * m..(i + 1) * m].to_vec()).collect();
    let cost = plan_cost(&gamma, mu, nu);
    TransportPlan {
        gamma,
        source: mu.clone(),
        target: nu.clone(),
        cost,
        u: sol.u.clone(),
        v: sol.v.clone(),
    }
}

/// A minimiser of `Σ γ_ij |x_i − y_j|²` over couplings of `mu` and `nu`.
pub fn optimal_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<TransportPlan> {
    check_dims(mu, nu)?;
    if let Some(gamma) = identity_plan(mu, nu) {
        return Ok(TransportPlan {
            gamma,
            source: mu.clone(),
            target: nu.clone(),
            cost: 0.0,
            u: vec![0.0; mu.len()],
            v: vec![0.0; nu.len()],
        });
    }
    let cost = cost_matrix(mu, nu);
    let problem = simplex::Problem {
        supply: mu.weights(),
        demand: nu.weights(),
        cost: &cost,
    };
    let sol = simplex::solve(&problem);
    Ok(plan_from_solution(mu, nu, &sol))
}

/// A second optimal vertex, adjacent to the one returned by
/// [`optimal_plan`], when the optimal set is not a singleton along some
/// edge of the polytope.
pub fn alternative_optimal_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Option<TransportPlan>> {
    check_dims(mu, nu)?;
    let cost = cost_matrix(mu, nu);
    let problem = simplex::Problem {
        supply: mu.weights(),
        demand: nu.weights(),
        cost: &cost,
    };
    let sol = simplex::solve(&problem);
    Ok(simplex::alternative_vertex(&problem, &sol).map(|alt| plan_from_solution(mu, nu, &alt)))
}

/// `W₂(μ, ν)`
pub fn w2_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    Ok(optimal_plan(mu, nu)?.cost().max(0.0).sqrt())
}

/// Kantorovich potentials `(u, v)` with `u_i + v_j ≤ |x_i − y_j|²` and
/// `Σ a_i u_i + Σ b_j v_j = W₂²`, normalised by `u_0 = 0`.
pub fn dual_potentials(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(Vec<f64>, Vec<f64>)> {
    let plan = optimal_plan(mu, nu)?;
    let (u, v) = plan.potentials();
    Ok((u.to_vec(), v.to_vec()))
}

/// Dual objective `Σ a_i u_i + Σ b_j v_j`.
pub fn dual_value(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &[f64], v: &[f64]) -> f64 {
    let terms: Vec<f64> = mu
        .weights()
        .iter()
        .zip(u)
        .map(|(a, u)| a * u)
        .chain(nu.weights().iter().zip(v).map(|(b, v)| b * v))
        .collect();
    pairwise_sum(&terms)
}

/// Displacement `v_i = (Σ_j γ_ij y_j) / a_i − x_i`.
pub fn barycentric_projection(plan: &TransportPlan) -> TangentField {
    let mu = plan.source();
    let nu = plan.target();
    let d = mu.dim();
    let vectors = plan
        .gamma()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let a = mu.weights()[i];
            (0..d)
                .map(|k| {
                    let terms: Vec<f64> = row.iter().zip(nu.atoms()).map(|(g, y)| g * y[k]).collect();
                    pairwise_sum(&terms) / a - mu.atom(i)[k]
                })
                .collect()
        })
        .collect();
    TangentField::new(vectors)
}

/// Constant-speed geodesic `σ_t = ((1−t)π¹ + tπ²)#γ` sampled on `tgrid`,
/// one trajectory per support cell of the optimal plan with velocity
/// `y_j − x_i`.
pub fn geodesic(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tgrid: &[f64]) -> Result<MeasureCurve> {
    let plan = optimal_plan(mu, nu)?;
    geodesic_from_plan(&plan, tgrid)
}

pub fn geodesic_from_plan(plan: &TransportPlan, tgrid: &[f64]) -> Result<MeasureCurve> {
    if tgrid.len() < 2 {
        return Err(Error::Invalid("time grid needs at least two points".into()));
    }
    if tgrid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("time grid must be strictly increasing".into()));
    }
    if tgrid[0] != 0.0 || *tgrid.last().unwrap() != 1.0 || tgrid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Invalid(
            "time grid must lie in [0, 1] and include both endpoints".into(),
        ));
    }
    let mu = plan.source();
    let nu = plan.target();
    let cells = plan.support();
    let mass: Vec<f64> = cells.iter().map(|&(i, j)| plan.gamma()[i][j]).collect();
    let total = pairwise_sum(&mass);
    let weights: Vec<f64> = mass.iter().map(|g| g / total).collect();
    let velocity: Vec<Vec<f64>> = cells
        .iter()
        .map(|&(i, j)| crate::numeric::sub(nu.atom(j), mu.atom(i)))
        .collect();
    let positions: Vec<Vec<Vec<f64>>> = tgrid
        .iter()
        .map(|&t| {
            cells
                .iter()
                .map(|&(i, j)| {
                    mu.atom(i)
                        .iter()
                        .zip(nu.atom(j))
                        .map(|(x, y)| if t == 1.0 { *y } else { (1.0 - t) * x + t * y })
                        .collect()
                })
                .collect()
        })
        .collect();
    let velocities = vec![velocity; tgrid.len()];
    MeasureCurve::new(tgrid.to_vec(), weights, positions, Some(velocities))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::merge_atoms;

    fn m(atoms: Vec<Vec<f64>>, w: Vec<f64>) -> DiscreteMeasure {
        DiscreteMeasure::new(atoms, w).unwrap()
    }

    #[test]
    fn forced_coupling_between_diracs() {
        let mu = DiscreteMeasure::dirac(vec![0.0, 0.0]);
        let nu = DiscreteMeasure::dirac(vec![3.0, 4.0]);
        let plan = optimal_plan(&mu, &nu).unwrap();
        assert_eq!(plan.gamma(), &[vec![1.0]]);
        assert_eq!(plan.cost(), 25.0);
        assert_eq!(w2_distance(&mu, &nu).unwrap(), 5.0);
    }

    #[test]
    fn monotone_plan_on_the_line() {
        // crossing coupling {0→3, 2→1} costs ½·9 + ½·1 = 5
        let mu = m(vec![vec![0.0], vec![2.0]], vec![0.5, 0.5]);
        let nu = m(vec![vec![1.0], vec![3.0]], vec![0.5, 0.5]);
        let plan = optimal_plan(&mu, &nu).unwrap();
        assert_eq!(plan.gamma(), &[vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert_eq!(plan.cost(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let mu = DiscreteMeasure::dirac(vec![0.0]);
        let nu = DiscreteMeasure::dirac(vec![0.0, 1.0]);
        assert!(matches!(optimal_plan(&mu, &nu), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            geodesic(&mu, &nu, &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dirac_potentials() {
        let x = vec![1.0, -2.0];
        let y = vec![0.5, 0.5];
        let mu = DiscreteMeasure::dirac(x.clone());
        let nu = DiscreteMeasure::dirac(y.clone());
        let (u, v) = dual_potentials(&mu, &nu).unwrap();
        assert_eq!(u, vec![0.0]);
        assert_eq!(v, vec![dist2(&x, &y)]);
    }

    #[test]
    fn identical_measures_have_zero_dual() {
        let mu = m(
            vec![vec![0.0, 1.0], vec![2.0, 0.0], vec![1.0, 1.0]],
            vec![0.2, 0.3, 0.5],
        );
        let plan = optimal_plan(&mu, &mu).unwrap();
        assert_eq!(plan.cost(), 0.0);
        let (u, v) = dual_potentials(&mu, &mu).unwrap();
        assert!(u.iter().chain(&v).all(|p| *p == 0.0));
        assert_eq!(dual_value(&mu, &mu, &u, &v), 0.0);
        let bary = barycentric_projection(&plan);
        assert!(bary.vectors().iter().flatten().all(|c| *c == 0.0));
    }

    #[test]
    fn barycentric_projection_examples() {
        let x = vec![0.3, 0.1];
        let y = vec![-1.0, 2.0];
        let plan = optimal_plan(&DiscreteMeasure::dirac(x.clone()), &DiscreteMeasure::dirac(y.clone())).unwrap();
        assert_eq!(barycentric_projection(&plan).vector(0), &[-1.3, 1.9]);
        let split = m(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5]);
        let plan = optimal_plan(&DiscreteMeasure::dirac(vec![0.0]), &split).unwrap();
        assert_eq!(barycentric_projection(&plan).vector(0), &[0.0]);
    }

    #[test]
    fn dirac_geodesic_is_a_straight_line() {
        let x = vec![1.0, 0.0];
        let y = vec![0.0, 2.0];
        let grid = [0.0, 0.25, 0.5, 1.0];
        let curve = geodesic(
            &DiscreteMeasure::dirac(x.clone()),
            &DiscreteMeasure::dirac(y.clone()),
            &grid,
        )
        .unwrap();
        for (k, t) in grid.iter().enumerate() {
            let expect: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            assert_eq!(curve.measure(k).atom(0), expect.as_slice());
        }
    }

    #[test]
    fn geodesic_endpoints() {
        let mu = m(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.5]);
        let nu = m(
            vec![vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![0.25, 0.25, 0.5],
        );
        let curve = geodesic(&mu, &nu, &[0.0, 0.5, 1.0]).unwrap();
        let start = merge_atoms(curve.measure(0), 0.0);
        let end = merge_atoms(curve.measure(2), 0.0);
        assert!(w2_distance(&start, &mu).unwrap() < 1e-12);
        assert!(w2_distance(&end, &nu).unwrap() < 1e-12);
    }

    #[test]
    fn alternative_vertex_for_symmetric_cross() {
        // both perfect matchings are optimal
        let mu = m(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.5]);
        let nu = m(vec![vec![0.0, -1.0], vec![0.0, 1.0]], vec![0.5, 0.5]);
        let plan = optimal_plan(&mu, &nu).unwrap();
        let alt = alternative_optimal_plan(&mu, &nu)
            .unwrap()
            .expect("second vertex exists");
        assert!((alt.cost() - plan.cost()).abs() < 1e-12);
        assert_ne!(alt.gamma(), plan.gamma());
        assert!(alt.marginal_error() < 1e-12);
    }

    #[test]
    fn unique_optimum_has_no_alternative() {
        let mu = m(vec![vec![0.0], vec![2.0]], vec![0.5, 0.5]);
        let nu = m(vec![vec![1.0], vec![3.0]], vec![0.5, 0.5]);
        assert!(alternative_optimal_plan(&mu, &nu).unwrap().is_none());
    }
}
