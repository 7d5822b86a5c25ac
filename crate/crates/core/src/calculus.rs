//! Tangent calculus on the distinct-atom stratum: the divergence pairing,
//! Wasserstein gradients of functionals and absolutely continuous curves of
//! measures with their velocities.
//!
//! Curves are stored as particle trajectories: `n` atoms with fixed weights
//! whose positions are sampled on a time grid. Checks on curves always
//! compare measures, never atom labels, so a loop may return to its starting
//! measure with its atoms permuted.

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::measure::{DiscreteMeasure, Functional, TangentField};
use crate::numeric::{dot, norm, pairwise_sum, trapezoid};
use crate::transport::w2_distance;

/// Atom coordinates (or velocities) indexed by atom.
pub type Positions = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCurve {
    times: Vec<f64>,
    measures: Vec<DiscreteMeasure>,
    velocities: Option<Vec<TangentField>>,
}

impl MeasureCurve {
    /// `positions[k][i]` is atom `i` at `times[k]`; `velocities`, when
    /// present, has the same layout.
    pub fn new(
        times: Vec<f64>,
        weights: Vec<f64>,
        positions: Vec<Vec<Vec<f64>>>,
        velocities: Option<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Invalid("a curve needs at least one time".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("curve times must be strictly increasing".into()));
        }
        if positions.len() != times.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                found: positions.len(),
            });
        }
        let base = DiscreteMeasure::new(positions[0].clone(), weights)?;
        let measures = positions
            .into_iter()
            .map(|p| base.with_atoms(p))
            .collect::<Result<Vec<_>>>()?;
        let velocities = match velocities {
            None => None,
            Some(vs) => {
                if vs.len() != times.len() {
                    return Err(Error::LengthMismatch {
                        expected: times.len(),
                        found: vs.len(),
                    });
                }
                let fields: Vec<TangentField> = vs.into_iter().map(TangentField::new).collect();
                for (f, mu) in fields.iter().zip(&measures) {
                    f.check_aligned(mu)?;
                }
                Some(fields)
            }
        };
        Ok(Self {
            times,
            measures,
            velocities,
        })
    }

    /// Sample analytic trajectories `position(t)` and velocities `velocity(t)`
    /// on `times`.
    pub fn from_trajectory<P, V>(times: Vec<f64>, weights: Vec<f64>, position: P, velocity: V) -> Result<Self>
    where
        P: Fn(f64) -> Vec<Vec<f64>>,
        V: Fn(f64) -> Vec<Vec<f64>>,
    {
        let pos = times.iter().map(|&t| position(t)).collect();
        let vel = times.iter().map(|&t| velocity(t)).collect();
        Self::new(times, weights, pos, Some(vel))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_atoms(&self) -> usize {
        self.measures[0].len()
    }

    pub fn dim(&self) -> usize {
        self.measures[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        self.measures[0].weights()
    }

    pub fn measure(&self, k: usize) -> &DiscreteMeasure {
        &self.measures[k]
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    pub fn velocity(&self, k: usize) -> Option<&TangentField> {
        self.velocities.as_ref().map(|v| &v[k])
    }

    pub fn velocities(&self) -> Option<&[TangentField]> {
        self.velocities.as_deref()
    }

    pub fn has_velocities(&self) -> bool {
        self.velocities.is_some()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Replace the velocities with finite differences of the trajectories:
    /// central in the interior (`O(Δt²)`), one-sided at both ends (`O(Δt)`).
    pub fn with_extracted_velocities(&self) -> Result<Self> {
        let k_max = self.len();
        if k_max < 2 {
            return Err(Error::Invalid("velocity extraction needs at least two times".into()));
        }
        let n = self.n_atoms();
        let velocities = (0..k_max)
            .map(|k| {
                let (lo, hi) = if k == 0 {
                    (0, 1)
                } else if k == k_max - 1 {
                    (k_max - 2, k_max - 1)
                } else {
                    (k - 1, k + 1)
                };
                let dt = self.times[hi] - self.times[lo];
                let vecs = (0..n)
                    .map(|i| {
                        self.measures[hi]
                            .atom(i)
                            .iter()
                            .zip(self.measures[lo].atom(i))
                            .map(|(b, a)| (b - a) / dt)
                            .collect()
                    })
                    .collect();
                TangentField::new(vecs)
            })
            .collect();
        Ok(Self {
            times: self.times.clone(),
            measures: self.measures.clone(),
            velocities: Some(velocities),
        })
    }

    pub fn without_velocities(&self) -> Self {
        Self {
            times: self.times.clone(),
            measures: self.measures.clone(),
            velocities: None,
        }
    }

    /// `t ↦ σ_{a+b−t}` with negated velocities.
    pub fn reversed(&self) -> Self {
        let (a, b) = (self.start(), self.end());
        let times = self.times.iter().rev().map(|t| a + b - t).collect();
        let measures = self.measures.iter().rev().cloned().collect();
        let velocities = self
            .velocities
            .as_ref()
            .map(|vs| vs.iter().rev().map(|v| v.scaled(-1.0)).collect());
        Self {
            times,
            measures,
            velocities,
        }
    }

    /// Positions and velocity at an arbitrary time in `[start, end]` by cubic
    /// Hermite interpolation of the trajectories.
    pub fn sample_at(&self, t: f64) -> Result<(Positions, Positions)> {
        let vel = self.velocities.as_ref().ok_or(Error::MissingVelocities)?;
        let (a, b) = (self.start(), self.end());
        let span = (b - a).abs().max(1.0);
        if t < a - 1e-12 * span || t > b + 1e-12 * span {
            return Err(Error::OutOfRange { t });
        }
        let t = t.clamp(a, b);
        if let Ok(k) = self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            return Ok((self.measures[k].atoms().to_vec(), vel[k].vectors().to_vec()));
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let h = self.times[k + 1] - self.times[k];
        let tau = (t - self.times[k]) / h;
        let (t2, t3) = (tau * tau, tau * tau * tau);
        let (h00, h10, h01, h11) = (
            2.0 * t3 - 3.0 * t2 + 1.0,
            t3 - 2.0 * t2 + tau,
            -2.0 * t3 + 3.0 * t2,
            t3 - t2,
        );
        let (d00, d10, d01, d11) = (
            6.0 * t2 - 6.0 * tau,
            3.0 * t2 - 4.0 * tau + 1.0,
            -6.0 * t2 + 6.0 * tau,
            3.0 * t2 - 2.0 * tau,
        );
        let (x0, x1) = (&self.measures[k], &self.measures[k + 1]);
        let (v0, v1) = (&vel[k], &vel[k + 1]);
        let mut pos = Vec::with_capacity(self.n_atoms());
        let mut dpos = Vec::with_capacity(self.n_atoms());
        for i in 0..self.n_atoms() {
            let mut p = Vec::with_capacity(self.dim());
            let mut dp = Vec::with_capacity(self.dim());
            for c in 0..self.dim() {
                let (xa, xb, va, vb) = (x0.atom(i)[c], x1.atom(i)[c], v0.vector(i)[c], v1.vector(i)[c]);
                p.push(h00 * xa + h10 * h * va + h01 * xb + h11 * h * vb);
                dp.push((d00 * xa + d10 * h * va + d01 * xb + d11 * h * vb) / h);
            }
            pos.push(p);
            dpos.push(dp);
        }
        Ok((pos, dpos))
    }

    /// Resample on `times ⊂ [start, end]` by Hermite interpolation.
    pub fn resample(&self, times: &[f64]) -> Result<Self> {
        let mut pos = Vec::with_capacity(times.len());
        let mut vel = Vec::with_capacity(times.len());
        for &t in times {
            let (p, v) = self.sample_at(t)?;
            pos.push(p);
            vel.push(v);
        }
        Self::new(times.to_vec(), self.weights().to_vec(), pos, Some(vel))
    }

    /// `sup_t ‖v_t‖_{σ_t}`
    pub fn max_speed(&self) -> Result<f64> {
        let vel = self.velocities.as_ref().ok_or(Error::MissingVelocities)?;
        let mut best = 0.0f64;
        for (v, mu) in vel.iter().zip(&self.measures) {
            best = best.max(v.norm(mu)?);
        }
        Ok(best)
    }

    /// `∫ ‖v_t‖²_{σ_t} dt`, the constant in `W₂²(σ_s, σ_t) ≤ c |t − s|`.
    pub fn kinetic_energy(&self) -> Result<f64> {
        let vel = self.velocities.as_ref().ok_or(Error::MissingVelocities)?;
        let sq = vel
            .iter()
            .zip(&self.measures)
            .map(|(v, mu)| v.inner(v, mu))
            .collect::<Result<Vec<_>>>()?;
        Ok(trapezoid(&self.times, &sq))
    }
}

/// `⟨div_μ X, f⟩ = −Σ a_i ⟨∇f(x_i), X_i⟩`
pub fn divergence_pairing(mu: &DiscreteMeasure, x: &TangentField, f: &ScalarField) -> Result<f64> {
    x.check_aligned(mu)?;
    let terms: Vec<f64> = mu
        .atoms()
        .iter()
        .zip(x.vectors())
        .zip(mu.weights())
        .map(|((p, v), a)| -a * dot(&f.gradient(p), v))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Orthogonal projection onto `T_μ𝓜`, which is all of `L²(μ)` when the atoms
/// are pairwise distinct.
pub fn tangent_projection(mu: &DiscreteMeasure, x: &TangentField) -> Result<TangentField> {
    x.check_aligned(mu)?;
    mu.require_distinct()?;
    Ok(x.clone())
}

/// Options for [`wasserstein_gradient_with`].
#[derive(Debug, Clone, Copy)]
pub struct GradientOptions {
    /// Base step; atom `i` uses `step · (1 + |x_i|)`.
    pub step: f64,
    /// Combine steps `h` and `h/2` to cancel the `O(h²)` term.
    pub richardson: bool,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            richardson: false,
        }
    }
}

/// `(∇_μ F)_i = (1/a_i) ∂F/∂x_i` by central differences on each atom
/// coordinate with step `h · (1 + |x_i|)`.
pub fn wasserstein_gradient(f: &Functional, mu: &DiscreteMeasure, h: f64) -> Result<TangentField> {
    wasserstein_gradient_with(
        f,
        mu,
        GradientOptions {
            step: h,
            richardson: false,
        },
    )
}

pub fn wasserstein_gradient_with(f: &Functional, mu: &DiscreteMeasure, opts: GradientOptions) -> Result<TangentField> {
    if !(opts.step > 0.0) {
        return Err(Error::Invalid(format!(
            "finite-difference step must be positive, got {}",
            opts.step
        )));
    }
    mu.require_distinct()?;
    let partial = |i: usize, k: usize, h: f64| -> Result<f64> {
        let mut plus = mu.atoms().to_vec();
        let mut minus = mu.atoms().to_vec();
        plus[i][k] += h;
        minus[i][k] -= h;
        let fp = f.eval(&mu.with_atoms(plus)?);
        let fm = f.eval(&mu.with_atoms(minus)?);
        Ok((fp - fm) / (2.0 * h))
    };
    let mut vectors = Vec::with_capacity(mu.len());
    for i in 0..mu.len() {
        let h = opts.step * (1.0 + norm(mu.atom(i)));
        let a = mu.weights()[i];
        let mut g = Vec::with_capacity(mu.dim());
        for k in 0..mu.dim() {
            let d = if opts.richardson {
                (4.0 * partial(i, k, 0.5 * h)? - partial(i, k, h)?) / 3.0
            } else {
                partial(i, k, h)?
            };
            g.push(d / a);
        }
        vectors.push(g);
    }
    Ok(TangentField::new(vectors))
}

/// The analytic gradient when `f` carries one, else finite differences
/// with the default step.
pub fn gradient_of(f: &Functional, mu: &DiscreteMeasure) -> Result<TangentField> {
    mu.require_distinct()?;
    match f.analytic_gradient(mu) {
        Some(g) => {
            g.check_aligned(mu)?;
            Ok(g)
        }
        None => wasserstein_gradient_with(f, mu, GradientOptions::default()),
    }
}

fn grid_index(curve: &MeasureCurve, t: f64) -> Option<usize> {
    let span = (curve.end() - curve.start()).abs().max(1.0);
    curve.times().iter().position(|&s| (s - t).abs() <= 1e-12 * span)
}

/// `|σ'|(t) ≈ W₂(σ_{t+h}, σ_{t−h}) / 2h` with `h` the grid spacing at an
/// interior grid time `t`.
pub fn metric_derivative(curve: &MeasureCurve, t: f64) -> Result<f64> {
    let k = grid_index(curve, t).ok_or(Error::OutOfRange { t })?;
    if k == 0 || k + 1 >= curve.len() {
        return Err(Error::OutOfRange { t });
    }
    let dt = curve.times()[k + 1] - curve.times()[k - 1];
    Ok(w2_distance(curve.measure(k + 1), curve.measure(k - 1))? / dt)
}

/// Metric derivative at every grid time, one-sided at the ends.
pub fn metric_derivative_profile(curve: &MeasureCurve) -> Result<Vec<f64>> {
    let n = curve.len();
    if n < 2 {
        return Err(Error::Invalid("metric derivative needs at least two times".into()));
    }
    (0..n)
        .map(|k| {
            let (lo, hi) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            Ok(w2_distance(curve.measure(hi), curve.measure(lo))? / (curve.times()[hi] - curve.times()[lo]))
        })
        .collect()
}

/// `∫ |σ'|(t) dt` by the trapezoid rule on the metric-derivative profile.
pub fn curve_length(curve: &MeasureCurve) -> Result<f64> {
    Ok(trapezoid(curve.times(), &metric_derivative_profile(curve)?))
}

/// A strictly increasing Lipschitz map `r: [c, d] → [a, b]` with derivative.
pub struct Reparametrization<'a> {
    pub domain: (f64, f64),
    pub map: &'a dyn Fn(f64) -> f64,
    pub derivative: &'a dyn Fn(f64) -> f64,
}

/// `σ̄_s = σ_{r(s)}`, `v̄_s = ṙ(s) v_{r(s)}` sampled on `sgrid ⊂ [c, d]`.
pub fn reparametrize(curve: &MeasureCurve, r: &Reparametrization<'_>, sgrid: &[f64]) -> Result<MeasureCurve> {
    if !curve.has_velocities() {
        return Err(Error::MissingVelocities);
    }
    let (c, d) = r.domain;
    if !(d > c) {
        return Err(Error::NonMonotone {
            reason: format!("empty domain [{c}, {d}]"),
        });
    }
    let (a, b) = (curve.start(), curve.end());
    let tol = 1e-10 * (b - a).abs().max(1.0);
    if ((r.map)(c) - a).abs() > tol || ((r.map)(d) - b).abs() > tol {
        return Err(Error::NonMonotone {
            reason: format!(
                "r maps [{c}, {d}] onto [{}, {}], not [{a}, {b}]",
                (r.map)(c),
                (r.map)(d)
            ),
        });
    }
    let mapped: Vec<f64> = sgrid.iter().map(|&s| (r.map)(s)).collect();
    if mapped.windows(2).any(|w| !(w[1] >= w[0])) || sgrid.iter().any(|&s| (r.derivative)(s) < 0.0) {
        return Err(Error::NonMonotone {
            reason: "r must be increasing".into(),
        });
    }
    let mut pos = Vec::with_capacity(sgrid.len());
    let mut vel = Vec::with_capacity(sgrid.len());
    for (&s, &t) in sgrid.iter().zip(&mapped) {
        let (p, v) = curve.sample_at(t.clamp(a, b))?;
        let rate = (r.derivative)(s);
        pos.push(p);
        vel.push(
            v.into_iter()
                .map(|vi| vi.into_iter().map(|c| rate * c).collect())
                .collect(),
        );
    }
    MeasureCurve::new(sgrid.to_vec(), curve.weights().to_vec(), pos, Some(vel))
}

/// Largest discrepancy, over interior grid times and the given test
/// functions, between the central difference of `t ↦ ∫ f dσ_t` and
/// `∫ ⟨∇f, v_t⟩ dσ_t`.
pub fn continuity_residual(curve: &MeasureCurve, tests: &[ScalarField]) -> Result<f64> {
    let vel = curve.velocities().ok_or(Error::MissingVelocities)?;
    let mut worst = 0.0f64;
    for f in tests {
        let vals: Vec<f64> = curve
            .measures()
            .iter()
            .map(|mu| crate::measure::linear_functional(f, mu))
            .collect();
        for k in 1..curve.len().saturating_sub(1) {
            let dt = curve.times()[k + 1] - curve.times()[k - 1];
            let lhs = (vals[k + 1] - vals[k - 1]) / dt;
            let rhs = -divergence_pairing(curve.measure(k), &vel[k], f)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::make_measure;
    use crate::numeric::linspace;
    use crate::polynomial::Polynomial;

    fn coord(dim: usize, k: usize) -> ScalarField {
        ScalarField::from_polynomial(Polynomial::coordinate(dim, k))
    }

    #[test]
    fn divergence_pairing_examples() {
        let mu = DiscreteMeasure::dirac(vec![0.0, 0.0]);
        let x = TangentField::new(vec![vec![1.0, 0.0]]);
        assert_eq!(divergence_pairing(&mu, &x, &coord(2, 0)).unwrap(), -1.0);
        let zero = TangentField::zeros(1, 2);
        assert_eq!(divergence_pairing(&mu, &zero, &ScalarField::gaussian(2)).unwrap(), 0.0);
        let bad = TangentField::zeros(2, 2);
        assert!(matches!(
            divergence_pairing(&mu, &bad, &coord(2, 0)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn tangent_projection_is_identity_on_stratum() {
        let mu = make_measure(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let x = TangentField::new(vec![vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 7.0]]);
        assert_eq!(tangent_projection(&mu, &x).unwrap(), x);
        let z = TangentField::zeros(3, 2);
        assert_eq!(tangent_projection(&mu, &z).unwrap(), z);
        let dup = make_measure(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            tangent_projection(&dup, &TangentField::zeros(2, 2)),
            Err(Error::CoincidentAtoms { first: 0, second: 1 })
        ));
    }

    #[test]
    fn gradient_of_constant_and_linear_functionals() {
        let mu = make_measure(vec![vec![0.5, -1.0], vec![2.0, 0.3]], vec![0.4, 0.6]).unwrap();
        let g = wasserstein_gradient(&Functional::constant(3.0), &mu, 1e-5).unwrap();
        assert!(g.vectors().iter().flatten().all(|c| *c == 0.0));
        let f = ScalarField::gaussian(2);
        let g = wasserstein_gradient(&Functional::linear(f.clone()), &mu, 1e-5).unwrap();
        for i in 0..2 {
            let exact = f.gradient(mu.atom(i));
            for k in 0..2 {
                assert!((g.vector(i)[k] - exact[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gradient_of_second_moment() {
        // W₂²(μ, δ₀) = ∫|x|² dμ, gradient 2x
        let mu = make_measure(
            vec![vec![1.0, 2.0], vec![-0.5, 0.25], vec![3.0, -1.0]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let f = Functional::new(|m: &DiscreteMeasure| m.second_moment());
        let g = wasserstein_gradient_with(
            &f,
            &mu,
            GradientOptions {
                step: 1e-4,
                richardson: true,
            },
        )
        .unwrap();
        for i in 0..3 {
            for k in 0..2 {
                assert!((g.vector(i)[k] - 2.0 * mu.atom(i)[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gradient_requires_distinct_atoms() {
        let dup = make_measure(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            wasserstein_gradient(&Functional::constant(0.0), &dup, 1e-5),
            Err(Error::CoincidentAtoms { .. })
        ));
    }

    fn dirac_line(times: Vec<f64>) -> MeasureCurve {
        MeasureCurve::from_trajectory(times, vec![1.0], |t| vec![vec![t, 0.0]], |_| vec![vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn metric_derivative_examples() {
        let c = dirac_line(linspace(0.0, 1.0, 10));
        assert!((metric_derivative(&c, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(metric_derivative(&c, 0.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(metric_derivative(&c, 0.55), Err(Error::OutOfRange { .. })));
        let still = MeasureCurve::from_trajectory(
            linspace(0.0, 1.0, 4),
            vec![1.0],
            |_| vec![vec![2.0]],
            |_| vec![vec![0.0]],
        )
        .unwrap();
        assert_eq!(metric_derivative(&still, still.times()[1]).unwrap(), 0.0);
    }

    #[test]
    fn identity_reparametrization() {
        let c = dirac_line(linspace(0.0, 1.0, 8));
        let id = |s: f64| s;
        let one = |_: f64| 1.0;
        let r = Reparametrization {
            domain: (0.0, 1.0),
            map: &id,
            derivative: &one,
        };
        let out = reparametrize(&c, &r, c.times()).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn doubling_reparametrization() {
        let c = dirac_line(linspace(0.0, 1.0, 8));
        let map = |s: f64| 2.0 * s;
        let der = |_: f64| 2.0;
        let r = Reparametrization {
            domain: (0.0, 0.5),
            map: &map,
            derivative: &der,
        };
        let grid = linspace(0.0, 0.5, 8);
        let out = reparametrize(&c, &r, &grid).unwrap();
        assert_eq!(out.end(), 0.5);
        assert_eq!(out.velocity(3).unwrap().vector(0), &[2.0, 0.0]);
        assert_eq!(out.measure(8).atom(0), &[1.0, 0.0]);
    }

    #[test]
    fn reparametrization_rejects_decreasing_maps() {
        let c = dirac_line(linspace(0.0, 1.0, 8));
        let map = |s: f64| 1.0 - s;
        let der = |_: f64| -1.0;
        let r = Reparametrization {
            domain: (0.0, 1.0),
            map: &map,
            derivative: &der,
        };
        assert!(matches!(
            reparametrize(&c, &r, &linspace(0.0, 1.0, 4)),
            Err(Error::NonMonotone { .. })
        ));
    }

    #[test]
    fn extracted_velocities_are_second_order_inside() {
        let times = linspace(0.0, 1.0, 20);
        let c = MeasureCurve::from_trajectory(
            times,
            vec![1.0],
            |t| vec![vec![t.sin(), t * t]],
            |t| vec![vec![t.cos(), 2.0 * t]],
        )
        .unwrap();
        let e = c.with_extracted_velocities().unwrap();
        // t² has exact central differences
        for k in 1..20 {
            assert!((e.velocity(k).unwrap().vector(0)[1] - 2.0 * c.times()[k]).abs() < 1e-12);
        }
        assert!((e.velocity(0).unwrap().vector(0)[1] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn hermite_sampling_is_exact_for_cubics() {
        let c = MeasureCurve::from_trajectory(
            linspace(0.0, 1.0, 3),
            vec![1.0],
            |t| vec![vec![t * t * t - t]],
            |t| vec![vec![3.0 * t * t - 1.0]],
        )
        .unwrap();
        let (p, v) = c.sample_at(0.4).unwrap();
        assert!((p[0][0] - (0.064 - 0.4)).abs() < 1e-14);
        assert!((v[0][0] - (3.0 * 0.16 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn continuity_holds_for_a_rotating_pair() {
        let curve = |n: usize| {
            MeasureCurve::from_trajectory(
                linspace(0.0, 1.0, n),
                vec![0.3, 0.7],
                |t| vec![vec![t.cos(), t.sin()], vec![-2.0 * t.cos(), 0.5]],
                |t| vec![vec![-t.sin(), t.cos()], vec![2.0 * t.sin(), 0.0]],
            )
            .unwrap()
        };
        let tests = [ScalarField::gaussian(2), coord(2, 0)];
        let coarse = continuity_residual(&curve(40), &tests).unwrap();
        let fine = continuity_residual(&curve(80), &tests).unwrap();
        let order = (coarse / fine).log2();
        assert!(order > 1.8, "order {order}");
    }

    #[test]
    fn reversal_flips_velocities() {
        let c = dirac_line(linspace(0.0, 2.0, 4));
        let r = c.reversed();
        assert_eq!(r.measure(0).atom(0), &[2.0, 0.0]);
        assert_eq!(r.velocity(0).unwrap().vector(0), &[-1.0, 0.0]);
        assert_eq!(r.times(), c.times());
    }
}
