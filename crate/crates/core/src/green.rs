//! Green's theorem on annuli `S(s, t) = D_s#σ_t`, loop integrals of closed
//! forms and potentials of closed forms.
//!
//! With `V(s, t) = Λ̄_{S(s,t)}(v_t^s)` and `W(s, t) = Λ̄_{S(s,t)}(w_t^s)` the
//! boundary integral is
//!
//! ```text
//! ∫_r^1 (W(s, T) − W(s, 0)) ds − ∫_0^T (V(1, t) − V(r, t)) dt
//! ```
//!
//! and equals `∫∫ dΛ̄_{S(s,t)}(v_t^s, w_t^s) ds dt` for regular forms.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::calculus::MeasureCurve;
use crate::error::{Error, Result};
use crate::forms::{evaluate_form, exterior_derivative, line_integral, line_integrand, PseudoOneForm, Quadrature};
use crate::measure::{DiscreteMeasure, Functional, TangentField};
use crate::numeric::{linspace, observed_order, trapezoid, trapezoid_richardson};
use crate::transport::{geodesic, w2_distance};

/// `t ↦ D_s#σ_t` with velocities `s · v_t`.
pub fn dilate(curve: &MeasureCurve, s: f64) -> Result<MeasureCurve> {
    let vel = curve.velocities().ok_or(Error::MissingVelocities)?;
    let scale = |v: &[Vec<f64>]| -> Vec<Vec<f64>> { v.iter().map(|x| x.iter().map(|c| s * c).collect()).collect() };
    MeasureCurve::new(
        curve.times().to_vec(),
        curve.weights().to_vec(),
        curve.measures().iter().map(|m| scale(m.atoms())).collect(),
        Some(vel.iter().map(|v| scale(v.vectors())).collect()),
    )
}

#[derive(Debug, Clone)]
pub struct AnnulusSurface {
    base: MeasureCurve,
    r: f64,
    sgrid: Vec<f64>,
}

/// The annulus over `curve` with inner radius `r` and `n_s` uniform radial
/// intervals on `[r, 1]`.
pub fn make_annulus(curve: &MeasureCurve, r: f64, n_s: usize) -> Result<AnnulusSurface> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::BadRadius { r });
    }
    if !curve.has_velocities() {
        return Err(Error::MissingVelocities);
    }
    if n_s == 0 {
        return Err(Error::Invalid("the radial grid needs at least one interval".into()));
    }
    Ok(AnnulusSurface {
        base: curve.clone(),
        r,
        sgrid: linspace(r, 1.0, n_s),
    })
}

impl AnnulusSurface {
    pub fn base_curve(&self) -> &MeasureCurve {
        &self.base
    }

    pub fn inner_radius(&self) -> f64 {
        self.r
    }

    pub fn sgrid(&self) -> &[f64] {
        &self.sgrid
    }

    pub fn tgrid(&self) -> &[f64] {
        self.base.times()
    }

    /// `S(s_j, t_k)`
    pub fn measure(&self, j: usize, k: usize) -> DiscreteMeasure {
        let s = self.sgrid[j];
        let mu = self.base.measure(k);
        mu.with_atoms(mu.atoms().iter().map(|x| x.iter().map(|c| s * c).collect()).collect())
            .expect("dilation keeps the weights")
    }

    /// `v_t^s`, equal to `s · v_t(x)` at the atom `s · x`.
    pub fn tangential(&self, j: usize, k: usize) -> TangentField {
        self.base
            .velocity(k)
            .expect("annulus curves carry velocities")
            .scaled(self.sgrid[j])
    }

    /// `w_t^s`, equal to `x` at the atom `s · x`.
    pub fn radial(&self, k: usize) -> TangentField {
        TangentField::new(self.base.measure(k).atoms().to_vec())
    }

    fn nodes(&self) -> Vec<(usize, usize)> {
        (0..self.tgrid().len())
            .flat_map(|k| (0..self.sgrid.len()).map(move |j| (j, k)))
            .collect()
    }

    fn integrate_grid(&self, values: &[f64]) -> f64 {
        let n_s = self.sgrid.len();
        let rows: Vec<f64> = values.chunks(n_s).map(|row| trapezoid(&self.sgrid, row)).collect();
        trapezoid(self.tgrid(), &rows)
    }
}

/// `∫_0^T ∫_r^1 dΛ̄_{S(s,t)}(v_t^s, w_t^s) ds dt` by the product trapezoid rule.
pub fn surface_integral_d(form: &dyn PseudoOneForm, surface: &AnnulusSurface) -> Result<f64> {
    let values = surface
        .nodes()
        .into_par_iter()
        .map(|(j, k)| {
            exterior_derivative(
                form,
                &surface.measure(j, k),
                &surface.tangential(j, k),
                &surface.radial(k),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(surface.integrate_grid(&values))
}

/// The four edge contributions of the boundary integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryIntegral {
    pub total: f64,
    /// `l(1) = ∫ V(1, t) dt`
    pub outer: f64,
    /// `l(r) = ∫ V(r, t) dt`
    pub inner: f64,
    /// `∫ W(s, T) ds`
    pub final_edge: f64,
    /// `∫ W(s, 0) ds`
    pub initial_edge: f64,
}

pub fn boundary_integral(form: &dyn PseudoOneForm, surface: &AnnulusSurface) -> Result<BoundaryIntegral> {
    let n_s = surface.sgrid().len();
    let k_last = surface.tgrid().len() - 1;
    let tangential = |j: usize| -> Result<f64> {
        let values = (0..surface.tgrid().len())
            .into_par_iter()
            .map(|k| evaluate_form(form, &surface.measure(j, k), &surface.tangential(j, k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(trapezoid(surface.tgrid(), &values))
    };
    let radial = |k: usize| -> Result<f64> {
        let w = surface.radial(k);
        let values = (0..n_s)
            .map(|j| evaluate_form(form, &surface.measure(j, k), &w))
            .collect::<Result<Vec<_>>>()?;
        Ok(trapezoid(surface.sgrid(), &values))
    };
    let outer = tangential(n_s - 1)?;
    let inner = tangential(0)?;
    let final_edge = radial(k_last)?;
    let initial_edge = radial(0)?;
    let total = (final_edge - initial_edge) - (outer - inner);
    Ok(BoundaryIntegral {
        total,
        outer,
        inner,
        final_edge,
        initial_edge,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenReport {
    pub surface: f64,
    pub boundary: BoundaryIntegral,
    pub residual: f64,
}

pub fn green_check(form: &dyn PseudoOneForm, surface: &AnnulusSurface) -> Result<GreenReport> {
    let s = surface_integral_d(form, surface)?;
    let b = boundary_integral(form, surface)?;
    Ok(GreenReport {
        surface: s,
        boundary: b,
        residual: (s - b.total).abs(),
    })
}

/// `|∫_S dΛ̄ − ∫_{∂S} Λ̄|`
pub fn green_residual(form: &dyn PseudoOneForm, surface: &AnnulusSurface) -> Result<f64> {
    Ok(green_check(form, surface)?.residual)
}

/// One row of a grid-refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRow {
    pub n_t: usize,
    pub n_s: usize,
    pub surface: f64,
    pub boundary: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub rows: Vec<RefinementRow>,
    /// Three-grid order of the surface integral over the last three rows;
    /// `None` when successive differences sit at the round-off floor.
    pub surface_order: Option<f64>,
    /// Same for the boundary integral.
    pub boundary_order: Option<f64>,
}

/// Run Green's check on `grids` (each `(n_t, n_s)`, refined by a constant
/// ratio) with base curves produced by `curve_on(n_t)`.
pub fn refinement_study<C>(
    form: &dyn PseudoOneForm,
    curve_on: C,
    r: f64,
    grids: &[(usize, usize)],
) -> Result<Refinement>
where
    C: Fn(usize) -> Result<MeasureCurve>,
{
    let mut rows = Vec::with_capacity(grids.len());
    for &(n_t, n_s) in grids {
        let surf = make_annulus(&curve_on(n_t)?, r, n_s)?;
        let g = green_check(form, &surf)?;
        rows.push(RefinementRow {
            n_t,
            n_s,
            surface: g.surface,
            boundary: g.boundary.total,
            residual: g.residual,
        });
    }
    let order = |pick: fn(&RefinementRow) -> f64| -> Option<f64> {
        if rows.len() < 3 {
            return None;
        }
        let w = &rows[rows.len() - 3..];
        let ratio = w[1].n_t as f64 / w[0].n_t as f64;
        let scale = w.iter().map(|row| pick(row).abs()).fold(1.0, f64::max);
        observed_order(pick(&w[0]), pick(&w[1]), pick(&w[2]), ratio, 1e-13 * scale)
    };
    let surface_order = order(|row| row.surface);
    let boundary_order = order(|row| row.boundary);
    Ok(Refinement {
        rows,
        surface_order,
        boundary_order,
    })
}

/// Sampled check that `dΛ̄` vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosednessReport {
    pub samples: usize,
    /// `max |dΛ̄_μ(X, Y)| / (‖X‖_μ ‖Y‖_μ · max(1, max_i ‖B_i‖))`
    pub worst_defect: f64,
    pub tolerance: f64,
    pub closed: bool,
}

pub const CLOSEDNESS_SAMPLES: usize = 32;
pub const CLOSEDNESS_TOL: f64 = 1e-8;

/// Evaluate `dΛ̄` at `samples` seeded random `(μ, X, Y)` with `μ` drawn from
/// `measures` and `X`, `Y` uniform in `[−1, 1]` coordinatewise.
pub fn check_closed(
    form: &dyn PseudoOneForm,
    measures: &[DiscreteMeasure],
    samples: usize,
    seed: u64,
) -> Result<ClosednessReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mu = &measures[rng.gen_range(0..measures.len())];
        let mut draw = || {
            TangentField::new(
                (0..mu.len())
                    .map(|_| (0..mu.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect(),
            )
        };
        let x = draw();
        let y = draw();
        let b_scale = form
            .matrix_at(mu)
            .ok_or(Error::JacobianUnavailable)?
            .iter()
            .map(|b| b.norm())
            .fold(1.0, f64::max);
        let scale = x.norm(mu)? * y.norm(mu)? * b_scale;
        if scale > 0.0 {
            worst = worst.max(exterior_derivative(form, mu, &x, &y)?.abs() / scale);
        }
    }
    Ok(ClosednessReport {
        samples,
        worst_defect: worst,
        tolerance: CLOSEDNESS_TOL,
        closed: worst <= CLOSEDNESS_TOL,
    })
}

/// Inner-edge value `l(r)` and its a-priori bound `r T c ‖σ'‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerEdge {
    pub r: f64,
    pub value: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopReport {
    pub integral: Quadrature,
    pub closure_gap: f64,
    pub inner: Vec<InnerEdge>,
    /// Linear extrapolation of `l(r)` to `r = 0` from the two smallest radii.
    pub extrapolated: f64,
    pub closedness: ClosednessReport,
}

pub const DEFAULT_RADII: [f64; 3] = [0.2, 0.1, 0.05];

/// `∫_σ Λ̄` around a loop with `W₂(σ_0, σ_T) < tol`, together with the
/// inner-edge values `l(r)` for each radius. The closedness of the form is
/// sampled and reported, not enforced.
pub fn loop_integral(form: &dyn PseudoOneForm, curve: &MeasureCurve, radii: &[f64], tol: f64) -> Result<LoopReport> {
    let gap = w2_distance(curve.measure(0), curve.measure(curve.len() - 1))?;
    if !(gap < tol) {
        return Err(Error::NotClosedCurve { gap });
    }
    let integral = line_integral(form, curve)?;
    let speed = curve.max_speed()?;
    let span = curve.end() - curve.start();
    let mut inner = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::BadRadius { r });
        }
        let shrunk = dilate(curve, r)?;
        let value = line_integral(form, &shrunk)?.value;
        let c = shrunk
            .measures()
            .iter()
            .map(|m| form.field_at(m).norm(m))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let bound = r * span * c * speed;
        inner.push(InnerEdge {
            r,
            value,
            bound,
            within_bound: value.abs() <= 1.1 * bound + 1e-14,
        });
    }
    let extrapolated = match inner.len() {
        0 => f64::NAN,
        1 => inner[0].value,
        n => {
            let (a, b) = (inner[n - 2], inner[n - 1]);
            b.value - b.r * (a.value - b.value) / (a.r - b.r)
        }
    };
    let closedness = check_closed(form, curve.measures(), CLOSEDNESS_SAMPLES, 0x5eed)?;
    Ok(LoopReport {
        integral,
        closure_gap: gap,
        inner,
        extrapolated,
        closedness,
    })
}

pub const DEFAULT_POTENTIAL_STEPS: usize = 4096;
/// Start of the radial path `D_t#μ`, `t ∈ [ε, 1]`; the piece `[0, ε]` is
/// added as `ε · λ(ε)`.
pub const RADIAL_EPS: f64 = 1e-9;

fn radial_integrand(form: &dyn PseudoOneForm, mu: &DiscreteMeasure, t: f64) -> Result<f64> {
    let nu = mu.with_atoms(mu.atoms().iter().map(|x| x.iter().map(|c| t * c).collect()).collect())?;
    evaluate_form(form, &nu, &TangentField::new(mu.atoms().to_vec()))
}

/// `∫_σ Λ̄` along `t ↦ D_t#μ` from (near) `δ₀` to `μ`, without checks.
/// Both potential routes use the Richardson-corrected trapezoid rule.
pub fn radial_potential(form: &dyn PseudoOneForm, mu: &DiscreteMeasure, n_steps: usize) -> Result<f64> {
    let grid = linspace(RADIAL_EPS, 1.0, n_steps.max(1));
    let values = grid
        .par_iter()
        .map(|&t| radial_integrand(form, mu, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid_richardson(&grid, &values) + RADIAL_EPS * values[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialReport {
    pub value: f64,
    pub n_steps: usize,
    pub closedness: ClosednessReport,
}

/// `F(μ) = ∫_σ Λ̄` along the radial path from `δ₀` to `μ`; the form must
/// pass the sampled closedness check along that path.
/// `∇_μF = A_μ` is expected only because the tangent projection is the
/// identity for distinct atoms.
pub fn reconstruct_potential(
    form: &dyn PseudoOneForm,
    mu: &DiscreteMeasure,
    n_steps: usize,
) -> Result<PotentialReport> {
    mu.require_distinct()?;
    let probes = linspace(0.05, 1.0, 19)
        .into_iter()
        .map(|t| mu.with_atoms(mu.atoms().iter().map(|x| x.iter().map(|c| t * c).collect()).collect()))
        .collect::<Result<Vec<_>>>()?;
    let closedness = check_closed(form, &probes, CLOSEDNESS_SAMPLES, 0xf00d)?;
    if !closedness.closed {
        return Err(Error::NotClosedForm {
            defect: closedness.worst_defect,
            tol: closedness.tolerance,
        });
    }
    Ok(PotentialReport {
        value: radial_potential(form, mu, n_steps)?,
        n_steps,
        closedness,
    })
}

/// `F(ν) + ∫ Λ̄` along the geodesic from `ν` to `μ`, with `F(ν)` from the
/// radial path: an independent route to the potential at `μ`.
pub fn composite_potential(
    form: &dyn PseudoOneForm,
    waypoint: &DiscreteMeasure,
    mu: &DiscreteMeasure,
    n_steps: usize,
) -> Result<f64> {
    let first = radial_potential(form, waypoint, n_steps)?;
    let path = geodesic(waypoint, mu, &linspace(0.0, 1.0, n_steps.max(1)))?;
    let lambda = line_integrand(form, &path)?;
    Ok(first + trapezoid_richardson(path.times(), &lambda))
}

/// The reconstructed potential as a functional, for gradient checks.
pub fn potential_functional(form: Arc<dyn PseudoOneForm>, n_steps: usize) -> Functional {
    Functional::new(move |mu| radial_potential(form.as_ref(), mu, n_steps).unwrap_or(f64::NAN))
}
