//! Pseudo one-forms `Λ̄_μ(X) = ∫ ⟨A_μ, X⟩ dμ` with regularity matrices
//! `B_μ`, their exterior derivative, line integrals along curves and the
//! finite-dimensional restriction to `n`-atom uniform measures.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::calculus::MeasureCurve;
use crate::error::{Error, Result};
use crate::fields::{scalar_from_name, AnalyticField};
use crate::measure::{pushforward, DiscreteMeasure, TangentField};
use crate::numeric::{dot, mat_vec, pairwise_sum, sub, trapezoid, trapezoid_half};
use crate::transport::optimal_plan;

pub trait PseudoOneForm: Send + Sync {
    fn dim(&self) -> usize;

    /// `A_μ` at the atoms of `μ`.
    fn field_at(&self, mu: &DiscreteMeasure) -> TangentField;

    /// `B_μ` at the atoms of `μ`, or `None` when the form carries no
    /// regularity matrices.
    fn matrix_at(&self, mu: &DiscreteMeasure) -> Option<Vec<DMatrix<f64>>>;

    /// `c(Λ̄)`
    fn regularity_constant(&self) -> Option<f64> {
        None
    }

    /// `O_μ(w)`, vanishing at `w = 0`.
    fn modulus(&self, _w: f64) -> Option<f64> {
        None
    }

    fn name(&self) -> String {
        "form".into()
    }
}

/// `Λ̄_μ(X) = ∫ ⟨Ā, X⟩ dμ` for a fixed vector field `Ā`, with `B_μ = ∇Ā`.
#[derive(Clone, Debug)]
pub struct LinearForm {
    field: AnalyticField,
    name: String,
}

impl LinearForm {
    pub fn field(&self) -> &AnalyticField {
        &self.field
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

pub fn linear_pseudo_one_form(a: AnalyticField) -> LinearForm {
    LinearForm {
        field: a,
        name: "linear".into(),
    }
}

impl PseudoOneForm for LinearForm {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn field_at(&self, mu: &DiscreteMeasure) -> TangentField {
        TangentField::sample(&self.field, mu)
    }

    fn matrix_at(&self, mu: &DiscreteMeasure) -> Option<Vec<DMatrix<f64>>> {
        mu.atoms().iter().map(|x| self.field.jacobian(x)).collect()
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

type FieldFn = Arc<dyn Fn(&DiscreteMeasure) -> Vec<Vec<f64>> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&DiscreteMeasure) -> Vec<DMatrix<f64>> + Send + Sync>;
type ModulusFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-defined pseudo one-form; `A_μ` and `B_μ` are both supplied.
#[derive(Clone)]
pub struct CustomForm {
    dim: usize,
    field: FieldFn,
    matrix: MatrixFn,
    constant: Option<f64>,
    modulus: Option<ModulusFn>,
    name: String,
}

impl CustomForm {
    pub fn new<A, B>(dim: usize, field: A, matrix: B) -> Self
    where
        A: Fn(&DiscreteMeasure) -> Vec<Vec<f64>> + Send + Sync + 'static,
        B: Fn(&DiscreteMeasure) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    {
        Self {
            dim,
            field: Arc::new(field),
            matrix: Arc::new(matrix),
            constant: None,
            modulus: None,
            name: "custom".into(),
        }
    }

    pub fn with_regularity<O>(mut self, constant: f64, modulus: O) -> Self
    where
        O: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.constant = Some(constant);
        self.modulus = Some(Arc::new(modulus));
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl PseudoOneForm for CustomForm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn field_at(&self, mu: &DiscreteMeasure) -> TangentField {
        TangentField::new((self.field)(mu))
    }

    fn matrix_at(&self, mu: &DiscreteMeasure) -> Option<Vec<DMatrix<f64>>> {
        Some((self.matrix)(mu))
    }

    fn regularity_constant(&self) -> Option<f64> {
        self.constant
    }

    fn modulus(&self, w: f64) -> Option<f64> {
        self.modulus.as_ref().map(|m| m(w))
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Pull-back by an affine map `φ(x) = M x + b`:
/// `A^{φ*}_μ(x) = Mᵀ A_{φ#μ}(φ(x))`, `B^{φ*}_μ(x) = Mᵀ B_{φ#μ}(φ(x)) M`.
pub struct PullbackForm<F> {
    inner: F,
    m: DMatrix<f64>,
    b: Vec<f64>,
}

impl<F: PseudoOneForm> PullbackForm<F> {
    pub fn new(inner: F, m: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        let d = inner.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: m.nrows(),
            });
        }
        if b.len() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: b.len(),
            });
        }
        Ok(Self { inner, m, b })
    }

    pub fn map_point(&self, x: &[f64]) -> Vec<f64> {
        let mut y = mat_vec(&self.m, x);
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        y
    }

    /// `φ#μ`
    pub fn push(&self, mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        pushforward(|x| self.map_point(x), mu)
    }

    /// `φ*X`, the field `∇φ · X` carried to the atoms of `φ#μ`.
    pub fn push_field(&self, x: &TangentField) -> TangentField {
        TangentField::new(x.vectors().iter().map(|v| mat_vec(&self.m, v)).collect())
    }
}

impl<F: PseudoOneForm> PseudoOneForm for PullbackForm<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn field_at(&self, mu: &DiscreteMeasure) -> TangentField {
        let pushed = self.push(mu).expect("affine push-forward keeps weights valid");
        let mt = self.m.transpose();
        let a = self.inner.field_at(&pushed);
        TangentField::new(a.vectors().iter().map(|v| mat_vec(&mt, v)).collect())
    }

    fn matrix_at(&self, mu: &DiscreteMeasure) -> Option<Vec<DMatrix<f64>>> {
        let pushed = self.push(mu).ok()?;
        let mt = self.m.transpose();
        let bs = self.inner.matrix_at(&pushed)?;
        Some(bs.iter().map(|b| &mt * b * &self.m).collect())
    }

    fn name(&self) -> String {
        format!("pullback({})", self.inner.name())
    }
}

/// Names accepted by [`builtin_form`].
pub const FORM_NAMES: &[&str] = &["gradient:<scalar>", "rotational", "shear"];

/// Built-in linear forms: `gradient:f` for any named scalar map `f`,
/// `rotational` with `Ā(x) = (−x₂, x₁)` and `shear` with `Ā(x) = (x₂, 0)`,
/// the last two on `R²`.
pub fn builtin_form(name: &str, dim: usize) -> Result<LinearForm> {
    if let Some(f) = name.strip_prefix("gradient:") {
        let f = scalar_from_name(f, dim)?;
        return Ok(linear_pseudo_one_form(f.gradient_field()).named(name));
    }
    let planar = |field: AnalyticField| {
        if dim == 2 {
            Ok(linear_pseudo_one_form(field).named(name))
        } else {
            Err(Error::Invalid(format!("form '{name}' lives on R^2, not R^{dim}")))
        }
    };
    match name {
        "rotational" => planar(AnalyticField::rotational()),
        "shear" => planar(AnalyticField::affine(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            vec![0.0; 2],
        )),
        _ => Err(Error::Invalid(format!(
            "unknown form '{name}'; expected one of {FORM_NAMES:?}"
        ))),
    }
}

fn check_form_dim(form: &dyn PseudoOneForm, mu: &DiscreteMeasure) -> Result<()> {
    if form.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            left: form.dim(),
            right: mu.dim(),
        });
    }
    Ok(())
}

/// `Σ a_i ⟨A_μ(x_i), X_i⟩`
pub fn evaluate_form(form: &dyn PseudoOneForm, mu: &DiscreteMeasure, x: &TangentField) -> Result<f64> {
    check_form_dim(form, mu)?;
    x.check_aligned(mu)?;
    let a = form.field_at(mu);
    let terms: Vec<f64> = a
        .vectors()
        .iter()
        .zip(x.vectors())
        .zip(mu.weights())
        .map(|((ai, xi), w)| w * dot(ai, xi))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `Σ a_i ⟨(B_i − B_iᵀ) X_i, Y_i⟩`, evaluated as
/// `Σ_{k<l} (B−Bᵀ)_{kl} (Y_k X_l − Y_l X_k)` so that swapping `X` and `Y`
/// negates the result bit for bit.
pub fn exterior_derivative(
    form: &dyn PseudoOneForm,
    mu: &DiscreteMeasure,
    x: &TangentField,
    y: &TangentField,
) -> Result<f64> {
    check_form_dim(form, mu)?;
    x.check_aligned(mu)?;
    y.check_aligned(mu)?;
    let bs = form.matrix_at(mu).ok_or(Error::JacobianUnavailable)?;
    let d = mu.dim();
    let terms: Vec<f64> = bs
        .iter()
        .zip(x.vectors().iter().zip(y.vectors()))
        .zip(mu.weights())
        .map(|((b, (xi, yi)), w)| {
            let mut parts = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
            for k in 0..d {
                for l in (k + 1)..d {
                    let skew = b[(k, l)] - b[(l, k)];
                    parts.push(skew * (yi[k] * xi[l] - yi[l] * xi[k]));
                }
            }
            w * pairwise_sum(&parts)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `XΛ̄(Y) − YΛ̄(X) − Λ̄([X, Y])` with the directional derivatives taken along
/// `t ↦ (Id + tX)#μ` by central differences of step `h`, and
/// `[X, Y] = ∇Y·X − ∇X·Y`.
pub fn exterior_derivative_fd(
    form: &dyn PseudoOneForm,
    mu: &DiscreteMeasure,
    x: &AnalyticField,
    y: &AnalyticField,
    h: f64,
) -> Result<f64> {
    check_form_dim(form, mu)?;
    if !x.has_jacobian() || !y.has_jacobian() {
        return Err(Error::JacobianUnavailable);
    }
    if !(h > 0.0) {
        return Err(Error::Invalid(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let along = |flow: &AnalyticField, probe: &AnalyticField| -> Result<f64> {
        let moved = |t: f64| -> Result<f64> {
            let nu = pushforward(
                |p| {
                    let v = flow.value(p);
                    p.iter().zip(&v).map(|(a, b)| a + t * b).collect()
                },
                mu,
            )?;
            evaluate_form(form, &nu, &TangentField::sample(probe, &nu))
        };
        Ok((moved(h)? - moved(-h)?) / (2.0 * h))
    };
    let x_of_y = along(x, y)?;
    let y_of_x = along(y, x)?;
    let bracket = TangentField::new(
        mu.atoms()
            .iter()
            .map(|p| {
                let (jx, jy) = (x.jacobian(p).unwrap(), y.jacobian(p).unwrap());
                let (xv, yv) = (x.value(p), y.value(p));
                sub(&mat_vec(&jy, &xv), &mat_vec(&jx, &yv))
            })
            .collect(),
    );
    Ok(x_of_y - y_of_x - evaluate_form(form, mu, &bracket)?)
}

/// A quadrature value together with the gap to the half-resolution rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

/// `t ↦ Λ̄_{σ_t}(v_t)` on the curve grid.
pub fn line_integrand(form: &dyn PseudoOneForm, curve: &MeasureCurve) -> Result<Vec<f64>> {
    let vel = curve.velocities().ok_or(Error::MissingVelocities)?;
    (0..curve.len())
        .into_par_iter()
        .map(|k| evaluate_form(form, curve.measure(k), &vel[k]))
        .collect()
}

/// `∫ Λ̄_{σ_t}(v_t) dt` by the composite trapezoid rule on the curve grid.
pub fn line_integral(form: &dyn PseudoOneForm, curve: &MeasureCurve) -> Result<Quadrature> {
    let lambda = line_integrand(form, curve)?;
    let value = trapezoid(curve.times(), &lambda);
    let error_estimate = if curve.len() >= 3 {
        (value - trapezoid_half(curve.times(), &lambda)).abs()
    } else {
        0.0
    };
    Ok(Quadrature { value, error_estimate })
}

/// `(A(x), B(x))` on `R^{nD}` for `μ_x = (1/n) Σ δ_{x_i}`: `A` stacks
/// `A_{μ_x}(x_i)` and `B` is block diagonal with blocks `B_{μ_x}(x_i)`.
pub fn discrete_restriction(form: &dyn PseudoOneForm, n: usize, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let d = form.dim();
    if n == 0 || x.len() != n * d {
        return Err(Error::LengthMismatch {
            expected: n * d,
            found: x.len(),
        });
    }
    let mu = DiscreteMeasure::uniform(x.chunks(d).map(|c| c.to_vec()).collect())?;
    mu.require_distinct()?;
    let a: Vec<f64> = form.field_at(&mu).into_vectors().into_iter().flatten().collect();
    let bs = form.matrix_at(&mu).ok_or(Error::JacobianUnavailable)?;
    let mut big = DMatrix::zeros(n * d, n * d);
    for (i, b) in bs.iter().enumerate() {
        big.view_mut((i * d, i * d), (d, d)).copy_from(b);
    }
    Ok((a, big))
}

/// Worst observed defect in the regularity inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub samples: usize,
    /// `max ‖A_ν(y) − A_μ(x) − B_μ(x)(y − x)‖_γ / W₂(μ, ν)`
    pub worst_defect_over_w2: f64,
    /// `max defect / (W₂ · min(O(W₂), c))` using the form's modulus and
    /// constant; when neither is declared, the modulus `O(w) = w` is used.
    pub worst_ratio: f64,
}

/// Transported regularity defect of `form` between `mu` and `nu` over an
/// optimal plan, and `W₂(μ, ν)`.
pub fn regularity_defect(form: &dyn PseudoOneForm, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, f64)> {
    let plan = optimal_plan(mu, nu)?;
    let a_mu = form.field_at(mu);
    let a_nu = form.field_at(nu);
    let b_mu = form.matrix_at(mu).ok_or(Error::JacobianUnavailable)?;
    let mut terms = Vec::new();
    for (i, j) in plan.support() {
        let g = plan.gamma()[i][j];
        let step = sub(nu.atom(j), mu.atom(i));
        let lin = mat_vec(&b_mu[i], &step);
        let r: Vec<f64> = (0..mu.dim())
            .map(|k| a_nu.vector(j)[k] - a_mu.vector(i)[k] - lin[k])
            .collect();
        terms.push(g * dot(&r, &r));
    }
    Ok((pairwise_sum(&terms).max(0.0).sqrt(), plan.cost().max(0.0).sqrt()))
}

/// Sample `samples` random perturbations `ν` of `mu` with displacements up to
/// `scale` and report the worst regularity defect.
pub fn validate_regularity(
    form: &dyn PseudoOneForm,
    mu: &DiscreteMeasure,
    samples: usize,
    scale: f64,
    seed: u64,
) -> Result<RegularityReport> {
    check_form_dim(form, mu)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst_defect = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for s in 0..samples {
        let size = scale * (s + 1) as f64 / samples as f64;
        let atoms = mu
            .atoms()
            .iter()
            .map(|x| x.iter().map(|c| c + size * rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let nu = mu.with_atoms(atoms)?;
        let (defect, w) = regularity_defect(form, mu, &nu)?;
        if w == 0.0 {
            continue;
        }
        let bound = match (form.modulus(w), form.regularity_constant()) {
            (Some(o), Some(c)) => o.min(c),
            (Some(o), None) => o,
            (None, Some(c)) => c.min(w),
            (None, None) => w,
        };
        worst_defect = worst_defect.max(defect / w);
        worst_ratio = worst_ratio.max(defect / (w * bound));
    }
    Ok(RegularityReport {
        samples,
        worst_defect_over_w2: worst_defect,
        worst_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;
    use crate::measure::{linear_functional, make_measure};
    use crate::numeric::linspace;

    fn e(k: usize) -> TangentField {
        let mut v = vec![0.0; 2];
        v[k] = 1.0;
        TangentField::new(vec![v])
    }

    #[test]
    fn rotational_pairing_at_a_dirac() {
        let form = builtin_form("rotational", 2).unwrap();
        let mu = DiscreteMeasure::dirac(vec![1.0, 0.0]);
        assert_eq!(evaluate_form(&form, &mu, &e(1)).unwrap(), 1.0);
        assert_eq!(evaluate_form(&form, &mu, &TangentField::zeros(1, 2)).unwrap(), 0.0);
        assert!(matches!(
            evaluate_form(&form, &mu, &TangentField::zeros(2, 2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rotational_exterior_derivative_is_two() {
        let form = builtin_form("rotational", 2).unwrap();
        let mu = DiscreteMeasure::dirac(vec![0.0, 0.0]);
        assert_eq!(exterior_derivative(&form, &mu, &e(0), &e(1)).unwrap(), 2.0);
        assert_eq!(exterior_derivative(&form, &mu, &e(1), &e(0)).unwrap(), -2.0);
        let fd = exterior_derivative_fd(
            &form,
            &mu,
            &AnalyticField::constant(vec![1.0, 0.0]),
            &AnalyticField::constant(vec![0.0, 1.0]),
            1e-4,
        )
        .unwrap();
        assert!((fd - 2.0).abs() < 1e-8);
    }

    #[test]
    fn gradient_forms_are_closed() {
        let form = builtin_form("gradient:gaussian", 2).unwrap();
        let mu = make_measure(vec![vec![0.3, -0.2], vec![1.0, 0.5]], vec![0.5, 0.5]).unwrap();
        let x = TangentField::new(vec![vec![1.0, 2.0], vec![-1.0, 0.5]]);
        let y = TangentField::new(vec![vec![0.0, 1.0], vec![3.0, -2.0]]);
        assert!(exterior_derivative(&form, &mu, &x, &y).unwrap().abs() < 1e-15);
        let fx = AnalyticField::rotational();
        let fy = AnalyticField::affine(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]), vec![0.5, 0.0]);
        assert!(exterior_derivative_fd(&form, &mu, &fx, &fy, 1e-4).unwrap().abs() < 1e-6);
    }

    #[test]
    fn fd_needs_jacobians() {
        let form = builtin_form("shear", 2).unwrap();
        let mu = DiscreteMeasure::dirac(vec![0.0, 0.0]);
        let bare = AnalyticField::without_jacobian(2, |x: &[f64]| x.to_vec());
        assert!(matches!(
            exterior_derivative_fd(&form, &mu, &bare, &AnalyticField::zero(2), 1e-4),
            Err(Error::JacobianUnavailable)
        ));
    }

    #[test]
    fn gradient_form_matches_linear_functional() {
        let f = ScalarField::gaussian(2);
        let form = builtin_form("gradient:gaussian", 2).unwrap();
        let curve = MeasureCurve::from_trajectory(
            linspace(0.0, 1.0, 400),
            vec![0.25, 0.75],
            |t| vec![vec![t, t * t], vec![1.0 - t, (3.0 * t).sin()]],
            |t| vec![vec![1.0, 2.0 * t], vec![-1.0, 3.0 * (3.0 * t).cos()]],
        )
        .unwrap();
        let q = line_integral(&form, &curve).unwrap();
        let exact = linear_functional(&f, curve.measure(400)) - linear_functional(&f, curve.measure(0));
        assert!((q.value - exact).abs() < 1e-5);
        assert!(q.error_estimate < 1e-4);
    }

    #[test]
    fn zero_form_and_still_curve_integrate_to_zero() {
        let zero = linear_pseudo_one_form(AnalyticField::zero(2));
        let still = MeasureCurve::from_trajectory(
            linspace(0.0, 1.0, 10),
            vec![1.0],
            |_| vec![vec![1.0, 1.0]],
            |_| vec![vec![0.0, 0.0]],
        )
        .unwrap();
        assert_eq!(line_integral(&zero, &still).unwrap().value, 0.0);
        let rot = builtin_form("rotational", 2).unwrap();
        assert_eq!(line_integral(&rot, &still).unwrap().value, 0.0);
        assert!(matches!(
            line_integral(&rot, &still.without_velocities()),
            Err(Error::MissingVelocities)
        ));
    }

    #[test]
    fn restriction_of_linear_form() {
        let form = builtin_form("gradient:cubic", 2).unwrap();
        let x = [1.0, 2.0, -1.0, 0.5];
        let (a, b) = discrete_restriction(&form, 2, &x).unwrap();
        assert_eq!(a, vec![1.0, 4.0, 1.0, 0.25]);
        assert_eq!(b[(0, 0)], 2.0);
        assert_eq!(b[(1, 1)], 4.0);
        assert_eq!(b[(2, 2)], -2.0);
        assert_eq!(b[(0, 2)], 0.0);
        let (a1, b1) = discrete_restriction(&form, 1, &x[..2]).unwrap();
        assert_eq!(a1, vec![1.0, 4.0]);
        assert_eq!(b1.nrows(), 2);
        assert!(matches!(
            discrete_restriction(&form, 2, &[1.0, 1.0, 1.0, 1.0]),
            Err(Error::CoincidentAtoms { .. })
        ));
    }

    #[test]
    fn pullback_by_affine_map() {
        let form = builtin_form("rotational", 2).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let pull = PullbackForm::new(form.clone(), m, vec![0.5, -1.0]).unwrap();
        let mu = make_measure(vec![vec![0.3, -0.2], vec![1.0, 0.5]], vec![0.4, 0.6]).unwrap();
        let x = TangentField::new(vec![vec![1.0, 2.0], vec![-1.0, 0.5]]);
        let lhs = evaluate_form(&pull, &mu, &x).unwrap();
        let rhs = evaluate_form(&form, &pull.push(&mu).unwrap(), &pull.push_field(&x)).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn linear_forms_pass_regularity_validation() {
        let form = builtin_form("gradient:gaussian", 2).unwrap();
        let mu = make_measure(
            vec![vec![0.3, -0.2], vec![1.0, 0.5], vec![-0.7, 0.1]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let report = validate_regularity(&form, &mu, 16, 1e-2, 7).unwrap();
        // defect is quadratic in the displacement
        assert!(report.worst_defect_over_w2 < 1e-2);
        assert!(report.worst_ratio < 5.0);
    }

    #[test]
    fn unknown_forms_are_rejected() {
        assert!(builtin_form("rotational", 3).is_err());
        assert!(builtin_form("gradient:nope", 2).is_err());
        assert!(builtin_form("spiral", 2).is_err());
    }
}
