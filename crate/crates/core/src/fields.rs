//! Scalar maps with gradients and vector fields with Jacobians on `R^D`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::numeric::norm;
use crate::polynomial::Polynomial;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Default finite-difference step at `x`: `1e-5 · (1 + |x|)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + norm(x))
}

/// A scalar map `f: R^D → R` with its gradient and, optionally, its Hessian.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    value: ScalarFn,
    gradient: VectorFn,
    hessian: Option<MatrixFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("hessian", &self.hessian.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<V, G>(dim: usize, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: None,
        }
    }

    pub fn with_hessian<H>(mut self, hessian: H) -> Self
    where
        H: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        let dim = p.dim();
        let grad: Vec<Polynomial> = (0..dim).map(|k| p.derivative(k)).collect();
        let hess: Vec<Vec<Polynomial>> = grad
            .iter()
            .map(|g| (0..dim).map(|j| g.derivative(j)).collect())
            .collect();
        let value = p;
        let grad_eval = grad;
        Self::new(
            dim,
            move |x| value.eval(x),
            move |x| grad_eval.iter().map(|g| g.eval(x)).collect(),
        )
        .with_hessian(move |x| DMatrix::from_fn(dim, dim, |i, j| hess[i][j].eval(x)))
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, move |_| c, move |_| vec![0.0; dim]).with_hessian(move |_| DMatrix::zeros(dim, dim))
    }

    /// `|x|² / 2`
    pub fn half_square_norm(dim: usize) -> Self {
        Self::new(dim, |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>(), |x| x.to_vec())
            .with_hessian(move |_| DMatrix::identity(dim, dim))
    }

    /// `exp(-|x|² / 2)`
    pub fn gaussian(dim: usize) -> Self {
        let value = |x: &[f64]| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp();
        Self::new(dim, value, move |x| {
            let g = value(x);
            x.iter().map(|v| -v * g).collect()
        })
        .with_hessian(move |x| {
            let g = value(x);
            DMatrix::from_fn(dim, dim, |i, j| {
                let delta = if i == j { 1.0 } else { 0.0 };
                g * (x[i] * x[j] - delta)
            })
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    pub fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.hessian.as_ref().map(|h| h(x))
    }

    /// The gradient as a vector field; its Jacobian is the Hessian when one
    /// was supplied.
    pub fn gradient_field(&self) -> AnalyticField {
        let g = self.gradient.clone();
        let field = AnalyticField::with_fd_jacobian(self.dim, move |x| g(x));
        match &self.hessian {
            Some(h) => {
                let h = h.clone();
                field.with_jacobian(move |x| h(x))
            }
            None => field,
        }
    }
}

/// How an [`AnalyticField`] provides its Jacobian.
#[derive(Clone)]
pub enum Jacobian {
    Exact(MatrixFn),
    /// Central differences with step `1e-5 · (1 + |x|)`.
    FiniteDifference,
    Unavailable,
}

/// A vector field `X: R^D → R^D` together with its Jacobian `∇X`.
#[derive(Clone)]
pub struct AnalyticField {
    dim: usize,
    value: VectorFn,
    jacobian: Jacobian,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let jac = match self.jacobian {
            Jacobian::Exact(_) => "exact",
            Jacobian::FiniteDifference => "finite-difference",
            Jacobian::Unavailable => "unavailable",
        };
        f.debug_struct("AnalyticField")
            .field("dim", &self.dim)
            .field("jacobian", &jac)
            .finish()
    }
}

impl AnalyticField {
    pub fn new<V, J>(dim: usize, value: V, jacobian: J) -> Self
    where
        V: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Arc::new(value),
            jacobian: Jacobian::Exact(Arc::new(jacobian)),
        }
    }

    pub fn with_fd_jacobian<V>(dim: usize, value: V) -> Self
    where
        V: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Arc::new(value),
            jacobian: Jacobian::FiniteDifference,
        }
    }

    pub fn without_jacobian<V>(dim: usize, value: V) -> Self
    where
        V: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Arc::new(value),
            jacobian: Jacobian::Unavailable,
        }
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Jacobian::Exact(Arc::new(jacobian));
        self
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(vec![0.0; dim])
    }

    pub fn constant(v: Vec<f64>) -> Self {
        let dim = v.len();
        Self::new(dim, move |_| v.clone(), move |_| DMatrix::zeros(dim, dim))
    }

    /// `x ↦ M x + b`
    pub fn affine(m: DMatrix<f64>, b: Vec<f64>) -> Self {
        let dim = b.len();
        assert_eq!(m.nrows(), dim);
        assert_eq!(m.ncols(), dim);
        let mj = m.clone();
        Self::new(
            dim,
            move |x| {
                let mut y = crate::numeric::mat_vec(&m, x);
                for (yi, bi) in y.iter_mut().zip(&b) {
                    *yi += bi;
                }
                y
            },
            move |_| mj.clone(),
        )
    }

    /// Component-wise polynomial field with exact Jacobian.
    pub fn from_polynomials(components: Vec<Polynomial>) -> Self {
        let dim = components.len();
        assert!(components.iter().all(|p| p.dim() == dim), "components must live on R^D");
        let partials: Vec<Vec<Polynomial>> = components
            .iter()
            .map(|p| (0..dim).map(|j| p.derivative(j)).collect())
            .collect();
        Self::new(
            dim,
            move |x| components.iter().map(|p| p.eval(x)).collect(),
            move |x| DMatrix::from_fn(dim, dim, |i, j| partials[i][j].eval(x)),
        )
    }

    /// `(x_1, x_2) ↦ (−x_2, x_1)` on `R^2`.
    pub fn rotational() -> Self {
        Self::new(
            2,
            |x| vec![-x[1], x[0]],
            |_| DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        (self.value)(x)
    }

    pub fn has_jacobian(&self) -> bool {
        !matches!(self.jacobian, Jacobian::Unavailable)
    }

    pub fn jacobian_kind(&self) -> &Jacobian {
        &self.jacobian
    }

    /// `∇X(x)` with rows indexing components: `J_ij = ∂X_i/∂x_j`.
    pub fn jacobian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        match &self.jacobian {
            Jacobian::Exact(j) => Some(j(x)),
            Jacobian::FiniteDifference => Some(fd_jacobian(|p| self.value(p), x, default_fd_step(x))),
            Jacobian::Unavailable => None,
        }
    }

    /// Largest violation of `|J e − (X(x+he) − X(x−he))/2h| ≤ tol (1 + |J|)`
    /// over the coordinate directions `e`, normalised so that ≤ 1 means
    /// consistent.
    pub fn jacobian_consistency(&self, x: &[f64], h: f64, tol: f64) -> Option<f64> {
        let j = self.jacobian(x)?;
        let fd = fd_jacobian(|p| self.value(p), x, h);
        let jnorm = j.norm();
        let worst = (0..self.dim)
            .map(|c| (j.column(c) - fd.column(c)).norm())
            .fold(0.0, f64::max);
        Some(worst / (tol * (1.0 + jnorm)))
    }
}

/// Central-difference Jacobian of `f` at `x` with step `h`.
pub fn fd_jacobian<F>(f: F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(x).len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    jac
}

/// Names accepted by [`scalar_from_name`].
pub const SCALAR_NAMES: &[&str] = &["quadratic", "gaussian", "cubic", "sum", "x<k>"];

/// Built-in scalar maps on `R^dim`: `quadratic` is `|x|²/2`, `gaussian` is
/// `exp(−|x|²/2)`, `cubic` is `Σ x_k³/3`, `sum` is `Σ x_k` and `x<k>` the
/// `k`-th coordinate.
pub fn scalar_from_name(name: &str, dim: usize) -> crate::error::Result<ScalarField> {
    use crate::error::Error;
    match name {
        "quadratic" => Ok(ScalarField::half_square_norm(dim)),
        "gaussian" => Ok(ScalarField::gaussian(dim)),
        "cubic" => {
            let mut p = Polynomial::zero(dim);
            for k in 0..dim {
                let mut e = vec![0u32; dim];
                e[k] = 3;
                p = p.add(&Polynomial::from_terms(dim, &[(1.0 / 3.0, e)]));
            }
            Ok(ScalarField::from_polynomial(p))
        }
        "sum" => {
            let p = (0..dim).fold(Polynomial::zero(dim), |acc, k| acc.add(&Polynomial::coordinate(dim, k)));
            Ok(ScalarField::from_polynomial(p))
        }
        _ => {
            let k = name
                .strip_prefix('x')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k < dim)
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "unknown scalar map '{name}' on R^{dim}; expected one of {SCALAR_NAMES:?}"
                    ))
                })?;
            Ok(ScalarField::from_polynomial(Polynomial::coordinate(dim, k)))
        }
    }
}
