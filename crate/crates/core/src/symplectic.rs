//! Canonical symplectic structure on `R^{2d}` lifted to measures: the form
//! `Ω_μ(X, Y) = ∫ ω(X, Y) dμ`, Poisson brackets of linear functionals and
//! Hamiltonian flows of particle measures.
//!
//! Coordinates are ordered `(q_1, …, q_d, p_1, …, p_d)` and
//! `J = [[0, −I], [I, 0]]`, so `ω(u, v) = ⟨Ju, v⟩` and `X_f = −J∇f`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::calculus::{gradient_of, MeasureCurve};
use crate::error::{Error, Result};
use crate::fields::{scalar_from_name, AnalyticField, ScalarField};
use crate::measure::{DiscreteMeasure, Functional, TangentField};
use crate::numeric::{norm, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticContext {
    half_dim: usize,
}

impl SymplecticContext {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension { dim });
        }
        Ok(Self { half_dim: dim / 2 })
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn j(&self) -> DMatrix<f64> {
        let d = self.half_dim;
        let mut j = DMatrix::zeros(2 * d, 2 * d);
        for k in 0..d {
            j[(k, d + k)] = -1.0;
            j[(d + k, k)] = 1.0;
        }
        j
    }

    /// `J u`
    pub fn apply_j(&self, u: &[f64]) -> Vec<f64> {
        let d = self.half_dim;
        let mut out = vec![0.0; 2 * d];
        for k in 0..d {
            out[k] = -u[d + k];
            out[d + k] = u[k];
        }
        out
    }

    /// `−J u`
    pub fn apply_minus_j(&self, u: &[f64]) -> Vec<f64> {
        self.apply_j(u).into_iter().map(|c| -c).collect()
    }

    /// `ω(u, v) = Σ_k (u_{q_k} v_{p_k} − u_{p_k} v_{q_k})`
    pub fn omega(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.half_dim;
        (0..d).map(|k| u[k] * v[d + k] - u[d + k] * v[k]).sum()
    }
}

/// `X_f = −J∇f`, with Jacobian `−J · Hess f` when the Hessian is known.
pub fn ham_field(f: &ScalarField) -> Result<AnalyticField> {
    let ctx = SymplecticContext::new(f.dim())?;
    let g = f.clone();
    let field = AnalyticField::with_fd_jacobian(f.dim(), move |x| ctx.apply_minus_j(&g.gradient(x)));
    if f.hessian(&vec![0.0; f.dim()]).is_some() {
        let h = f.clone();
        let minus_j = -ctx.j();
        Ok(field.with_jacobian(move |x| &minus_j * h.hessian(x).expect("Hessian was supplied")))
    } else {
        Ok(field)
    }
}

fn context_for(mu: &DiscreteMeasure) -> Result<SymplecticContext> {
    SymplecticContext::new(mu.dim())
}

/// `Σ a_i ω(X_i, Y_i)`
pub fn omega_pairing(mu: &DiscreteMeasure, x: &TangentField, y: &TangentField) -> Result<f64> {
    let ctx = context_for(mu)?;
    x.check_aligned(mu)?;
    y.check_aligned(mu)?;
    let terms: Vec<f64> = x
        .vectors()
        .iter()
        .zip(y.vectors())
        .zip(mu.weights())
        .map(|((u, v), a)| a * ctx.omega(u, v))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `Ω_μ(X_f, X_g) = ∫ ω(X_f, X_g) dμ`
pub fn symplectic_form(mu: &DiscreteMeasure, f: &ScalarField, g: &ScalarField) -> Result<f64> {
    let ctx = context_for(mu)?;
    let sample =
        |h: &ScalarField| TangentField::new(mu.atoms().iter().map(|x| ctx.apply_minus_j(&h.gradient(x))).collect());
    omega_pairing(mu, &sample(f), &sample(g))
}

/// `{F_f, F_g}(μ) = ∫ {f, g} dμ`
pub fn poisson_bracket_linear(f: &ScalarField, g: &ScalarField, mu: &DiscreteMeasure) -> Result<f64> {
    symplectic_form(mu, f, g)
}

#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    context: SymplecticContext,
    hamiltonian: Functional,
}

impl HamiltonianSystem {
    pub fn new(dim: usize, hamiltonian: Functional) -> Result<Self> {
        Ok(Self {
            context: SymplecticContext::new(dim)?,
            hamiltonian,
        })
    }

    pub fn context(&self) -> &SymplecticContext {
        &self.context
    }

    pub fn hamiltonian(&self) -> &Functional {
        &self.hamiltonian
    }
}

/// `X_F(μ) = −J ∇_μF` atomwise; the gradient is analytic when `F` carries
/// one, else finite differences.
pub fn hamiltonian_vector_field(system: &HamiltonianSystem, mu: &DiscreteMeasure) -> Result<TangentField> {
    if mu.dim() != system.context.dim() {
        return Err(Error::DimensionMismatch {
            left: system.context.dim(),
            right: mu.dim(),
        });
    }
    let grad = gradient_of(&system.hamiltonian, mu)?;
    Ok(TangentField::new(
        grad.vectors().iter().map(|g| system.context.apply_minus_j(g)).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
    ImplicitMidpoint,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Rk4 => "rk4",
            Scheme::ImplicitMidpoint => "implicit-midpoint",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "implicit-midpoint" => Ok(Scheme::ImplicitMidpoint),
            _ => Err(Error::Invalid(format!(
                "unknown scheme '{s}'; expected rk4 or implicit-midpoint"
            ))),
        }
    }
}

pub const COLLISION_TOL: f64 = 1e-10;
const MIDPOINT_TOL: f64 = 1e-14;
const MIDPOINT_MAX_ITER: usize = 200;

type State = Vec<Vec<f64>>;

fn axpy_state(x: &State, s: f64, v: &State) -> State {
    x.iter()
        .zip(v)
        .map(|(xi, vi)| xi.iter().zip(vi).map(|(a, b)| a + s * b).collect())
        .collect()
}

fn check_separation(mu: &DiscreteMeasure, t: f64) -> Result<()> {
    let scale = 1.0 + mu.atoms().iter().map(|x| norm(x)).fold(0.0, f64::max);
    let separation = mu.min_separation();
    if separation < COLLISION_TOL * scale {
        return Err(Error::AtomCollision { t, separation });
    }
    Ok(())
}

/// Integrate `ẋ_i = X_F(μ_t)(x_i)` over `[0, T]` with `ceil(T/dt)` equal
/// steps. The returned curve carries `X_F` as its velocity at every sample.
pub fn hamiltonian_flow(
    system: &HamiltonianSystem,
    mu0: &DiscreteMeasure,
    t_end: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<MeasureCurve> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Invalid(format!("flow horizon must be positive, got {t_end}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Invalid(format!("time step must be positive, got {dt}")));
    }
    check_separation(mu0, 0.0)?;
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let field = |x: &State, t: f64| -> Result<State> {
        let mu = mu0.with_atoms(x.clone())?;
        check_separation(&mu, t)?;
        Ok(hamiltonian_vector_field(system, &mu)?.into_vectors())
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut positions = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);
    let mut x: State = mu0.atoms().to_vec();
    let mut v = field(&x, 0.0)?;
    times.push(0.0);
    positions.push(x.clone());
    velocities.push(v.clone());
    for n in 0..steps {
        let t = n as f64 * h;
        x = match scheme {
            Scheme::Rk4 => {
                let k1 = v.clone();
                let k2 = field(&axpy_state(&x, 0.5 * h, &k1), t + 0.5 * h)?;
                let k3 = field(&axpy_state(&x, 0.5 * h, &k2), t + 0.5 * h)?;
                let k4 = field(&axpy_state(&x, h, &k3), t + h)?;
                x.iter()
                    .enumerate()
                    .map(|(i, xi)| {
                        (0..xi.len())
                            .map(|c| xi[c] + h / 6.0 * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] + k4[i][c]))
                            .collect()
                    })
                    .collect()
            }
            Scheme::ImplicitMidpoint => {
                let mut y = axpy_state(&x, h, &v);
                let mut converged = false;
                for _ in 0..MIDPOINT_MAX_ITER {
                    let mid = axpy_state(&x, 1.0, &y)
                        .into_iter()
                        .map(|p| p.into_iter().map(|c| 0.5 * c).collect())
                        .collect();
                    let next = axpy_state(&x, h, &field(&mid, t + 0.5 * h)?);
                    let change = next
                        .iter()
                        .zip(&y)
                        .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs() / (1.0 + p.abs())))
                        .fold(0.0, f64::max);
                    y = next;
                    if change <= MIDPOINT_TOL {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(Error::StepRejected { t });
                }
                y
            }
        };
        let t_next = if n + 1 == steps { t_end } else { (n + 1) as f64 * h };
        v = field(&x, t_next)?;
        times.push(t_next);
        positions.push(x.clone());
        velocities.push(v.clone());
    }
    MeasureCurve::new(times, mu0.weights().to_vec(), positions, Some(velocities))
}

/// Names accepted by [`builtin_hamiltonian`].
pub const HAMILTONIAN_NAMES: &[&str] = &[
    "oscillator",
    "linear:<scalar>",
    "interaction:gaussian",
    "interaction:quadratic",
];

/// `oscillator` is `∫ |x|²/2 dμ`, `linear:f` is `∫ f dμ` for a named scalar
/// map and `interaction:W` is `½ ∬ W(x − y) dμ dμ` for an even `W`.
pub fn builtin_hamiltonian(name: &str, dim: usize) -> Result<Functional> {
    SymplecticContext::new(dim)?;
    if name == "oscillator" {
        return Ok(Functional::linear(ScalarField::half_square_norm(dim)));
    }
    if let Some(f) = name.strip_prefix("linear:") {
        return Ok(Functional::linear(scalar_from_name(f, dim)?));
    }
    if let Some(w) = name.strip_prefix("interaction:") {
        if w == "gaussian" || w == "quadratic" {
            return Ok(Functional::interaction(scalar_from_name(w, dim)?));
        }
        return Err(Error::Invalid(format!(
            "interaction potential '{w}' must be gaussian or quadratic"
        )));
    }
    Err(Error::Invalid(format!(
        "unknown Hamiltonian '{name}'; expected one of {HAMILTONIAN_NAMES:?}"
    )))
}

/// `Σ a_i ⟨(∇_μF)_i, Y_i⟩`, the right-hand side of `Ω_μ(X_F, Y) = dF(Y)`.
pub fn differential(f: &Functional, mu: &DiscreteMeasure, y: &TangentField) -> Result<f64> {
    let g = gradient_of(f, mu)?;
    y.check_aligned(mu)?;
    let terms: Vec<f64> = g
        .vectors()
        .iter()
        .zip(y.vectors())
        .zip(mu.weights())
        .map(|((gi, yi), a)| a * crate::numeric::dot(gi, yi))
        .collect();
    Ok(pairwise_sum(&terms))
}
