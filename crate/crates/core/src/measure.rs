//! Finitely-atomic probability measures on `R^D`, tangent fields over their
//! atoms, push-forwards and functionals.
//!
//! A [`DiscreteMeasure`] never merges atoms on its own: coincident images of
//! a push-forward stay as separate atoms until [`merge_atoms`] is called.
//! The calculus on the distinct-atom stratum relies on that.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::numeric::{dist2, dot, pairwise_sum};

/// Renormalisation window for weight sums.
pub const WEIGHT_SUM_WINDOW: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates and builds a measure. Weights within `1e-9` of unit mass
    /// are renormalised to sum to one.
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: atoms.len(),
                found: weights.len(),
            });
        }
        if atoms.is_empty() {
            return Err(Error::Invalid("a measure needs at least one atom".into()));
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(Error::Invalid("atoms must have positive dimension".into()));
        }
        for a in &atoms {
            if a.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: a.len(),
                });
            }
            if a.iter().any(|c| !c.is_finite()) {
                return Err(Error::Invalid("atom coordinates must be finite".into()));
            }
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonpositiveWeight { index, value });
            }
        }
        let sum = pairwise_sum(&weights);
        if (sum - 1.0).abs() > WEIGHT_SUM_WINDOW {
            return Err(Error::WeightSumOutOfRange { sum });
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { dim, atoms, weights })
    }

    /// Uniform weights `1/n`.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn dirac(x: Vec<f64>) -> Self {
        Self::new(vec![x], vec![1.0]).expect("a Dirac mass is always valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ a_i |x_i|²`, i.e. `W₂²(μ, δ₀)`.
    pub fn second_moment(&self) -> f64 {
        let terms: Vec<f64> = self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(x, a)| a * dot(x, x))
            .collect();
        pairwise_sum(&terms)
    }

    /// Same weights, new atom positions.
    pub fn with_atoms(&self, atoms: Vec<Vec<f64>>) -> Result<Self> {
        if atoms.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: atoms.len(),
            });
        }
        if let Some(a) = atoms.iter().find(|a| a.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: a.len(),
            });
        }
        Ok(Self {
            dim: self.dim,
            atoms,
            weights: self.weights.clone(),
        })
    }

    /// First pair of atoms at distance ≤ `tol`, if any.
    pub fn coincident_pair(&self, tol: f64) -> Option<(usize, usize)> {
        let tol2 = tol * tol;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if dist2(&self.atoms[i], &self.atoms[j]) <= tol2 {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Errors with [`Error::CoincidentAtoms`] unless all atoms are pairwise
    /// distinct.
    pub fn require_distinct(&self) -> Result<()> {
        match self.coincident_pair(0.0) {
            Some((first, second)) => Err(Error::CoincidentAtoms { first, second }),
            None => Ok(()),
        }
    }

    /// Smallest pairwise atom distance (`+∞` for a single atom).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                best = best.min(dist2(&self.atoms[i], &self.atoms[j]));
            }
        }
        best.sqrt()
    }

    /// Largest atom norm.
    pub fn radius(&self) -> f64 {
        self.atoms.iter().map(|x| dot(x, x).sqrt()).fold(0.0, f64::max)
    }

    /// Concatenate `λ μ + (1 − λ) ν` atom lists.
    pub fn mixture(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut weights: Vec<f64> = self.weights.iter().map(|w| lambda * w).collect();
        weights.extend(other.weights.iter().map(|w| (1.0 - lambda) * w));
        Self::new(atoms, weights)
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            dimension: self.dim,
            atoms: self.atoms.clone(),
            weights: self.weights.clone(),
        }
    }
}

/// File format for measures: `{"dimension": D, "atoms": [[..],..], "weights": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeasureJson {
    pub dimension: usize,
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TryFrom<MeasureJson> for DiscreteMeasure {
    type Error = Error;

    fn try_from(m: MeasureJson) -> Result<Self> {
        if let Some(a) = m.atoms.iter().find(|a| a.len() != m.dimension) {
            return Err(Error::DimensionMismatch {
                left: m.dimension,
                right: a.len(),
            });
        }
        DiscreteMeasure::new(m.atoms, m.weights)
    }
}

/// `make_measure`: validated construction from atoms and weights.
pub fn make_measure(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(atoms, weights)
}

/// `φ#μ`: atoms mapped through `phi`, weights unchanged, images not merged.
pub fn pushforward<F>(phi: F, mu: &DiscreteMeasure) -> Result<DiscreteMeasure>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let atoms: Vec<Vec<f64>> = mu.atoms().iter().map(|x| phi(x)).collect();
    let dim = atoms[0].len();
    if let Some(a) = atoms
        .iter()
        .find(|a| a.len() != dim || a.iter().any(|c| !c.is_finite()))
    {
        if a.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: a.len(),
            });
        }
        return Err(Error::Invalid("push-forward map produced a non-finite point".into()));
    }
    Ok(DiscreteMeasure {
        dim,
        atoms,
        weights: mu.weights().to_vec(),
    })
}

/// `∫ f dμ = Σ a_i f(x_i)`.
pub fn linear_functional(f: &ScalarField, mu: &DiscreteMeasure) -> f64 {
    let terms: Vec<f64> = mu
        .atoms()
        .iter()
        .zip(mu.weights())
        .map(|(x, a)| a * f.value(x))
        .collect();
    pairwise_sum(&terms)
}

/// Combine atoms closer than `tol` into their weight-barycentre, repeating
/// until all remaining atoms are pairwise more than `tol` apart. Atom order
/// follows first occurrence.
pub fn merge_atoms(mu: &DiscreteMeasure, tol: f64) -> DiscreteMeasure {
    let tol = tol.max(0.0);
    let mut atoms = mu.atoms().to_vec();
    let mut weights = mu.weights().to_vec();
    loop {
        let n = atoms.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut k = i;
            while p[k] != r {
                let next = p[k];
                p[k] = r;
                k = next;
            }
            r
        }
        let mut merged_any = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if dist2(&atoms[i], &atoms[j]).sqrt() <= tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                        merged_any = true;
                    }
                }
            }
        }
        if !merged_any {
            break;
        }
        let dim = mu.dim();
        let mut order: Vec<usize> = Vec::new();
        let mut sums: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; dim], 0.0); n];
        let mut identical = vec![true; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if sums[r].1 == 0.0 {
                order.push(r);
            }
            if atoms[i] != atoms[r] {
                identical[r] = false;
            }
            for (s, x) in sums[r].0.iter_mut().zip(&atoms[i]) {
                *s += weights[i] * x;
            }
            sums[r].1 += weights[i];
        }
        // exact duplicates keep their coordinates bit-for-bit
        let next_atoms = order
            .iter()
            .map(|&r| {
                if identical[r] {
                    atoms[r].clone()
                } else {
                    sums[r].0.iter().map(|s| s / sums[r].1).collect()
                }
            })
            .collect();
        weights = order.iter().map(|&r| sums[r].1).collect();
        atoms = next_atoms;
    }
    DiscreteMeasure {
        dim: mu.dim(),
        atoms,
        weights,
    }
}

/// One vector per atom of a paired measure: an element of `L²(μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    vectors: Vec<Vec<f64>>,
}

impl TangentField {
    pub fn new(vectors: Vec<Vec<f64>>) -> Self {
        Self { vectors }
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            vectors: vec![vec![0.0; dim]; n],
        }
    }

    /// Sample an analytic field at the atoms of `mu`.
    pub fn sample(field: &crate::fields::AnalyticField, mu: &DiscreteMeasure) -> Self {
        Self {
            vectors: mu.atoms().iter().map(|x| field.value(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }

    /// Errors unless the field has one vector of dimension `D` per atom.
    pub fn check_aligned(&self, mu: &DiscreteMeasure) -> Result<()> {
        if self.len() != mu.len() {
            return Err(Error::LengthMismatch {
                expected: mu.len(),
                found: self.len(),
            });
        }
        if let Some(v) = self.vectors.iter().find(|v| v.len() != mu.dim()) {
            return Err(Error::DimensionMismatch {
                left: mu.dim(),
                right: v.len(),
            });
        }
        Ok(())
    }

    /// `⟨X, Y⟩_μ = Σ a_i ⟨X_i, Y_i⟩`
    pub fn inner(&self, other: &Self, mu: &DiscreteMeasure) -> Result<f64> {
        self.check_aligned(mu)?;
        other.check_aligned(mu)?;
        let terms: Vec<f64> = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .zip(mu.weights())
            .map(|((x, y), a)| a * dot(x, y))
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// `‖X‖_μ = (Σ a_i |X_i|²)^{1/2}`
    pub fn norm(&self, mu: &DiscreteMeasure) -> Result<f64> {
        Ok(self.inner(self, mu)?.sqrt())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            vectors: self
                .vectors
                .iter()
                .zip(&other.vectors)
                .map(|(x, y)| crate::numeric::add(x, y))
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            vectors: self.vectors.iter().map(|x| crate::numeric::scale(x, s)).collect(),
        }
    }

    /// Largest component-wise deviation.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

type EvalFn = Arc<dyn Fn(&DiscreteMeasure) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DiscreteMeasure) -> TangentField + Send + Sync>;

/// A function `F: 𝓜 → R` with an optional analytic Wasserstein gradient.
#[derive(Clone)]
pub struct Functional {
    eval: EvalFn,
    gradient: Option<GradFn>,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Functional")
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl Functional {
    pub fn new<E>(eval: E) -> Self
    where
        E: Fn(&DiscreteMeasure) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            gradient: None,
        }
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&DiscreteMeasure) -> TangentField + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// Drop the analytic gradient so callers fall back to finite differences.
    pub fn without_gradient(mut self) -> Self {
        self.gradient = None;
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_gradient(|mu| TangentField::zeros(mu.len(), mu.dim()))
    }

    /// `F(μ) = ∫ f dμ` with gradient `∇f` at the atoms.
    pub fn linear(f: ScalarField) -> Self {
        let g = f.clone();
        Self::new(move |mu| linear_functional(&f, mu))
            .with_gradient(move |mu| TangentField::new(mu.atoms().iter().map(|x| g.gradient(x)).collect()))
    }

    /// `F(μ) = ½ ∬ W(x − y) dμ(x) dμ(y)` for an even potential `W`; gradient
    /// `Σ_j a_j ∇W(x_i − x_j)`.
    pub fn interaction(w: ScalarField) -> Self {
        let wg = w.clone();
        Self::new(move |mu| {
            let n = mu.len();
            let mut terms = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let z = crate::numeric::sub(mu.atom(i), mu.atom(j));
                    terms.push(0.5 * mu.weights()[i] * mu.weights()[j] * w.value(&z));
                }
            }
            pairwise_sum(&terms)
        })
        .with_gradient(move |mu| {
            let n = mu.len();
            let d = mu.dim();
            let vectors = (0..n)
                .map(|i| {
                    let mut acc = vec![0.0; d];
                    for j in 0..n {
                        let z = crate::numeric::sub(mu.atom(i), mu.atom(j));
                        let g = wg.gradient(&z);
                        for k in 0..d {
                            acc[k] += mu.weights()[j] * g[k];
                        }
                    }
                    acc
                })
                .collect();
            TangentField::new(vectors)
        })
    }

    /// Pointwise sum; the gradient is kept only when both parts have one.
    pub fn sum(&self, other: &Self) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let out = Self::new(move |mu| a(mu) + b(mu));
        match (&self.gradient, &other.gradient) {
            (Some(ga), Some(gb)) => {
                let (ga, gb) = (ga.clone(), gb.clone());
                out.with_gradient(move |mu| ga(mu).add(&gb(mu)))
            }
            _ => out,
        }
    }

    pub fn eval(&self, mu: &DiscreteMeasure) -> f64 {
        (self.eval)(mu)
    }

    pub fn analytic_gradient(&self, mu: &DiscreteMeasure) -> Option<TangentField> {
        self.gradient.as_ref().map(|g| g(mu))
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}
