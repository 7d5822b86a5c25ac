//! Multivariate polynomials with exact derivatives.
//!
//! Polynomials serve as the exactly-differentiable test functions of the
//! crate: scalar maps with gradient and Hessian, vector fields with exact
//! Jacobians, and symbolic Poisson brackets.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;

/// `Σ c_α x^α` over `dim` variables, stored as exponent vector → coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    /// The coordinate function `x_k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        assert!(k < dim, "coordinate index out of range");
        let mut e = vec![0; dim];
        e[k] = 1;
        let mut p = Self::zero(dim);
        p.add_term(e, 1.0);
        p
    }

    /// Build from `(coefficient, exponents)` pairs.
    pub fn from_terms(dim: usize, terms: &[(f64, Vec<u32>)]) -> Self {
        let mut p = Self::zero(dim);
        for (c, e) in terms {
            assert_eq!(e.len(), dim, "exponent vector has wrong length");
            p.add_term(e.clone(), *c);
        }
        p
    }

    /// `x^T H x / 2 + g·x + c`.
    pub fn quadratic(h: &DMatrix<f64>, g: &[f64], c: f64) -> Self {
        let dim = g.len();
        let mut p = Self::constant(dim, c);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 1;
            p.add_term(e, g[i]);
            for j in 0..dim {
                let mut e = vec![0; dim];
                e[i] += 1;
                e[j] += 1;
                p.add_term(e, 0.5 * h[(i, j)]);
            }
        }
        p
    }

    /// Random polynomial of total degree ≤ `degree` with coefficients in
    /// `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(dim: usize, degree: u32, rng: &mut R) -> Self {
        let mut p = Self::zero(dim);
        for e in exponents_up_to(dim, degree) {
            p.add_term(e, rng.gen_range(-1.0..1.0));
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        // drop exact cancellations so that zero polynomials compare equal
        self.terms.retain(|_, v| *v != 0.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut p = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[k] -= 1;
            p.add_term(d, c * e[k] as f64);
        }
        p
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|k| self.derivative(k).eval(x)).collect()
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            let di = self.derivative(i);
            for j in 0..self.dim {
                h[(i, j)] = di.derivative(j).eval(x);
            }
        }
        h
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut p = Self::zero(self.dim);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), s * c);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut p = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    /// Canonical bracket `Σ_k ∂f/∂q_k ∂g/∂p_k − ∂f/∂p_k ∂g/∂q_k` in
    /// coordinates `(q_1..q_d, p_1..p_d)`; equals `ω(X_f, X_g)` for
    /// `X_f = −J∇f`.
    pub fn poisson_bracket(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        assert!(self.dim.is_multiple_of(2), "bracket needs even dimension");
        let d = self.dim / 2;
        let mut p = Self::zero(self.dim);
        for k in 0..d {
            let a = self.derivative(k).mul(&other.derivative(d + k));
            let b = self.derivative(d + k).mul(&other.derivative(k));
            p = p.add(&a).sub(&b);
        }
        p
    }

    /// Largest absolute coefficient.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// All exponent vectors in `dim` variables with total degree ≤ `degree`.
pub fn exponents_up_to(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(dim, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
    out
}
