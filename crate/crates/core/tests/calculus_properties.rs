mod common;

use std::f64::consts::TAU;

use common::random_weighted;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wforms::calculus::{
    continuity_residual, curve_length, divergence_pairing, gradient_of, reparametrize, tangent_projection,
    wasserstein_gradient, wasserstein_gradient_with, GradientOptions, Reparametrization,
};
use wforms::fields::scalar_from_name;
use wforms::measure::{linear_functional, pushforward};
use wforms::numeric::linspace;
use wforms::polynomial::Polynomial;
use wforms::{DiscreteMeasure, Error, Functional, MeasureCurve, ScalarField, TangentField};

fn cells(max_atoms: usize, dim: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    proptest::collection::vec(
        (proptest::collection::vec(-2.0..2.0f64, dim), 0.1..1.0f64),
        1..=max_atoms,
    )
    .prop_map(|c| {
        let total: f64 = c.iter().map(|x| x.1).sum();
        c.into_iter().map(|(x, w)| (x, w / total)).unzip()
    })
}

fn field_for(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-2.0..2.0f64, dim), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pushforward_composes((atoms, weights) in cells(6, 2), s in -2.0..2.0f64, b in -1.0..1.0f64) {
        let mu = DiscreteMeasure::new(atoms, weights).unwrap();
        let phi = |x: &[f64]| vec![s * x[0] + b, x[1] - x[0]];
        let psi = |x: &[f64]| vec![x[1].sin(), x[0] * x[1]];
        let two_steps = pushforward(psi, &pushforward(phi, &mu).unwrap()).unwrap();
        let composed = pushforward(|x| psi(&phi(x)), &mu).unwrap();
        prop_assert_eq!(two_steps, composed);
        prop_assert_eq!(pushforward(|x| x.to_vec(), &mu).unwrap(), mu);
    }

    #[test]
    fn integrals_are_affine_in_mixtures(
        (a1, w1) in cells(4, 2), (a2, w2) in cells(4, 2), lambda in 0.0..1.0f64
    ) {
        let mu = DiscreteMeasure::new(a1, w1).unwrap();
        let nu = DiscreteMeasure::new(a2, w2).unwrap();
        let mix = mu.mixture(&nu, lambda).unwrap();
        let f = ScalarField::gaussian(2);
        let expected = lambda * linear_functional(&f, &mu) + (1.0 - lambda) * linear_functional(&f, &nu);
        prop_assert!((linear_functional(&f, &mix) - expected).abs() < 1e-14);
    }

    #[test]
    fn tangent_norm_ignores_atom_order((atoms, weights) in cells(6, 3), seed in 0u64..1000) {
        let n = atoms.len();
        let mut rng = StdRng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mu = DiscreteMeasure::new(atoms.clone(), weights.clone()).unwrap();
        let norm = TangentField::new(x.clone()).norm(&mu).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        let mu_p = DiscreteMeasure::new(order.iter().map(|&i| atoms[i].clone()).collect(), order.iter().map(|&i| weights[i]).collect()).unwrap();
        let x_p = TangentField::new(order.iter().map(|&i| x[i].clone()).collect());
        prop_assert!((x_p.norm(&mu_p).unwrap() - norm).abs() <= 1e-14 * (1.0 + norm));
    }

    #[test]
    fn divergence_pairing_obeys_cauchy_schwarz((atoms, weights) in cells(6, 2), v in field_for(6, 2)) {
        let mu = DiscreteMeasure::new(atoms, weights).unwrap();
        let x = TangentField::new(v[..mu.len()].to_vec());
        let f = ScalarField::gaussian(2);
        let grad = TangentField::new(mu.atoms().iter().map(|p| f.gradient(p)).collect());
        let pairing = divergence_pairing(&mu, &x, &f).unwrap();
        prop_assert!(pairing.abs() <= x.norm(&mu).unwrap() * grad.norm(&mu).unwrap() + 1e-12);
    }

    #[test]
    fn linear_functional_gradients_match_finite_differences((atoms, weights) in cells(5, 2)) {
        let mu = DiscreteMeasure::new(atoms, weights).unwrap();
        prop_assume!(mu.min_separation() > 1e-3);
        let f = Functional::linear(ScalarField::gaussian(2));
        let exact = gradient_of(&f, &mu).unwrap();
        let fd = wasserstein_gradient(&f.without_gradient(), &mu, 1e-4).unwrap();
        prop_assert!(exact.max_abs_diff(&fd) < 1e-6);
    }
}

#[test]
fn projection_is_identity_off_collisions() {
    let mu = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
    let x = TangentField::new(vec![vec![2.0], vec![-3.0]]);
    assert_eq!(tangent_projection(&mu, &x).unwrap(), x);
    let collided = DiscreteMeasure::uniform(vec![vec![0.0], vec![0.0]]).unwrap();
    assert!(matches!(
        tangent_projection(&collided, &x),
        Err(Error::CoincidentAtoms { .. })
    ));
}

#[test]
fn interaction_gradient_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(4);
    for name in ["gaussian", "quadratic"] {
        let f = Functional::interaction(scalar_from_name(name, 2).unwrap());
        let mu = random_weighted(&mut rng, 4, 2);
        let exact = gradient_of(&f, &mu).unwrap();
        let fd = wasserstein_gradient_with(
            &f.clone().without_gradient(),
            &mu,
            GradientOptions {
                step: 1e-3,
                richardson: true,
            },
        )
        .unwrap();
        assert!(exact.max_abs_diff(&fd) < 1e-8, "{name}");
    }
}

#[test]
fn polynomial_functional_gradients() {
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..5 {
        let p = Polynomial::random(2, 3, &mut rng);
        let g = Functional::linear(ScalarField::from_polynomial(p.clone()));
        let mu = random_weighted(&mut rng, 3, 2);
        let grad = gradient_of(&g, &mu).unwrap();
        for i in 0..3 {
            let expect = p.gradient(mu.atom(i));
            for (got, want) in grad.vector(i).iter().zip(&expect) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }
}

fn spiral(n: usize) -> MeasureCurve {
    MeasureCurve::from_trajectory(
        linspace(0.0, 1.0, n),
        vec![0.3, 0.7],
        |t| vec![vec![t.cos(), (2.0 * t).sin()], vec![1.0 + t * t, -t]],
        |t| vec![vec![-t.sin(), 2.0 * (2.0 * t).cos()], vec![2.0 * t, -1.0]],
    )
    .unwrap()
}

#[test]
fn reparametrization_preserves_length_and_continuity() {
    let base = spiral(400);
    let r = Reparametrization {
        domain: (0.0, 2.0),
        map: &|s: f64| s * s / 4.0,
        derivative: &|s: f64| s / 2.0,
    };
    let re = reparametrize(&base, &r, &linspace(0.0, 2.0, 400)).unwrap();
    let tests = [ScalarField::gaussian(2), ScalarField::half_square_norm(2)];
    assert!((curve_length(&re).unwrap() - curve_length(&base).unwrap()).abs() < 1e-3);
    assert!(continuity_residual(&re, &tests).unwrap() < 1e-3);
    let backwards = Reparametrization {
        domain: (0.0, 1.0),
        map: &|s: f64| 1.0 - s,
        derivative: &|_| -1.0,
    };
    assert!(matches!(
        reparametrize(&base, &backwards, &linspace(0.0, 1.0, 10)),
        Err(Error::NonMonotone { .. })
    ));
}

#[test]
fn extracted_velocities_track_the_exact_ones() {
    let exact = spiral(200);
    let extracted = exact.without_velocities().with_extracted_velocities().unwrap();
    for k in 1..200 {
        let err = extracted.velocity(k).unwrap().max_abs_diff(exact.velocity(k).unwrap());
        assert!(err < 1e-4, "k = {k}: {err}");
    }
}

#[test]
fn circle_length_and_energy() {
    let c = MeasureCurve::from_trajectory(
        linspace(0.0, TAU, 1000),
        vec![0.5, 0.5],
        |t| vec![vec![t.cos(), t.sin()], vec![-t.cos(), -t.sin()]],
        |t| vec![vec![-t.sin(), t.cos()], vec![t.sin(), -t.cos()]],
    )
    .unwrap();
    assert!((curve_length(&c).unwrap() - TAU).abs() < 1e-4);
    assert!((c.kinetic_energy().unwrap() - TAU).abs() < 1e-12);
    assert!((c.max_speed().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn gradient_needs_distinct_atoms() {
    let mu = DiscreteMeasure::uniform(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let f = Functional::linear(ScalarField::gaussian(2));
    assert!(matches!(gradient_of(&f, &mu), Err(Error::CoincidentAtoms { .. })));
}

#[test]
fn sampled_curves_obey_the_holder_bound() {
    let c = spiral(200);
    let energy: Vec<f64> = c
        .velocities()
        .unwrap()
        .iter()
        .zip(c.measures())
        .map(|(v, m)| v.inner(v, m).unwrap())
        .collect();
    for (a, b) in [(0, 200), (10, 50), (100, 101), (37, 163)] {
        let dist = wforms::transport::w2_distance(c.measure(a), c.measure(b)).unwrap();
        let ts = &c.times()[a..=b];
        let action = wforms::numeric::trapezoid(ts, &energy[a..=b]);
        assert!(
            dist * dist <= (ts[ts.len() - 1] - ts[0]) * action * (1.0 + 1e-6),
            "{a}..{b}"
        );
    }
}
