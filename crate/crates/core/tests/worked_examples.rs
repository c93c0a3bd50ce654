use approx::assert_relative_eq;

use hidcvx_core::principles::*;
use hidcvx_core::{DiscreteDensity, Error, HomogeneousForm};

fn euclid(p: f64, dim: usize) -> HomogeneousForm {
    HomogeneousForm::power_euclid(p, dim).unwrap()
}

#[test]
fn kinetic_energy_values() {
    let pt = KineticPoint {
        m: 2.0,
        phi: vec![2.0, 0.0],
        beta: 1.0,
    };
    assert_eq!(kinetic_energy(&euclid(2.0, 2), &pt).unwrap(), 2.0);
    let pt = KineticPoint {
        m: 1.0,
        phi: vec![1.0, 1.0, 1.0],
        beta: 2.0,
    };
    assert_relative_eq!(
        kinetic_energy(&euclid(3.0, 3), &pt).unwrap(),
        3f64.powf(1.5),
        max_relative = 1e-15
    );
    let zero = KineticPoint {
        m: 3.0,
        phi: vec![0.0, 0.0],
        beta: 1.0,
    };
    assert_eq!(kinetic_energy(&euclid(2.0, 2), &zero).unwrap(), 0.0);
    let bad = KineticPoint {
        m: 0.0,
        phi: vec![1.0, 0.0],
        beta: 1.0,
    };
    assert!(kinetic_energy(&euclid(2.0, 2), &bad).is_err());
}

#[test]
fn kinetic_gap_by_direct_evaluation() {
    let h = euclid(2.0, 2);
    let a = KineticPoint {
        m: 1.0,
        phi: vec![1.0, 0.0],
        beta: 1.0,
    };
    let b = KineticPoint {
        m: 2.0,
        phi: vec![0.0, 2.0],
        beta: 1.0,
    };
    // E(a) = 1, E(b) = 2, midpoint m = 1.5, φ = (0.5, 1): E = 1.25/1.5
    let expected = 0.5 * 1.0 + 0.5 * 2.0 - 1.25 / 1.5;
    assert_relative_eq!(
        kinetic_convexity_gap(&h, &a, &b, 0.5).unwrap(),
        expected,
        max_relative = 1e-15
    );
    assert_eq!(kinetic_convexity_gap(&h, &a, &b, 0.0).unwrap(), 0.0);
    assert_eq!(kinetic_convexity_gap(&h, &a, &a, 0.3).unwrap(), 0.0);
    assert!(kinetic_convexity_gap(&h, &a, &b, 1.5).is_err());
}

#[test]
fn interpolating_curves() {
    assert_eq!(sigma_interpolate(1.0, 1.0, 3.0, 0.4).unwrap(), 1.0);
    assert_eq!(sigma_interpolate(0.7, 2.0, 2.0, 0.0).unwrap(), 0.7);
    assert_relative_eq!(
        sigma_interpolate(0.0, 1.0, 2.0, 0.5).unwrap(),
        0.5f64.sqrt(),
        max_relative = 1e-15
    );
    assert!(sigma_interpolate(-1.0, 1.0, 2.0, 0.5).is_err());

    let s0 = PointSample::new(1.0, vec![1.0, 0.0]);
    let s1 = PointSample::new(1.0, vec![0.0, 1.0]);
    let g = grad_sigma(&s0, &s1, 2.0, 0.5).unwrap();
    assert_relative_eq!(g[0], 0.5, max_relative = 1e-15);
    assert_relative_eq!(g[1], 0.5, max_relative = 1e-15);
    assert_eq!(grad_sigma(&s0, &s1, 2.0, 0.0).unwrap(), s0.grad);
    let same = grad_sigma(&s0, &s0, 1.7, 0.6).unwrap();
    assert_relative_eq!(same[0], 1.0, max_relative = 1e-15);
}

#[test]
fn hidden_convexity_is_tight_on_multiples() {
    let h = euclid(3.0, 2);
    let s0 = PointSample::new(0.8, vec![1.5, -2.0]);
    let gap = hidden_convexity_gap(&h, &s0, &s0.scaled(2.5), 3.0, 0.35).unwrap();
    assert!(gap.abs() < 1e-12, "{gap}");
    assert_eq!(
        hidden_convexity_gap(&h, &s0, &s0.scaled(2.5), 2.0, 1.0).unwrap(),
        0.0
    );
}

#[test]
fn picone_examples() {
    let h = euclid(2.0, 2);
    let su = PointSample::new(1.0, vec![1.0, 0.0]);
    let sv = PointSample::new(1.0, vec![0.0, 1.0]);
    let r = picone_gap(&h, &su, &sv, 2.0).unwrap();
    assert_relative_eq!(r.lhs, -1.0, max_relative = 1e-15);
    assert_relative_eq!(r.rhs, 1.0, max_relative = 1e-15);
    assert_relative_eq!(r.gap, 2.0, max_relative = 1e-15);

    let same = picone_gap(&h, &su, &su, 2.0).unwrap();
    assert_relative_eq!(same.lhs, h.value(&su.grad), max_relative = 1e-15);
    assert!(same.gap.abs() < 1e-15);

    let zero = PointSample::new(0.0, vec![0.0, 0.0]);
    let z = picone_gap(&h, &su, &zero, 1.5).unwrap();
    assert!(z.lhs <= 0.0 && z.rhs == 0.0 && z.gap >= 0.0);
    assert!(matches!(
        picone_gap(&h, &zero, &su, 2.0),
        Err(Error::Degenerate(_))
    ));
    assert!(picone_gap(&h, &su, &sv, 2.5).is_err());
}

#[test]
fn discrete_examples() {
    let d = DiscretePair {
        ux: 2.0,
        uy: 2.0,
        vx: 3.0,
        vy: 1.0,
    };
    assert_eq!(discrete_picone_gap(&d, 3.0, 2.0).unwrap(), 0.0);
    let d = DiscretePair {
        ux: 2.0,
        uy: 0.5,
        vx: 2.0,
        vy: 0.5,
    };
    assert!(discrete_picone_gap(&d, 2.5, 1.5).unwrap().abs() < 1e-14);
    let d = DiscretePair {
        ux: 2.0,
        uy: 0.5,
        vx: 0.0,
        vy: 1.0,
    };
    assert!(discrete_picone_gap(&d, 2.0, 2.0).unwrap() >= 0.0);
    assert_eq!(
        discrete_hidden_gap(1.0, 2.0, 1.0, 2.0, 2.0, 2.0, 0.4).unwrap(),
        0.0
    );
    assert_eq!(
        discrete_hidden_gap(1.0, 2.0, 3.0, 0.5, 2.0, 2.0, 0.0).unwrap(),
        0.0
    );
    assert_relative_eq!(
        elementary_gap(0.7, 1.0, 2.0).unwrap(),
        0.09,
        max_relative = 1e-14
    );
    assert_eq!(elementary_gap(1.0, 0.0, 3.0).unwrap(), 0.0);
}

#[test]
fn derivative_vanishes_on_the_diagonal() {
    let h = euclid(2.5, 2);
    let su = PointSample::new(1.3, vec![0.4, -2.2]);
    assert!(derivative_at_zero(&h, &su, &su, 1.7).unwrap().abs() < 1e-13);
}

#[test]
fn fisher_information_forms() {
    let h = euclid(2.0, 1);
    let weights = vec![0.25; 4];
    let rho = DiscreteDensity::new(vec![1.0; 4], weights.clone()).unwrap();
    let flat = fisher_information(&h, 1.0, &rho, &vec![vec![0.0]; 4]).unwrap();
    assert_eq!((flat.log_form, flat.root_form), (0.0, 0.0));

    let rho = DiscreteDensity::normalized(vec![0.5, 1.0, 2.0, 0.5], weights).unwrap();
    let grads = vec![vec![0.3], vec![-1.0], vec![2.0], vec![0.1]];
    let j = fisher_information(&h, 0.6, &rho, &grads).unwrap();
    assert_relative_eq!(j.log_form, j.root_form, max_relative = 1e-12);
    // p = 2, β = 0.6: Σ (ρ'/ρ)² ρ^{1.4} ν
    let direct: f64 = rho
        .values()
        .iter()
        .zip(&grads)
        .map(|(r, g)| g[0] * g[0] / (r * r) * r.powf(1.4) * 0.25)
        .sum();
    assert_relative_eq!(j.log_form, direct, max_relative = 1e-14);
}

#[test]
fn counterexample_examples() {
    let h = euclid(2.0, 2);
    let v = counterexample(
        CounterexampleKind::BetaAbove,
        &h,
        &CounterexampleParams::new(1.5, 2.0, 2),
    )
    .unwrap();
    assert_relative_eq!(
        v,
        1.5f64.sqrt() - (0.5 + 0.5 * 2f64.sqrt()),
        max_relative = 1e-14
    );
    let v = counterexample(
        CounterexampleKind::QAbove,
        &h,
        &CounterexampleParams::new(3.0, 2.0, 2),
    )
    .unwrap();
    assert_relative_eq!(v, 4.5f64.powf(2.0 / 3.0) - 2.5, max_relative = 1e-14);
    let err = counterexample(
        CounterexampleKind::BetaAbove,
        &h,
        &CounterexampleParams::new(1.0, 2.0, 2),
    );
    assert!(matches!(err, Err(Error::NoViolation(_))));
}
