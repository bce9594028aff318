use proptest::prelude::*;
use ratdegen::harmonics;
use ratdegen::measures::{
    depth_measure, is_nonexceptional, pull_back, push_forward, push_forward_function, weakstar_distance,
    AtomicMeasure,
};
use ratdegen::{MoebiusMap, ProjectiveRatMap, SpherePoint, Tolerances, C64};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn pt(re: f64, im: f64) -> SpherePoint {
    SpherePoint::from_re_im(re, im)
}

#[test]
fn harmonics_are_bounded_and_complete() {
    // Addition theorem: Σ_m Y_{l,m}² = 1 at any point.
    for v in [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.36, 0.48, 0.8], [1.0, 0.0, 0.0]] {
        let y = harmonics::eval_all(v, 8);
        for l in 0..=8usize {
            let s: f64 = (-(l as i64)..=(l as i64)).map(|m| y[harmonics::index(l, m)].powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12, "l = {l}: {s}");
        }
    }
}

#[test]
fn harmonics_orthogonal_on_fine_grid() {
    // Gauss-free check: Fibonacci-sphere quadrature of Y_{1,0} Y_{2,0} ≈ 0.
    let n = 20000;
    let mut acc = 0.0;
    for k in 0..n {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let a = k as f64 * 2.399963229728653;
        let y = harmonics::eval_all([r * a.cos(), r * a.sin(), z], 2);
        acc += y[harmonics::index(1, 0)] * y[harmonics::index(2, 0)];
    }
    assert!((acc / n as f64).abs() < 1e-3);
}

#[test]
fn push_forward_examples() {
    let t = tol();
    let a = MoebiusMap::from_real(2.0, 0.0, 0.0, 1.0);
    let m = push_forward(&a, &AtomicMeasure::dirac(SpherePoint::one()), &t).unwrap();
    assert!(m.atoms()[0].0.chordal(&pt(2.0, 0.0)) < 1e-14);
    // Rotation z ↦ iz permutes 8 equally spaced atoms on |z| = 1.
    let c = AtomicMeasure::circle(8, 1.0, t.tau_pt);
    let r = MoebiusMap::new(C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let rc = push_forward(&r, &c, &t).unwrap();
    assert!(weakstar_distance(&c, &rc, 8) < 1e-12);
    // Degenerate [[1,0],[0,0]]: reduction ∞, hole 0.
    let d = MoebiusMap::from_real(1.0, 0.0, 0.0, 0.0);
    let m = push_forward(&d, &AtomicMeasure::dirac(SpherePoint::one()), &t).unwrap();
    assert!(m.atoms()[0].0.is_infinity());
    assert!(push_forward(&d, &AtomicMeasure::dirac(SpherePoint::zero()), &t).is_err());
}

#[test]
fn depth_measure_examples() {
    let t = tol();
    let g = ProjectiveRatMap::from_ints(&[0, 0, 0, 0, 1], &[0, 0, 0, 1, 0]).unwrap();
    let eta = depth_measure(&g, &t).unwrap();
    assert_eq!(eta.atoms().len(), 1);
    assert_eq!(eta.mass(), 3.0);
    assert!(eta.atoms()[0].0.chordal(&SpherePoint::zero()) < 1e-12);
    // φ₂ = [2z²w² : w⁴] of the z² + 1/t family.
    let phi2 = ProjectiveRatMap::from_ints(&[0, 0, 2, 0, 0], &[1, 0, 0, 0, 0]).unwrap();
    let eta = depth_measure(&phi2, &t).unwrap();
    assert_eq!(eta.mass(), 2.0);
    assert!(eta.atoms()[0].0.is_infinity());
    let z2 = ProjectiveRatMap::from_ints(&[0, 0, 1], &[1, 0, 0]).unwrap();
    assert!(depth_measure(&z2, &t).is_err());
}

#[test]
fn pull_back_examples() {
    let t = tol();
    let z2 = ProjectiveRatMap::from_real(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
    let m = pull_back(&z2, &AtomicMeasure::dirac(SpherePoint::one()), &t).unwrap();
    assert_eq!(m.mass(), 2.0);
    assert!((m.mass_near(&pt(-1.0, 0.0), 1e-9) - 1.0).abs() < 1e-12);
    let g = ProjectiveRatMap::from_ints(&[0, 0, 1], &[0, 1, 0]).unwrap();
    let m = pull_back(&g, &AtomicMeasure::dirac(SpherePoint::one()), &t).unwrap();
    assert!((m.mass_near(&SpherePoint::one(), 1e-9) - 1.0).abs() < 1e-12);
    assert!((m.mass_near(&SpherePoint::zero(), 1e-9) - 1.0).abs() < 1e-12);
    let c = ProjectiveRatMap::from_ints(&[0, 0, 0], &[0, 1, 1]).unwrap();
    assert!(matches!(
        pull_back(&c, &AtomicMeasure::dirac(SpherePoint::zero()), &t),
        Err(ratdegen::Error::ExceptionalMass)
    ));
}

#[test]
fn weakstar_examples() {
    let d0 = AtomicMeasure::dirac(SpherePoint::zero());
    let dinf = AtomicMeasure::dirac(SpherePoint::infinity());
    assert_eq!(weakstar_distance(&d0, &d0, 8), 0.0);
    // Odd zonal harmonics are ±1 at the poles.
    assert!((weakstar_distance(&d0, &dinf, 8) - 2.0).abs() < 1e-12);
    let mut prev = 0.0;
    for e in [1e-4, 1e-3, 1e-2, 1e-1] {
        let v = weakstar_distance(&d0, &AtomicMeasure::dirac(pt(e, 0.0)), 8);
        assert!(v > prev);
        // Chord 2e/√(1+e²); harmonics of degree ≤ 8 are 8·9/2-Lipschitz at most.
        assert!(v <= 36.0 * 2.0 * e);
        prev = v;
    }
}

#[test]
fn nonexceptional_examples() {
    let t = tol();
    let z2 = ProjectiveRatMap::from_real(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
    let z4 = z2.iterate(2, &t).unwrap();
    assert!(is_nonexceptional(&AtomicMeasure::dirac(SpherePoint::one()), &[z2.clone(), z4], &t).unwrap());
    assert!(!is_nonexceptional(&AtomicMeasure::dirac(SpherePoint::zero()), &[z2], &t).unwrap());
    let g = ProjectiveRatMap::from_ints(&[0, 3, 3], &[0, 1, 1]).unwrap();
    let c = g.reduce(&t).unwrap().constant_value().unwrap();
    assert!(!is_nonexceptional(&AtomicMeasure::dirac(c), &[g], &t).unwrap());
}

fn random_measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0.1f64..1.0), 1..6).prop_map(|v| {
        AtomicMeasure::new(v.into_iter().map(|(a, b, w)| (SpherePoint::from_re_im(a, b), w)).collect(), 1e-9)
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pull_back_mass_identity(
        a in prop::collection::vec(-2.0f64..2.0, 4),
        b in prop::collection::vec(-2.0f64..2.0, 4),
        mu in random_measure(),
    ) {
        let t = tol();
        let f = ProjectiveRatMap::from_real(&a, &b).unwrap();
        let pb = pull_back(&f, &mu, &t);
        prop_assume!(pb.is_ok());
        prop_assert!((pb.unwrap().mass() - 3.0 * mu.mass()).abs() < 1e-9);
    }

    #[test]
    fn pull_back_mass_identity_exact(
        a in prop::collection::vec(-3i64..=3, 3),
        b in prop::collection::vec(-3i64..=3, 3),
        mu in random_measure(),
    ) {
        let t = tol();
        let f = ProjectiveRatMap::from_ints(&a, &b);
        prop_assume!(f.is_ok());
        let pb = pull_back(&f.unwrap(), &mu, &t);
        prop_assume!(pb.is_ok());
        prop_assert!((pb.unwrap().mass() - 2.0 * mu.mass()).abs() < 1e-9);
    }

    #[test]
    fn duality_with_function_push_forward(
        a in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-2.0f64..2.0, 3),
        mu in random_measure(),
        k in 0usize..81,
    ) {
        let t = tol();
        let f = ProjectiveRatMap::from_real(&a, &b).unwrap();
        prop_assume!(!f.is_degenerate(&t).unwrap_or(true));
        let red = f.reduce(&t).unwrap();
        let phi = |p: &SpherePoint| harmonics::eval_all(p.stereographic(), 8)[k];
        let lhs = pull_back(&f, &mu, &t).unwrap().integrate(phi);
        let rhs: f64 = mu.atoms().iter().map(|(p, w)| w * push_forward_function(&red, phi, p).unwrap()).sum();
        prop_assert!((lhs - rhs).abs() < 1e-8);
    }

    #[test]
    fn moebius_push_then_pull(mu in random_measure(), s in 0.5f64..3.0, u in -2.0f64..2.0) {
        let t = tol();
        let a = MoebiusMap::from_real(s, u, 0.0, 1.0);
        let f = ProjectiveRatMap::from_real(&[u, s], &[1.0, 0.0]).unwrap();
        let back = pull_back(&f, &push_forward(&a, &mu, &t).unwrap(), &t).unwrap();
        prop_assert_eq!(back.len(), mu.len());
        for (p, w) in mu.atoms() {
            prop_assert!((back.mass_near(p, 1e-9) - w).abs() < 1e-15);
        }
    }
}
