use proptest::prelude::*;
use ratdegen::par::Exec;
use ratdegen::polylike::*;
use ratdegen::rescaling::{FamilySpec, Schedule, TPoly};
use ratdegen::{Error, ProjectiveRatMap, SpherePoint, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn p(c: &[i64]) -> TPoly {
    TPoly::from_ints(c)
}

fn id() -> [[TPoly; 2]; 2] {
    [[p(&[1]), p(&[0])], [p(&[0]), p(&[1])]]
}

/// z²/ε on ε = 10⁻¹, 10⁻², 10⁻³.
fn z2_over_eps(count: usize) -> FamilySpec {
    FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0]), p(&[0]), p(&[1]), p(&[0, 1]), p(&[0]), p(&[0])],
        Schedule::from_fracs((1, 10), (1, 10), count).unwrap(),
    )
    .unwrap()
}

fn z2_input() -> PolyLikeInput {
    // B₀ = id, B₁ = εz.
    let b1 = [[p(&[0, 1]), p(&[0])], [p(&[0]), p(&[1])]];
    PolyLikeInput::from_family(&z2_over_eps(3), 1, &id(), &b1, &tol()).unwrap()
}

#[test]
fn hypotheses_for_z2_over_eps() {
    let h = check_julia_hypotheses(&z2_input(), &tol()).unwrap();
    assert!(h.a.is_infinity());
    assert_eq!(h.b, SpherePoint::zero());
    assert_eq!(h.deg_a, 2);
    assert!(h.phi_a.is_infinity());
    assert!(h.pass, "{}", h.diagnostic);
}

#[test]
fn hypotheses_fail_for_demarco_faber() {
    // t(z + 1/z), B₀ = id, B₁ = z/t.
    let fam = FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0, 1]), p(&[0]), p(&[0, 1]), p(&[0]), p(&[1]), p(&[0])],
        Schedule::from_fracs((10, 1), (2, 1), 8).unwrap(),
    )
    .unwrap();
    let b1 = [[p(&[1]), p(&[0])], [p(&[0]), p(&[0, 1])]];
    let input = PolyLikeInput::from_family(&fam, 1, &id(), &b1, &tol()).unwrap();
    let h = check_julia_hypotheses(&input, &tol()).unwrap();
    assert!(h.a.is_infinity());
    assert_eq!(h.deg_a, 1);
    assert!(!h.pass);
    assert!(matches!(
        extract_polynomial_like(&input, &h, 7, SEED_RADIUS, &tol()),
        Err(Error::HypothesisUnmet(_))
    ));
}

#[test]
fn hypotheses_fail_when_phi_a_is_b() {
    // z² + 1/t with B₁ = z − 1/t: φ = z², a = b = φ(a) = ∞.
    let mut den = vec![p(&[1]); 6];
    den[0] = p(&[0, 1]);
    let fam = FamilySpec::new(
        2,
        vec![p(&[1]), p(&[0]), p(&[1]), p(&[1]), p(&[0]), p(&[0])],
        den,
        Schedule::from_fracs((1, 10), (1, 2), 8).unwrap(),
    )
    .unwrap();
    let b1 = [[p(&[0, 1]), p(&[-1])], [p(&[0]), p(&[0, 1])]];
    let input = PolyLikeInput::from_family(&fam, 1, &id(), &b1, &tol()).unwrap();
    let h = check_julia_hypotheses(&input, &tol()).unwrap();
    assert!(h.a.is_infinity() && h.b.is_infinity() && h.phi_a.is_infinity());
    assert_eq!(h.deg_a, 2);
    assert!(!h.pass);
    assert!(h.diagnostic.contains("coincides"));
}

#[test]
fn certificate_for_z2_over_eps() {
    let t = tol();
    let input = z2_input();
    let h = check_julia_hypotheses(&input, &t).unwrap();
    let c = extract_polynomial_like(&input, &h, 2, SEED_RADIUS, &t).unwrap();
    assert_eq!(c.degree, 2);
    assert_eq!(c.winding, 2);
    assert!(c.separation >= t.tau_ann);
    assert!(c.modulus_lower_bound > 0.0);
    assert!(c.excluded.is_infinity());
    // Fixed points of h, h², h³: 0, ∞ and roots of unity scaled by ε.
    assert_eq!(c.witnesses.iter().filter(|w| w.period == 3).count(), 9);
    for w in &c.witnesses {
        assert_eq!(w.in_inner, !w.point.is_infinity(), "{w:?}");
    }
    assert!(c.sink.unwrap().is_infinity());
    // T = z² near ∞, so ∂U′ is the circle |z| = 1/√r.
    let r = SEED_RADIUS / (1.0 - SEED_RADIUS * SEED_RADIUS).sqrt();
    for q in &c.inner_boundary {
        let m = q.to_complex().unwrap().norm();
        assert!((m - 1.0 / r.sqrt()).abs() < 1e-9, "{m}");
    }
    // D_k is |z| > 1/(εr), nested inside.
    for q in &c.outer_boundary {
        let m = q.to_complex().unwrap().norm();
        assert!((m - 1.0 / (1e-3 * r)).abs() < 1e-6 * m, "{m}");
    }
}

#[test]
fn julia_set_of_z2_over_eps_is_localized() {
    let t = tol();
    let input = z2_input();
    let h = check_julia_hypotheses(&input, &t).unwrap();
    let loc = julia_localization_check(&input, &h, 2, 0.01, 2000, 5, Exec::Parallel, &t).unwrap();
    assert!(loc.pass, "{loc:?}");
    // Samples lie on the circle of radius ε.
    let mu = ratdegen::mme::mme_sample(&input.hs[2], 2000, 30, 5, Exec::Parallel, &t).unwrap();
    for (q, _) in mu.atoms() {
        let m = q.to_complex().unwrap().norm();
        assert!((m - 1e-3).abs() < 0.02e-3);
    }
}

#[test]
fn containment_fails_with_a_large_seed_at_small_k() {
    // At ε = 1/10 nesting needs r < 1/ε² = 100; chordal 0.99999 gives r ≈ 224.
    let t = tol();
    let input = z2_input();
    let h = check_julia_hypotheses(&input, &t).unwrap();
    let c = extract_polynomial_like(&input, &h, 0, 0.99999, &t).unwrap();
    assert!(c.seed_radius < 0.99999);
    let r = c.seed_radius / (1.0 - c.seed_radius * c.seed_radius).sqrt();
    assert!(r < 100.0);
}

#[test]
fn single_polynomial_disk_certificate() {
    let t = tol();
    let h = ProjectiveRatMap::from_ints(&[10, 0, 1], &[1, 0, 0]).unwrap();
    let c = polynomial_disk_certificate(&h, 8.0, &t).unwrap();
    assert_eq!(c.degree, 2);
    assert_eq!(c.winding, 2);
    // |z|² ≤ |z² + 10| + 10 < 18 on U′.
    assert!(c.inner_boundary.iter().all(|q| q.to_complex().unwrap().norm() < 18f64.sqrt() + 1e-9));
    assert!(c.witnesses.iter().all(|w| w.in_inner));
    let loc = julia_localization_polynomial(&h, &c, 1000, 3, Exec::Parallel, &t).unwrap();
    assert!(loc.pass, "{loc:?}");
    // Radius below the escape radius fails.
    assert!(polynomial_disk_certificate(&h, 3.0, &t).is_err());
}

#[test]
fn polylike_driver_on_synthetic_family() {
    let t = tol();
    let fam = FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0]), p(&[0]), p(&[1]), p(&[0, 1]), p(&[0]), p(&[0])],
        Schedule::from_fracs((1, 10), (1, 2), 8).unwrap(),
    )
    .unwrap();
    let rep = polylike_driver(&fam, 5, &t, Exec::Parallel).unwrap();
    assert!(!rep.experimental);
    assert_eq!(rep.pair, (1, 2));
    assert!(rep.hypotheses.pass);
    for c in &rep.certificates {
        let c = c.as_ref().unwrap();
        assert_eq!(c.degree, 2);
    }
    assert!(polylike_driver(&fam, 3, &t, Exec::Parallel).unwrap().experimental);
}

#[test]
fn polylike_driver_needs_enough_fully_ramified_times() {
    let mut den = vec![p(&[1]); 6];
    den[0] = p(&[0, 1]);
    let fam = FamilySpec::new(
        2,
        vec![p(&[1]), p(&[0]), p(&[1]), p(&[1]), p(&[0]), p(&[0])],
        den,
        Schedule::from_fracs((1, 10), (1, 2), 8).unwrap(),
    )
    .unwrap();
    assert!(matches!(
        polylike_driver(&fam, 5, &tol(), Exec::Parallel),
        Err(Error::HypothesisUnmet(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn certificates_are_conjugation_covariant(
        e in prop::collection::vec((-3i64..=3, -3i64..=3), 4),
    ) {
        let t = tol();
        let m = xmoebius_from_ints([[e[0], e[1]], [e[2], e[3]]]);
        let det = m.det();
        prop_assume!(!ratdegen::scalar::Scalar::is_zero(&det));
        let input = z2_input();
        let conj = conjugate_input(&input, &m).unwrap();
        let h = check_julia_hypotheses(&input, &t).unwrap();
        let hc = check_julia_hypotheses(&conj, &t).unwrap();
        prop_assert!(hc.pass);
        let c = extract_polynomial_like(&input, &h, 2, SEED_RADIUS, &t).unwrap();
        let cc = extract_polynomial_like(&conj, &hc, 2, SEED_RADIUS, &t).unwrap();
        let mf = m.to_float();
        prop_assert_eq!(c.inner_boundary.len(), cc.inner_boundary.len());
        for (x, y) in c.inner_boundary.iter().zip(&cc.inner_boundary) {
            prop_assert!(mf.apply_raw(x).unwrap().chordal(y) < 1e-6);
        }
        prop_assert!(mf.apply_raw(&c.excluded).unwrap().chordal(&cc.excluded) < 1e-9);
        prop_assert_eq!(c.winding, cc.winding);
    }
}
