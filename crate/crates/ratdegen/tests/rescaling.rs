use proptest::prelude::*;
use ratdegen::measures::{weakstar_distance, AtomicMeasure};
use ratdegen::par::Exec;
use ratdegen::rescaling::*;
use ratdegen::sphere::{moebius_limit_classify, MoebiusClass};
use ratdegen::{Error, GaussRat, MoebiusMap, ProjectiveRatMap, SpherePoint, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn p(c: &[i64]) -> TPoly {
    TPoly::from_ints(c)
}

/// z² + 1/t, t → 0.
fn quad() -> FamilySpec {
    let mut den = vec![p(&[1]); 6];
    den[0] = p(&[0, 1]);
    FamilySpec::new(
        2,
        vec![p(&[1]), p(&[0]), p(&[1]), p(&[1]), p(&[0]), p(&[0])],
        den,
        Schedule::from_fracs((1, 10), (1, 2), 8).unwrap(),
    )
    .unwrap()
}

/// t(z + 1/z) = [t z² + t : z], t → ∞.
fn dmf() -> FamilySpec {
    FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0, 1]), p(&[0]), p(&[0, 1]), p(&[0]), p(&[1]), p(&[0])],
        Schedule::from_fracs((10, 1), (2, 1), 8).unwrap(),
    )
    .unwrap()
}

/// z²/ε = [z² : ε w²], ε → 0.
fn z2_over_eps() -> FamilySpec {
    FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0]), p(&[0]), p(&[1]), p(&[0, 1]), p(&[0]), p(&[0])],
        Schedule::from_fracs((1, 10), (1, 2), 8).unwrap(),
    )
    .unwrap()
}

fn constant_family(num: &[i64], den: &[i64]) -> FamilySpec {
    let f = ProjectiveRatMap::from_ints(num, den).unwrap();
    FamilySpec::constant(&f, Schedule::from_fracs((1, 10), (1, 2), 6).unwrap()).unwrap()
}

fn crit_points(f: &ProjectiveRatMap) -> Vec<SpherePoint> {
    f.critical_points(&tol()).unwrap().into_iter().map(|c| c.0).collect()
}

fn contains(pts: &[SpherePoint], q: &SpherePoint) -> bool {
    pts.iter().any(|x| x.chordal(q) < 1e-8)
}

#[test]
fn sampling_examples() {
    let f = sample_family_exact(&quad(), &GaussRat::from_ints(1, 0)).unwrap();
    assert_eq!(f, ProjectiveRatMap::from_ints(&[1, 0, 1], &[1, 0, 0]).unwrap());
    let g = sample_family_exact(&dmf(), &GaussRat::from_ints(2, 0)).unwrap();
    assert_eq!(g, ProjectiveRatMap::from_ints(&[2, 0, 2], &[0, 1, 0]).unwrap());
    // Coefficient 1/(t − 1) at t = 1.
    let mut den = vec![p(&[1]); 6];
    den[0] = p(&[-1, 1]);
    let bad = FamilySpec::new(
        2,
        vec![p(&[1]), p(&[0]), p(&[1]), p(&[1]), p(&[0]), p(&[0])],
        den,
        Schedule::from_fracs((1, 1), (1, 2), 3).unwrap(),
    )
    .unwrap();
    assert!(matches!(
        sample_family_exact(&bad, &GaussRat::from_ints(1, 0)),
        Err(Error::SpecializationDegenerate)
    ));
    // Resultant zero at t = 0 for z² + t: [z² + t w² : w²] is fine, but
    // [t z² : w²] degenerates.
    let deg = FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0]), p(&[0]), p(&[0, 1]), p(&[1]), p(&[0]), p(&[0])],
        Schedule::from_fracs((1, 1), (1, 2), 3).unwrap(),
    )
    .unwrap();
    assert!(matches!(
        sample_family_exact(&deg, &GaussRat::from_ints(0, 0)),
        Err(Error::SpecializationDegenerate)
    ));
    let fl = sample_family(&quad(), ratdegen::C64::new(1.0, 0.0), &tol()).unwrap();
    assert!(fl.coefficient_distance(&f.to_float()) < 1e-15);
}

#[test]
fn quadratic_family_scheme() {
    let t = tol();
    let s = left_class_limits(&quad(), 4, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    // φ₁ = z² up to a Möbius post-factor: critical points 0, ∞ and no holes.
    let phi1 = s.phi(1).unwrap();
    assert!(!phi1.is_degenerate(&t).unwrap());
    let c = crit_points(phi1);
    assert!(contains(&c, &SpherePoint::zero()) && contains(&c, &SpherePoint::infinity()));
    // φ₂: reduction of degree 2, hole ∞ of depth 2.
    let r2 = s.phi(2).unwrap().reduce(&t).unwrap();
    assert_eq!(r2.reduction_degree(), 2);
    assert_eq!(r2.holes.len(), 1);
    assert!(r2.holes[0].point.is_infinity() && r2.holes[0].depth == 2);
    // φ_{1,2}: reduction of degree 1, hole ∞ of depth 1.
    let r12 = s.transition(1).reduce(&t).unwrap();
    assert_eq!(r12.reduction_degree(), 1);
    assert!(r12.holes[0].point.is_infinity() && r12.holes[0].depth == 1);
    for r in s.direct_residuals.iter().flatten() {
        assert!(*r < t.tau_proj, "{r}");
    }
    assert!(s.direct_residuals.iter().all(|r| r.is_some()));
}

#[test]
fn demarco_faber_scheme() {
    let t = tol();
    let s = left_class_limits(&dmf(), 3, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    // φ₁ = z + 1/z up to a Möbius post-factor: critical points ±1.
    let c = crit_points(s.phi(1).unwrap());
    assert!(contains(&c, &SpherePoint::one()) && contains(&c, &SpherePoint::from_re_im(-1.0, 0.0)));
    let r2 = s.phi(2).unwrap().reduce(&t).unwrap();
    let holes: Vec<SpherePoint> = r2.holes.iter().map(|h| h.point).collect();
    assert_eq!(r2.holes.len(), 2);
    assert!(r2.holes.iter().all(|h| h.depth == 1));
    assert!(contains(&holes, &SpherePoint::from_re_im(0.0, 1.0)));
    assert!(contains(&holes, &SpherePoint::from_re_im(0.0, -1.0)));
}

#[test]
fn constant_family_scheme() {
    let t = tol();
    let fam = constant_family(&[1, 0, 1], &[0, 1, 1]);
    let f = sample_family_exact(&fam, &GaussRat::from_ints(1, 0)).unwrap();
    let s = left_class_limits(&fam, 3, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    for n in 1..=3 {
        let fnn = f.iterate(n, &t).unwrap();
        let phi = s.phi(n).unwrap();
        // Same critical points as f^n.
        let a = crit_points(&fnn.to_float());
        for q in crit_points(phi) {
            assert!(contains(&a, &q));
        }
        assert!(!phi.is_degenerate(&t).unwrap());
    }
    // Post-scalings converge to a nondegenerate Möbius map.
    let seq: Vec<MoebiusMap> = s.scalings[1].iter().map(|m| m.to_float()).collect();
    let lim = moebius_limit_classify(&seq, &t).unwrap();
    assert!(matches!(lim.class, MoebiusClass::Nondegenerate(_)));
    assert!(fully_ramified_times(&s, &t).unwrap().iter().all(|f| f.1));
}

#[test]
fn fully_ramified_flags() {
    let t = tol();
    for (fam, expect) in [
        (quad(), vec![true, false, false, false]),
        (dmf(), vec![true, false, false, false]),
        (z2_over_eps(), vec![true, true, true, true]),
    ] {
        let s = left_class_limits(&fam, 4, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
        let flags: Vec<bool> = fully_ramified_times(&s, &t).unwrap().into_iter().map(|f| f.1).collect();
        assert_eq!(flags, expect);
    }
}

#[test]
fn explicit_scalings_match_hand_computation() {
    let t = tol();
    // A₁ = z − 1/t = [[t, −1], [0, t]], A₂ = t(z − 1/t² − 1/t) = [[t², −1 − t], [0, t]].
    let a1 = [[p(&[0, 1]), p(&[-1])], [p(&[0]), p(&[0, 1])]];
    let a2 = [[p(&[0, 0, 1]), p(&[-1, -1])], [p(&[0]), p(&[0, 1])]];
    let s = left_class_limits(&quad(), 2, &ScalingRule::Explicit(vec![a1, a2]), &t, Exec::Sequential).unwrap();
    assert_eq!(s.phi(1).unwrap(), &ProjectiveRatMap::from_ints(&[0, 0, 1], &[1, 0, 0]).unwrap());
    // φ_{1,2} = [2zw : w²] and φ₂ = [2z²w² : w⁴].
    assert_eq!(s.transition(1), &ProjectiveRatMap::from_ints(&[0, 2, 0], &[1, 0, 0]).unwrap());
    assert_eq!(
        s.phi(2).unwrap(),
        &ProjectiveRatMap::from_ints(&[0, 0, 2, 0, 0], &[1, 0, 0, 0, 0]).unwrap()
    );
}

#[test]
fn depth_profiles() {
    let t = tol();
    let s = left_class_limits(&quad(), 5, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    let dp = depth_profile_limit(&s, &t).unwrap();
    assert_eq!(dp.atoms.len(), 1);
    let (pt, ratios, lim, _) = &dp.atoms[0];
    assert!(pt.is_infinity());
    assert_eq!(ratios, &vec![0.0, 0.5, 0.75, 0.875, 0.9375]);
    assert!((lim - 1.0).abs() < 1e-12);

    let s = left_class_limits(&dmf(), 5, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    let dp = depth_profile_limit(&s, &t).unwrap();
    let target = AtomicMeasure::new(
        vec![(SpherePoint::from_re_im(0.0, 1.0), 0.5), (SpherePoint::from_re_im(0.0, -1.0), 0.5)],
        1e-9,
    )
    .unwrap();
    assert!(weakstar_distance(&dp.eta, &target, 8) < 1e-9);

    let s = left_class_limits(&z2_over_eps(), 4, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    assert!(depth_profile_limit(&s, &t).unwrap().eta.is_empty());
}

#[test]
fn exact_and_recursive_profiles_agree() {
    let t = tol();
    let s = left_class_limits(&dmf(), 5, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    let (rec, _) = hole_profile(&s, &t).unwrap();
    let comp = hole_profile_composed(&s, &t).unwrap();
    for (a, b) in rec.iter().zip(&comp) {
        let b = b.as_ref().unwrap();
        assert_eq!(a.len(), b.holes.len());
        for (pt, depth) in a {
            assert_eq!(b.depth_at(pt, 1e-8), *depth);
        }
    }
}

#[test]
fn iterate_limit_examples() {
    let t = tol();
    let gs = iterate_limits(&quad(), 3, &t, Exec::Parallel).unwrap();
    for g in &gs {
        assert_eq!(g.reduced.reduction_degree(), 0);
        assert!(g.reduced.constant_value().unwrap().is_infinity());
        assert_eq!(g.reduced.holes.len(), 1);
        assert!(g.reduced.holes[0].point.is_infinity());
        assert_eq!(g.reduced.holes[0].depth, 1 << g.n);
    }
    let g1 = &iterate_limits(&dmf(), 1, &t, Exec::Parallel).unwrap()[0];
    assert_eq!(g1.limit.best(), &ProjectiveRatMap::from_ints(&[1, 0, 1], &[0, 0, 0]).unwrap());
    assert_eq!(g1.reduced.holes.len(), 2);
    let fam = constant_family(&[1, 0, 1], &[0, 1, 1]);
    let f = sample_family_exact(&fam, &GaussRat::from_ints(1, 0)).unwrap();
    let gs = iterate_limits(&fam, 2, &t, Exec::Parallel).unwrap();
    assert_eq!(gs[1].limit.best(), &f.iterate(2, &t).unwrap());
}

#[test]
fn hole_set_of_first_iterate_limit() {
    // Hole(g₁) = Hole(φ₁) ∪ φ̃₁⁻¹(a) with a the reduction point of lim A_{1,k},
    // and depth deg_h φ̃₁ off Hole(φ₁).
    let t = tol();
    for fam in [quad(), dmf()] {
        let s = left_class_limits(&fam, 1, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
        let seq: Vec<MoebiusMap> = s.scalings[1].iter().map(|m| m.to_float()).collect();
        let (lim, _) = ratdegen::limits::moebius_limit(&s.eps, &seq, &t).unwrap();
        let a = match lim.classify(&t) {
            MoebiusClass::Degenerate { reduction, .. } => reduction,
            MoebiusClass::Nondegenerate(_) => panic!("scalings must degenerate"),
        };
        let phi1 = s.phi(1).unwrap().reduce(&t).unwrap();
        let g1 = &iterate_limits(&fam, 1, &t, Exec::Parallel).unwrap()[0].reduced;
        let pre = phi1.reduction.preimages(&a, &t).unwrap();
        let expected: usize = phi1.total_depth() + pre.iter().map(|x| x.1).sum::<usize>();
        assert_eq!(g1.total_depth(), expected);
        for (x, m) in pre {
            assert_eq!(g1.depth_at(&x, 1e-6), m);
        }
    }
}

#[test]
fn pullback_limit_cases() {
    let t = tol();
    let mu = AtomicMeasure::dirac(SpherePoint::from_re_im(0.3, 0.2));
    let opts = PullbackLimitOptions::default();
    let rep = pullback_limit(&quad(), &mu, 8, &opts, &t).unwrap();
    assert_eq!(rep.case, GrowthCase::SmallGrowth);
    assert!(weakstar_distance(&rep.measure, &AtomicMeasure::dirac(SpherePoint::infinity()), 8) < 0.05);
    assert!(rep.predicted_distance.unwrap() < 0.05);

    let rep = pullback_limit(&dmf(), &mu, 8, &opts, &t).unwrap();
    assert_eq!(rep.case, GrowthCase::SmallGrowth);
    assert!(rep.predicted_distance.unwrap() < 0.05);

    let rep = pullback_limit(&z2_over_eps(), &mu, 5, &opts, &t).unwrap();
    assert_eq!(rep.case, GrowthCase::PotentialGoodReduction);
    assert!(weakstar_distance(&rep.measure, &AtomicMeasure::dirac(SpherePoint::zero()), 8) < 0.05);

    // δ_∞ is the constant value of every g_n for z² + 1/t.
    let bad = AtomicMeasure::dirac(SpherePoint::infinity());
    assert!(matches!(pullback_limit(&quad(), &bad, 4, &opts, &t), Err(Error::HypothesisUnmet(_))));
}

#[test]
fn growth_case_rule() {
    assert_eq!(growth_case(&[2, 2, 2, 2], 2).unwrap(), GrowthCase::SmallGrowth);
    assert_eq!(growth_case(&[2, 4, 8, 16], 2).unwrap(), GrowthCase::LargeGrowth);
    assert!(matches!(growth_case(&[2, 3, 5, 9], 2), Err(Error::CaseUndetermined)));
    assert!(matches!(growth_case(&[2, 2], 2), Err(Error::CaseUndetermined)));
}

#[test]
fn depth_ratio_stability_examples() {
    let t = tol();
    let s = left_class_limits(&quad(), 6, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    assert!(matches!(
        depth_ratio_stability(&quad(), &s, 0, &t, Exec::Parallel),
        Err(Error::HypothesisUnmet(_))
    ));
    let fam = z2_over_eps();
    let s = left_class_limits(&fam, 6, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    let table = depth_ratio_stability(&fam, &s, 0, &t, Exec::Parallel).unwrap();
    assert_eq!(table.len(), 5);
    for row in &table {
        assert_eq!(row.len(), 1);
        assert!(row[0].0.chordal(&SpherePoint::zero()) < 1e-12);
        assert_eq!(row[0].1, 1.0);
    }
    let fam = constant_family(&[1, 0, 1], &[0, 1, 1]);
    let s = left_class_limits(&fam, 5, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    let table = depth_ratio_stability(&fam, &s, 0, &t, Exec::Parallel).unwrap();
    assert!(table.iter().all(|row| row.is_empty()));
}

#[test]
fn post_scaling_of_quadratic_sequence() {
    let t = tol();
    let fam = quad();
    let ts = fam.schedule.values();
    let eps = fam.schedule.eps();
    let exact: Vec<ProjectiveRatMap> = ts.iter().map(|x| sample_family_exact(&fam, x).unwrap()).collect();
    let float: Vec<ProjectiveRatMap> = exact.iter().map(|f| exact_to_float(f).unwrap()).collect();
    for fs in [&exact, &float] {
        let (a, lim) = post_scaling_find(fs, &eps, &t).unwrap();
        let red = lim.best().reduce(&t).unwrap();
        assert_eq!(red.reduction_degree(), 2);
        let c = crit_points(&red.reduction.to_float());
        assert!(contains(&c, &SpherePoint::zero()) && contains(&c, &SpherePoint::infinity()));
        // Analytic scaling z − 1/t differs by a convergent Möbius sequence.
        let b: Vec<MoebiusMap> = ts
            .iter()
            .zip(&a)
            .map(|(x, ak)| {
                let tv = ratdegen::scalar::Scalar::to_c64(x).re;
                MoebiusMap::from_real(1.0, -1.0 / tv, 0.0, 1.0).compose(&ak.inverse()).normalized()
            })
            .collect();
        let (blim, _) = ratdegen::limits::moebius_limit(&eps, &b, &t).unwrap();
        assert!(matches!(blim.classify(&t), MoebiusClass::Nondegenerate(_)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decomposition_identity_on_constant_families(
        a in prop::collection::vec(-3i64..=3, 3),
        b in prop::collection::vec(-3i64..=3, 3),
    ) {
        let t = tol();
        let f = ProjectiveRatMap::from_ints(&a, &b);
        prop_assume!(f.is_ok());
        let f = f.unwrap();
        prop_assume!(!f.is_degenerate(&t).unwrap());
        let fam = FamilySpec::constant(&f, Schedule::from_fracs((1, 10), (1, 2), 6).unwrap()).unwrap();
        let s = left_class_limits(&fam, 3, &ScalingRule::TriPoint, &t, Exec::Sequential).unwrap();
        for r in &s.direct_residuals {
            prop_assert!(r.unwrap() < t.tau_proj);
        }
    }
}

/// `z² + s` iterated in ℤ[s][z] with `s = 1/t`; entry `[j][e]` is the
/// coefficient of `z^j s^e`.
fn symbolic_iterate(n: usize) -> Vec<Vec<u128>> {
    let mut f: Vec<Vec<u128>> = vec![vec![0], vec![1]];
    for _ in 0..n {
        let zd = 2 * (f.len() - 1);
        let sd = 2 * f.iter().map(|c| c.len()).max().unwrap();
        let mut g = vec![vec![0u128; sd + 1]; zd + 1];
        for (i, a) in f.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                for (e, x) in a.iter().enumerate() {
                    for (e2, y) in b.iter().enumerate() {
                        g[i + j][e + e2] = g[i + j][e + e2].checked_add(x.checked_mul(*y).unwrap()).unwrap();
                    }
                }
            }
        }
        g[0][1] += 1;
        f = g;
    }
    f
}

/// Depth at ∞ of the left class limit: subtract the constant term, keep the
/// top `s`-degree part, and read off `d^n` minus its `z`-degree.
fn symbolic_depth_at_infinity(n: usize) -> usize {
    let mut f = symbolic_iterate(n);
    f[0].iter_mut().for_each(|c| *c = 0);
    let top = f
        .iter()
        .flat_map(|c| c.iter().enumerate().filter(|(_, x)| **x != 0).map(|(e, _)| e))
        .max()
        .unwrap();
    let zdeg = f.iter().rposition(|c| c.get(top).is_some_and(|x| *x != 0)).unwrap();
    (1 << n) - zdeg
}

#[test]
fn quadratic_depths_match_symbolic_iterates() {
    let t = tol();
    let s = left_class_limits(&quad(), 6, &ScalingRule::TriPoint, &t, Exec::Parallel).unwrap();
    let (rec, _) = hole_profile(&s, &t).unwrap();
    for n in 1..=6 {
        let oracle = symbolic_depth_at_infinity(n);
        assert_eq!(oracle, (1 << n) - 2);
        let red = s.phi(n).unwrap().reduce(&t).unwrap();
        assert_eq!(red.depth_at(&SpherePoint::infinity(), 1e-8), oracle, "level {n}");
        let r: usize = rec[n - 1].iter().filter(|(p, _)| p.is_infinity()).map(|x| x.1).sum();
        assert_eq!(r, oracle, "level {n}");
    }
}
