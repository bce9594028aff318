use proptest::prelude::*;
use ratdegen::forms;
use ratdegen::ratmap::{count_preimages_near, predict_preimage_count};
use ratdegen::scalar::Scalar;
use ratdegen::{GaussRat, GitClass, MoebiusMap, ProjectiveRatMap, SpherePoint, Tolerances, C64};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Determinant by cofactor expansion (independent of the library's elimination).
fn det_cofactor(m: &[Vec<GaussRat>]) -> GaussRat {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = GaussRat::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<GaussRat>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = m[0][j].mul(&det_cofactor(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

#[test]
fn resultant_examples() {
    let z2 = ProjectiveRatMap::from_ints(&[0, 0, 1], &[1, 0, 0]).unwrap();
    assert!(!z2.resultant_exact().unwrap().is_zero());
    assert!((z2.resultant().unwrap().norm() - 1.0).abs() < 1e-12);
    let deg = ProjectiveRatMap::from_ints(&[0, 0, 1], &[0, 1, 0]).unwrap();
    assert!(deg.resultant_exact().unwrap().is_zero());
    // z² + 1: floating root-product formula vs exact Sylvester determinant.
    let f = ProjectiveRatMap::from_ints(&[1, 0, 1], &[1, 0, 0]).unwrap();
    let exact = f.resultant_exact().unwrap().to_c64();
    let fl = f.to_float().resultant().unwrap();
    assert!((exact.norm() - fl.norm()).abs() < 1e-10, "{exact} vs {fl}");
}

#[test]
fn resultant_float_matches_sylvester_sign() {
    let f = ProjectiveRatMap::from_real(&[1.0, -2.0, 0.5, 3.0], &[0.25, 1.0, -1.0, 2.0]).unwrap();
    let syl = f.sylvester_matrix();
    let exact_m: Vec<Vec<GaussRat>> = syl
        .iter()
        .map(|r| r.iter().map(|c| GaussRat::from_f64(c.re, c.im).unwrap()).collect())
        .collect();
    let oracle = det_cofactor(&exact_m).to_c64();
    let r = f.resultant().unwrap();
    assert!((r - oracle).norm() < 1e-9 * oracle.norm().max(1.0), "{r} vs {oracle}");
}

#[test]
fn reduce_examples_exact() {
    let f = ProjectiveRatMap::from_ints(&[0, 0, 1], &[0, 1, 0]).unwrap();
    let r = f.reduce(&tol()).unwrap();
    assert_eq!(r.reduction_degree(), 1);
    assert_eq!(r.holes.len(), 1);
    assert_eq!(r.holes[0].depth, 1);
    assert!(r.holes[0].point.chordal(&SpherePoint::zero()) < 1e-12);

    // [z(z−w)² : w²(z−w)], d = 3.
    let p = forms::mul(&[GaussRat::zero(), GaussRat::one()], &forms::mul(&int(&[-1, 1]), &int(&[-1, 1])));
    let q = forms::mul(&int(&[1, 0, 0]), &int(&[-1, 1]));
    let f = ProjectiveRatMap::exact(3, p, q).unwrap();
    let r = f.reduce(&tol()).unwrap();
    assert_eq!(r.reduction_degree(), 2);
    assert_eq!(r.holes.len(), 1);
    assert_eq!(r.holes[0].depth, 1);
    assert!(r.holes[0].point.chordal(&SpherePoint::one()) < 1e-12);
    let expect = ProjectiveRatMap::exact(2, forms::mul(&int(&[0, 1]), &int(&[-1, 1])), int(&[1, 0, 0])).unwrap();
    assert_eq!(r.reduction, expect);

    let f = ProjectiveRatMap::from_ints(&[1, 0, 1], &[1, 0, 0]).unwrap();
    let r = f.reduce(&tol()).unwrap();
    assert!(r.holes.is_empty());
    assert_eq!(r.reduction, f);
}

fn int(v: &[i64]) -> Vec<GaussRat> {
    v.iter().map(|x| GaussRat::from_ints(*x, 0)).collect()
}

#[test]
fn reduce_float_matches_exact() {
    let f = ProjectiveRatMap::from_real(&[0.0, -1.0, 2.0, -1.0], &[-1.0, 1.0, 0.0, 0.0]).unwrap();
    let ex = ProjectiveRatMap::from_ints(&[0, -1, 2, -1], &[-1, 1, 0, 0]).unwrap();
    let rf = f.reduce(&tol()).unwrap();
    let re = ex.reduce(&tol()).unwrap();
    assert_eq!(rf.total_depth(), re.total_depth());
    assert!(rf.residual < 1e-10);
    assert!(rf.reduction.coefficient_distance(&re.reduction.to_float()) < 1e-9);
}

#[test]
fn compose_examples() {
    let f = ProjectiveRatMap::from_ints(&[0, 0, 1], &[0, 1, 0]).unwrap();
    let ff = f.compose(&f).unwrap();
    assert_eq!(ff, ProjectiveRatMap::from_ints(&[0, 0, 0, 0, 1], &[0, 0, 0, 1, 0]).unwrap());
    let r = ff.reduce(&tol()).unwrap();
    assert_eq!(r.holes.len(), 1);
    assert_eq!(r.holes[0].depth, 3);

    let z2 = ProjectiveRatMap::from_ints(&[0, 0, 1], &[1, 0, 0]).unwrap();
    let z4 = z2.compose(&z2).unwrap();
    assert_eq!(z4, ProjectiveRatMap::from_ints(&[0, 0, 0, 0, 1], &[1, 0, 0, 0, 0]).unwrap());
    assert!(z4.reduce(&tol()).unwrap().holes.is_empty());

    // g with constant reduction 0 into a hole of f at 0.
    let g = ProjectiveRatMap::from_ints(&[0, 0, 0], &[0, 1, 1]).unwrap();
    assert!(matches!(f.compose(&g), Err(ratdegen::Error::Indeterminate)));
}

#[test]
fn iterate_examples() {
    let z2 = ProjectiveRatMap::from_ints(&[0, 0, 1], &[1, 0, 0]).unwrap();
    let z8 = z2.iterate(3, &tol()).unwrap();
    let mut num = vec![0; 9];
    num[8] = 1;
    let mut den = vec![0; 9];
    den[0] = 1;
    assert_eq!(z8, ProjectiveRatMap::from_ints(&num, &den).unwrap());
    let f = ProjectiveRatMap::from_ints(&[1, 0, 1], &[1, 0, 0]).unwrap();
    let f2 = f.iterate(2, &tol()).unwrap();
    assert_eq!(f2, ProjectiveRatMap::from_ints(&[2, 0, 2, 0, 1], &[1, 0, 0, 0, 0]).unwrap());
    let mut small = tol();
    small.exact_bits_cap = 4;
    let g = ProjectiveRatMap::from_ints(&[3, 0, 7], &[5, 0, 0]).unwrap();
    assert!(matches!(g.iterate(4, &small), Err(ratdegen::Error::CoefficientOverflow)));
}

#[test]
fn preimage_examples() {
    let z2 = ProjectiveRatMap::from_real(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
    let pre = z2.preimages(&SpherePoint::one(), &tol()).unwrap();
    assert_eq!(pre.len(), 2);
    assert!(pre.iter().any(|(p, m)| *m == 1 && p.chordal(&SpherePoint::from_re_im(-1.0, 0.0)) < 1e-12));
    let pre = z2.preimages(&SpherePoint::zero(), &tol()).unwrap();
    assert_eq!(pre, vec![(SpherePoint::zero(), 2)]);
    let f = ProjectiveRatMap::from_real(&[1.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
    let pre = f.preimages(&SpherePoint::from_re_im(5.0, 0.0), &tol()).unwrap();
    for x in [2.0, -2.0] {
        assert!(pre.iter().any(|(p, _)| p.chordal(&SpherePoint::from_re_im(x, 0.0)) < 1e-12));
    }
}

#[test]
fn critical_point_examples() {
    let t = tol();
    let z2 = ProjectiveRatMap::from_real(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
    let cp = z2.critical_points(&t).unwrap();
    assert_eq!(cp.iter().map(|x| x.1).sum::<usize>(), 2);
    let zz = ProjectiveRatMap::from_real(&[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]).unwrap();
    let cp = zz.critical_points(&t).unwrap();
    assert_eq!(cp.len(), 2);
    for x in [1.0, -1.0] {
        assert!(cp.iter().any(|(p, m)| *m == 1 && p.chordal(&SpherePoint::from_re_im(x, 0.0)) < 1e-10));
    }
    let z3 = ProjectiveRatMap::from_real(&[0.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let cp = z3.critical_points(&t).unwrap();
    assert_eq!(cp.len(), 2);
    assert!(cp.iter().all(|x| x.1 == 2));
    assert_eq!(z3.local_degree(&SpherePoint::zero(), &t).unwrap(), 3);
    assert_eq!(z3.local_degree(&SpherePoint::one(), &t).unwrap(), 1);
}

#[test]
fn exceptional_examples() {
    let t = tol();
    let z2 = ProjectiveRatMap::from_real(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
    let e = z2.exceptional_set(&t).unwrap();
    assert_eq!(e.len(), 2);
    let cheb = ProjectiveRatMap::from_real(&[-2.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
    let e = cheb.exceptional_set(&t).unwrap();
    assert_eq!(e, vec![SpherePoint::infinity()]);
    // Backward orbit of 0 under z²−2 grows: 0 ← ±√2 ← four points.
    let pre1 = cheb.preimages(&SpherePoint::zero(), &t).unwrap();
    let mut pre2 = Vec::new();
    for (p, _) in &pre1 {
        pre2.extend(cheb.preimages(p, &t).unwrap());
    }
    assert_eq!(pre2.len(), 4);
    let g = ProjectiveRatMap::from_real(&[0.0, 0.0, 0.0], &[0.0, 1.0, 1.0]).unwrap();
    let e = g.exceptional_set(&t).unwrap();
    assert_eq!(e.len(), 1);
    assert!(e[0].chordal(&SpherePoint::zero()) < 1e-12);
}

#[test]
fn git_examples() {
    let t = tol();
    let a = ProjectiveRatMap::from_ints(&[0, 0, 0, 0, 1], &[0, 0, 0, 1, 0]).unwrap();
    assert_eq!(a.git_classify(&t).unwrap(), GitClass::Unstable);
    let b = ProjectiveRatMap::from_ints(&[1, 0, 1], &[1, 0, 0]).unwrap();
    assert_eq!(b.git_classify(&t).unwrap(), GitClass::Stable);
    let c2 = ProjectiveRatMap::from_ints(&[0, 0, 1], &[0, 1, 0]).unwrap();
    assert_eq!(c2.git_classify(&t).unwrap(), GitClass::Unstable);
}

#[test]
fn preimage_counts_near_infinity() {
    let t = tol();
    // z² + 1/t_k with t_k → 0; limit g = [w² : 0].
    let ts: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
    let fk: Vec<ProjectiveRatMap> = ts
        .iter()
        .map(|t| ProjectiveRatMap::from_real(&[1.0 / t, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap())
        .collect();
    let g = ProjectiveRatMap::from_real(&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
    let z0 = SpherePoint::one();
    let w = SpherePoint::infinity();
    let pred = predict_preimage_count(&g, &z0, &w, &t).unwrap();
    assert_eq!(pred, Some(2));
    let res = count_preimages_near(&fk, &g, None, &z0, &w, 0.1, &t).unwrap();
    assert_eq!(*res.empirical.last().unwrap(), 2);
}

#[test]
fn preimage_bound_demarco_faber() {
    let t = tol();
    // t(z + 1/z) = [t z² + t : z]; φ = z + 1/z at A = z/t; w = i.
    let ts: Vec<f64> = (1..=5).map(|k| 10f64.powi(k)).collect();
    let fk: Vec<ProjectiveRatMap> = ts
        .iter()
        .map(|t| ProjectiveRatMap::from_real(&[*t, 0.0, *t], &[0.0, 1.0, 0.0]).unwrap())
        .collect();
    let g = ProjectiveRatMap::from_real(&[1.0, 0.0, 1.0], &[0.0, 0.0, 0.0]).unwrap();
    let phi = ProjectiveRatMap::from_real(&[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]).unwrap();
    let z0 = SpherePoint::from_re_im(0.5, 0.0);
    let a = SpherePoint::zero();
    let w = SpherePoint::from_re_im(0.0, 1.0);
    let res = count_preimages_near(&fk, &g, Some((&phi, &a)), &z0, &w, 0.05, &t).unwrap();
    let b = res.bound.unwrap();
    assert!(res.empirical.iter().skip(2).all(|c| *c <= b));
    assert_eq!(res.predicted, Some(1));
}

fn small_int() -> impl Strategy<Value = i64> {
    -3i64..=3
}

fn exact_map(d: usize) -> impl Strategy<Value = ProjectiveRatMap> {
    (
        prop::collection::vec(small_int(), d + 1),
        prop::collection::vec(small_int(), d + 1),
    )
        .prop_filter_map("nonzero", move |(p, q)| ProjectiveRatMap::from_ints(&p, &q).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn depth_sum_identity(f in (1usize..=4).prop_flat_map(exact_map)) {
        let r = f.reduce(&tol()).unwrap();
        prop_assert_eq!(r.total_depth() + r.reduction_degree(), f.degree());
    }

    #[test]
    fn resultant_zero_iff_hole(f in (1usize..=3).prop_flat_map(exact_map)) {
        let r = f.reduce(&tol()).unwrap();
        prop_assert_eq!(f.resultant_exact().unwrap().is_zero(), !r.holes.is_empty());
    }

    #[test]
    fn preimages_map_back(a in prop::collection::vec(-2.0f64..2.0, 3), b in prop::collection::vec(-2.0f64..2.0, 3), wr in -3.0f64..3.0, wi in -3.0f64..3.0) {
        let f = ProjectiveRatMap::from_real(&a, &b).unwrap();
        let t = tol();
        prop_assume!(!f.is_degenerate(&t).unwrap_or(true));
        let w = SpherePoint::from_re_im(wr, wi);
        let pre = f.preimages(&w, &t).unwrap();
        prop_assert_eq!(pre.iter().map(|x| x.1).sum::<usize>(), 2);
        for (p, _) in pre {
            let v = f.eval_raw(&p).unwrap();
            prop_assert!(v.chordal(&w) < 1e-7);
        }
    }

    #[test]
    fn conjugation_moves_holes(f in (2usize..=3).prop_flat_map(exact_map), s in 1i64..4, u in -3i64..4) {
        // A = s z + u (exact affine).
        let t = tol();
        let r = f.reduce(&t).unwrap();
        let m = [[GaussRat::from_ints(s, 0), GaussRat::from_ints(u, 0)], [GaussRat::zero(), GaussRat::one()]];
        let g = f.conjugate_exact(m).unwrap();
        let rg = g.reduce(&t).unwrap();
        let a = MoebiusMap::from_real(s as f64, u as f64, 0.0, 1.0);
        prop_assert_eq!(r.total_depth(), rg.total_depth());
        for h in &r.holes {
            let img = a.apply_raw(&h.point).unwrap();
            prop_assert_eq!(rg.depth_at(&img, 1e-6), h.depth);
        }
    }
}

#[test]
fn float_reduce_perturbed_reports_confidence() {
    let f = ProjectiveRatMap::float(
        2,
        vec![c(0.0), c(0.0), c(1.0)],
        vec![c(1e-9), c(1.0), c(0.0)],
    )
    .unwrap();
    let r = f.reduce(&tol());
    // Near-degenerate input is either reduced with a confidence field or flagged.
    match r {
        Ok(red) => assert!(red.confidence.is_some()),
        Err(e) => assert!(matches!(e, ratdegen::Error::RankAmbiguity { .. })),
    }
}

/// `H·[P̃ : Q̃]` with `H` a product of linear factors `z − r w` (or `w` for `r = None`).
fn degenerate_map(d: usize) -> impl Strategy<Value = ProjectiveRatMap> {
    (1..=d).prop_flat_map(move |k| {
        (
            prop::collection::vec(prop::option::weighted(0.8, -2i64..=2), k),
            prop::collection::vec(small_int(), d - k + 1),
            prop::collection::vec(small_int(), d - k + 1),
        )
            .prop_filter_map("nonzero", |(roots, p, q)| {
                let g = |v: &[i64]| v.iter().map(|x| GaussRat::from_ints(*x, 0)).collect::<Vec<_>>();
                let (mut p, mut q) = (g(&p), g(&q));
                for r in roots {
                    let lin = match r {
                        Some(r) => g(&[-r, 1]),
                        None => g(&[1, 0]),
                    };
                    p = forms::mul(&p, &lin);
                    q = forms::mul(&q, &lin);
                }
                let deg = p.len() - 1;
                ProjectiveRatMap::exact(deg, p, q).ok()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn depth_composition_law(
        f in (1usize..=4).prop_flat_map(degenerate_map),
        g in (1usize..=4).prop_flat_map(degenerate_map),
    ) {
        let t = tol();
        let fg = match f.compose(&g) {
            Ok(h) => h,
            Err(ratdegen::Error::Indeterminate) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let predicted = match ratdegen::ratmap::composition_depths(&f, &g, &t) {
            Ok(h) => h,
            Err(ratdegen::Error::Indeterminate) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let actual = fg.reduce(&t).unwrap();
        prop_assert_eq!(predicted.len(), actual.holes.len());
        for h in &predicted {
            prop_assert_eq!(actual.depth_at(&h.point, t.tau_cluster), h.depth);
        }
    }
}
