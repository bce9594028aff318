use ratdegen::measures::{push_forward, weakstar_distance, AtomicMeasure};
use ratdegen::mme::{mme_fixed_point_residual, mme_sample, noise_floor, pullback_iterate, weak_pair_limit_check};
use ratdegen::par::Exec;
use ratdegen::{MoebiusMap, ProjectiveRatMap, SpherePoint, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn z2() -> ProjectiveRatMap {
    ProjectiveRatMap::from_real(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap()
}

fn cheb() -> ProjectiveRatMap {
    ProjectiveRatMap::from_real(&[-2.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap()
}

fn moments_real(mu: &AtomicMeasure) -> (f64, f64) {
    let m1 = mu.integrate(|p| p.affine().re);
    let m2 = mu.integrate(|p| p.affine().re.powi(2));
    (m1, m2)
}

#[test]
fn pullback_iterate_examples() {
    let t = tol();
    let d2 = AtomicMeasure::dirac(SpherePoint::from_re_im(2.0, 0.0));
    let m = pullback_iterate(&z2(), &d2, 1, 100, 1, &t).unwrap();
    let s = 2f64.sqrt();
    assert!((m.mass_near(&SpherePoint::from_re_im(s, 0.0), 1e-12) - 0.5).abs() < 1e-12);
    assert!((m.mass_near(&SpherePoint::from_re_im(-s, 0.0), 1e-12) - 0.5).abs() < 1e-12);

    let m = pullback_iterate(&z2(), &d2, 30, 10_000, 1, &t).unwrap();
    let worst = m.atoms().iter().map(|(p, _)| (p.affine().norm() - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 0.02);
    assert!((m.mass() - 1.0).abs() < 1e-12);

    // Arcsine law on [−2, 2]: second moment 2.
    let m = pullback_iterate(&cheb(), &AtomicMeasure::dirac(SpherePoint::zero()), 12, 10_000, 1, &t).unwrap();
    let (_, m2) = moments_real(&m);
    assert!((m2 - 2.0).abs() < 0.05, "{m2}");
}

#[test]
fn sampler_classics() {
    let t = tol();
    let mu = mme_sample(&z2(), 10_000, 30, 7, Exec::Parallel, &t).unwrap();
    let worst = mu.atoms().iter().map(|(p, _)| (p.affine().norm() - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 0.02);
    let c = mu.integrate(|p| p.affine().re).hypot(mu.integrate(|p| p.affine().im));
    assert!(c < 0.05);
    let mu = mme_sample(&cheb(), 10_000, 30, 7, Exec::Parallel, &t).unwrap();
    let (m1, m2) = moments_real(&mu);
    assert!(m1.abs() < 0.05 && (m2 - 2.0).abs() < 0.05, "{m1} {m2}");
}

#[test]
fn sampler_is_deterministic_across_execution_modes() {
    let t = tol();
    let a = mme_sample(&cheb(), 2000, 20, 11, Exec::Parallel, &t).unwrap();
    let b = mme_sample(&cheb(), 2000, 20, 11, Exec::Sequential, &t).unwrap();
    assert_eq!(a, b);
    let c = mme_sample(&cheb(), 2000, 20, 12, Exec::Parallel, &t).unwrap();
    assert_ne!(a, c);
}

#[test]
fn fixed_point_residuals() {
    let t = tol();
    let circle = AtomicMeasure::circle(10_000, 1.0, t.tau_pt);
    assert!(mme_fixed_point_residual(&z2(), &circle, &t).unwrap() < 0.02);
    let r = mme_fixed_point_residual(&z2(), &AtomicMeasure::dirac(SpherePoint::from_re_im(0.5, 0.5)), &t).unwrap();
    assert!(r >= 0.1);
    let f = ProjectiveRatMap::from_real(&[0.2, 0.1, 1.0], &[1.0, 0.3, 0.0]).unwrap();
    let mu = mme_sample(&f, 4000, 30, 3, Exec::Parallel, &t).unwrap();
    let floor = noise_floor(&f, 4000, 30, (3, 4), Exec::Parallel, &t).unwrap();
    let res = mme_fixed_point_residual(&f, &mu, &t).unwrap();
    assert!(res <= 2.0 * floor, "{res} vs floor {floor}");
}

#[test]
fn start_independence_and_conjugation() {
    let t = tol();
    let f = ProjectiveRatMap::from_real(&[0.5, 0.0, 1.0], &[0.0, 1.0, 0.3]).unwrap();
    let a = mme_sample(&f, 4000, 30, 1, Exec::Parallel, &t).unwrap();
    let floor = noise_floor(&f, 4000, 30, (1, 2), Exec::Parallel, &t).unwrap();
    // Conjugate by A(z) = 2z + 1.
    let am = MoebiusMap::from_real(2.0, 1.0, 0.0, 1.0);
    let g = f.conjugate(&am).unwrap();
    let b = mme_sample(&g, 4000, 30, 5, Exec::Parallel, &t).unwrap();
    let pa = push_forward(&am, &a, &t).unwrap();
    let d = weakstar_distance(&pa, &b, t.harmonic_l);
    assert!(d <= 3.0 * floor, "{d} vs {floor}");
}

#[test]
fn weak_pair_on_quadratic_family() {
    let t = tol();
    let ts = [1e-2, 1e-3, 1e-4];
    let fk: Vec<ProjectiveRatMap> =
        ts.iter().map(|s| ProjectiveRatMap::from_real(&[1.0 / s, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap()).collect();
    let ak: Vec<MoebiusMap> = ts.iter().map(|s| MoebiusMap::from_real(1.0, -1.0 / s, 0.0, 1.0)).collect();
    let rep = weak_pair_limit_check(&fk, &ak, &z2(), 10_000, 30, 9, Exec::Parallel, &t).unwrap();
    assert!(*rep.residuals.last().unwrap() < 0.05, "{:?}", rep.residuals);
    // Mismatched limit φ′ = 1/z² moves the mass at ∞ to 0.
    let wrong = ProjectiveRatMap::from_real(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
    let rep2 = weak_pair_limit_check(&fk, &ak, &wrong, 10_000, 30, 9, Exec::Parallel, &t).unwrap();
    assert!(rep2.residuals.last().unwrap() > &0.1, "{:?}", rep2.residuals);
    // Constant sequence reduces to the fixed-point residual.
    let f = cheb();
    let rep3 = weak_pair_limit_check(&[f.clone()], &[MoebiusMap::identity()], &f, 4000, 30, 2, Exec::Parallel, &t)
        .unwrap();
    let mu = mme_sample(&f, 4000, 30, 2, Exec::Parallel, &t).unwrap();
    let fp = mme_fixed_point_residual(&f, &mu, &t).unwrap();
    assert!((rep3.residuals[0] - fp).abs() < 1e-12);
}
