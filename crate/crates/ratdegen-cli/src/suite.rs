//! Desk-tier verification battery, one check per acceptance criterion.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratdegen::barycenter::{ball_action, barycentered_normalize, conformal_barycenter, dm_class, heavy_atom_check};
use ratdegen::measures::{pull_back, push_forward, weakstar_distance, AtomicMeasure};
use ratdegen::mme::{mme_fixed_point_residual, mme_sample, noise_floor};
use ratdegen::par::Exec;
use ratdegen::polylike::{check_julia_hypotheses, extract_polynomial_like, PolyLikeInput, SEED_RADIUS};
use ratdegen::ratmap::composition_depths;
use ratdegen::rescaling::{
    depth_profile_limit, exact_to_float, hole_profile, iterate_limits, left_class_limits, sample_family_exact,
    pullback_limit, FamilySpec, Schedule, ScalingRule, TPoly, PullbackLimitOptions,
};
use ratdegen::spheretree::{build_tree, build_tree_exact, hausdorff_residual, induced_map, preimage_count_verify, CriticalInput};
use ratdegen::{Error, GaussRat, GitClass, MoebiusMap, ProjectiveRatMap, Result, SpherePoint, Tolerances, C64};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub seconds: f64,
    pub budget: f64,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tol: Tolerances,
    pub exec: Exec,
    /// CLI binary for the determinism check; skipped (failing) when absent.
    pub bin: Option<PathBuf>,
}

type Check = fn(&SuiteConfig) -> Result<(bool, String)>;

const CRITERIA: [(&str, f64, Check); 13] = [
    ("depth-composition law", 10.0, depth_composition),
    ("z²+1/t depth profile", 20.0, quadratic_depth_profile),
    ("limit measure on z²+1/t", 60.0, quadratic_limit_measure),
    ("t(z+1/z) limit measure", 60.0, demarco_faber),
    ("maximal entropy classics", 30.0, mme_classics),
    ("fixed-point residual", 120.0, fixed_point_residual),
    ("barycenter equivariance", 10.0, barycenter_equivariance),
    ("pull-back continuity", 10.0, pull_back_continuity),
    ("sphere trees", 30.0, sphere_trees),
    ("critical bookkeeping", 10.0, critical_bookkeeping),
    ("polynomial-like restriction", 30.0, polynomial_like),
    ("GIT classification", 1.0, git_classification),
    ("determinism", 60.0, determinism),
];

pub fn criterion_count() -> usize {
    CRITERIA.len()
}

/// Runs criterion `id` (1-based).
pub fn run_one(id: usize, cfg: &SuiteConfig) -> CriterionResult {
    let (name, budget, check) = CRITERIA[id - 1];
    let start = Instant::now();
    let out = check(cfg);
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match out {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds > budget {
        detail.push_str(&format!("; over time budget ({seconds:.1}s > {budget}s)"));
    }
    CriterionResult {
        id,
        name,
        pass: ok && seconds <= budget,
        seconds,
        budget,
        detail,
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).map(|i| run_one(i, cfg)).collect()
}

fn p(c: &[i64]) -> TPoly {
    TPoly::from_ints(c)
}

fn pt(re: f64, im: f64) -> SpherePoint {
    SpherePoint::from_re_im(re, im)
}

/// z² + 1/t.
pub fn quadratic_family(start: (i64, i64), ratio: (i64, i64), count: usize) -> Result<FamilySpec> {
    let mut den = vec![p(&[1]); 6];
    den[0] = p(&[0, 1]);
    FamilySpec::new(
        2,
        vec![p(&[1]), p(&[0]), p(&[1]), p(&[1]), p(&[0]), p(&[0])],
        den,
        Schedule::from_fracs(start, ratio, count)?,
    )
}

/// t(z + 1/z).
pub fn demarco_faber_family() -> Result<FamilySpec> {
    FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0, 1]), p(&[0]), p(&[0, 1]), p(&[0]), p(&[1]), p(&[0])],
        Schedule::from_fracs((10, 1), (2, 1), 8)?,
    )
}

/// z²/ε.
pub fn z2_over_eps_family(start: (i64, i64), ratio: (i64, i64), count: usize) -> Result<FamilySpec> {
    FamilySpec::polynomial_coeffs(
        2,
        vec![p(&[0]), p(&[0]), p(&[1]), p(&[0, 1]), p(&[0]), p(&[0])],
        Schedule::from_fracs(start, ratio, count)?,
    )
}

fn random_degenerate(rng: &mut ChaCha8Rng, d: usize) -> Result<ProjectiveRatMap> {
    let g = |v: i64| GaussRat::from_ints(v, 0);
    let k = rng.gen_range(1..=d);
    let mut num: Vec<GaussRat> = (0..=d - k).map(|_| g(rng.gen_range(-3..=3))).collect();
    let mut den: Vec<GaussRat> = (0..=d - k).map(|_| g(rng.gen_range(-3..=3))).collect();
    for _ in 0..k {
        let lin = if rng.gen_bool(0.2) {
            vec![g(1), g(0)]
        } else {
            vec![g(-rng.gen_range(-2..=2)), g(1)]
        };
        num = ratdegen::forms::mul(&num, &lin);
        den = ratdegen::forms::mul(&den, &lin);
    }
    ProjectiveRatMap::exact(d, num, den)
}

fn depth_composition(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut tested, mut skipped, mut bad) = (0, 0, 0);
    while tested < 200 {
        let (df, dg) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let f = random_degenerate(&mut rng, df);
        let g = random_degenerate(&mut rng, dg);
        let (Ok(f), Ok(g)) = (f, g) else {
            skipped += 1;
            continue;
        };
        let fg = match f.compose(&g) {
            Ok(h) => h,
            Err(Error::Indeterminate) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let predicted = match composition_depths(&f, &g, &cfg.tol) {
            Ok(h) => h,
            Err(Error::Indeterminate) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        tested += 1;
        let actual = fg.reduce(&cfg.tol)?;
        let ok = predicted.len() == actual.holes.len()
            && predicted
                .iter()
                .all(|h| actual.depth_at(&h.point, cfg.tol.tau_cluster) == h.depth);
        if !ok {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{tested} pairs, {bad} mismatches, {skipped} indeterminate or zero draws skipped")))
}

/// `z² + s` iterated in ℤ[s][z] with `s = 1/t`; entry `[j][e]` is the
/// coefficient of `z^j s^e`.
fn symbolic_iterate(n: usize) -> Vec<Vec<u128>> {
    let mut f: Vec<Vec<u128>> = vec![vec![0], vec![1]];
    for _ in 0..n {
        let zd = 2 * (f.len() - 1);
        let sd = 2 * f.iter().map(|c| c.len()).max().unwrap_or(1);
        let mut g = vec![vec![0u128; sd + 1]; zd + 1];
        for (i, a) in f.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                for (e, x) in a.iter().enumerate() {
                    for (e2, y) in b.iter().enumerate() {
                        g[i + j][e + e2] += x * y;
                    }
                }
            }
        }
        g[0][1] += 1;
        f = g;
    }
    f
}

/// Depth at ∞ of the left-class limit of `f_t^n`: drop the constant term,
/// keep the top power of `s`, and subtract its `z`-degree from `2^n`.
fn symbolic_depth_at_infinity(n: usize) -> usize {
    let mut f = symbolic_iterate(n);
    f[0].iter_mut().for_each(|c| *c = 0);
    let top = f
        .iter()
        .flat_map(|c| c.iter().enumerate().filter(|(_, x)| **x != 0).map(|(e, _)| e))
        .max()
        .unwrap_or(0);
    let zdeg = f.iter().rposition(|c| c.get(top).is_some_and(|x| *x != 0)).unwrap_or(0);
    (1 << n) - zdeg
}

fn quadratic_depth_profile(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let fam = quadratic_family((1, 10), (1, 2), 8)?;
    let scheme = left_class_limits(&fam, 6, &ScalingRule::TriPoint, t, cfg.exec)?;
    let inf = SpherePoint::infinity();
    // Floating route: same transitions with their exact forms dropped.
    let mut float_scheme = scheme.clone();
    for tr in &mut float_scheme.transitions {
        tr.exact = None;
    }
    let (float_profile, _) = hole_profile(&float_scheme, t)?;
    let mut ok = true;
    let mut worst_float: f64 = 0.0;
    for n in 2..=6 {
        let expect = 1.0 - 2f64.powi(1 - n as i32);
        let oracle = symbolic_depth_at_infinity(n);
        let phi = scheme
            .phi(n)
            .ok_or_else(|| Error::Schema(format!("φ_{n} not composed")))?;
        let exact = phi.reduce(t)?.depth_at(&inf, t.tau_cluster);
        ok &= exact == oracle && exact as f64 / (1u64 << n) as f64 == expect;
        let fl: usize = float_profile[n - 1].iter().filter(|(q, _)| q.is_infinity()).map(|x| x.1).sum();
        worst_float = worst_float.max((fl as f64 / (1u64 << n) as f64 - expect).abs());
    }
    ok &= worst_float <= 1e-9;
    Ok((ok, format!("exact ratios match 1 − 2^(1−n) and symbolic iterates; float deviation {worst_float:.1e}")))
}

fn quadratic_limit_measure(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let fam = quadratic_family((1, 10), (1, 2), 8)?;
    let mu = AtomicMeasure::dirac(pt(0.3, 0.2));
    let opts = PullbackLimitOptions {
        exec: cfg.exec,
        seed: cfg.seed,
        ..PullbackLimitOptions::default()
    };
    let rep = pullback_limit(&fam, &mu, 8, &opts, t)?;
    let delta_inf = AtomicMeasure::dirac(SpherePoint::infinity());
    let d1 = weakstar_distance(&rep.measure, &delta_inf, t.harmonic_l);
    let f = exact_to_float(&sample_family_exact(&fam, &GaussRat::from_frac(1, 10_000))?)?;
    let s = mme_sample(&f, 10_000, 30, cfg.seed, cfg.exec, t)?;
    let d2 = weakstar_distance(&s, &delta_inf, t.harmonic_l);
    Ok((
        d1 < 0.05 && d2 < 0.1,
        format!("case {}, pulled-back distance {d1:.2e}, sampler distance {d2:.2e}", rep.case.label()),
    ))
}

fn demarco_faber(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let fam = demarco_faber_family()?;
    let target = AtomicMeasure::new(vec![(pt(0.0, 1.0), 0.5), (pt(0.0, -1.0), 0.5)], t.tau_pt)?;
    let f = exact_to_float(&sample_family_exact(&fam, &GaussRat::from_ints(1000, 0))?)?;
    let s = mme_sample(&f, 10_000, 30, cfg.seed, cfg.exec, t)?;
    let d1 = weakstar_distance(&s, &target, t.harmonic_l);
    let scheme = left_class_limits(&fam, 5, &ScalingRule::TriPoint, t, cfg.exec)?;
    let eta = depth_profile_limit(&scheme, t)?.eta;
    let d2 = weakstar_distance(&eta, &target, t.harmonic_l);
    let inf = dm_class(&eta, t)?.is_infinity();
    Ok((
        d1 < 0.05 && d2 < 0.02 && inf,
        format!("sampler distance {d1:.2e}, depth profile distance {d2:.2e}, class at infinity {inf}"),
    ))
}

fn mme_classics(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let z2 = ProjectiveRatMap::from_real(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0])?;
    let mu = mme_sample(&z2, 10_000, 30, cfg.seed, cfg.exec, t)?;
    let worst = mu
        .atoms()
        .iter()
        .map(|(q, _)| (q.affine().norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let c = conformal_barycenter(&mu, t)?.norm();
    let cheb = ProjectiveRatMap::from_real(&[-2.0, 0.0, 1.0], &[1.0, 0.0, 0.0])?;
    let nu = mme_sample(&cheb, 10_000, 30, cfg.seed, cfg.exec, t)?;
    let m1 = nu.integrate(|q| q.affine().re);
    let m2 = nu.integrate(|q| q.affine().re.powi(2));
    Ok((
        worst < 0.02 && c < 0.05 && m1.abs() < 0.05 && (m2 - 2.0).abs() < 0.05,
        format!("z²: support deviation {worst:.2e}, barycenter norm {c:.2e}; z²−2: E[x] = {m1:.3}, E[x²] = {m2:.3}"),
    ))
}

fn fixed_point_residual(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6d6d65);
    let mut worst: f64 = 0.0;
    let mut fails = 0;
    let mut done = 0;
    while done < 20 {
        let d = if done % 2 == 0 { 2 } else { 3 };
        let mut coef = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let num: Vec<C64> = (0..=d).map(|_| coef()).collect();
        let den: Vec<C64> = (0..=d).map(|_| coef()).collect();
        let f = ProjectiveRatMap::float(d, num, den)?;
        if f.resultant()?.norm() < 1e-3 {
            continue;
        }
        let seed = cfg.seed.wrapping_add(100 * done as u64);
        let mu = mme_sample(&f, 4000, 30, seed, cfg.exec, t)?;
        let floor = noise_floor(&f, 4000, 30, (seed, seed + 1), cfg.exec, t)?;
        let res = mme_fixed_point_residual(&f, &mu, t)?;
        worst = worst.max(res / floor);
        if res > 2.0 * floor {
            fails += 1;
        }
        done += 1;
    }
    Ok((fails == 0, format!("20 maps, worst residual/floor ratio {worst:.2}")))
}

fn barycenter_equivariance(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x626172);
    let mut worst: f64 = 0.0;
    let mut rotations = true;
    let mut done = 0;
    while done < 100 {
        let mut c = || C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let a = MoebiusMap::new(c(), c(), c(), c());
        if a.det_ratio() < 1e-2 {
            continue;
        }
        let n = rng.gen_range(3..8);
        let atoms: Vec<(SpherePoint, f64)> = (0..n)
            .map(|_| (pt(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), rng.gen_range(0.2..1.0)))
            .collect();
        let mu = AtomicMeasure::new(atoms, t.tau_pt)?.normalized();
        let amu = push_forward(&a, &mu, t)?;
        if heavy_atom_check(&mu, t).is_some() || heavy_atom_check(&amu, t).is_some() {
            continue;
        }
        let c1 = conformal_barycenter(&mu, t)?;
        let c2 = conformal_barycenter(&amu, t)?;
        worst = worst.max(ball_action(&a, &c1).distance(&c2));
        let (_, nu) = barycentered_normalize(&mu, t)?;
        let (again, _) = barycentered_normalize(&nu, t)?;
        rotations &= again.is_rotation(t).0;
        done += 1;
    }
    Ok((
        worst < 1e-6 && rotations,
        format!("100 pairs, worst hyperbolic distance {worst:.1e}, idempotence gives rotations: {rotations}"),
    ))
}

fn pull_back_continuity(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let fam = quadratic_family((1, 10), (1, 10), 8)?;
    let g = iterate_limits(&fam, 1, t, cfg.exec)?
        .pop()
        .ok_or_else(|| Error::Schema("no iterate limit".into()))?
        .limit
        .best()
        .clone();
    let mu = AtomicMeasure::dirac(pt(0.3, 0.2));
    let gmu = pull_back(&g, &mu, t)?;
    let mut dist = Vec::new();
    for (j, tj) in fam.schedule.values().iter().enumerate() {
        let fj = sample_family_exact(&fam, tj)?;
        let w = 1.0 / (j + 1) as f64;
        let nu = AtomicMeasure::new(vec![(pt(0.3, 0.2), 1.0 - w), (pt(-0.5, 0.1), w)], t.tau_pt)?;
        dist.push(weakstar_distance(&pull_back(&fj, &nu, t)?, &gmu, t.harmonic_l));
    }
    let tail = &dist[dist.len() - 3..];
    let ok = tail.windows(2).all(|w| w[1] < w[0]) && tail.iter().all(|x| *x < 0.01);
    Ok((ok, format!("last distances {:.2e}, {:.2e}, {:.2e}", tail[0], tail[1], tail[2])))
}

fn sphere_trees(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let ts: Vec<f64> = (1..=12).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect();
    let sc: Vec<Vec<MoebiusMap>> = (0..6)
        .map(|n| ts.iter().map(|s| MoebiusMap::from_real(s.powi(-n), 0.0, 0.0, 1.0)).collect())
        .collect();
    let tree = build_tree(&[0, 1, 2, 3, 4, 5], &sc, &ts, t)?;
    let path = tree.adjacency == vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)];
    let glue = tree.gluings.len() == 5
        && tree
            .gluings
            .iter()
            .enumerate()
            .all(|(n, g)| g.members == vec![(n, SpherePoint::zero()), (n + 1, SpherePoint::infinity())]);
    let h = hausdorff_residual(&tree, &sc, ts.len() - 1, 200, cfg.exec)?;

    let fam = quadratic_family((1, 10), (1, 10), 4)?;
    let a1 = [[p(&[0, 1]), p(&[-1])], [p(&[0]), p(&[0, 1])]];
    let a2 = [[p(&[0, 0, 1]), p(&[-1, -1])], [p(&[0]), p(&[0, 1])]];
    let ts_down: Vec<GaussRat> = (1..=4).map(|k| GaussRat::from_frac(1, 10i64.pow(k))).collect();
    let z0 = pt(0.3, 0.2);
    let inf = SpherePoint::infinity();
    let mut counts = Vec::new();
    let mut agree = true;
    for (z, w, expect) in [(z0, pt(0.1, 0.0), 0), (z0, pt(0.6, 0.4), 1), (inf, inf, 2)] {
        let v = preimage_count_verify(&fam, 1, &a1, &a2, &ts_down, &z, &w, 0.1, t, cfg.exec)?;
        agree &= v.agree && v.predicted == expect && v.empirical.last() == Some(&Some(expect));
        counts.push(v.predicted);
    }
    Ok((
        path && glue && h < 0.01 && agree,
        format!("path graph {path}, gluings {glue}, Hausdorff residual {h:.2e}, predictions {counts:?} verified {agree}"),
    ))
}

fn critical_bookkeeping(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let fam = z2_over_eps_family((1, 10), (1, 2), 8)?;
    let s = left_class_limits(&fam, 4, &ScalingRule::TriPoint, t, cfg.exec)?;
    let ta = build_tree_exact(&[0, 1, 2, 3], &s.scalings[0..4], &s.eps, t)?;
    let tb = build_tree_exact(&[1, 2, 3, 4], &s.scalings[1..5], &s.eps, t)?;
    let trans: Vec<ProjectiveRatMap> = s.transitions.iter().map(|l| l.best().clone()).collect();
    let k = s.eps.len() - 1;
    let fk = sample_family_exact(&fam, &fam.schedule.value(k))?;
    let crit = CriticalInput {
        map: &fk,
        scalings: s.scalings[0..4].iter().map(|v| v[k].to_float()).collect(),
        k,
    };
    let data = induced_map(&ta, &tb, &[0, 1, 2, 3], &trans, Some(crit), t)?;
    let total: usize = data.critical.iter().map(|c| c.multiplicity).sum();
    let mut bad = trans.clone();
    bad[1] = bad[1].post_compose(&MoebiusMap::from_real(1.0, 0.5, 0.0, 1.0))?;
    let negative = matches!(
        induced_map(&ta, &tb, &[0, 1, 2, 3], &bad, None, t),
        Err(Error::ContinuityFailure(..))
    );
    Ok((
        data.fully_ramified && total == 2 && negative,
        format!(
            "{} edges continuous, critical total {total}, perturbed edge raises ContinuityFailure: {negative}",
            data.edges_checked
        ),
    ))
}

fn polynomial_like(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let id = [[p(&[1]), p(&[0])], [p(&[0]), p(&[1])]];
    let fam = z2_over_eps_family((1, 10), (1, 10), 3)?;
    let b1 = [[p(&[0, 1]), p(&[0])], [p(&[0]), p(&[1])]];
    let input = PolyLikeInput::from_family(&fam, 1, &id, &b1, t)?;
    let h = check_julia_hypotheses(&input, t)?;
    let c = extract_polynomial_like(&input, &h, 2, SEED_RADIUS, t)?;
    let outside: Vec<_> = c.witnesses.iter().filter(|w| !w.in_inner).collect();
    // Only the sink (found once per period) may sit outside U′.
    let witnesses_ok = outside
        .iter()
        .all(|w| c.sink.is_some_and(|s| s.chordal(&w.point) <= t.tau_cluster.sqrt()));
    let pos = h.pass && c.degree == 2 && c.winding == 2 && witnesses_ok;

    let dmf = demarco_faber_family()?;
    let b1 = [[p(&[1]), p(&[0])], [p(&[0]), p(&[0, 1])]];
    let input = PolyLikeInput::from_family(&dmf, 1, &id, &b1, t)?;
    let hd = check_julia_hypotheses(&input, t)?;
    let neg = !hd.pass && hd.deg_a == 1;
    Ok((
        pos && neg,
        format!(
            "z²/ε at ε = 1e-3: degree {}, {} periodic points in U′, {} at the sink; t(z+1/z): deg_a = {}, pass = {}",
            c.degree,
            c.witnesses.len() - outside.len(),
            outside.len(),
            hd.deg_a,
            hd.pass
        ),
    ))
}

fn git_classification(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let t = &cfg.tol;
    let a = ProjectiveRatMap::from_ints(&[0, 0, 0, 0, 1], &[0, 0, 0, 1, 0])?.git_classify(t)?;
    let b = ProjectiveRatMap::from_ints(&[1, 0, 1], &[1, 0, 0])?.git_classify(t)?;
    let c = ProjectiveRatMap::from_ints(&[0, 0, 1], &[0, 1, 0])?.git_classify(t)?;
    Ok((
        a == GitClass::Unstable && b == GitClass::Stable && c == GitClass::Unstable,
        format!("[z⁴:z³w] {a:?}, z²+1 {b:?}, [z²:zw] {c:?}"),
    ))
}

fn run_bin(bin: &PathBuf, args: &[&str], threads: usize) -> Result<Vec<u8>> {
    let out = Command::new(bin)
        .args(args)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .map_err(|e| Error::Schema(format!("cannot run {}: {e}", bin.display())))?;
    if !out.status.success() {
        return Err(Error::Schema(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        )));
    }
    Ok(out.stdout)
}

fn determinism(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let Some(bin) = &cfg.bin else {
        return Ok((false, "no CLI binary available".into()));
    };
    let dir = std::env::temp_dir().join(format!("ratdegen-determinism-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Schema(e.to_string()))?;
    let map = dir.join("map.json");
    let fam = dir.join("family.json");
    let w = |p: &PathBuf, s: &str| std::fs::write(p, s).map_err(|e| Error::Schema(e.to_string()));
    w(&map, r#"{"degree":2,"numerator":[{"re":-1,"im":0.2},{"re":0,"im":0},{"re":1,"im":0}],"denominator":[{"re":1,"im":0},{"re":0,"im":0},{"re":0,"im":0}],"backend":"float"}"#)?;
    w(&fam, r#"{"degree":2,"coeff_num":[[1],[0],[1],[1],[0],[0]],"coeff_den":[[0,1],[1],[1],[1],[1],[1]],"schedule":{"type":"geometric","start":"1/10","ratio":"1/2","count":8}}"#)?;
    let z2 = dir.join("z2.json");
    w(&z2, r#"{"degree":2,"coeff_num":[[0],[0],[1],[0,1],[0],[0]],"schedule":{"type":"geometric","start":"1/10","ratio":"1/2","count":8}}"#)?;
    let seed = cfg.seed.to_string();
    let s = |p: &PathBuf| p.to_string_lossy().to_string();
    let (m, f, z) = (s(&map), s(&fam), s(&z2));
    let commands: Vec<Vec<&str>> = vec![
        vec!["mme", "--map", &m, "--samples", "3000", "--depth", "30", "--seed", &seed],
        vec!["family-analyze", "--family", &f, "--levels", "6", "--samples", "2000", "--seed", &seed],
        vec!["polylike-detect", "--family", &z, "--window", "5"],
    ];
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2).max(2);
    let mut ok = true;
    let mut names = Vec::new();
    for args in &commands {
        let a = run_bin(bin, args, 1)?;
        let b = run_bin(bin, args, 1)?;
        let c = run_bin(bin, args, n)?;
        let same = !a.is_empty() && a == b && a == c;
        ok &= same;
        names.push(format!("{} {}", args[0], if same { "identical" } else { "DIFFERS" }));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((ok, format!("threads 1 and {n}: {}", names.join(", "))))
}
