//! Polynomial-like restrictions of maps in a degenerating sequence.
//!
//! Input is a sampled sequence `h_k` with a pair of scalings `B_{0,k}`,
//! `B_{1,k}`. When `T_k = B_{1,k} h_k B_{0,k}⁻¹ → φ` with `deg_a φ = d` and
//! `φ(a) ≠ b` at the glued points, the complement of a small pull-back
//! disk around `a` carries a degree `d` polynomial-like restriction.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::limits;
use crate::mme;
use crate::par::{self, Exec};
use crate::ratmap::ProjectiveRatMap;
use crate::rescaling::{self, FamilySpec, ScalingRule, TPoly, XMoebius};
use crate::roots;
use crate::scalar::{GaussRat, C64};
use crate::sphere::{MoebiusClass, MoebiusMap, SpherePoint};

/// Boundary samples per Jordan curve.
pub const BOUNDARY_SAMPLES: usize = 256;
/// Default chordal radius of the seed disk around `φ(a)`.
pub const SEED_RADIUS: f64 = 0.05;
/// Seed-disk halvings attempted after `ContainmentFailed`.
pub const MAX_SHRINK: usize = 8;
/// Largest period of the localization witnesses.
pub const WITNESS_PERIOD: usize = 3;

/// Exact samples `h_k` with scalings `B_{0,k}`, `B_{1,k}` at `eps[k] → 0`.
#[derive(Clone, Debug)]
pub struct PolyLikeInput {
    pub hs: Vec<ProjectiveRatMap>,
    pub b0: Vec<XMoebius>,
    pub b1: Vec<XMoebius>,
    pub eps: Vec<f64>,
}

impl PolyLikeInput {
    /// `h_t = f_t^n` sampled along the family schedule with polynomial scalings.
    pub fn from_family(
        fam: &FamilySpec,
        iterate: usize,
        b0: &[[TPoly; 2]; 2],
        b1: &[[TPoly; 2]; 2],
        tol: &Tolerances,
    ) -> Result<Self> {
        let ts = fam.schedule.values();
        let mut hs = Vec::with_capacity(ts.len());
        for t in &ts {
            hs.push(rescaling::sample_family_exact(fam, t)?.iterate(iterate, tol)?);
        }
        Ok(PolyLikeInput {
            hs,
            b0: ts.iter().map(|t| XMoebius::from_tpolys(b0, t)).collect(),
            b1: ts.iter().map(|t| XMoebius::from_tpolys(b1, t)).collect(),
            eps: fam.schedule.eps(),
        })
    }

    fn check(&self) -> Result<()> {
        let n = self.eps.len();
        if n == 0 || self.hs.len() != n || self.b0.len() != n || self.b1.len() != n {
            return Err(Error::Schema("samples and scalings must match the schedule".into()));
        }
        Ok(())
    }

    /// Float `T_k = B_{1,k} ∘ h_k ∘ B_{0,k}⁻¹` (exact composition first).
    pub fn transition(&self, k: usize) -> Result<ProjectiveRatMap> {
        let h = rescaling::pre_compose_exact(&self.hs[k], &self.b0[k].inverse())?;
        rescaling::exact_to_float(&rescaling::post_compose_exact(&h, &self.b1[k])?)
    }
}

#[derive(Clone, Debug)]
pub struct JuliaHypotheses {
    /// Glue point on `C̄₀` (hole of `lim B₁B₀⁻¹`).
    pub a: SpherePoint,
    /// Glue point on `C̄₁` (reduction of `lim B₁B₀⁻¹`).
    pub b: SpherePoint,
    pub phi: ProjectiveRatMap,
    pub deg_a: usize,
    pub phi_a: SpherePoint,
    pub pass: bool,
    pub diagnostic: String,
}

pub fn check_julia_hypotheses(input: &PolyLikeInput, tol: &Tolerances) -> Result<JuliaHypotheses> {
    input.check()?;
    let n = input.eps.len();
    let samples: Vec<ProjectiveRatMap> = (0..n).map(|k| input.transition(k)).collect::<Result<_>>()?;
    let lim = limits::map_limit(&input.eps, &samples, 1, tol).map_err(|_| Error::NotConverging)?;
    let phi = lim.best().clone();
    let c: Vec<MoebiusMap> = (0..n)
        .map(|k| input.b1[k].compose(&input.b0[k].inverse()).to_float())
        .collect();
    let (cl, _) = limits::moebius_limit(&input.eps, &c, tol).map_err(|_| Error::NotConverging)?;
    let (b, a) = match cl.classify(tol) {
        MoebiusClass::Degenerate { reduction, hole } => (reduction.snap_canonical(tol.tau_pt), hole.snap_canonical(tol.tau_pt)),
        MoebiusClass::Nondegenerate(_) => return Err(Error::NotIndependent(0, 1)),
    };
    let d = input.hs[0].degree();
    if phi.is_degenerate(tol)? {
        return Ok(JuliaHypotheses {
            a,
            b,
            phi,
            deg_a: 0,
            phi_a: a,
            pass: false,
            diagnostic: "limit transition is degenerate".into(),
        });
    }
    let phi_a = phi.eval(&a, tol)?.snap_canonical(tol.tau_pt);
    let deg_a = phi.local_degree(&a, tol)?;
    let separated = phi_a.chordal(&b) > tol.tau_cluster;
    let pass = deg_a == d && separated;
    let diagnostic = if pass {
        "hypotheses hold".into()
    } else if deg_a != d {
        format!("local degree at a is {deg_a}, expected {d}")
    } else {
        "phi(a) coincides with b".into()
    };
    Ok(JuliaHypotheses {
        a,
        b,
        phi,
        deg_a,
        phi_a,
        pass,
        diagnostic,
    })
}

/// Periodic point of `h_k` with the domain it was found in.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicWitness {
    pub point: SpherePoint,
    pub period: usize,
    pub in_inner: bool,
}

/// Degree `d` polynomial-like restriction `h: U′ → U`. Both domains are
/// complements of Jordan curves sampled in `inner_boundary` (`∂U′`) and
/// `outer_boundary` (`∂U`); `excluded` lies outside both.
#[derive(Clone, Debug)]
pub struct PolyLikeCertificate {
    pub degree: usize,
    pub k: Option<usize>,
    pub inner_boundary: Vec<SpherePoint>,
    pub outer_boundary: Vec<SpherePoint>,
    pub excluded: SpherePoint,
    pub seed_radius: f64,
    /// Chordal separation of the two boundary curves.
    pub separation: f64,
    pub modulus_lower_bound: f64,
    /// Winding number of `h(∂U′)` around the excluded side of `∂U`.
    pub winding: i64,
    pub witnesses: Vec<PeriodicWitness>,
    /// Attracting fixed point inside the excluded disk, if found.
    pub sink: Option<SpherePoint>,
}

/// Möbius map sending `p ↦ 0` and `q ↦ ∞`.
fn send_to_zero_infinity(p: &SpherePoint, q: &SpherePoint) -> MoebiusMap {
    MoebiusMap::new(p.w(), -p.z(), q.w(), -q.z()).normalized()
}

fn antipode(p: &SpherePoint) -> SpherePoint {
    SpherePoint::from_homogeneous(-p.w().conj(), p.z().conj()).unwrap()
}

fn modulus(p: &SpherePoint) -> f64 {
    match p.to_complex() {
        Some(c) => c.norm(),
        None => f64::INFINITY,
    }
}

/// Winding number of a closed polygon around `c`.
fn winding(poly: &[C64], c: C64) -> (i64, f64) {
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for i in 0..poly.len() {
        let (u, v) = (poly[i] - c, poly[(i + 1) % poly.len()] - c);
        let step = (v / u).arg();
        max_step = max_step.max(step.abs());
        total += step;
    }
    ((total / std::f64::consts::TAU).round() as i64, max_step)
}

fn inside(poly: &[C64], c: C64) -> bool {
    winding(poly, c).0 != 0
}

/// Radius where `|T(ρe^{iθ})|` first reaches `r` (log scan, then bisection).
fn level_radius(t: &dyn Fn(C64) -> f64, theta: f64, r: f64) -> Option<f64> {
    let dir = C64::from_polar(1.0, theta);
    let mut lo = 1e-12;
    if t(dir * lo) >= r {
        return None;
    }
    let mut hi = lo;
    loop {
        hi *= 1.5;
        if hi > 1e6 {
            return None;
        }
        if t(dir * hi) >= r {
            break;
        }
        lo = hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if t(dir * mid) >= r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Fixed points of `h^n` on the sphere.
fn periodic_points(h: &ProjectiveRatMap, n: usize, tol: &Tolerances) -> Result<Vec<SpherePoint>> {
    let hn = h.iterate(n, tol)?.to_float();
    let (p, q) = hn.float_coeffs();
    let dd = hn.degree();
    let zero = C64::new(0.0, 0.0);
    let c: Vec<C64> = (0..=dd + 1)
        .map(|j| {
            let from_q = if j >= 1 { q[j - 1] } else { zero };
            let from_p = if j <= dd { p[j] } else { zero };
            from_q - from_p
        })
        .collect();
    let pts = roots::form_roots(&c)?;
    Ok(roots::cluster(&pts, tol.tau_cluster).into_iter().map(|c| c.point).collect())
}

/// Certificate at sample `k` for a seed disk of chordal radius `seed`
/// around `φ(a)`, halving up to `MAX_SHRINK` times on containment failure.
pub fn extract_polynomial_like(
    input: &PolyLikeInput,
    hyp: &JuliaHypotheses,
    k: usize,
    seed: f64,
    tol: &Tolerances,
) -> Result<PolyLikeCertificate> {
    if !hyp.pass {
        return Err(Error::HypothesisUnmet(hyp.diagnostic.clone()));
    }
    let mut radius = seed;
    let mut last = Error::ContainmentFailed;
    for _ in 0..=MAX_SHRINK {
        match extract_once(input, hyp, k, radius, tol) {
            Ok(c) => return Ok(c),
            Err(e @ Error::ContainmentFailed) => last = e,
            Err(e) => return Err(e),
        }
        radius *= 0.5;
    }
    Err(last)
}

fn extract_once(
    input: &PolyLikeInput,
    hyp: &JuliaHypotheses,
    k: usize,
    seed: f64,
    tol: &Tolerances,
) -> Result<PolyLikeCertificate> {
    input.check()?;
    if k >= input.eps.len() {
        return Err(Error::Schema("sample index out of range".into()));
    }
    let d = input.hs[k].degree();
    // Normalize a = 0 on C̄₀, φ(a) = 0 and b = ∞ on C̄₁.
    let r0 = send_to_zero_infinity(&hyp.a, &antipode(&hyp.a));
    let r1 = send_to_zero_infinity(&hyp.phi_a, &hyp.b);
    let b0 = r0.compose(&input.b0[k].to_float()).normalized();
    let b0_inv = b0.inverse();
    let h = input.hs[k].to_float();
    let tk = input.transition(k)?;
    let r0_inv = r0.inverse();
    let tn = |z: C64| -> Option<SpherePoint> {
        let x = r0_inv.apply_raw(&SpherePoint::from_complex(z))?;
        r1.apply_raw(&tk.eval_raw(&x)?)
    };
    let ck = r0
        .compose(&input.b0[k].compose(&input.b1[k].inverse()).to_float())
        .compose(&r1.inverse())
        .normalized();
    let r = seed / (1.0 - seed * seed).sqrt();

    // ∂D′_k = T_k⁻¹(∂D), star-shaped around 0 for small D.
    let abs_t = |z: C64| tn(z).map(|p| modulus(&p)).unwrap_or(f64::INFINITY);
    let mut samples = BOUNDARY_SAMPLES;
    let (inner, wind) = loop {
        let inner: Vec<C64> = (0..samples)
            .map(|j| {
                let th = std::f64::consts::TAU * j as f64 / samples as f64;
                level_radius(&abs_t, th, r).map(|rho| C64::from_polar(rho, th))
            })
            .collect::<Option<_>>()
            .ok_or(Error::ContainmentFailed)?;
        // Pole of C_k must stay off the closed seed disk.
        let pole = ck.inverse().apply_raw(&SpherePoint::infinity()).unwrap();
        if modulus(&pole) <= r * (1.0 + 1e-9) {
            return Err(Error::ContainmentFailed);
        }
        let c0 = ck.apply_raw(&SpherePoint::zero()).unwrap().affine();
        let img: Vec<C64> = inner
            .iter()
            .map(|z| {
                let x = b0_inv.apply_raw(&SpherePoint::from_complex(*z)).unwrap();
                let y = h.eval_raw(&x).ok_or(Error::HoleEvaluation)?;
                Ok(b0.apply_raw(&y).ok_or(Error::HoleEvaluation)?.affine())
            })
            .collect::<Result<_>>()?;
        let (w, step) = winding(&img, c0);
        if step < std::f64::consts::FRAC_PI_4 || samples >= 16 * BOUNDARY_SAMPLES {
            break (inner, w);
        }
        samples *= 2;
    };
    let outer: Vec<C64> = (0..inner.len())
        .map(|j| {
            let th = std::f64::consts::TAU * j as f64 / inner.len() as f64;
            ck.apply_raw(&SpherePoint::from_complex(C64::from_polar(r, th))).unwrap().affine()
        })
        .collect();
    if !outer.iter().all(|p| inside(&inner, *p)) {
        return Err(Error::ContainmentFailed);
    }
    let sp = |z: &C64| SpherePoint::from_complex(*z);
    let separation = outer
        .iter()
        .map(|p| inner.iter().map(|q| sp(p).chordal(&sp(q))).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    if separation < tol.tau_ann {
        return Err(Error::ContainmentFailed);
    }
    if wind != d as i64 {
        return Err(Error::DegreeMismatch {
            found: wind,
            expected: d as i64,
        });
    }
    let r_in = outer.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r_out = inner.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let modulus_lower_bound = if r_out > r_in {
        (r_out / r_in).ln() / std::f64::consts::TAU
    } else {
        0.0
    };

    // Periodic points: in U′ or the single sink inside D_k.
    let mut witnesses = Vec::new();
    let mut sink: Option<SpherePoint> = None;
    for n in 1..=WITNESS_PERIOD {
        for p in periodic_points(&input.hs[k], n, tol)? {
            let q = b0.apply_raw(&p).unwrap();
            let in_disk = q.to_complex().is_some_and(|z| inside(&inner, z));
            if in_disk {
                let z = q.to_complex().unwrap();
                if !inside(&outer, z) {
                    return Err(Error::ContainmentFailed);
                }
                match sink {
                    Some(s) if s.chordal(&p) > tol.tau_cluster.sqrt() => return Err(Error::ContainmentFailed),
                    _ => sink = Some(p),
                }
            }
            witnesses.push(PeriodicWitness {
                point: p,
                period: n,
                in_inner: !in_disk,
            });
        }
    }
    let back = |z: &C64| b0_inv.apply_raw(&SpherePoint::from_complex(*z)).unwrap();
    Ok(PolyLikeCertificate {
        degree: d,
        k: Some(k),
        inner_boundary: inner.iter().map(back).collect(),
        outer_boundary: outer.iter().map(back).collect(),
        excluded: b0_inv.apply_raw(&SpherePoint::zero()).unwrap(),
        seed_radius: seed,
        separation,
        modulus_lower_bound,
        winding: wind,
        witnesses,
        sink,
    })
}

/// Certificate for a single polynomial with `U` the round disk `|z| < R`
/// and `U′ = h⁻¹(U)`.
pub fn polynomial_disk_certificate(h: &ProjectiveRatMap, radius: f64, tol: &Tolerances) -> Result<PolyLikeCertificate> {
    let f = h.to_float();
    let d = f.degree();
    if f.eval_raw(&SpherePoint::infinity()).is_none_or(|p| !p.is_infinity()) || f.local_degree(&SpherePoint::infinity(), tol)? != d {
        return Err(Error::HypothesisUnmet("map is not a polynomial".into()));
    }
    let circle: Vec<C64> = (0..BOUNDARY_SAMPLES)
        .map(|j| C64::from_polar(radius, std::f64::consts::TAU * j as f64 / BOUNDARY_SAMPLES as f64))
        .collect();
    let mut inner = Vec::with_capacity(d * circle.len());
    for w in &circle {
        inner.extend(f.preimages_raw(&SpherePoint::from_complex(*w))?);
    }
    if inner.iter().any(|p| modulus(p) >= radius) {
        return Err(Error::ContainmentFailed);
    }
    let outer: Vec<SpherePoint> = circle.iter().map(|z| SpherePoint::from_complex(*z)).collect();
    let separation = inner
        .iter()
        .map(|p| outer.iter().map(|q| p.chordal(q)).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    if separation < tol.tau_ann {
        return Err(Error::ContainmentFailed);
    }
    let img: Vec<C64> = circle
        .iter()
        .map(|z| f.eval_raw(&SpherePoint::from_complex(*z)).unwrap().affine())
        .collect();
    let (wind, _) = winding(&img, C64::new(0.0, 0.0));
    if wind != d as i64 {
        return Err(Error::DegreeMismatch {
            found: wind,
            expected: d as i64,
        });
    }
    let r_in = inner.iter().map(modulus).fold(0.0, f64::max);
    let mut witnesses = Vec::new();
    for n in 1..=WITNESS_PERIOD {
        for p in periodic_points(h, n, tol)? {
            if p.is_infinity() {
                continue;
            }
            let in_inner = f.eval_raw(&p).is_some_and(|q| modulus(&q) < radius);
            witnesses.push(PeriodicWitness {
                point: p,
                period: n,
                in_inner,
            });
        }
    }
    Ok(PolyLikeCertificate {
        degree: d,
        k: None,
        inner_boundary: inner,
        outer_boundary: outer,
        excluded: SpherePoint::infinity(),
        seed_radius: radius,
        separation,
        modulus_lower_bound: (radius / r_in).ln() / std::f64::consts::TAU,
        winding: wind,
        witnesses,
        sink: Some(SpherePoint::infinity()),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JuliaLocalization {
    /// Largest chordal distance from a sampled Julia point to the target
    /// region, zero when all samples lie inside.
    pub support_excess: f64,
    pub support_inside: bool,
    pub orbit_converges: bool,
    pub pass: bool,
}

/// Sampled check that `J(h_k) ⊂ B_{1,k}⁻¹(V)` for `V` the chordal ball of
/// radius `v_radius` around `b`, and that an orbit started off
/// `B_{1,k}⁻¹(V)` stays off it and converges.
#[allow(clippy::too_many_arguments)]
pub fn julia_localization_check(
    input: &PolyLikeInput,
    hyp: &JuliaHypotheses,
    k: usize,
    v_radius: f64,
    n_samples: usize,
    seed: u64,
    exec: Exec,
    tol: &Tolerances,
) -> Result<JuliaLocalization> {
    let h = input.hs[k].to_float();
    let b1 = input.b1[k].to_float();
    let mu = mme::mme_sample(&h, n_samples, 30, seed, exec, tol)?;
    let excess = par::map_slice(exec, mu.atoms(), |(p, _)| {
        b1.apply_raw(p).map(|q| (q.chordal(&hyp.b) - v_radius).max(0.0)).unwrap_or(1.0)
    })
    .into_iter()
    .fold(0.0, f64::max);
    let start = b1.inverse().apply_raw(&antipode(&hyp.b)).unwrap();
    let orbit_converges = escaping_orbit(&h, &start, |p| {
        b1.apply_raw(p).is_some_and(|q| q.chordal(&hyp.b) > v_radius)
    });
    Ok(JuliaLocalization {
        support_excess: excess,
        support_inside: excess == 0.0,
        orbit_converges,
        pass: excess == 0.0 && orbit_converges,
    })
}

/// Same check for a polynomial disk certificate: Julia samples in `U′`
/// and the orbit of a point outside `U` tends to ∞.
pub fn julia_localization_polynomial(
    h: &ProjectiveRatMap,
    cert: &PolyLikeCertificate,
    n_samples: usize,
    seed: u64,
    exec: Exec,
    tol: &Tolerances,
) -> Result<JuliaLocalization> {
    let f = h.to_float();
    let radius = cert.seed_radius;
    let mu = mme::mme_sample(&f, n_samples, 30, seed, exec, tol)?;
    let excess = par::map_slice(exec, mu.atoms(), |(p, _)| {
        let img = f.eval_raw(p).map(|q| modulus(&q)).unwrap_or(f64::INFINITY);
        if img < radius {
            0.0
        } else {
            p.chordal(&SpherePoint::from_re_im(radius, 0.0)).max(1e-12)
        }
    })
    .into_iter()
    .fold(0.0, f64::max);
    let start = SpherePoint::from_re_im(2.0 * radius, 0.0);
    let orbit_converges = escaping_orbit(&f, &start, |p| modulus(p) > radius);
    Ok(JuliaLocalization {
        support_excess: excess,
        support_inside: excess == 0.0,
        orbit_converges,
        pass: excess == 0.0 && orbit_converges,
    })
}

fn escaping_orbit(h: &ProjectiveRatMap, start: &SpherePoint, outside: impl Fn(&SpherePoint) -> bool) -> bool {
    let mut z = *start;
    let mut prev = z;
    for _ in 0..200 {
        if !outside(&z) {
            return false;
        }
        prev = z;
        z = match h.eval_raw(&z) {
            Some(v) => v,
            None => return false,
        };
    }
    outside(&z) && z.chordal(&prev) < 1e-6
}

#[derive(Clone, Debug)]
pub struct PolylikeReport {
    pub window: usize,
    pub experimental: bool,
    pub flags: Vec<(usize, bool)>,
    /// Levels `(s, s + 1)` of the scalings used as `B₀`, `B₁`.
    pub pair: (usize, usize),
    pub hypotheses: JuliaHypotheses,
    /// Per sample: certificate or the error message.
    pub certificates: Vec<std::result::Result<PolyLikeCertificate, String>>,
}

/// Builds the tri-point scheme of `fam` to `window` levels, finds
/// `window` consecutive fully ramified times starting at `s`, and extracts
/// certificates from the pair `(A_s, A_{s+1})` at every sample.
pub fn polylike_driver(fam: &FamilySpec, window: usize, tol: &Tolerances, exec: Exec) -> Result<PolylikeReport> {
    if window < 2 {
        return Err(Error::Schema("window must be at least 2".into()));
    }
    let scheme = rescaling::left_class_limits(fam, window, &ScalingRule::TriPoint, tol, exec)?;
    let flags = rescaling::fully_ramified_times(&scheme, tol)?;
    if !flags.iter().take(window).all(|f| f.1) || flags.len() < window {
        let run = flags.iter().take_while(|f| f.1).count();
        return Err(Error::HypothesisUnmet(format!(
            "{run} consecutive fully ramified times, {window} required"
        )));
    }
    let s = 1;
    let ts = fam.schedule.values();
    let hs: Vec<ProjectiveRatMap> = ts
        .iter()
        .map(|t| rescaling::sample_family_exact(fam, t))
        .collect::<Result<_>>()?;
    let input = PolyLikeInput {
        hs,
        b0: scheme.scalings[s].clone(),
        b1: scheme.scalings[s + 1].clone(),
        eps: scheme.eps.clone(),
    };
    let hypotheses = check_julia_hypotheses(&input, tol)?;
    let certificates = if hypotheses.pass {
        par::map_indexed(exec, ts.len(), |k| {
            extract_polynomial_like(&input, &hypotheses, k, SEED_RADIUS, tol).map_err(|e| e.to_string())
        })
    } else {
        vec![Err(hypotheses.diagnostic.clone()); ts.len()]
    };
    Ok(PolylikeReport {
        window,
        experimental: window < 5,
        flags,
        pair: (s, s + 1),
        hypotheses,
        certificates,
    })
}

/// Exact Möbius conjugate `M ∘ h ∘ M⁻¹` of every sample, with scalings
/// transported so that `B_i ∘ M⁻¹` replaces `B_i`.
pub fn conjugate_input(input: &PolyLikeInput, m: &XMoebius) -> Result<PolyLikeInput> {
    let inv = m.inverse();
    let hs = input
        .hs
        .iter()
        .map(|h| rescaling::post_compose_exact(&rescaling::pre_compose_exact(h, &inv)?, m))
        .collect::<Result<_>>()?;
    Ok(PolyLikeInput {
        hs,
        b0: input.b0.iter().map(|b| b.compose(&inv)).collect(),
        b1: input.b1.iter().map(|b| b.compose(&inv)).collect(),
        eps: input.eps.clone(),
    })
}

/// Exact Möbius map from integer entries.
pub fn xmoebius_from_ints(m: [[(i64, i64); 2]; 2]) -> XMoebius {
    let g = |(re, im): (i64, i64)| GaussRat::from_ints(re, im);
    XMoebius([[g(m[0][0]), g(m[0][1])], [g(m[1][0]), g(m[1][1])]])
}
