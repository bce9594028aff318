//! Degenerating families: sampling, post-scalings, left-class limits and
//! transition maps, iterate limits, limiting depth profiles and the
//! growth-case driver for limits of pulled-back measures.
//!
//! Samples are taken at exact rational parameters. Post-scalings are
//! computed exactly level by level (`A_{n+1,k}` normalizes
//! `f_k ∘ A_{n,k}⁻¹` at a reference triple), and limits are extrapolated in
//! `ε = t` (or `1/t` for families degenerating at infinity).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::forms;
use crate::limits::{self, MapLimit};
use crate::measures::{self, AtomicMeasure};
use crate::mme;
use crate::par::{self, Exec};
use crate::ratmap::{Coeffs, ProjectiveRatMap, ReducedForm};
use crate::scalar::{GaussRat, Scalar, C64};
use crate::sphere::{MoebiusClass, MoebiusMap, SpherePoint};

/// Largest degree for which `φ_n` is assembled by composition.
pub const MAX_COMPOSE_DEGREE: usize = 256;
/// Levels whose direct limit `lim A_{n,k} ∘ f_k^n` is cross-checked.
pub const DIRECT_LEVELS: usize = 3;

/// Polynomial in `t`, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TPoly(pub Vec<GaussRat>);

impl TPoly {
    pub fn constant(c: GaussRat) -> Self {
        TPoly(vec![c])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        TPoly(c.iter().map(|x| GaussRat::from_ints(*x, 0)).collect())
    }

    pub fn eval(&self, t: &GaussRat) -> GaussRat {
        let mut acc = GaussRat::zero();
        for c in self.0.iter().rev() {
            acc = acc.mul(t).add(c);
        }
        acc
    }

    pub fn eval_c64(&self, t: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            acc = acc * t + c.to_c64();
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `t → 0`.
    Zero,
    /// `t → ∞`.
    Infinity,
}

/// Geometric schedule `t_k = start · ratio^k`, `k < count`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub start: BigRational,
    pub ratio: BigRational,
    pub count: usize,
}

impl Schedule {
    pub fn geometric(start: BigRational, ratio: BigRational, count: usize) -> Result<Self> {
        if start.is_zero() || ratio.is_zero() || ratio.abs() == BigRational::one() || count == 0 {
            return Err(Error::Schema("schedule needs nonzero start, |ratio| ≠ 1, count ≥ 1".into()));
        }
        Ok(Schedule { start, ratio, count })
    }

    /// Convenience constructor from `num/den` pairs.
    pub fn from_fracs(start: (i64, i64), ratio: (i64, i64), count: usize) -> Result<Self> {
        Self::geometric(
            BigRational::new(BigInt::from(start.0), BigInt::from(start.1)),
            BigRational::new(BigInt::from(ratio.0), BigInt::from(ratio.1)),
            count,
        )
    }

    pub fn direction(&self) -> Direction {
        if self.ratio.abs() < BigRational::one() {
            Direction::Zero
        } else {
            Direction::Infinity
        }
    }

    /// `k`-th value, also beyond `count`.
    pub fn value(&self, k: usize) -> GaussRat {
        let mut t = self.start.clone();
        for _ in 0..k {
            t *= &self.ratio;
        }
        GaussRat::new(t, BigRational::zero())
    }

    pub fn values(&self) -> Vec<GaussRat> {
        (0..self.count).map(|k| self.value(k)).collect()
    }

    /// Extrapolation variable of a parameter value.
    pub fn eps_of(&self, t: &GaussRat) -> f64 {
        let v = t.to_c64().re;
        match self.direction() {
            Direction::Zero => v,
            Direction::Infinity => 1.0 / v,
        }
    }

    pub fn eps(&self) -> Vec<f64> {
        self.values().iter().map(|t| self.eps_of(t)).collect()
    }
}

/// Family `t ↦ [Σ a_i(t) z^i w^{d−i} : Σ b_i(t) z^i w^{d−i}]` with each
/// coefficient a quotient of polynomials in `t`. Coefficients are listed as
/// `a_0..a_d, b_0..b_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub degree: usize,
    pub coeff_num: Vec<TPoly>,
    pub coeff_den: Vec<TPoly>,
    pub schedule: Schedule,
}

impl FamilySpec {
    pub fn new(degree: usize, coeff_num: Vec<TPoly>, coeff_den: Vec<TPoly>, schedule: Schedule) -> Result<Self> {
        let n = 2 * degree + 2;
        if coeff_num.len() != n || coeff_den.len() != n {
            return Err(Error::Schema(format!("family needs {n} coefficient numerators and denominators")));
        }
        if coeff_den.iter().any(|p| p.0.iter().all(|c| c.is_zero())) {
            return Err(Error::Schema("zero denominator polynomial".into()));
        }
        Ok(FamilySpec {
            degree,
            coeff_num,
            coeff_den,
            schedule,
        })
    }

    /// Family with polynomial coefficients (unit denominators).
    pub fn polynomial_coeffs(degree: usize, coeff_num: Vec<TPoly>, schedule: Schedule) -> Result<Self> {
        let den = vec![TPoly::from_ints(&[1]); coeff_num.len()];
        Self::new(degree, coeff_num, den, schedule)
    }

    /// The same family with every coefficient constant in `t`.
    pub fn constant(f: &ProjectiveRatMap, schedule: Schedule) -> Result<Self> {
        let (num, den) = f
            .exact_coeffs()
            .ok_or_else(|| Error::Schema("constant family needs exact coefficients".into()))?;
        let c: Vec<TPoly> = num.iter().chain(den).map(|c| TPoly::constant(c.clone())).collect();
        Self::polynomial_coeffs(f.degree(), c, schedule)
    }
}

/// Exact specialization at `t`.
pub fn sample_family_exact(fam: &FamilySpec, t: &GaussRat) -> Result<ProjectiveRatMap> {
    let mut c = Vec::with_capacity(fam.coeff_num.len());
    for (n, d) in fam.coeff_num.iter().zip(&fam.coeff_den) {
        let dv = d.eval(t);
        if dv.is_zero() {
            return Err(Error::SpecializationDegenerate);
        }
        c.push(n.eval(t).div(&dv));
    }
    let d = fam.degree;
    let f = ProjectiveRatMap::exact(d, c[..=d].to_vec(), c[d + 1..].to_vec())
        .map_err(|_| Error::SpecializationDegenerate)?;
    if f.resultant_exact().map(|r| r.is_zero()).unwrap_or(false) {
        return Err(Error::SpecializationDegenerate);
    }
    Ok(f)
}

/// Float specialization at a complex parameter.
pub fn sample_family(fam: &FamilySpec, t: C64, tol: &Tolerances) -> Result<ProjectiveRatMap> {
    let mut c = Vec::with_capacity(fam.coeff_num.len());
    for (n, d) in fam.coeff_num.iter().zip(&fam.coeff_den) {
        let dv = d.eval_c64(t);
        if dv.norm() == 0.0 {
            return Err(Error::SpecializationDegenerate);
        }
        c.push(n.eval_c64(t) / dv);
    }
    let d = fam.degree;
    let f = ProjectiveRatMap::float(d, c[..=d].to_vec(), c[d + 1..].to_vec())
        .map_err(|_| Error::SpecializationDegenerate)?;
    if f.is_degenerate(tol)? {
        return Err(Error::SpecializationDegenerate);
    }
    Ok(f)
}

/// Float copy of an exact map with an exact rescaling against overflow.
pub fn exact_to_float(f: &ProjectiveRatMap) -> Result<ProjectiveRatMap> {
    match f.coeffs() {
        Coeffs::Exact { num, den } => {
            let all: Vec<GaussRat> = num.iter().chain(den).cloned().collect();
            let v = limits::scaled_float(&all);
            let d = f.degree();
            ProjectiveRatMap::float(d, v[..=d].to_vec(), v[d + 1..].to_vec())
        }
        Coeffs::Float { .. } => Ok(f.clone()),
    }
}

/// Exact Möbius matrix over Q(i).
#[derive(Clone, Debug, PartialEq)]
pub struct XMoebius(pub [[GaussRat; 2]; 2]);

/// Exact homogeneous point.
pub type XPoint = (GaussRat, GaussRat);

fn xpoint_from_ints(re: i64, im: i64) -> XPoint {
    (GaussRat::from_ints(re, im), GaussRat::one())
}

fn xinfinity() -> XPoint {
    (GaussRat::one(), GaussRat::zero())
}

impl XMoebius {
    pub fn identity() -> Self {
        XMoebius([[GaussRat::one(), GaussRat::zero()], [GaussRat::zero(), GaussRat::one()]])
    }

    pub fn from_tpolys(m: &[[TPoly; 2]; 2], t: &GaussRat) -> Self {
        XMoebius([[m[0][0].eval(t), m[0][1].eval(t)], [m[1][0].eval(t), m[1][1].eval(t)]])
    }

    pub fn det(&self) -> GaussRat {
        let m = &self.0;
        m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0]))
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &XMoebius) -> XMoebius {
        let (a, b) = (&self.0, &o.0);
        let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
        XMoebius([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]).normalized()
    }

    /// Inverse up to scale (adjugate).
    pub fn inverse(&self) -> XMoebius {
        let m = &self.0;
        XMoebius([[m[1][1].clone(), m[0][1].neg()], [m[1][0].neg(), m[0][0].clone()]])
    }

    /// Divides by the first nonzero entry to keep sizes bounded.
    pub fn normalized(&self) -> XMoebius {
        let p = self.0.iter().flatten().find(|c| !c.is_zero()).cloned();
        match p {
            Some(p) => XMoebius([
                [self.0[0][0].div(&p), self.0[0][1].div(&p)],
                [self.0[1][0].div(&p), self.0[1][1].div(&p)],
            ]),
            None => self.clone(),
        }
    }

    pub fn apply(&self, p: &XPoint) -> XPoint {
        let m = &self.0;
        (
            m[0][0].mul(&p.0).add(&m[0][1].mul(&p.1)),
            m[1][0].mul(&p.0).add(&m[1][1].mul(&p.1)),
        )
    }

    pub fn to_float(&self) -> MoebiusMap {
        let v = limits::scaled_float(&[
            self.0[0][0].clone(),
            self.0[0][1].clone(),
            self.0[1][0].clone(),
            self.0[1][1].clone(),
        ]);
        MoebiusMap::new(v[0], v[1], v[2], v[3])
    }

    /// Möbius map sending `p[0], p[1], p[2]` to `0, 1, ∞`; `None` when two
    /// of the points coincide.
    pub fn fit_standard(p: &[XPoint; 3]) -> Option<XMoebius> {
        let lin = |q: &XPoint, x: &XPoint| q.1.mul(&x.0).sub(&q.0.mul(&x.1));
        let c1 = lin(&p[2], &p[1]);
        let c3 = lin(&p[0], &p[1]);
        if c1.is_zero() || c3.is_zero() || lin(&p[0], &p[2]).is_zero() {
            return None;
        }
        Some(
            XMoebius([
                [p[0].1.mul(&c1), p[0].0.neg().mul(&c1)],
                [p[2].1.mul(&c3), p[2].0.neg().mul(&c3)],
            ])
            .normalized(),
        )
    }
}

fn exact_parts(f: &ProjectiveRatMap) -> Result<(Vec<GaussRat>, Vec<GaussRat>)> {
    f.exact_coeffs()
        .map(|(n, d)| (n.to_vec(), d.to_vec()))
        .ok_or_else(|| Error::Schema("exact backend required".into()))
}

/// Exact `M ∘ f`.
pub fn post_compose_exact(f: &ProjectiveRatMap, m: &XMoebius) -> Result<ProjectiveRatMap> {
    let (n, d) = exact_parts(f)?;
    let [[a, b], [c, dd]] = &m.0;
    let num: Vec<GaussRat> = n.iter().zip(&d).map(|(p, q)| a.mul(p).add(&b.mul(q))).collect();
    let den: Vec<GaussRat> = n.iter().zip(&d).map(|(p, q)| c.mul(p).add(&dd.mul(q))).collect();
    ProjectiveRatMap::exact(f.degree(), num, den)
}

/// Exact `f ∘ M`.
pub fn pre_compose_exact(f: &ProjectiveRatMap, m: &XMoebius) -> Result<ProjectiveRatMap> {
    let (n, d) = exact_parts(f)?;
    let [[a, b], [c, dd]] = &m.0;
    let lz = vec![b.clone(), a.clone()];
    let lw = vec![dd.clone(), c.clone()];
    ProjectiveRatMap::exact(
        f.degree(),
        forms::substitute(&n, &lz, &lw),
        forms::substitute(&d, &lz, &lw),
    )
}

fn eval_exact(f: &ProjectiveRatMap, p: &XPoint) -> Result<XPoint> {
    let (n, d) = exact_parts(f)?;
    Ok((forms::eval(&n, &p.0, &p.1), forms::eval(&d, &p.0, &p.1)))
}

/// Halton radical inverse as an exact rational.
fn halton(mut k: u64, base: u64) -> BigRational {
    let mut f = BigRational::one();
    let mut r = BigRational::zero();
    let b = BigRational::from_integer(BigInt::from(base));
    while k > 0 {
        f /= &b;
        r += &f * BigRational::from_integer(BigInt::from(k % base));
        k /= base;
    }
    r
}

/// Number of reference triples tried before `ScalingFailed`.
pub const MAX_REDRAWS: usize = 12;

/// The fixed reference-triple stream: `(0, 1, ∞)`, `(1, −1, ∞)`,
/// `(0, 1, −1)`, `(1, i, −1)`, then Halton points of the square `[−2, 2]²`.
pub fn reference_triple(index: usize) -> [XPoint; 3] {
    match index {
        0 => [xpoint_from_ints(0, 0), xpoint_from_ints(1, 0), xinfinity()],
        1 => [xpoint_from_ints(1, 0), xpoint_from_ints(-1, 0), xinfinity()],
        2 => [xpoint_from_ints(0, 0), xpoint_from_ints(1, 0), xpoint_from_ints(-1, 0)],
        3 => [xpoint_from_ints(1, 0), xpoint_from_ints(0, 1), xpoint_from_ints(-1, 0)],
        _ => {
            let four = BigRational::from_integer(BigInt::from(4));
            let two = BigRational::from_integer(BigInt::from(2));
            let pt = |k: u64| -> XPoint {
                let re = &four * halton(k, 2) - &two;
                let im = &four * halton(k, 3) - &two;
                (GaussRat::new(re, im), GaussRat::one())
            };
            let j = 3 * (index as u64 - 4);
            [pt(j + 1), pt(j + 2), pt(j + 3)]
        }
    }
}

/// Post-scaling rule for a scheme.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalingRule {
    /// Level-by-level tri-point normalization from the reference stream.
    TriPoint,
    /// Explicit scalings `A_n(t)` for `n = 1..=N` as matrices of polynomials.
    Explicit(Vec<[[TPoly; 2]; 2]>),
}

#[derive(Clone, Debug)]
pub struct ScalingScheme {
    pub degree: usize,
    pub levels: usize,
    pub eps: Vec<f64>,
    /// `A_{n,k}` for `n = 0..=N` (`A_0 = id`).
    pub scalings: Vec<Vec<XMoebius>>,
    /// `φ_{n,n+1}` for `n = 0..N` (`φ_{0,1} = φ_1`).
    pub transitions: Vec<MapLimit>,
    /// Reference-triple index per transition (tri-point rule).
    pub triples: Vec<Option<usize>>,
    /// `φ_n = φ_{n−1,n} ∘ ⋯ ∘ φ_{0,1}` for `n = 1..=N` while the degree stays
    /// at most `MAX_COMPOSE_DEGREE`.
    pub phi: Vec<Option<ProjectiveRatMap>>,
    /// Coefficient distance between `φ_n` and the direct limit of
    /// `A_{n,k} ∘ f_k^n` (first `DIRECT_LEVELS` levels; `None` when the
    /// direct sequence is not resolvable on the schedule).
    pub direct_residuals: Vec<Option<f64>>,
}

impl ScalingScheme {
    /// `φ_n`, `n ≥ 1`.
    pub fn phi(&self, n: usize) -> Option<&ProjectiveRatMap> {
        self.phi.get(n - 1).and_then(|p| p.as_ref())
    }

    /// `φ_{n,n+1}`.
    pub fn transition(&self, n: usize) -> &ProjectiveRatMap {
        self.transitions[n].best()
    }
}

fn transition_samples(
    fs: &[ProjectiveRatMap],
    prev: &[XMoebius],
    next: &[XMoebius],
    exec: Exec,
) -> Result<Vec<ProjectiveRatMap>> {
    par::map_indexed(exec, fs.len(), |k| {
        let h = pre_compose_exact(&fs[k], &prev[k].inverse())?;
        exact_to_float(&post_compose_exact(&h, &next[k])?)
    })
    .into_iter()
    .collect()
}

fn tri_point_level(
    fs: &[ProjectiveRatMap],
    eps: &[f64],
    prev: &[XMoebius],
    level: usize,
    tol: &Tolerances,
    exec: Exec,
) -> Result<(Vec<XMoebius>, MapLimit, usize)> {
    let mut first_err = None;
    for idx in 0..MAX_REDRAWS {
        let triple = reference_triple(idx);
        let fits: Vec<Option<XMoebius>> = par::map_indexed(exec, fs.len(), |k| {
            let h = pre_compose_exact(&fs[k], &prev[k].inverse()).ok()?;
            let img = [
                eval_exact(&h, &triple[0]).ok()?,
                eval_exact(&h, &triple[1]).ok()?,
                eval_exact(&h, &triple[2]).ok()?,
            ];
            XMoebius::fit_standard(&img)
        });
        if fits.iter().any(|f| f.is_none()) {
            continue;
        }
        let next: Vec<XMoebius> = fits.into_iter().map(|f| f.unwrap()).collect();
        let samples = transition_samples(fs, prev, &next, exec)?;
        match limits::map_limit(eps, &samples, level, tol) {
            Ok(lim) => {
                let red = lim.best().reduce(tol)?;
                if red.reduction_degree() >= 1 {
                    return Ok((next, lim, idx));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(Error::ScalingFailed))
}

/// Builds `A_{n,k}`, `φ_{n,n+1}` and `φ_n` for `n ≤ levels`.
pub fn left_class_limits(
    fam: &FamilySpec,
    levels: usize,
    rule: &ScalingRule,
    tol: &Tolerances,
    exec: Exec,
) -> Result<ScalingScheme> {
    if levels == 0 {
        return Err(Error::Schema("levels must be at least 1".into()));
    }
    let ts = fam.schedule.values();
    let eps = fam.schedule.eps();
    let fs: Vec<ProjectiveRatMap> = ts.iter().map(|t| sample_family_exact(fam, t)).collect::<Result<_>>()?;
    let k = fs.len();
    let mut scalings = vec![vec![XMoebius::identity(); k]];
    let mut transitions = Vec::with_capacity(levels);
    let mut triples = Vec::with_capacity(levels);
    for n in 0..levels {
        match rule {
            ScalingRule::TriPoint => {
                let (next, lim, idx) = tri_point_level(&fs, &eps, &scalings[n], n + 1, tol, exec)?;
                scalings.push(next);
                transitions.push(lim);
                triples.push(Some(idx));
            }
            ScalingRule::Explicit(ms) => {
                let m = ms
                    .get(n)
                    .ok_or_else(|| Error::Schema(format!("no explicit scaling for level {}", n + 1)))?;
                let next: Vec<XMoebius> = ts.iter().map(|t| XMoebius::from_tpolys(m, t)).collect();
                let samples = transition_samples(&fs, &scalings[n], &next, exec)?;
                transitions.push(limits::map_limit(&eps, &samples, n + 1, tol)?);
                scalings.push(next);
                triples.push(None);
            }
        }
    }
    let phi = compose_levels(&transitions, fam.degree)?;
    let mut direct_residuals = Vec::new();
    for n in 1..=levels.min(DIRECT_LEVELS) {
        let samples: Result<Vec<ProjectiveRatMap>> = par::map_indexed(exec, k, |j| {
            let fn_ = fs[j].iterate(n, tol)?;
            exact_to_float(&post_compose_exact(&fn_, &scalings[n][j])?)
        })
        .into_iter()
        .collect();
        let res = samples
            .ok()
            .and_then(|s| limits::map_limit(&eps, &s, n, tol).ok())
            .and_then(|lim| phi[n - 1].as_ref().map(|p| p.coefficient_distance(&lim.map)));
        direct_residuals.push(res);
    }
    Ok(ScalingScheme {
        degree: fam.degree,
        levels,
        eps,
        scalings,
        transitions,
        triples,
        phi,
        direct_residuals,
    })
}

fn compose_levels(transitions: &[MapLimit], d: usize) -> Result<Vec<Option<ProjectiveRatMap>>> {
    let mut out: Vec<Option<ProjectiveRatMap>> = Vec::with_capacity(transitions.len());
    let mut cur = Some(transitions[0].best().clone());
    out.push(cur.clone());
    let mut deg = d;
    for t in &transitions[1..] {
        deg *= d;
        cur = match cur {
            Some(c) if deg <= MAX_COMPOSE_DEGREE => Some(t.best().compose(&c)?),
            _ => None,
        };
        out.push(cur.clone());
    }
    Ok(out)
}

/// Tri-point post-scalings of a sequence sampled at `eps → 0`. Exact maps use
/// exact fits; float maps use float fits.
pub fn post_scaling_find(
    fs: &[ProjectiveRatMap],
    eps: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<MoebiusMap>, MapLimit)> {
    if fs.iter().all(|f| f.exact_coeffs().is_some()) {
        let id = vec![XMoebius::identity(); fs.len()];
        let (a, lim, _) = tri_point_level(fs, eps, &id, 1, tol, Exec::Sequential)
            .map_err(|_| Error::ScalingFailed)?;
        return Ok((a.iter().map(|m| m.to_float()).collect(), lim));
    }
    for idx in 0..MAX_REDRAWS {
        let triple = reference_triple(idx);
        let pts: Vec<SpherePoint> = triple
            .iter()
            .map(|p| SpherePoint::from_homogeneous(p.0.to_c64(), p.1.to_c64()).expect("nonzero"))
            .collect();
        let mut a = Vec::with_capacity(fs.len());
        let mut ok = true;
        for f in fs {
            let img: Vec<Option<SpherePoint>> = pts.iter().map(|p| f.eval_raw(p)).collect();
            if img.iter().any(|x| x.is_none()) {
                ok = false;
                break;
            }
            let img = [img[0].unwrap(), img[1].unwrap(), img[2].unwrap()];
            let m = crate::sphere::fit_to_standard(&img).normalized();
            if m.det_ratio() < 1e-14 {
                ok = false;
                break;
            }
            a.push(m);
        }
        if !ok {
            continue;
        }
        let samples: Vec<ProjectiveRatMap> = fs.iter().zip(&a).map(|(f, m)| f.post_compose(m)).collect::<Result<_>>()?;
        if let Ok(lim) = limits::map_limit(eps, &samples, 1, tol) {
            if lim.best().reduce(tol)?.reduction_degree() >= 1 {
                return Ok((a, lim));
            }
        }
    }
    Err(Error::ScalingFailed)
}

/// Classified limit of `A_{n′,k} ∘ A_{n,k}⁻¹`.
pub fn pairwise_limit(
    scalings: &[Vec<XMoebius>],
    eps: &[f64],
    n: usize,
    n2: usize,
    tol: &Tolerances,
) -> Result<MoebiusClass> {
    let seq: Vec<MoebiusMap> = (0..eps.len())
        .map(|k| scalings[n2][k].compose(&scalings[n][k].inverse()).to_float())
        .collect();
    let (lim, _) = limits::moebius_limit(eps, &seq, tol)?;
    Ok(lim.classify(tol))
}

/// Flags for `n = 1..=N`: the transition `φ_{n−1,n}` is nondegenerate of
/// degree `d`.
pub fn fully_ramified_times(scheme: &ScalingScheme, tol: &Tolerances) -> Result<Vec<(usize, bool)>> {
    scheme
        .transitions
        .iter()
        .enumerate()
        .map(|(i, t)| Ok((i + 1, !t.best().is_degenerate(tol)?)))
        .collect()
}

/// Holes of `φ_n` with depths, `n = 1..=N`, from the depth law
/// `d_h(φ_{n+1}) = d·d_h(φ_n) + deg_h(φ̃_n)·d_{φ̃_n(h)}(φ_{n,n+1})`
/// applied to the transitions; also returns `deg φ̃_n`.
pub fn hole_profile(scheme: &ScalingScheme, tol: &Tolerances) -> Result<(Vec<Vec<(SpherePoint, usize)>>, Vec<usize>)> {
    let d = scheme.degree;
    let first = scheme.transition(0).reduce(tol)?;
    let mut holes: Vec<(SpherePoint, usize)> = first.holes.iter().map(|h| (h.point, h.depth)).collect();
    let mut red = first.reduction.clone();
    let mut profile = vec![holes.clone()];
    let mut degs = vec![first.reduction_degree()];
    for n in 1..scheme.levels {
        let t = scheme.transition(n).reduce(tol)?;
        let mut cands: Vec<SpherePoint> = holes.iter().map(|h| h.0).collect();
        let rdeg = red.degree();
        if rdeg == 0 {
            let c = red.eval_raw(&SpherePoint::zero()).ok_or(Error::HoleEvaluation)?;
            if t.holes.iter().any(|h| h.point.chordal(&c) <= tol.tau_cluster) {
                return Err(Error::Indeterminate);
            }
        } else {
            for h in &t.holes {
                for (p, _) in red.preimages(&h.point, tol)? {
                    if !cands.iter().any(|q| q.chordal(&p) <= tol.tau_cluster) {
                        cands.push(p);
                    }
                }
            }
        }
        let mut next = Vec::new();
        for x in cands {
            let prev = holes
                .iter()
                .find(|h| h.0.chordal(&x) <= tol.tau_cluster)
                .map(|h| h.1)
                .unwrap_or(0);
            let (ld, img) = if rdeg == 0 {
                (0, None)
            } else {
                (red.local_degree(&x, tol)?, red.eval_raw(&x))
            };
            let inner = match img {
                Some(y) => t.depth_at(&y, tol.tau_cluster),
                None => 0,
            };
            let depth = d * prev + ld * inner;
            if depth > 0 {
                next.push((x, depth));
            }
        }
        red = t.reduction.compose(&red)?;
        degs.push(red.degree());
        holes = next;
        profile.push(holes.clone());
    }
    Ok((profile, degs))
}

/// Exact holes of `φ_n` from the composed limits, when available.
pub fn hole_profile_composed(scheme: &ScalingScheme, tol: &Tolerances) -> Result<Vec<Option<ReducedForm>>> {
    scheme
        .phi
        .iter()
        .map(|p| p.as_ref().map(|m| m.reduce(tol)).transpose())
        .collect()
}

#[derive(Clone, Debug)]
pub struct DepthProfile {
    /// Per atom: position, ratios `d_h(φ_n)/d^n` for `n = 1..=N`, limit, error bar.
    pub atoms: Vec<(SpherePoint, Vec<f64>, f64, f64)>,
    pub eta: AtomicMeasure,
}

/// Limit of `η_{φ_n}/d^n` with monotonicity check and Aitken tail.
pub fn depth_profile_limit(scheme: &ScalingScheme, tol: &Tolerances) -> Result<DepthProfile> {
    if scheme.levels < 3 {
        return Err(Error::Schema("depth profile needs at least 3 levels".into()));
    }
    let (profile, _) = hole_profile(scheme, tol)?;
    let d = scheme.degree as f64;
    let mut pts: Vec<SpherePoint> = Vec::new();
    for level in &profile {
        for (p, _) in level {
            if !pts.iter().any(|q| q.chordal(p) <= tol.tau_cluster) {
                pts.push(*p);
            }
        }
    }
    let mut atoms = Vec::new();
    let mut eta = Vec::new();
    for p in pts {
        let ratios: Vec<f64> = profile
            .iter()
            .enumerate()
            .map(|(i, level)| {
                let depth = level
                    .iter()
                    .find(|h| h.0.chordal(&p) <= tol.tau_cluster)
                    .map(|h| h.1)
                    .unwrap_or(0);
                depth as f64 / d.powi(i as i32 + 1)
            })
            .collect();
        if ratios.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err(Error::NonMonotone);
        }
        let (lim, err) = limits::aitken(&ratios);
        if lim > 1e-12 {
            eta.push((p, lim));
        }
        atoms.push((p, ratios, lim, err));
    }
    Ok(DepthProfile {
        atoms,
        eta: AtomicMeasure::new(eta, tol.tau_pt)?,
    })
}

#[derive(Clone, Debug)]
pub struct IterateLimit {
    pub n: usize,
    pub limit: MapLimit,
    pub reduced: ReducedForm,
}

/// Normalized coefficient limits of `f_t^{∘n}` for `n = 1..=levels`.
pub fn iterate_limits(fam: &FamilySpec, levels: usize, tol: &Tolerances, exec: Exec) -> Result<Vec<IterateLimit>> {
    let ts = fam.schedule.values();
    let eps = fam.schedule.eps();
    let fs: Vec<ProjectiveRatMap> = ts.iter().map(|t| sample_family_exact(fam, t)).collect::<Result<_>>()?;
    let mut cur = fs.clone();
    let mut out = Vec::with_capacity(levels);
    for n in 1..=levels {
        if n > 1 {
            cur = par::map_indexed(exec, fs.len(), |k| {
                let g = fs[k].compose(&cur[k])?;
                if g.max_bits() > tol.exact_bits_cap {
                    return Err(Error::CoefficientOverflow);
                }
                Ok(g)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        }
        let limit = if cur.windows(2).all(|w| w[0] == w[1]) {
            // Sequence constant on the schedule: the limit is exact.
            MapLimit {
                map: exact_to_float(&cur[0])?,
                exact: Some(cur[0].clone()),
                error: 0.0,
            }
        } else {
            let samples: Vec<ProjectiveRatMap> = cur.iter().map(exact_to_float).collect::<Result<_>>()?;
            limits::map_limit(&eps, &samples, n, tol)?
        };
        let reduced = limit.best().reduce(tol)?;
        out.push(IterateLimit { n, limit, reduced });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthCase {
    SmallGrowth,
    PotentialGoodReduction,
    LargeGrowth,
}

impl GrowthCase {
    pub fn label(&self) -> &'static str {
        match self {
            GrowthCase::SmallGrowth => "small-growth",
            GrowthCase::PotentialGoodReduction => "potential-good-reduction",
            GrowthCase::LargeGrowth => "large-growth",
        }
    }
}

/// Case from `deg φ̃_n / d^n` over the computed window: constant and
/// positive over the last three levels, or dropping by a factor `d`
/// somewhere in that tail.
pub fn growth_case(red_degrees: &[usize], d: usize) -> Result<GrowthCase> {
    let r: Vec<f64> = red_degrees
        .iter()
        .enumerate()
        .map(|(i, k)| *k as f64 / (d as f64).powi(i as i32 + 1))
        .collect();
    if r.len() < 3 {
        return Err(Error::CaseUndetermined);
    }
    let tail = &r[r.len() - 3..];
    if tail[0] > 0.0 && tail.iter().all(|x| (x - tail[0]).abs() <= 1e-12) {
        return Ok(GrowthCase::LargeGrowth);
    }
    if tail.windows(2).any(|w| w[1] <= w[0] / d as f64 + 1e-12) {
        return Ok(GrowthCase::SmallGrowth);
    }
    Err(Error::CaseUndetermined)
}

/// `lim_k (1/d^n)(f_{t_k}^{∘n})^* μ` along the schedule extended
/// geometrically past its end, stopping when consecutive samples are within
/// `step_tol`. Returns the last measure and the consecutive distances.
pub fn pulled_back_limit(
    fam: &FamilySpec,
    mu: &AtomicMeasure,
    n: usize,
    step_tol: f64,
    max_extra: usize,
    tol: &Tolerances,
) -> Result<(AtomicMeasure, Vec<f64>)> {
    let d = fam.degree as f64;
    let mut prev: Option<AtomicMeasure> = None;
    let mut steps = Vec::new();
    let start = fam.schedule.count.saturating_sub(1);
    for k in start..start + max_extra {
        let t = fam.schedule.value(k);
        let f = exact_to_float(&sample_family_exact(fam, &t)?)?;
        let mut m = mu.clone();
        for _ in 0..n {
            m = measures::pull_back(&f, &m, tol)?.scaled(1.0 / d);
        }
        if let Some(p) = &prev {
            let s = measures::weakstar_distance(p, &m, tol.harmonic_l);
            steps.push(s);
            if s < step_tol {
                return Ok((m, steps));
            }
        }
        prev = Some(m);
    }
    Err(Error::NotCauchy(*steps.last().unwrap_or(&f64::INFINITY)))
}

#[derive(Clone, Debug)]
pub struct PullbackLimitReport {
    pub case: GrowthCase,
    /// `deg φ̃_n / d^n`, `n = 1..=N`.
    pub degree_ratios: Vec<f64>,
    /// `(1/d^N)(g_N)^* μ`.
    pub measure: AtomicMeasure,
    pub cauchy_steps: Vec<f64>,
    /// Case prediction: `η` (small growth) or `δ_hole` (potential good reduction).
    pub predicted: Option<AtomicMeasure>,
    pub predicted_distance: Option<f64>,
    /// Distance to the sampled maximal-entropy measure of the last schedule map.
    pub sampler_distance: Option<f64>,
}

/// Options for `pullback_limit`.
#[derive(Clone, Copy, Debug)]
pub struct PullbackLimitOptions {
    /// Levels whose iterate limits `g_n` are computed exactly (exceptionality
    /// and the unique-hole test).
    pub iterate_levels: usize,
    pub sampler_n: usize,
    pub sampler_steps: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for PullbackLimitOptions {
    fn default() -> Self {
        PullbackLimitOptions {
            iterate_levels: 2,
            sampler_n: 0,
            sampler_steps: 30,
            seed: 0,
            exec: Exec::Parallel,
        }
    }
}

/// Growth case and limit of `(1/d^n)(g_n)^* μ` for `n = levels`.
pub fn pullback_limit(
    fam: &FamilySpec,
    mu: &AtomicMeasure,
    levels: usize,
    opts: &PullbackLimitOptions,
    tol: &Tolerances,
) -> Result<PullbackLimitReport> {
    let d = fam.degree;
    let scheme = left_class_limits(fam, levels, &ScalingRule::TriPoint, tol, opts.exec)?;
    let (_, degs) = hole_profile(&scheme, tol)?;
    let degree_ratios: Vec<f64> = degs
        .iter()
        .enumerate()
        .map(|(i, k)| *k as f64 / (d as f64).powi(i as i32 + 1))
        .collect();
    let mut case = growth_case(&degs, d)?;
    let gs = iterate_limits(fam, opts.iterate_levels.min(levels), tol, opts.exec)?;
    let gmaps: Vec<ProjectiveRatMap> = gs.iter().map(|g| g.limit.best().clone()).collect();
    if !measures::is_nonexceptional(mu, &gmaps, tol)? {
        return Err(Error::HypothesisUnmet("μ charges an exceptional point of some g_n".into()));
    }
    let mut predicted = None;
    if case == GrowthCase::LargeGrowth {
        if let Some(g) = gs.last() {
            let total = d.pow(g.n as u32);
            if g.reduced.holes.len() == 1 && g.reduced.holes[0].depth == total {
                case = GrowthCase::PotentialGoodReduction;
                predicted = Some(AtomicMeasure::dirac(g.reduced.holes[0].point));
            }
        }
    } else if scheme.levels >= 3 {
        predicted = Some(depth_profile_limit(&scheme, tol)?.eta);
    }
    let (measure, cauchy_steps) = pulled_back_limit(fam, mu, levels, 1e-4, 60, tol)?;
    let predicted_distance = predicted
        .as_ref()
        .map(|p| measures::weakstar_distance(p, &measure, tol.harmonic_l));
    let sampler_distance = if opts.sampler_n > 0 {
        let t = fam.schedule.value(fam.schedule.count - 1);
        let f = exact_to_float(&sample_family_exact(fam, &t)?)?;
        let s = mme::mme_sample(&f, opts.sampler_n, opts.sampler_steps, opts.seed, opts.exec, tol)?;
        Some(measures::weakstar_distance(&s, &measure, tol.harmonic_l))
    } else {
        None
    };
    Ok(PullbackLimitReport {
        case,
        degree_ratios,
        measure,
        cauchy_steps,
        predicted,
        predicted_distance,
        sampler_distance,
    })
}

/// Table `d_z(g_n)/d^n` for the five levels after `m`, requiring five
/// consecutive fully ramified times there.
pub fn depth_ratio_stability(
    fam: &FamilySpec,
    scheme: &ScalingScheme,
    m: usize,
    tol: &Tolerances,
    exec: Exec,
) -> Result<Vec<Vec<(SpherePoint, f64)>>> {
    let flags = fully_ramified_times(scheme, tol)?;
    let ok = (m + 1..=m + 5).all(|n| flags.get(n - 1).map(|f| f.1).unwrap_or(false));
    if !ok {
        return Err(Error::HypothesisUnmet(format!(
            "fewer than five consecutive fully ramified times after {m}"
        )));
    }
    let d = fam.degree as f64;
    let gs = iterate_limits(fam, m + 5, tol, exec)?;
    Ok(gs[m..]
        .iter()
        .map(|g| {
            g.reduced
                .holes
                .iter()
                .map(|h| (h.point, h.depth as f64 / d.powi(g.n as i32)))
                .collect()
        })
        .collect())
}
