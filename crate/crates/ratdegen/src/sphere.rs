//! Points of the Riemann sphere, the chordal metric, stereographic
//! coordinates, and Möbius maps including rank-one (degenerate) ones.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::scalar::C64;
use serde::{Deserialize, Serialize};

/// A point of the Riemann sphere in homogeneous coordinates `[z : w]`.
///
/// Normalized so that the larger entry is exactly `1` (real, nonnegative,
/// modulus one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    z: C64,
    w: C64,
}

impl SpherePoint {
    /// Returns `None` when both entries vanish or are not finite.
    pub fn from_homogeneous(z: C64, w: C64) -> Option<Self> {
        let (az, aw) = (z.norm(), w.norm());
        if !(az.is_finite() && aw.is_finite()) {
            // An infinite entry with a finite partner still names a point.
            if !az.is_finite() && aw.is_finite() {
                return Some(Self::infinity());
            }
            if az.is_finite() && !aw.is_finite() {
                return Some(Self::from_complex(C64::new(0.0, 0.0)));
            }
            return None;
        }
        if az == 0.0 && aw == 0.0 {
            return None;
        }
        if az > aw {
            Some(SpherePoint {
                z: C64::new(1.0, 0.0),
                w: w / z,
            })
        } else {
            Some(SpherePoint {
                z: z / w,
                w: C64::new(1.0, 0.0),
            })
        }
    }

    pub fn from_complex(z: C64) -> Self {
        Self::from_homogeneous(z, C64::new(1.0, 0.0)).unwrap_or_else(Self::infinity)
    }

    pub fn from_re_im(re: f64, im: f64) -> Self {
        Self::from_complex(C64::new(re, im))
    }

    pub fn infinity() -> Self {
        SpherePoint {
            z: C64::new(1.0, 0.0),
            w: C64::new(0.0, 0.0),
        }
    }

    pub fn zero() -> Self {
        Self::from_complex(C64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::from_complex(C64::new(1.0, 0.0))
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn w(&self) -> C64 {
        self.w
    }

    pub fn is_infinity(&self) -> bool {
        self.w.re == 0.0 && self.w.im == 0.0
    }

    /// Affine coordinate; `None` at infinity.
    pub fn to_complex(&self) -> Option<C64> {
        if self.is_infinity() {
            None
        } else {
            Some(self.z / self.w)
        }
    }

    /// Affine coordinate with infinity mapped to a non-finite value.
    pub fn affine(&self) -> C64 {
        self.to_complex()
            .unwrap_or(C64::new(f64::INFINITY, f64::INFINITY))
    }

    fn hnorm(&self) -> f64 {
        (self.z.norm_sqr() + self.w.norm_sqr()).sqrt()
    }

    /// Chordal distance scaled so antipodal points are at distance 1.
    pub fn chordal(&self, q: &SpherePoint) -> f64 {
        let det = self.z * q.w - q.z * self.w;
        (det.norm() / (self.hnorm() * q.hnorm())).min(1.0)
    }

    pub fn approx_eq(&self, q: &SpherePoint, tol: f64) -> bool {
        self.chordal(q) <= tol
    }

    /// Unit vector `(2x, 2y, |z|²−1)/(|z|²+1)` in homogeneous form.
    pub fn stereographic(&self) -> [f64; 3] {
        let n = self.z.norm_sqr() + self.w.norm_sqr();
        let zw = self.z * self.w.conj();
        [
            2.0 * zw.re / n,
            2.0 * zw.im / n,
            (self.z.norm_sqr() - self.w.norm_sqr()) / n,
        ]
    }

    /// Inverse of `stereographic`; the input is normalized first.
    pub fn from_stereographic(v: [f64; 3]) -> Self {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (x, y, s) = (v[0] / n, v[1] / n, v[2] / n);
        if s <= 0.0 {
            Self::from_homogeneous(C64::new(x, y), C64::new(1.0 - s, 0.0)).unwrap()
        } else {
            Self::from_homogeneous(C64::new(1.0 + s, 0.0), C64::new(x, -y)).unwrap()
        }
    }

    /// Weighted centroid of nearby points, taken in the chart where they are
    /// bounded.
    pub fn centroid(points: &[(SpherePoint, f64)]) -> SpherePoint {
        let mut v = [0.0; 3];
        for (p, wt) in points {
            let s = p.stereographic();
            for i in 0..3 {
                v[i] += wt * s[i];
            }
        }
        let anchor = points[0].0;
        if v.iter().all(|c| c.abs() < 1e-300) {
            return anchor;
        }
        // Average in the affine chart around the anchor for exactness of
        // clustered points; fall back to the sphere average otherwise.
        let use_inverse = anchor.z.norm() > anchor.w.norm();
        let mut acc = C64::new(0.0, 0.0);
        let mut tw = 0.0;
        for (p, wt) in points {
            let c = if use_inverse { p.w / p.z } else { p.z / p.w };
            if !c.is_finite() {
                return SpherePoint::from_stereographic(v);
            }
            acc += c * *wt;
            tw += wt;
        }
        let c = acc / tw;
        if use_inverse {
            SpherePoint::from_homogeneous(C64::new(1.0, 0.0), c).unwrap()
        } else {
            SpherePoint::from_homogeneous(c, C64::new(1.0, 0.0)).unwrap()
        }
    }

    /// Snaps to 0, 1 or ∞ when within `tol`.
    pub fn snap_canonical(&self, tol: f64) -> SpherePoint {
        for c in [SpherePoint::zero(), SpherePoint::one(), SpherePoint::infinity()] {
            if self.chordal(&c) <= tol {
                return c;
            }
        }
        *self
    }
}

/// Serialized point: `{"re":..,"im":..}` or `{"infinity":true}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PointJson {
    Infinity { infinity: bool },
    Finite { re: f64, im: f64 },
}

impl From<SpherePoint> for PointJson {
    fn from(p: SpherePoint) -> Self {
        match p.to_complex() {
            None => PointJson::Infinity { infinity: true },
            Some(c) => PointJson::Finite { re: c.re, im: c.im },
        }
    }
}

impl PointJson {
    pub fn to_point(&self) -> Result<SpherePoint> {
        match self {
            PointJson::Infinity { infinity: true } => Ok(SpherePoint::infinity()),
            PointJson::Infinity { infinity: false } => {
                Err(Error::Schema("infinity flag must be true".into()))
            }
            PointJson::Finite { re, im } => {
                if re.is_finite() && im.is_finite() {
                    Ok(SpherePoint::from_re_im(*re, *im))
                } else {
                    Err(Error::Schema("non-finite coordinate".into()))
                }
            }
        }
    }
}

/// A 2×2 complex matrix acting on homogeneous coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusMap {
    pub m: [[C64; 2]; 2],
}

/// Outcome of classifying a matrix or a limit of matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MoebiusClass {
    Nondegenerate(MoebiusMap),
    Degenerate {
        reduction: SpherePoint,
        hole: SpherePoint,
    },
}

impl MoebiusMap {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        MoebiusMap {
            m: [[a, b], [c, d]],
        }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(
            C64::new(a, 0.0),
            C64::new(b, 0.0),
            C64::new(c, 0.0),
            C64::new(d, 0.0),
        )
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    /// `z ↦ λ z`.
    pub fn scaling(l: C64) -> Self {
        Self::new(l, C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    /// `z ↦ z + c`.
    pub fn translation(c: C64) -> Self {
        Self::new(C64::new(1.0, 0.0), c, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn frob_sqr(&self) -> f64 {
        self.m.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// Scale-free degeneracy measure |det| / ‖M‖².
    pub fn det_ratio(&self) -> f64 {
        let f = self.frob_sqr();
        if f == 0.0 {
            return 0.0;
        }
        self.det().norm() / f
    }

    pub fn is_degenerate(&self, tol: &Tolerances) -> bool {
        self.det_ratio() < tol.tau_moeb
    }

    /// Projective normalization: Frobenius norm one, largest entry real
    /// positive.
    pub fn normalized(&self) -> Self {
        let f = self.frob_sqr().sqrt();
        let mut best = self.m[0][0];
        for c in self.m.iter().flatten() {
            if c.norm() > best.norm() {
                best = *c;
            }
        }
        let phase = if best.norm() > 0.0 {
            best.conj() / best.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let s = phase / f;
        MoebiusMap {
            m: [
                [self.m[0][0] * s, self.m[0][1] * s],
                [self.m[1][0] * s, self.m[1][1] * s],
            ],
        }
    }

    pub fn compose(&self, o: &MoebiusMap) -> MoebiusMap {
        let a = &self.m;
        let b = &o.m;
        MoebiusMap {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }

    /// Adjugate, which is the inverse up to scale.
    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0])
    }

    /// Raw matrix action; `None` if the result is the zero vector.
    pub fn apply_raw(&self, p: &SpherePoint) -> Option<SpherePoint> {
        let z = self.m[0][0] * p.z() + self.m[0][1] * p.w();
        let w = self.m[1][0] * p.z() + self.m[1][1] * p.w();
        SpherePoint::from_homogeneous(z, w)
    }

    /// Action on the sphere; a degenerate map sends every point off its
    /// hole to its reduction point.
    pub fn apply(&self, p: &SpherePoint, tol: &Tolerances) -> Result<SpherePoint> {
        if self.is_degenerate(tol) {
            match self.classify(tol) {
                MoebiusClass::Degenerate { reduction, hole } => {
                    if p.chordal(&hole) <= tol.tau_pt {
                        Err(Error::HoleEvaluation)
                    } else {
                        Ok(reduction)
                    }
                }
                MoebiusClass::Nondegenerate(_) => unreachable!(),
            }
        } else {
            self.apply_raw(p).ok_or(Error::HoleEvaluation)
        }
    }

    /// Rank-one part of the matrix: returns (column space, kernel) points.
    pub fn rank_one_parts(&self) -> (SpherePoint, SpherePoint, MoebiusMap) {
        let mut bi = 0;
        let mut bj = 0;
        for i in 0..2 {
            for j in 0..2 {
                if self.m[i][j].norm() > self.m[bi][bj].norm() {
                    bi = i;
                    bj = j;
                }
            }
        }
        let col = [self.m[0][bj], self.m[1][bj]];
        let row = [self.m[bi][0], self.m[bi][1]];
        let piv = self.m[bi][bj];
        let snapped = MoebiusMap {
            m: [
                [col[0] * row[0] / piv, col[0] * row[1] / piv],
                [col[1] * row[0] / piv, col[1] * row[1] / piv],
            ],
        };
        let reduction = SpherePoint::from_homogeneous(col[0], col[1]).unwrap();
        let hole = SpherePoint::from_homogeneous(-row[1], row[0]).unwrap();
        (reduction, hole, snapped)
    }

    pub fn classify(&self, tol: &Tolerances) -> MoebiusClass {
        if self.is_degenerate(tol) {
            let (reduction, hole, _) = self.normalized().rank_one_parts();
            MoebiusClass::Degenerate { reduction, hole }
        } else {
            MoebiusClass::Nondegenerate(self.normalized())
        }
    }

    /// Projective distance `sqrt(1 − |⟨u,v⟩|²)` between unit matrices.
    pub fn projective_distance(&self, o: &MoebiusMap) -> f64 {
        let a = self.normalized();
        let b = o.normalized();
        let mut ip = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                ip += a.m[i][j].conj() * b.m[i][j];
            }
        }
        (1.0 - ip.norm_sqr()).max(0.0).sqrt()
    }

    /// Nearest unitary representative (polar factor) and whether the map is
    /// a rotation within `tau_rot`.
    pub fn is_rotation(&self, tol: &Tolerances) -> (bool, MoebiusMap) {
        let n = self.normalized();
        let m = nalgebra::Matrix2::new(n.m[0][0], n.m[0][1], n.m[1][0], n.m[1][1]);
        let svd = m.svd(true, true);
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let q = u * vt;
        let unitary = MoebiusMap::new(q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]);
        let s = svd.singular_values;
        let ratio = if s[0] > 0.0 { s[1] / s[0] } else { 0.0 };
        (1.0 - ratio <= tol.tau_rot, unitary)
    }

    /// Singular value decomposition `M = U diag(σ₁, σ₂) V^H` with σ₁ ≥ σ₂.
    pub fn svd(&self) -> (MoebiusMap, [f64; 2], MoebiusMap) {
        let m = nalgebra::Matrix2::new(self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]);
        let svd = m.svd(true, true);
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let s = svd.singular_values;
        let (u, s, vt) = if s[0] >= s[1] {
            (u, [s[0], s[1]], vt)
        } else {
            (
                nalgebra::Matrix2::new(u[(0, 1)], u[(0, 0)], u[(1, 1)], u[(1, 0)]),
                [s[1], s[0]],
                nalgebra::Matrix2::new(vt[(1, 0)], vt[(1, 1)], vt[(0, 0)], vt[(0, 1)]),
            )
        };
        (
            MoebiusMap::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]),
            s,
            MoebiusMap::new(vt[(0, 0)], vt[(0, 1)], vt[(1, 0)], vt[(1, 1)]),
        )
    }

    /// Unitary map sending `p` to ∞.
    pub fn rotation_to_infinity(p: &SpherePoint) -> MoebiusMap {
        let n = (p.z().norm_sqr() + p.w().norm_sqr()).sqrt();
        let (a, b) = (p.z() / n, p.w() / n);
        MoebiusMap::new(a.conj(), b.conj(), -b, a)
    }

    pub fn to_json(&self) -> [[PointJsonC; 2]; 2] {
        let f = |c: C64| PointJsonC { re: c.re, im: c.im };
        [
            [f(self.m[0][0]), f(self.m[0][1])],
            [f(self.m[1][0]), f(self.m[1][1])],
        ]
    }

    pub fn from_json(j: &[[PointJsonC; 2]; 2]) -> MoebiusMap {
        let f = |c: &PointJsonC| C64::new(c.re, c.im);
        MoebiusMap::new(f(&j[0][0]), f(&j[0][1]), f(&j[1][0]), f(&j[1][1]))
    }
}

/// Complex number in JSON form.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointJsonC {
    pub re: f64,
    pub im: f64,
}

/// Homogeneous linear form vanishing at `p`: `ℓ(x) = w_p x_z − z_p x_w`.
fn vanishing_form(p: &SpherePoint) -> [C64; 2] {
    [p.w(), -p.z()]
}

fn eval_form(l: &[C64; 2], x: &SpherePoint) -> C64 {
    l[0] * x.z() + l[1] * x.w()
}

/// Möbius map sending `p[i]` to `0, 1, ∞` without separation checks.
pub(crate) fn fit_to_standard(p: &[SpherePoint; 3]) -> MoebiusMap {
    let l1 = vanishing_form(&p[0]);
    let l3 = vanishing_form(&p[2]);
    let c1 = eval_form(&l3, &p[1]);
    let c3 = eval_form(&l1, &p[1]);
    MoebiusMap::new(l1[0] * c1, l1[1] * c1, l3[0] * c3, l3[1] * c3)
}

/// Unique Möbius map with `p[i] ↦ q[i]`.
pub fn fit_moebius(p: &[SpherePoint; 3], q: &[SpherePoint; 3], tol: &Tolerances) -> Result<MoebiusMap> {
    for t in [p, q] {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if t[i].chordal(&t[j]) < tol.tau_sep {
                    return Err(Error::DegenerateTriple);
                }
            }
        }
    }
    let a = fit_to_standard(p);
    let b = fit_to_standard(q);
    Ok(b.inverse().compose(&a).normalized())
}

/// Result of classifying a sequence of Möbius maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusLimit {
    pub class: MoebiusClass,
    /// Projective distance between the last two samples.
    pub last_step: f64,
}

/// Classifies the limit of a projectively Cauchy sequence of matrices.
///
/// The limit counts as degenerate when the determinant ratio of the last
/// sample is below `tau_moeb` or is no larger than ten times the last step;
/// a sequence approaching rank one has ratios shrinking at the rate of its
/// steps.
pub fn moebius_limit_classify(seq: &[MoebiusMap], tol: &Tolerances) -> Result<MoebiusLimit> {
    if seq.is_empty() {
        return Err(Error::Schema("empty sequence".into()));
    }
    let n = seq.len();
    let last = seq[n - 1].normalized();
    if n == 1 {
        return Ok(MoebiusLimit {
            class: last.classify(tol),
            last_step: 0.0,
        });
    }
    let steps: Vec<f64> = seq
        .windows(2)
        .map(|w| w[0].projective_distance(&w[1]))
        .collect();
    let last_step = *steps.last().unwrap();
    let cauchy_tol = tol.tau_limit.max(1e-4);
    if last_step > cauchy_tol {
        return Err(Error::NotCauchy(last_step));
    }
    let ratio = last.det_ratio();
    let class = if ratio < tol.tau_moeb || ratio <= 10.0 * last_step {
        let (reduction, hole, _) = last.rank_one_parts();
        MoebiusClass::Degenerate { reduction, hole }
    } else {
        MoebiusClass::Nondegenerate(last)
    };
    Ok(MoebiusLimit { class, last_step })
}
