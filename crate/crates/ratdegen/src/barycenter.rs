//! Conformal barycenter in the unit-ball model of hyperbolic 3-space,
//! barycentered normalization, and classes of measures modulo rotations.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::harmonics;
use crate::measures::{self, AtomicMeasure};
use crate::par::{self, Exec};
use crate::scalar::C64;
use crate::sphere::{MoebiusMap, SpherePoint};

/// Point of the open unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint(pub [f64; 3]);

const MAX_ITER: usize = 500;
const DAMPING: f64 = 0.5;
const MAX_STEP: f64 = 0.5;

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

impl HPoint {
    pub fn origin() -> Self {
        HPoint([0.0; 3])
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Hyperbolic distance in the ball model.
    pub fn distance(&self, o: &HPoint) -> f64 {
        let d = [self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]];
        let a = 1.0 - dot(&self.0, &self.0);
        let b = 1.0 - dot(&o.0, &o.0);
        // cosh r = 1 + 2s², written with asinh to keep small distances.
        2.0 * (dot(&d, &d) / (a * b)).sqrt().asinh()
    }
}

/// Ball isometry `σ_p` with `σ_p(p) = 0`; its inverse is `σ_{−p}`.
pub fn ball_translate(p: &[f64; 3], x: &[f64; 3]) -> [f64; 3] {
    let pp = dot(p, p);
    let xx = dot(x, x);
    let xp = dot(x, p);
    let d = [x[0] - p[0], x[1] - p[1], x[2] - p[2]];
    let dd = dot(&d, &d);
    let den = 1.0 - 2.0 * xp + xx * pp;
    [
        ((1.0 - pp) * d[0] - dd * p[0]) / den,
        ((1.0 - pp) * d[1] - dd * p[1]) / den,
        ((1.0 - pp) * d[2] - dd * p[2]) / den,
    ]
}

fn neg(p: &[f64; 3]) -> [f64; 3] {
    [-p[0], -p[1], -p[2]]
}

/// Rotation matrix of a unitary Möbius map acting on R³.
fn rotation_matrix(u: &MoebiusMap) -> [[f64; 3]; 3] {
    let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut r = [[0.0; 3]; 3];
    for (j, e) in basis.iter().enumerate() {
        let img = u
            .apply_raw(&SpherePoint::from_stereographic(*e))
            .expect("unitary map")
            .stereographic();
        for i in 0..3 {
            r[i][j] = img[i];
        }
    }
    r
}

fn mat_vec(r: &[[f64; 3]; 3], x: &[f64; 3]) -> [f64; 3] {
    [dot(&r[0], x), dot(&r[1], x), dot(&r[2], x)]
}

/// Poincaré extension of a nondegenerate Möbius map to the ball, through
/// `A = U diag(σ₁, σ₂) V^H`: a rotation, a translation along the polar
/// axis, and a rotation.
pub fn ball_action(a: &MoebiusMap, x: &HPoint) -> HPoint {
    let (u, s, vh) = a.svd();
    let lambda = s[0] / s[1];
    let t = (lambda - 1.0) / (lambda + 1.0);
    let y = mat_vec(&rotation_matrix(&vh), &x.0);
    let y = ball_translate(&[0.0, 0.0, -t], &y);
    HPoint(mat_vec(&rotation_matrix(&u), &y))
}

/// `Σ wᵢ · stereographic(pᵢ)`.
pub fn euclidean_moment(mu: &AtomicMeasure) -> [f64; 3] {
    let mut m = [0.0; 3];
    for (p, w) in mu.atoms() {
        let v = p.stereographic();
        for i in 0..3 {
            m[i] += w * v[i];
        }
    }
    m
}

/// First atom of weight at least `1/2 − τ_atom` (relative to the mass).
pub fn heavy_atom_check(mu: &AtomicMeasure, tol: &Tolerances) -> Option<(SpherePoint, f64)> {
    let m = mu.mass();
    mu.atoms()
        .iter()
        .find(|(_, w)| *w >= (0.5 - tol.tau_atom) * m)
        .copied()
}

/// Damped Newton iteration on the moment of `σ_p`-translated atoms. In the
/// translated frame, moving the center by `q` changes the moment by
/// `−(2I − 2Σ w y yᵀ) q` to first order; steps are capped at length 1/2.
pub fn conformal_barycenter(mu: &AtomicMeasure, tol: &Tolerances) -> Result<HPoint> {
    if heavy_atom_check(mu, tol).is_some() {
        return Err(Error::NotInM1o);
    }
    let vecs: Vec<([f64; 3], f64)> = mu.atoms().iter().map(|(p, w)| (p.stereographic(), *w / mu.mass())).collect();
    let mut p = [0.0; 3];
    for _ in 0..MAX_ITER {
        let mut m = Vector3::zeros();
        let mut jac = Matrix3::identity() * 2.0;
        for (v, w) in &vecs {
            let y = Vector3::from(ball_translate(&p, v));
            m += *w * y;
            jac -= 2.0 * *w * y * y.transpose();
        }
        if m.norm() < tol.tau_bc {
            return Ok(HPoint(p));
        }
        let mut q = jac.lu().solve(&m).unwrap_or(DAMPING * m);
        if q.norm() > MAX_STEP {
            q *= MAX_STEP / q.norm();
        }
        p = ball_translate(&neg(&p), &[q[0], q[1], q[2]]);
        if !(norm(&p) < 1.0) {
            return Err(Error::NoConvergence);
        }
    }
    Err(Error::NoConvergence)
}

/// Möbius map taking the ball point `c` to the origin: a rotation sending
/// its direction to ∞ followed by `z ↦ λz` with `λ = (1 − r)/(1 + r)`.
pub fn translation_to_origin(c: &HPoint) -> MoebiusMap {
    let r = c.norm();
    if r == 0.0 {
        return MoebiusMap::identity();
    }
    let u = [c.0[0] / r, c.0[1] / r, c.0[2] / r];
    let rot = MoebiusMap::rotation_to_infinity(&SpherePoint::from_stereographic(u));
    let lambda = (1.0 - r) / (1.0 + r);
    MoebiusMap::scaling(C64::new(lambda, 0.0)).compose(&rot)
}

/// `(A, A_*μ)` with `A_*μ` barycentered.
pub fn barycentered_normalize(mu: &AtomicMeasure, tol: &Tolerances) -> Result<(MoebiusMap, AtomicMeasure)> {
    let mut a = MoebiusMap::identity();
    let mut nu = mu.clone();
    for _ in 0..5 {
        let c = conformal_barycenter(&nu, tol)?;
        let step = translation_to_origin(&c);
        a = step.compose(&a).normalized();
        nu = measures::push_forward(&a, mu, tol)?;
        let m = euclidean_moment(&nu);
        if norm(&m) / nu.mass() < tol.tau_bc {
            return Ok((a, nu));
        }
    }
    Err(Error::NoConvergence)
}

/// Class of a probability measure modulo Möbius push-forward by rotations
/// after barycentering; heavy atoms give the point at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum DmClass {
    Infinity,
    Finite {
        representative: AtomicMeasure,
        /// Harmonic power per degree of the representative.
        features: Vec<f64>,
    },
}

impl DmClass {
    pub fn is_infinity(&self) -> bool {
        matches!(self, DmClass::Infinity)
    }

    /// Feature vector; `Infinity` uses the features of an antipodal pair of
    /// half-atoms, the shape of every heavy-atom limit.
    pub fn features(&self, lmax: usize) -> Vec<f64> {
        match self {
            DmClass::Finite { features, .. } => features.clone(),
            DmClass::Infinity => {
                let pair = AtomicMeasure::new(
                    vec![(SpherePoint::zero(), 0.5), (SpherePoint::infinity(), 0.5)],
                    1e-12,
                )
                .expect("positive weights");
                harmonics::power_spectrum(&pair.harmonic_moments(lmax), lmax)
            }
        }
    }
}

pub fn dm_class(mu: &AtomicMeasure, tol: &Tolerances) -> Result<DmClass> {
    let mu = mu.normalized();
    if heavy_atom_check(&mu, tol).is_some() {
        return Ok(DmClass::Infinity);
    }
    let (_, rep) = barycentered_normalize(&mu, tol)?;
    let l = tol.harmonic_l;
    let features = harmonics::power_spectrum(&rep.harmonic_moments(l), l);
    Ok(DmClass::Finite {
        representative: rep,
        features,
    })
}

/// Euclidean distance between rotation-invariant features.
pub fn dm_distance(a: &DmClass, b: &DmClass, lmax: usize) -> f64 {
    let fa = a.features(lmax);
    let fb = b.features(lmax);
    fa.iter()
        .zip(&fb)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn su2(a: C64, b: C64) -> MoebiusMap {
    MoebiusMap::new(a, -b.conj(), b, a.conj())
}

fn random_rotation<R: Rng>(rng: &mut R) -> MoebiusMap {
    // Uniform unit quaternion.
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let tau = 2.0 * std::f64::consts::PI;
    let a = C64::from_polar((1.0 - u1).sqrt(), tau * u2);
    let b = C64::from_polar(u1.sqrt(), tau * u3);
    su2(a, b)
}

fn small_rotation(axis: usize, angle: f64) -> MoebiusMap {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    match axis {
        0 => su2(C64::new(c, 0.0), C64::new(0.0, s)),
        1 => su2(C64::new(c, 0.0), C64::new(s, 0.0)),
        _ => su2(C64::new(c, s), C64::new(0.0, 0.0)),
    }
}

/// Upper bound on `min_R dist(R_*ν₁, ν₂)` over rotations: quasi-random
/// restarts followed by coordinate descent on small rotations. Large
/// representatives are resampled to `max_atoms` first.
pub fn dm_aligned_distance(
    a: &DmClass,
    b: &DmClass,
    restarts: usize,
    max_atoms: usize,
    seed: u64,
    exec: Exec,
    tol: &Tolerances,
) -> Result<f64> {
    let (ra, rb) = match (a, b) {
        (DmClass::Infinity, DmClass::Infinity) => return Ok(0.0),
        (DmClass::Finite { representative: x, .. }, DmClass::Finite { representative: y, .. }) => (x, y),
        _ => return Ok(dm_distance(a, b, tol.harmonic_l)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shrink = |m: &AtomicMeasure, rng: &mut ChaCha8Rng| {
        if m.len() > max_atoms {
            m.resample(max_atoms, rng, tol.tau_pt)
        } else {
            m.clone()
        }
    };
    let ra = shrink(ra, &mut rng);
    let rb = shrink(rb, &mut rng);
    let target = rb.harmonic_moments(tol.harmonic_l);
    let starts: Vec<MoebiusMap> = (0..restarts)
        .map(|i| if i == 0 { MoebiusMap::identity() } else { random_rotation(&mut rng) })
        .collect();
    // Descent runs on the smooth squared moment error; the max-norm is
    // reported at the end point.
    let diffs = |r: &MoebiusMap| -> Vec<f64> {
        let pushed = measures::push_forward(r, &ra, tol).expect("rotation");
        pushed
            .harmonic_moments(tol.harmonic_l)
            .iter()
            .zip(&target)
            .map(|(x, y)| x - y)
            .collect()
    };
    let cost = |r: &MoebiusMap| diffs(r).iter().map(|x| x * x).sum::<f64>();
    let results = par::map_slice(exec, &starts, |r0| {
        let mut r = *r0;
        let mut best = cost(&r);
        let mut step = 0.3;
        while step > 1e-6 {
            let mut improved = false;
            for axis in 0..3 {
                for sgn in [1.0, -1.0] {
                    let cand = small_rotation(axis, sgn * step).compose(&r).normalized();
                    let c = cost(&cand);
                    if c < best {
                        best = c;
                        r = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (best, diffs(&r).iter().fold(0.0, |a: f64, x| a.max(x.abs())))
    });
    let best = results
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, d)| d)
        .unwrap_or(f64::INFINITY);
    Ok(best)
}
