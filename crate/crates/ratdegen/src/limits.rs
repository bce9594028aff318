//! Limits of sampled sequences: Neville extrapolation to ε = 0 of
//! projectively normalized coefficient vectors, snapping of vanishing
//! entries, and recovery of small-denominator rational limits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::ratmap::ProjectiveRatMap;
use crate::scalar::{GaussRat, Scalar, C64};
use crate::sphere::MoebiusMap;

/// Samples used by the extrapolation tableau.
pub const WINDOW: usize = 6;
/// Largest denominator accepted by `rationalize`.
pub const MAX_DENOMINATOR: i64 = 10_000;
/// Rational recovery is attempted only below this extrapolation error.
pub const RATIONAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation {
    pub value: Vec<C64>,
    /// Difference between the full-window and the shortened-window values.
    pub error: f64,
    /// Index normalized to one in every sample.
    pub pivot: usize,
}

/// Value at `x = 0` of the interpolating polynomial through `(xs, ys)`.
pub fn neville(xs: &[f64], ys: &[C64]) -> C64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (p[i] * xj - p[i + 1] * xi) / (xj - xi);
        }
    }
    p[0]
}

fn argmax(v: &[C64]) -> usize {
    let mut best = 0;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > v[best].norm() {
            best = i;
        }
    }
    best
}

/// Extrapolates vectors sampled at `eps → 0` after dividing each sample by
/// its entry at the argmax of the last sample.
pub fn extrapolate(eps: &[f64], samples: &[Vec<C64>]) -> Result<Extrapolation> {
    if samples.is_empty() || eps.len() != samples.len() {
        return Err(Error::Schema("extrapolation needs matching samples".into()));
    }
    let len = samples[0].len();
    if samples.iter().any(|s| s.len() != len) {
        return Err(Error::Schema("sample vectors differ in length".into()));
    }
    let pivot = argmax(samples.last().unwrap());
    let start = samples.len().saturating_sub(WINDOW);
    let xs = &eps[start..];
    let mut rows = Vec::with_capacity(xs.len());
    for s in &samples[start..] {
        let p = s[pivot];
        if p.norm() == 0.0 {
            return Err(Error::NotCauchy(f64::INFINITY));
        }
        rows.push(s.iter().map(|c| c / p).collect::<Vec<_>>());
    }
    let mut value = Vec::with_capacity(len);
    let mut error: f64 = 0.0;
    for j in 0..len {
        let ys: Vec<C64> = rows.iter().map(|r| r[j]).collect();
        let full = neville(xs, &ys);
        if xs.len() >= 2 {
            let short = neville(&xs[1..], &ys[1..]);
            error = error.max((full - short).norm());
        } else {
            error = f64::INFINITY;
        }
        value.push(full);
    }
    let scale = value.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::NotCauchy(f64::INFINITY));
    }
    Ok(Extrapolation {
        value: value.iter().map(|c| c / scale).collect(),
        error: error / scale,
        pivot,
    })
}

/// Zeroes real and imaginary parts below `threshold` (relative to the sup norm).
pub fn snap(v: &mut [C64], threshold: f64) {
    let s = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in v.iter_mut() {
        if c.re.abs() < threshold * s {
            c.re = 0.0;
        }
        if c.im.abs() < threshold * s {
            c.im = 0.0;
        }
    }
}

/// Smallest-denominator rational within `tol` of `x` (continued fractions),
/// provided its denominator is at most `max_den`.
pub fn rationalize_real(x: f64, tol: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x.abs() <= tol {
        return Some(BigRational::zero());
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            return None;
        }
        if ((h2 as f64) / (k2 as f64) - x).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

pub fn rationalize(v: &[C64], tol: f64, max_den: i64) -> Option<Vec<GaussRat>> {
    v.iter()
        .map(|c| {
            Some(GaussRat::new(
                rationalize_real(c.re, tol, max_den)?,
                rationalize_real(c.im, tol, max_den)?,
            ))
        })
        .collect()
}

/// Limit of a sampled sequence of maps of one degree.
#[derive(Clone, Debug)]
pub struct MapLimit {
    /// Float limit with vanishing entries snapped to zero.
    pub map: ProjectiveRatMap,
    /// Exact limit when all coefficients have small denominators.
    pub exact: Option<ProjectiveRatMap>,
    pub error: f64,
}

impl MapLimit {
    /// Exact limit when available, otherwise the float one.
    pub fn best(&self) -> &ProjectiveRatMap {
        self.exact.as_ref().unwrap_or(&self.map)
    }
}

/// Projective limit of `samples` (taken at `eps → 0`), or
/// `LevelNotCauchy { level }` when the extrapolation error exceeds `tau_limit`.
pub fn map_limit(eps: &[f64], samples: &[ProjectiveRatMap], level: usize, tol: &Tolerances) -> Result<MapLimit> {
    let d = samples[0].degree();
    let vecs: Vec<Vec<C64>> = samples.iter().map(|f| f.coefficient_vector()).collect();
    let ex = extrapolate(eps, &vecs)?;
    if !(ex.error <= tol.tau_limit) {
        return Err(Error::LevelNotCauchy { level, error: ex.error });
    }
    let mut v = ex.value;
    snap(&mut v, tol.tau_snap.max(10.0 * ex.error));
    let map = ProjectiveRatMap::float(d, v[..=d].to_vec(), v[d + 1..].to_vec())?;
    let exact = if ex.error <= RATIONAL_TOL {
        // Rescale so the largest entry is one before rational recovery.
        let k = argmax(&v);
        let p = v[k];
        let w: Vec<C64> = v.iter().map(|c| c / p).collect();
        let rtol = (10.0 * ex.error).max(1e-12);
        rationalize(&w, rtol, MAX_DENOMINATOR)
            .and_then(|r| ProjectiveRatMap::exact(d, r[..=d].to_vec(), r[d + 1..].to_vec()).ok())
    } else {
        None
    };
    Ok(MapLimit {
        map,
        exact,
        error: ex.error,
    })
}

/// Projective limit of Möbius matrices (possibly rank one).
pub fn moebius_limit(eps: &[f64], samples: &[MoebiusMap], tol: &Tolerances) -> Result<(MoebiusMap, f64)> {
    let vecs: Vec<Vec<C64>> = samples
        .iter()
        .map(|m| vec![m.m[0][0], m.m[0][1], m.m[1][0], m.m[1][1]])
        .collect();
    let ex = extrapolate(eps, &vecs)?;
    if !(ex.error <= tol.tau_limit) {
        return Err(Error::NotCauchy(ex.error));
    }
    let mut v = ex.value;
    snap(&mut v, tol.tau_snap.max(10.0 * ex.error));
    Ok((MoebiusMap::new(v[0], v[1], v[2], v[3]), ex.error))
}

/// Limit of a real sequence with error estimate.
pub fn scalar_limit(eps: &[f64], values: &[f64]) -> (f64, f64) {
    let start = values.len().saturating_sub(WINDOW);
    let xs = &eps[start..];
    let ys: Vec<C64> = values[start..].iter().map(|x| C64::new(*x, 0.0)).collect();
    let full = neville(xs, &ys).re;
    let err = if xs.len() >= 2 {
        (full - neville(&xs[1..], &ys[1..]).re).abs()
    } else {
        f64::INFINITY
    };
    (full, err)
}

/// Aitken Δ² limit of the last three terms with `|limit − last|` as error
/// bar; sequences already constant at the end return their last value.
pub fn aitken(seq: &[f64]) -> (f64, f64) {
    let n = seq.len();
    if n < 3 {
        let last = *seq.last().unwrap_or(&0.0);
        return (last, f64::INFINITY);
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let den = (c - b) - (b - a);
    if (c - b).abs() <= 1e-15 || den.abs() <= 1e-15 {
        return (c, (c - b).abs());
    }
    let lim = c - (c - b) * (c - b) / den;
    (lim, (lim - c).abs())
}

/// Float copy of exact coefficients after an exact power-of-two rescaling
/// that brings the largest one near unit size.
pub fn scaled_float(coeffs: &[GaussRat]) -> Vec<C64> {
    let mag = |r: &BigRational| -> i64 {
        if r.is_zero() {
            i64::MIN
        } else {
            r.numer().bits() as i64 - r.denom().bits() as i64
        }
    };
    let top = coeffs
        .iter()
        .map(|c| mag(&c.re).max(mag(&c.im)))
        .max()
        .unwrap_or(i64::MIN);
    if top == i64::MIN {
        return vec![C64::new(0.0, 0.0); coeffs.len()];
    }
    let shift = |r: &BigRational| -> BigRational {
        if top >= 0 {
            BigRational::new(r.numer().clone(), r.denom() << top as usize)
        } else {
            BigRational::new(r.numer() << (-top) as usize, r.denom().clone())
        }
    };
    coeffs
        .iter()
        .map(|c| GaussRat::new(shift(&c.re), shift(&c.im)).to_c64())
        .collect()
}
