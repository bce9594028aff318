//! Simultaneous root finding (Aberth–Ehrlich) for binary forms and
//! multiplicity clustering on the sphere.

use crate::error::{Error, Result};
use crate::scalar::C64;
use crate::sphere::SpherePoint;

const MAX_ITER: usize = 600;

/// Roots of `c[0] + c[1] z + … + c[n] z^n` with `c[n] ≠ 0`, `c[0] ≠ 0`.
pub fn aberth(c: &[C64]) -> Result<Vec<C64>> {
    let n = c.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![-c[0] / c[1]]);
    }
    if n == 2 {
        return Ok(quadratic(c[2], c[1], c[0]).to_vec());
    }
    let mut z = initial_guesses(c);
    let abs: Vec<f64> = c.iter().map(|x| x.norm()).collect();
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    for _ in 0..MAX_ITER {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, backward) = newton_ratio(c, &abs, z[i]);
            if backward <= 8.0 * (n as f64) * eps {
                done[i] = true;
                continue;
            }
            all = false;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        s += 1.0 / d;
                    }
                }
            }
            let corr = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if corr.is_finite() {
                z[i] -= corr;
                if corr.norm() <= eps * z[i].norm() {
                    done[i] = true;
                }
            }
        }
        if all {
            return Ok(z);
        }
    }
    // Accept when every approximation has a small backward error.
    let ok = z
        .iter()
        .all(|zi| newton_ratio(c, &abs, *zi).1 <= 1e3 * (n as f64) * eps);
    if ok {
        Ok(z)
    } else {
        Err(Error::RootFindingDiverged)
    }
}

fn quadratic(a: C64, b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Choose the sign that avoids cancellation.
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    }
    [q / a, c / q]
}

/// Newton ratio p/p′ and the backward error |p(z)| / Σ|c_k||z|^k,
/// evaluated in the reversed polynomial when |z| > 1.
fn newton_ratio(c: &[C64], abs: &[f64], z: C64) -> (C64, f64) {
    let n = c.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = c[n];
        let mut dp = C64::new(0.0, 0.0);
        let mut s = abs[n];
        let az = z.norm();
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
            s = s * az + abs[k];
        }
        (p / dp, p.norm() / s)
    } else {
        let y = 1.0 / z;
        let ay = y.norm();
        // q(y) = Σ c[n-k] y^k
        let mut q = c[0];
        let mut dq = C64::new(0.0, 0.0);
        let mut s = abs[0];
        for k in 1..=n {
            dq = dq * y + q;
            q = q * y + c[k];
            s = s * ay + abs[k];
        }
        let nf = n as f64;
        let ratio = z / (C64::new(nf, 0.0) - y * dq / q);
        (ratio, q.norm() / s)
    }
}

/// Starting points on circles given by the upper convex hull of
/// `(k, log|c_k|)`.
fn initial_guesses(c: &[C64]) -> Vec<C64> {
    let n = c.len() - 1;
    let pts: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| x.norm() > 0.0)
        .map(|(k, x)| (k as f64, x.norm().ln()))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut z = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let m = (j - i) as usize;
        let r = ((li - lj) / (j - i)).exp();
        for k in 0..m {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (m as f64)
                + 2.0 * std::f64::consts::PI * i / (n as f64)
                + sigma;
            z.push(C64::from_polar(r, ang));
        }
    }
    z
}

/// Roots of a binary form `Σ c_i z^i w^{d−i}` as sphere points, repeated by
/// multiplicity. Vanishing top coefficients give roots at ∞ and vanishing
/// bottom coefficients give roots at 0.
pub fn form_roots(c: &[C64]) -> Result<Vec<SpherePoint>> {
    let d = c.len() - 1;
    let lo = c.iter().position(|x| x.norm() > 0.0);
    let lo = match lo {
        Some(v) => v,
        None => return Err(Error::Schema("zero form has no roots".into())),
    };
    let hi = c.iter().rposition(|x| x.norm() > 0.0).unwrap();
    let mut out = Vec::with_capacity(d);
    for _ in 0..lo {
        out.push(SpherePoint::zero());
    }
    for r in aberth(&c[lo..=hi])? {
        out.push(SpherePoint::from_complex(r));
    }
    for _ in hi..d {
        out.push(SpherePoint::infinity());
    }
    Ok(out)
}

/// A cluster of nearby points with its size.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub point: SpherePoint,
    pub multiplicity: usize,
    /// Largest chordal distance from a member to the representative.
    pub spread: f64,
}

/// Single-linkage clustering at chordal radius `tol`; representative =
/// centroid. Clusters keep the order of their first member.
pub fn cluster(points: &[SpherePoint], tol: f64) -> Vec<Cluster> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        let mut j = i;
        while l[j] != r {
            let nx = l[j];
            l[j] = r;
            j = nx;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].chordal(&points[j]) <= tol {
                let a = find(&mut label, i);
                let b = find(&mut label, j);
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    label[hi] = lo;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<SpherePoint>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, g)) => g.push(points[i]),
            None => groups.push((r, vec![points[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let weighted: Vec<(SpherePoint, f64)> = g.iter().map(|p| (*p, 1.0)).collect();
            let c = SpherePoint::centroid(&weighted);
            let spread = g.iter().map(|p| p.chordal(&c)).fold(0.0, f64::max);
            Cluster {
                point: c,
                multiplicity: g.len(),
                spread,
            }
        })
        .collect()
}
