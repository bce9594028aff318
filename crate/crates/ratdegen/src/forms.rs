//! Binary forms stored as coefficient vectors: entry `i` multiplies
//! `z^i w^{d−i}`.

use crate::scalar::{GaussRat, Scalar, C64};

pub fn mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: &T) -> Vec<T> {
    a.iter().map(|x| x.mul(s)).collect()
}

pub fn is_zero<T: Scalar>(a: &[T]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// `Σ c_i A^i B^{d−i}` for forms `A`, `B` of equal degree.
pub fn substitute<T: Scalar>(c: &[T], a: &[T], b: &[T]) -> Vec<T> {
    let d = c.len() - 1;
    let e = a.len() - 1;
    let mut apow: Vec<Vec<T>> = Vec::with_capacity(d + 1);
    let mut bpow: Vec<Vec<T>> = Vec::with_capacity(d + 1);
    apow.push(vec![T::one()]);
    bpow.push(vec![T::one()]);
    for k in 1..=d {
        apow.push(mul(&apow[k - 1], a));
        bpow.push(mul(&bpow[k - 1], b));
    }
    let mut out = vec![T::zero(); d * e + 1];
    for (i, ci) in c.iter().enumerate() {
        if ci.is_zero() {
            continue;
        }
        let term = mul(&apow[i], &bpow[d - i]);
        for (k, t) in term.iter().enumerate() {
            out[k] = out[k].add(&t.mul(ci));
        }
    }
    out
}

/// Evaluates the form at homogeneous `(z, w)`.
pub fn eval<T: Scalar>(c: &[T], z: &T, w: &T) -> T {
    // Horner in z with powers of w carried along.
    let d = c.len() - 1;
    let mut wp = vec![T::one(); d + 1];
    for k in 1..=d {
        wp[k] = wp[k - 1].mul(w);
    }
    let mut acc = T::zero();
    let mut zp = T::one();
    for (i, ci) in c.iter().enumerate() {
        if !ci.is_zero() {
            acc = acc.add(&ci.mul(&zp).mul(&wp[d - i]));
        }
        zp = zp.mul(z);
    }
    acc
}

/// Float evaluation in a scale-safe way for normalized `(z, w)`.
pub fn eval_c64(c: &[C64], z: C64, w: C64) -> C64 {
    let d = c.len() - 1;
    if z.norm() <= w.norm() {
        let t = z / w;
        let mut acc = C64::new(0.0, 0.0);
        for ci in c.iter().rev() {
            acc = acc * t + ci;
        }
        acc * w.powu(d as u32)
    } else {
        let t = w / z;
        let mut acc = C64::new(0.0, 0.0);
        for ci in c.iter() {
            acc = acc * t + ci;
        }
        acc * z.powu(d as u32)
    }
}

/// Partial derivatives (∂_z, ∂_w) as forms of degree d−1.
pub fn partials<T: Scalar>(c: &[T]) -> (Vec<T>, Vec<T>) {
    let d = c.len() - 1;
    if d == 0 {
        return (vec![T::zero()], vec![T::zero()]);
    }
    let dz: Vec<T> = (1..=d).map(|i| c[i].mul(&T::from_i64(i as i64))).collect();
    let dw: Vec<T> = (0..d).map(|i| c[i].mul(&T::from_i64((d - i) as i64))).collect();
    (dz, dw)
}

/// Product of linear factors `(β z − α w)` for points `[α : β]`.
pub fn from_roots(points: &[crate::sphere::SpherePoint]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for p in points {
        let lin = vec![-p.z(), p.w()];
        out = mul(&out, &lin);
    }
    out
}

pub fn sup_norm(c: &[C64]) -> f64 {
    c.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Dehomogenized polynomial tools over an exact field, used for gcd.
pub mod exact {
    use super::*;

    pub fn trim(p: &mut Vec<GaussRat>) {
        while p.len() > 1 && p.last().unwrap().is_zero() {
            p.pop();
        }
    }

    pub fn degree(p: &[GaussRat]) -> Option<usize> {
        p.iter().rposition(|x| !x.is_zero())
    }

    /// Division with remainder of polynomials (ascending coefficients).
    pub fn divrem(a: &[GaussRat], b: &[GaussRat]) -> (Vec<GaussRat>, Vec<GaussRat>) {
        let db = degree(b).expect("division by zero polynomial");
        let mut r: Vec<GaussRat> = a.to_vec();
        trim(&mut r);
        let da = match degree(&r) {
            Some(v) => v,
            None => return (vec![GaussRat::zero()], vec![GaussRat::zero()]),
        };
        if da < db {
            return (vec![GaussRat::zero()], r);
        }
        let mut q = vec![GaussRat::zero(); da - db + 1];
        let lead = b[db].clone();
        for k in (0..=(da - db)).rev() {
            let coef = r[k + db].div(&lead);
            if coef.is_zero() {
                continue;
            }
            for j in 0..=db {
                r[k + j] = r[k + j].sub(&coef.mul(&b[j]));
            }
            q[k] = coef;
        }
        r.truncate(db.max(1));
        trim(&mut r);
        (q, r)
    }

    pub fn monic(p: &[GaussRat]) -> Vec<GaussRat> {
        let d = degree(p).expect("zero polynomial");
        let l = p[d].clone();
        p[..=d].iter().map(|x| x.div(&l)).collect()
    }

    /// Monic gcd; gcd(0, 0) is not defined.
    pub fn gcd(a: &[GaussRat], b: &[GaussRat]) -> Vec<GaussRat> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        if degree(&x).is_none() {
            return monic(&y);
        }
        while degree(&y).is_some() {
            let (_, r) = divrem(&x, &y);
            x = y;
            y = r;
        }
        monic(&x)
    }

    pub fn derivative(p: &[GaussRat]) -> Vec<GaussRat> {
        if p.len() <= 1 {
            return vec![GaussRat::zero()];
        }
        (1..p.len())
            .map(|i| p[i].mul(&GaussRat::from_i64(i as i64)))
            .collect()
    }

    /// Square-free decomposition (Yun): returns `(factor, multiplicity)`
    /// with monic square-free factors of positive degree.
    pub fn squarefree(p: &[GaussRat]) -> Vec<(Vec<GaussRat>, usize)> {
        let mut out = Vec::new();
        let f = monic(p);
        if degree(&f) == Some(0) {
            return out;
        }
        let fp = derivative(&f);
        let a0 = gcd(&f, &fp);
        let mut b = divrem(&f, &a0).0;
        let mut c = divrem(&fp, &a0).0;
        let mut d = {
            let db = derivative(&b);
            let mut t = c.clone();
            t.resize(db.len().max(t.len()), GaussRat::zero());
            let mut db2 = db.clone();
            db2.resize(t.len(), GaussRat::zero());
            let mut r = super::sub(&t, &db2);
            trim(&mut r);
            r
        };
        let mut i = 1;
        loop {
            let a = if degree(&d).is_none() {
                b.clone()
            } else {
                gcd(&b, &d)
            };
            if degree(&a).unwrap_or(0) > 0 {
                out.push((monic(&a), i));
            }
            b = divrem(&b, &a).0;
            if degree(&b).unwrap_or(0) == 0 {
                break;
            }
            c = divrem(&d, &a).0;
            let db = derivative(&b);
            let mut t = c.clone();
            let len = t.len().max(db.len());
            t.resize(len, GaussRat::zero());
            let mut db2 = db;
            db2.resize(len, GaussRat::zero());
            d = super::sub(&t, &db2);
            trim(&mut d);
            i += 1;
        }
        out
    }
}
