//! Coefficient fields: double-precision complex numbers and exact Gaussian
//! rationals.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

pub type C64 = Complex64;

pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> C64;
    fn from_i64(v: i64) -> Self;
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
}

/// Exact element of Q(i).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        GaussRat {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    /// Exact binary expansion of a finite double.
    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(GaussRat {
            re: BigRational::from_float(re)?,
            im: BigRational::from_float(im)?,
        })
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Largest bit length among numerators and denominators.
    pub fn bits(&self) -> u64 {
        [
            self.re.numer(),
            self.re.denom(),
            self.im.numer(),
            self.im.denom(),
        ]
        .iter()
        .map(|b| b.bits())
        .max()
        .unwrap_or(0)
    }

    /// Parses `"p/q"`, `"p"`, or a decimal string as a real value.
    pub fn parse_real(s: &str) -> Option<BigRational> {
        let s = s.trim();
        if let Ok(r) = BigRational::from_str(s) {
            return Some(r);
        }
        let v: f64 = s.parse().ok()?;
        BigRational::from_float(v)
    }

    fn fmt_rat(r: &BigRational) -> String {
        if r.denom().is_one() {
            format!("{}", r.numer())
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    pub fn re_string(&self) -> String {
        Self::fmt_rat(&self.re)
    }

    pub fn im_string(&self) -> String {
        Self::fmt_rat(&self.im)
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerator or denominator: keep the top 60 bits of each.
    let sn = (r.numer().bits() as i64 - 60).max(0);
    let sd = (r.denom().bits() as i64 - 60).max(0);
    let n = (r.numer() >> sn as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> sd as usize).to_f64().unwrap_or(1.0);
    let scale = (sn - sd).clamp(-4000, 4000) as i32;
    (n / d) * 2f64.powi(scale)
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", Self::fmt_rat(&self.re))
        } else {
            write!(
                f,
                "({} + {}i)",
                Self::fmt_rat(&self.re),
                Self::fmt_rat(&self.im)
            )
        }
    }
}

impl Scalar for GaussRat {
    fn zero() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn one() -> Self {
        GaussRat {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }
    fn add(&self, o: &Self) -> Self {
        GaussRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
    fn sub(&self, o: &Self) -> Self {
        GaussRat {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat {
                re: &self.re * &o.re,
                im: BigRational::zero(),
            };
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn div(&self, o: &Self) -> Self {
        if o.im.is_zero() {
            return GaussRat {
                re: &self.re / &o.re,
                im: &self.im / &o.re,
            };
        }
        let n = o.norm_sqr();
        let p = self.mul(&o.conj());
        GaussRat {
            re: p.re / &n,
            im: p.im / n,
        }
    }
    fn neg(&self) -> Self {
        GaussRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn from_i64(v: i64) -> Self {
        GaussRat::from_ints(v, 0)
    }
}

impl GaussRat {
    pub fn is_real_positive(&self) -> bool {
        self.im.is_zero() && self.re.is_positive()
    }
}
