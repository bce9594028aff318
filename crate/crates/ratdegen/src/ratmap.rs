//! Possibly-degenerate rational maps `[P : Q]` of a fixed intended degree.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::forms;
use crate::roots::{self, cluster, Cluster};
use crate::scalar::{GaussRat, Scalar, C64};
use crate::sphere::{MoebiusMap, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Float,
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coeffs {
    Float { num: Vec<C64>, den: Vec<C64> },
    Exact { num: Vec<GaussRat>, den: Vec<GaussRat> },
}

/// `[P : Q]` with `P = Σ a_i z^i w^{d−i}` and `Q = Σ b_i z^i w^{d−i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveRatMap {
    degree: usize,
    coeffs: Coeffs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hole {
    pub point: SpherePoint,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedForm {
    /// Intended degree of the map that was reduced.
    pub degree: usize,
    /// Common factor `H` (floating view).
    pub gcd: Vec<C64>,
    /// Exact common factor when reduced on the exact backend.
    pub gcd_exact: Option<Vec<GaussRat>>,
    /// `[P/H : Q/H]`, possibly of degree 0.
    pub reduction: ProjectiveRatMap,
    pub holes: Vec<Hole>,
    /// Largest coefficient mismatch of `H·(P̃, Q̃)` against `(P, Q)`.
    pub residual: f64,
    /// Distance of the clustering decision from the `tau_cluster` boundary,
    /// in `[0, 1]`; `None` on the exact backend.
    pub confidence: Option<f64>,
}

impl ReducedForm {
    pub fn reduction_degree(&self) -> usize {
        self.reduction.degree()
    }

    pub fn total_depth(&self) -> usize {
        self.holes.iter().map(|h| h.depth).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.holes.is_empty()
    }

    /// Value of a constant reduction.
    pub fn constant_value(&self) -> Option<SpherePoint> {
        if self.reduction.degree() == 0 {
            let (n, d) = self.reduction.float_coeffs();
            SpherePoint::from_homogeneous(n[0], d[0])
        } else {
            None
        }
    }

    pub fn depth_at(&self, p: &SpherePoint, tol: f64) -> usize {
        self.holes
            .iter()
            .filter(|h| h.point.chordal(p) <= tol)
            .map(|h| h.depth)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GitClass {
    Stable,
    SemistableOnly,
    Unstable,
}

fn normalize_float(num: &mut [C64], den: &mut [C64]) -> bool {
    let mut best = C64::new(0.0, 0.0);
    for c in num.iter().chain(den.iter()) {
        if c.norm() > best.norm() {
            best = *c;
        }
    }
    if best.norm() == 0.0 || !best.is_finite() {
        return false;
    }
    let s = C64::new(1.0, 0.0) / best;
    for c in num.iter_mut().chain(den.iter_mut()) {
        *c *= s;
    }
    // Keep the pivot exactly one.
    true
}

fn normalize_exact(num: &mut [GaussRat], den: &mut [GaussRat]) -> bool {
    let pivot = num
        .iter()
        .chain(den.iter())
        .find(|c| !c.is_zero())
        .cloned();
    match pivot {
        None => false,
        Some(p) => {
            for c in num.iter_mut().chain(den.iter_mut()) {
                *c = c.div(&p);
            }
            true
        }
    }
}

impl ProjectiveRatMap {
    pub fn float(degree: usize, num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        if num.len() != degree + 1 || den.len() != degree + 1 {
            return Err(Error::Schema(format!(
                "expected {} coefficients per form",
                degree + 1
            )));
        }
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(Error::Schema("non-finite coefficient".into()));
        }
        let (mut num, mut den) = (num, den);
        if !normalize_float(&mut num, &mut den) {
            return Err(Error::Schema("all coefficients vanish".into()));
        }
        Ok(ProjectiveRatMap {
            degree,
            coeffs: Coeffs::Float { num, den },
        })
    }

    pub fn exact(degree: usize, num: Vec<GaussRat>, den: Vec<GaussRat>) -> Result<Self> {
        if num.len() != degree + 1 || den.len() != degree + 1 {
            return Err(Error::Schema(format!(
                "expected {} coefficients per form",
                degree + 1
            )));
        }
        let (mut num, mut den) = (num, den);
        if !normalize_exact(&mut num, &mut den) {
            return Err(Error::Schema("all coefficients vanish".into()));
        }
        Ok(ProjectiveRatMap {
            degree,
            coeffs: Coeffs::Exact { num, den },
        })
    }

    /// Float map from real coefficients (ascending in z).
    pub fn from_real(num: &[f64], den: &[f64]) -> Result<Self> {
        let d = num.len() - 1;
        Self::float(
            d,
            num.iter().map(|x| C64::new(*x, 0.0)).collect(),
            den.iter().map(|x| C64::new(*x, 0.0)).collect(),
        )
    }

    /// Exact map from integer coefficients (ascending in z).
    pub fn from_ints(num: &[i64], den: &[i64]) -> Result<Self> {
        let d = num.len() - 1;
        Self::exact(
            d,
            num.iter().map(|x| GaussRat::from_ints(*x, 0)).collect(),
            den.iter().map(|x| GaussRat::from_ints(*x, 0)).collect(),
        )
    }

    /// Polynomial `Σ c_i z^i` as a map of degree `c.len() − 1`.
    pub fn polynomial(c: &[C64]) -> Result<Self> {
        let d = c.len() - 1;
        let mut den = vec![C64::new(0.0, 0.0); d + 1];
        den[0] = C64::new(1.0, 0.0);
        Self::float(d, c.to_vec(), den)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn backend(&self) -> Backend {
        match self.coeffs {
            Coeffs::Float { .. } => Backend::Float,
            Coeffs::Exact { .. } => Backend::Exact,
        }
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    /// Floating view of the coefficients.
    pub fn float_coeffs(&self) -> (Vec<C64>, Vec<C64>) {
        match &self.coeffs {
            Coeffs::Float { num, den } => (num.clone(), den.clone()),
            Coeffs::Exact { num, den } => (
                num.iter().map(|c| c.to_c64()).collect(),
                den.iter().map(|c| c.to_c64()).collect(),
            ),
        }
    }

    pub fn exact_coeffs(&self) -> Option<(&[GaussRat], &[GaussRat])> {
        match &self.coeffs {
            Coeffs::Exact { num, den } => Some((num, den)),
            _ => None,
        }
    }

    /// Floating copy (normalized).
    pub fn to_float(&self) -> ProjectiveRatMap {
        let (n, d) = self.float_coeffs();
        Self::float(self.degree, n, d).expect("finite nonzero map")
    }

    /// Concatenated normalized coefficient vector `(a_0..a_d, b_0..b_d)`.
    pub fn coefficient_vector(&self) -> Vec<C64> {
        let f = self.to_float();
        let (n, d) = f.float_coeffs();
        n.into_iter().chain(d).collect()
    }

    /// Sup-norm distance between normalized coefficient vectors, after
    /// aligning phases at the pivot of `self`.
    pub fn coefficient_distance(&self, o: &ProjectiveRatMap) -> f64 {
        let a = self.coefficient_vector();
        let b = o.coefficient_vector();
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        projective_sup_distance(&a, &b)
    }

    pub fn max_bits(&self) -> u64 {
        match &self.coeffs {
            Coeffs::Exact { num, den } => num.iter().chain(den).map(|c| c.bits()).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Value at `p`, or `None` when both forms vanish (a hole).
    pub fn eval_raw(&self, p: &SpherePoint) -> Option<SpherePoint> {
        let (n, d) = self.float_coeffs();
        let a = forms::eval_c64(&n, p.z(), p.w());
        let b = forms::eval_c64(&d, p.z(), p.w());
        let s = a.norm().max(b.norm());
        if s <= 1e-300 {
            return None;
        }
        SpherePoint::from_homogeneous(a, b)
    }

    /// Value at `p` using the reduction at holes of degenerate maps.
    pub fn eval(&self, p: &SpherePoint, tol: &Tolerances) -> Result<SpherePoint> {
        match self.eval_raw(p) {
            Some(v) => {
                // Near a hole the raw value is unreliable; use the reduction.
                let r = self.reduce(tol)?;
                if r.holes.iter().any(|h| h.point.chordal(p) <= tol.tau_cluster) {
                    r.reduction.eval_raw(p).ok_or(Error::HoleEvaluation)
                } else {
                    Ok(v)
                }
            }
            None => {
                let r = self.reduce(tol)?;
                r.reduction.eval_raw(p).ok_or(Error::HoleEvaluation)
            }
        }
    }

    /// `M ∘ f`.
    pub fn post_compose(&self, m: &MoebiusMap) -> Result<ProjectiveRatMap> {
        let (n, d) = self.float_coeffs();
        let num: Vec<C64> = n.iter().zip(&d).map(|(p, q)| m.m[0][0] * p + m.m[0][1] * q).collect();
        let den: Vec<C64> = n.iter().zip(&d).map(|(p, q)| m.m[1][0] * p + m.m[1][1] * q).collect();
        Self::float(self.degree, num, den)
    }

    /// `f ∘ M`.
    pub fn pre_compose(&self, m: &MoebiusMap) -> Result<ProjectiveRatMap> {
        let (n, d) = self.float_coeffs();
        // Linear forms a z + b w and c z + d w (index 0 = w, index 1 = z).
        let lz = vec![m.m[0][1], m.m[0][0]];
        let lw = vec![m.m[1][1], m.m[1][0]];
        let num = forms::substitute(&n, &lz, &lw);
        let den = forms::substitute(&d, &lz, &lw);
        Self::float(self.degree, num, den)
    }

    /// `M ∘ f ∘ M⁻¹`.
    pub fn conjugate(&self, m: &MoebiusMap) -> Result<ProjectiveRatMap> {
        self.pre_compose(&m.inverse())?.post_compose(m)
    }

    /// Exact `M ∘ f ∘ M⁻¹` for an exact matrix `[[a, b], [c, d]]`.
    pub fn conjugate_exact(&self, m: [[GaussRat; 2]; 2]) -> Result<ProjectiveRatMap> {
        let (n, d) = match &self.coeffs {
            Coeffs::Exact { num, den } => (num.clone(), den.clone()),
            _ => return Err(Error::Schema("exact backend required".into())),
        };
        let [[a, b], [c, dd]] = m;
        // Inverse up to scale: [[d, -b], [-c, a]].
        let lz = vec![b.neg(), dd.clone()];
        let lw = vec![a.clone(), c.neg()];
        let pn = forms::substitute(&n, &lz, &lw);
        let qn = forms::substitute(&d, &lz, &lw);
        let num: Vec<GaussRat> = pn.iter().zip(&qn).map(|(p, q)| a.mul(p).add(&b.mul(q))).collect();
        let den: Vec<GaussRat> = pn.iter().zip(&qn).map(|(p, q)| c.mul(p).add(&dd.mul(q))).collect();
        Self::exact(self.degree, num, den)
    }

    fn sylvester<T: Scalar>(p: &[T], q: &[T]) -> Vec<Vec<T>> {
        let d = p.len() - 1;
        let n = 2 * d;
        let mut m = vec![vec![T::zero(); n]; n];
        for i in 0..d {
            for k in 0..=d {
                // High-first ordering: column i + k holds coefficient d − k.
                m[i][i + k] = p[d - k].clone();
                m[d + i][i + k] = q[d - k].clone();
            }
        }
        m
    }

    /// Sylvester matrix of `(P, Q)` as floating entries.
    pub fn sylvester_matrix(&self) -> Vec<Vec<C64>> {
        let (n, d) = self.float_coeffs();
        Self::sylvester(&n, &d)
    }

    /// Exact homogeneous resultant (Sylvester determinant).
    pub fn resultant_exact(&self) -> Option<GaussRat> {
        let (n, d) = self.exact_coeffs()?;
        if self.degree == 0 {
            return Some(GaussRat::one());
        }
        let m = Self::sylvester(n, d);
        Some(det_exact(m))
    }

    /// Homogeneous resultant. Exact backend: Sylvester determinant.
    /// Floating backend: `λ^d Π Q(α_j, β_j)` over the roots of `P`.
    pub fn resultant(&self) -> Result<C64> {
        if let Some(r) = self.resultant_exact() {
            return Ok(r.to_c64());
        }
        let (p, q) = self.float_coeffs();
        let d = self.degree;
        if forms::is_zero(&p) {
            return Ok(C64::new(0.0, 0.0));
        }
        let rts = roots::form_roots(&p)?;
        let prod = forms::from_roots(&rts);
        let k = (0..=d)
            .max_by(|a, b| p[*a].norm().partial_cmp(&p[*b].norm()).unwrap())
            .unwrap();
        let lambda = p[k] / prod[k];
        let mut r = lambda.powu(d as u32);
        for rt in &rts {
            r *= forms::eval_c64(&q, rt.z(), rt.w());
        }
        Ok(r)
    }

    /// Numerical rank deficiency of the Sylvester matrix.
    pub fn sylvester_gcd_degree(&self, tol: &Tolerances) -> usize {
        let m = self.sylvester_matrix();
        let n = m.len();
        if n == 0 {
            return 0;
        }
        let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
        let sv = mat.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let rank = sv.iter().filter(|s| **s > tol.tau_gcd * smax).count();
        n - rank
    }

    pub fn reduce(&self, tol: &Tolerances) -> Result<ReducedForm> {
        match &self.coeffs {
            Coeffs::Exact { num, den } => Ok(reduce_exact(self.degree, num, den)),
            Coeffs::Float { num, den } => reduce_float(self.degree, num, den, tol),
        }
    }

    pub fn is_degenerate(&self, tol: &Tolerances) -> Result<bool> {
        if let Some(r) = self.resultant_exact() {
            return Ok(r.is_zero());
        }
        Ok(self.reduce(tol)?.is_degenerate())
    }

    /// Formal composition `f ∘ g = [P(P_g, Q_g) : Q(P_g, Q_g)]`.
    pub fn compose(&self, g: &ProjectiveRatMap) -> Result<ProjectiveRatMap> {
        let deg = self.degree * g.degree;
        match (&self.coeffs, &g.coeffs) {
            (Coeffs::Exact { num: p, den: q }, Coeffs::Exact { num: pg, den: qg }) => {
                let num = forms::substitute(p, pg, qg);
                let den = forms::substitute(q, pg, qg);
                if forms::is_zero(&num) && forms::is_zero(&den) {
                    return Err(Error::Indeterminate);
                }
                Self::exact(deg, num, den)
            }
            _ => {
                let (p, q) = self.float_coeffs();
                let (pg, qg) = g.float_coeffs();
                let num = forms::substitute(&p, &pg, &qg);
                let den = forms::substitute(&q, &pg, &qg);
                let s = forms::sup_norm(&num).max(forms::sup_norm(&den));
                if s <= 1e-12 {
                    return Err(Error::Indeterminate);
                }
                Self::float(deg, num, den)
            }
        }
    }

    /// `n`-fold iterate.
    pub fn iterate(&self, n: usize, tol: &Tolerances) -> Result<ProjectiveRatMap> {
        if n == 0 {
            return Err(Error::Schema("iterate needs n ≥ 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
            if acc.backend() == Backend::Exact && acc.max_bits() > tol.exact_bits_cap {
                return Err(Error::CoefficientOverflow);
            }
        }
        Ok(acc)
    }

    /// The form `β P − α Q` whose roots are the preimages of `[α : β]`.
    pub fn preimage_form(&self, w: &SpherePoint) -> Vec<C64> {
        let (p, q) = self.float_coeffs();
        p.iter().zip(&q).map(|(a, b)| w.w() * a - w.z() * b).collect()
    }

    /// Preimages of `w` with multiplicities (clustered at `tau_cluster`).
    pub fn preimages(&self, w: &SpherePoint, tol: &Tolerances) -> Result<Vec<(SpherePoint, usize)>> {
        let c = self.preimage_form(w);
        if forms::sup_norm(&c) == 0.0 {
            return Err(Error::ExceptionalMass);
        }
        let r = roots::form_roots(&c)?;
        Ok(cluster(&r, tol.tau_cluster)
            .into_iter()
            .map(|c| (c.point, c.multiplicity))
            .collect())
    }

    /// Preimages of `w` repeated by multiplicity, without clustering.
    pub fn preimages_raw(&self, w: &SpherePoint) -> Result<Vec<SpherePoint>> {
        let c = self.preimage_form(w);
        if forms::sup_norm(&c) == 0.0 {
            return Err(Error::ExceptionalMass);
        }
        roots::form_roots(&c)
    }

    pub fn local_degree(&self, z: &SpherePoint, tol: &Tolerances) -> Result<usize> {
        let v = self.eval(z, tol)?;
        let pre = self.preimages(&v, tol)?;
        Ok(pre
            .iter()
            .filter(|(p, _)| p.chordal(z) <= tol.tau_cluster)
            .map(|(_, m)| *m)
            .sum::<usize>()
            .max(1))
    }

    /// Homogeneous Wronskian `P_z Q_w − P_w Q_z`.
    pub fn wronskian(&self) -> Vec<C64> {
        let (p, q) = self.float_coeffs();
        let (pz, pw) = forms::partials(&p);
        let (qz, qw) = forms::partials(&q);
        forms::sub(&forms::mul(&pz, &qw), &forms::mul(&pw, &qz))
    }

    /// Critical points with multiplicity `local degree − 1`.
    pub fn critical_points(&self, tol: &Tolerances) -> Result<Vec<(SpherePoint, usize)>> {
        if self.degree < 2 {
            return Ok(vec![]);
        }
        let w = self.wronskian();
        if forms::sup_norm(&w) == 0.0 {
            return Err(Error::NotDegenerate);
        }
        let r = roots::form_roots(&w)?;
        Ok(cluster(&r, tol.tau_cluster)
            .into_iter()
            .map(|c| (c.point, c.multiplicity))
            .collect())
    }

    /// Degenerate maps: `{g̃}` when the reduction is constant, otherwise
    /// empty. Nondegenerate maps: points with finite grand orbit, found
    /// among totally ramified fixed points and 2-cycles.
    pub fn exceptional_set(&self, tol: &Tolerances) -> Result<Vec<SpherePoint>> {
        let red = self.reduce(tol)?;
        if red.is_degenerate() {
            return Ok(red.constant_value().into_iter().collect());
        }
        if self.degree < 2 {
            return Ok(vec![]);
        }
        let d = self.degree;
        let crit = self.critical_points(tol)?;
        let total: Vec<SpherePoint> = crit
            .iter()
            .filter(|(_, m)| *m + 1 == d)
            .map(|(p, _)| *p)
            .collect();
        let close = |a: &SpherePoint, b: &SpherePoint| a.chordal(b) <= tol.tau_cluster.sqrt();
        let mut out: Vec<SpherePoint> = Vec::new();
        for c in &total {
            let v = self.eval_raw(c).ok_or(Error::HoleEvaluation)?;
            if close(&v, c) {
                out.push(*c);
            } else if total.iter().any(|c2| close(&v, c2)) {
                let v2 = self.eval_raw(&v).ok_or(Error::HoleEvaluation)?;
                if close(&v2, c) {
                    out.push(*c);
                }
            }
        }
        Ok(out)
    }

    /// Depth-based (semi)stability test.
    pub fn git_classify(&self, tol: &Tolerances) -> Result<GitClass> {
        let red = self.reduce(tol)?;
        let d = self.degree;
        let fixes = |h: &SpherePoint| -> bool {
            match red.reduction.eval_raw(h) {
                Some(v) => v.chordal(h) <= tol.tau_cluster,
                None => false,
            }
        };
        let mut semistable = true;
        let mut stable = true;
        for h in &red.holes {
            let dh = h.depth;
            if 2 * dh > d + 1 {
                semistable = false;
            }
            if 2 * dh >= d && fixes(&h.point) {
                semistable = false;
            }
            if 2 * dh > d {
                stable = false;
            }
            if 2 * dh + 1 >= d && fixes(&h.point) {
                stable = false;
            }
        }
        Ok(if !semistable {
            GitClass::Unstable
        } else if stable {
            GitClass::Stable
        } else {
            GitClass::SemistableOnly
        })
    }
}

/// Projective sup-norm distance between coefficient vectors: both are
/// scaled so the entry at the pivot of `a` equals one.
pub fn projective_sup_distance(a: &[C64], b: &[C64]) -> f64 {
    let k = (0..a.len())
        .max_by(|i, j| a[*i].norm().partial_cmp(&a[*j].norm()).unwrap())
        .unwrap();
    if b[k].norm() == 0.0 {
        return f64::INFINITY;
    }
    let sa = a[k];
    let sb = b[k];
    let ma = forms::sup_norm(a) / sa.norm();
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / sa - y / sb).norm())
        .fold(0.0, f64::max)
        / ma.max(1.0)
}

fn det_exact(mut m: Vec<Vec<GaussRat>>) -> GaussRat {
    let n = m.len();
    let mut det = GaussRat::one();
    for col in 0..n {
        let piv = (col..n).find(|r| !m[*r][col].is_zero());
        let piv = match piv {
            Some(p) => p,
            None => return GaussRat::zero(),
        };
        if piv != col {
            m.swap(piv, col);
            det = det.neg();
        }
        let p = m[col][col].clone();
        det = det.mul(&p);
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].div(&p);
            for c in col..n {
                let v = m[col][c].mul(&f);
                m[r][c] = m[r][c].sub(&v);
            }
        }
    }
    det
}

fn ord_infinity<T: Scalar>(c: &[T]) -> Option<usize> {
    let d = c.len() - 1;
    c.iter().rposition(|x| !x.is_zero()).map(|hi| d - hi)
}

fn reduce_exact(d: usize, p: &[GaussRat], q: &[GaussRat]) -> ReducedForm {
    use forms::exact as ex;
    let pz = forms::is_zero(p);
    let qz = forms::is_zero(q);
    // Dehomogenized gcd and the power of w shared by both forms.
    let (g, m) = if pz {
        (ex::monic(q), ord_infinity(q).unwrap())
    } else if qz {
        (ex::monic(p), ord_infinity(p).unwrap())
    } else {
        let g = ex::gcd(p, q);
        let m = ord_infinity(p).unwrap().min(ord_infinity(q).unwrap());
        (g, m)
    };
    let dg = ex::degree(&g).unwrap_or(0);
    let e = dg + m;
    let mut h: Vec<GaussRat> = g[..=dg].to_vec();
    h.resize(e + 1, GaussRat::zero());
    let red_deg = d - e;
    let divide = |f: &[GaussRat]| -> Vec<GaussRat> {
        if forms::is_zero(f) {
            return vec![GaussRat::zero(); red_deg + 1];
        }
        let (quo, _) = ex::divrem(f, &g);
        let mut out = quo;
        out.resize(red_deg + 1, GaussRat::zero());
        out.truncate(red_deg + 1);
        out
    };
    let pr = divide(p);
    let qr = divide(q);
    let reduction = ProjectiveRatMap::exact(red_deg, pr, qr).expect("reduction is nonzero");
    let mut holes = Vec::new();
    if dg > 0 {
        for (factor, mult) in ex::squarefree(&g) {
            let fc: Vec<C64> = factor.iter().map(|c| c.to_c64()).collect();
            let pts = exact_factor_roots(&factor, &fc);
            for pt in pts {
                holes.push(Hole {
                    point: pt,
                    depth: mult,
                });
            }
        }
    }
    if m > 0 {
        holes.push(Hole {
            point: SpherePoint::infinity(),
            depth: m,
        });
    }
    ReducedForm {
        degree: d,
        gcd: h.iter().map(|c| c.to_c64()).collect(),
        gcd_exact: Some(h),
        reduction,
        holes,
        residual: 0.0,
        confidence: None,
    }
}

/// Roots of a square-free exact factor; linear factors are exact.
fn exact_factor_roots(factor: &[GaussRat], fc: &[C64]) -> Vec<SpherePoint> {
    if factor.len() == 2 {
        let r = factor[0].neg().div(&factor[1]);
        return vec![SpherePoint::from_complex(r.to_c64())];
    }
    match roots::form_roots(fc) {
        Ok(r) => r.into_iter().filter(|p| !p.is_infinity()).collect(),
        Err(_) => vec![],
    }
}

fn reduce_float(d: usize, p: &[C64], q: &[C64], tol: &Tolerances) -> Result<ReducedForm> {
    let pz = forms::is_zero(p);
    let qz = forms::is_zero(q);
    if pz || qz {
        let f = if pz { q } else { p };
        let rts = roots::form_roots(f)?;
        let cl = cluster(&rts, tol.tau_cluster);
        let holes: Vec<Hole> = cl
            .iter()
            .map(|c| Hole {
                point: c.point,
                depth: c.multiplicity,
            })
            .collect();
        let spread = cl.iter().map(|c| c.spread).fold(0.0, f64::max);
        let one = vec![C64::new(1.0, 0.0)];
        let zero = vec![C64::new(0.0, 0.0)];
        let reduction = if pz {
            ProjectiveRatMap::float(0, zero, one)?
        } else {
            ProjectiveRatMap::float(0, one, zero)?
        };
        let h = forms::from_roots(&rts);
        let lam = fit_scale(&h, f);
        let residual = h
            .iter()
            .zip(f)
            .map(|(a, b)| (a * lam - b).norm())
            .fold(0.0, f64::max);
        return Ok(ReducedForm {
            degree: d,
            gcd: h,
            gcd_exact: None,
            reduction,
            holes,
            residual,
            confidence: Some((1.0 - spread / tol.tau_cluster).clamp(0.0, 1.0)),
        });
    }
    let rp = roots::form_roots(p)?;
    let rq = roots::form_roots(q)?;
    // Global greedy matching by increasing distance.
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in rp.iter().enumerate() {
        for (j, b) in rq.iter().enumerate() {
            let dist = a.chordal(b);
            if dist <= 2.0 * tol.tau_cluster {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut used_p = vec![false; rp.len()];
    let mut used_q = vec![false; rq.len()];
    let mut matched: Vec<SpherePoint> = Vec::new();
    let mut max_match = 0.0f64;
    let mut near_miss = f64::INFINITY;
    for (dist, i, j) in pairs {
        if used_p[i] || used_q[j] {
            continue;
        }
        if dist <= tol.tau_cluster {
            used_p[i] = true;
            used_q[j] = true;
            max_match = max_match.max(dist);
            matched.push(SpherePoint::centroid(&[(rp[i], 1.0), (rq[j], 1.0)]));
        } else {
            near_miss = near_miss.min(dist);
        }
    }
    let clustered = matched.len();
    // gcd(P, Q) is unchanged by scaling P and Q separately; balancing
    // keeps a small Q from looking like a common factor.
    let sp = forms::sup_norm(p);
    let sq = forms::sup_norm(q);
    let syl = ProjectiveRatMap::float(
        d,
        p.iter().map(|c| c / sp).collect(),
        q.iter().map(|c| c / sq).collect(),
    )?
    .sylvester_gcd_degree(tol);
    if syl != clustered {
        return Err(Error::RankAmbiguity {
            clustered,
            sylvester: syl,
        });
    }
    let cl: Vec<Cluster> = cluster(&matched, tol.tau_cluster);
    let holes: Vec<Hole> = cl
        .iter()
        .map(|c| Hole {
            point: c.point,
            depth: c.multiplicity,
        })
        .collect();
    let mut hole_pts: Vec<SpherePoint> = Vec::new();
    for c in &cl {
        for _ in 0..c.multiplicity {
            hole_pts.push(c.point);
        }
    }
    let h = forms::from_roots(&hole_pts);
    let up: Vec<SpherePoint> = rp.iter().zip(&used_p).filter(|(_, u)| !**u).map(|(r, _)| *r).collect();
    let uq: Vec<SpherePoint> = rq.iter().zip(&used_q).filter(|(_, u)| !**u).map(|(r, _)| *r).collect();
    let pr = forms::from_roots(&up);
    let qr = forms::from_roots(&uq);
    let hp = forms::mul(&h, &pr);
    let hq = forms::mul(&h, &qr);
    let lp = fit_scale(&hp, p);
    let lq = fit_scale(&hq, q);
    let residual = hp
        .iter()
        .zip(p)
        .map(|(a, b)| (a * lp - b).norm())
        .chain(hq.iter().zip(q).map(|(a, b)| (a * lq - b).norm()))
        .fold(0.0, f64::max);
    let reduction = ProjectiveRatMap::float(
        d - clustered,
        pr.iter().map(|c| c * lp).collect(),
        qr.iter().map(|c| c * lq).collect(),
    )?;
    let spread = cl.iter().map(|c| c.spread).fold(max_match, f64::max);
    let conf_in = 1.0 - spread / tol.tau_cluster;
    let conf_out = if near_miss.is_finite() {
        near_miss / tol.tau_cluster - 1.0
    } else {
        1.0
    };
    Ok(ReducedForm {
        degree: d,
        gcd: h,
        gcd_exact: None,
        reduction,
        holes,
        residual,
        confidence: Some(conf_in.min(conf_out).clamp(0.0, 1.0)),
    })
}

/// Least-squares scalar `λ` minimizing `‖λ a − b‖`.
fn fit_scale(a: &[C64], b: &[C64]) -> C64 {
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += x.conj() * y;
        den += x.norm_sqr();
    }
    if den == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        num / den
    }
}

/// Holes of `f ∘ g` predicted from the holes of `f` and `g`:
/// `d_h(f∘g) = d_h(g)·deg f + deg_h(g̃)·d_{g̃(h)}(f)`, over
/// `h ∈ Hole(g) ∪ g̃⁻¹(Hole(f))`.
pub fn composition_depths(f: &ProjectiveRatMap, g: &ProjectiveRatMap, tol: &Tolerances) -> Result<Vec<Hole>> {
    let rf = f.reduce(tol)?;
    let rg = g.reduce(tol)?;
    let d = f.degree();
    let gt = &rg.reduction;
    let mut cand: Vec<SpherePoint> = rg.holes.iter().map(|h| h.point).collect();
    if gt.degree() == 0 {
        let c = rg.constant_value().ok_or(Error::Indeterminate)?;
        if rf.depth_at(&c, tol.tau_cluster) > 0 {
            return Err(Error::Indeterminate);
        }
    } else {
        for h in &rf.holes {
            for (p, _) in gt.preimages(&h.point, tol)? {
                cand.push(p);
            }
        }
    }
    let mut out: Vec<Hole> = Vec::new();
    for h in cand {
        if out.iter().any(|o| o.point.chordal(&h) <= tol.tau_cluster) {
            continue;
        }
        let mut depth = rg.depth_at(&h, tol.tau_cluster) * d;
        if gt.degree() > 0 {
            let v = gt.eval(&h, tol)?;
            depth += gt.local_degree(&h, tol)? * rf.depth_at(&v, tol.tau_cluster);
        }
        if depth > 0 {
            out.push(Hole { point: h, depth });
        }
    }
    Ok(out)
}

/// Empirical and predicted counts of preimages near a point.
#[derive(Clone, Debug, PartialEq)]
pub struct PreimageCount {
    /// Prediction from the limit map (`None` when `z₀` is exceptional).
    pub predicted: Option<usize>,
    /// Upper bound from a left-class limit, when supplied.
    pub bound: Option<usize>,
    /// Empirical counts per sample.
    pub empirical: Vec<usize>,
    /// First sample index from which counts equal the prediction.
    pub threshold: Option<usize>,
}

/// Prediction `d_w(g) + [g̃(w) = z₀]·deg_w g̃` for `z₀ ∉ Ex_g`.
pub fn predict_preimage_count(
    g: &ProjectiveRatMap,
    z0: &SpherePoint,
    w: &SpherePoint,
    tol: &Tolerances,
) -> Result<Option<usize>> {
    let red = g.reduce(tol)?;
    if let Some(c) = red.constant_value() {
        if red.is_degenerate() && c.chordal(z0) <= tol.tau_cluster {
            return Ok(None);
        }
    }
    let dw = red.depth_at(w, tol.tau_cluster);
    let extra = if red.reduction_degree() == 0 {
        0
    } else {
        match red.reduction.eval_raw(w) {
            Some(v) if v.chordal(z0) <= tol.tau_cluster => red.reduction.local_degree(w, tol)?,
            _ => 0,
        }
    };
    Ok(Some(dw + extra))
}

/// Bound `d_w(φ) + [φ̃(w) = a]·deg_w φ̃` from a left-class limit `φ` and the
/// limit point `a` of `A_k(z₀)`.
pub fn preimage_bound(
    phi: &ProjectiveRatMap,
    a: &SpherePoint,
    w: &SpherePoint,
    tol: &Tolerances,
) -> Result<usize> {
    let red = phi.reduce(tol)?;
    let dw = red.depth_at(w, tol.tau_cluster);
    let extra = if red.reduction_degree() == 0 {
        0
    } else {
        match red.reduction.eval_raw(w) {
            Some(v) if v.chordal(a) <= tol.tau_cluster => red.reduction.local_degree(w, tol)?,
            _ => 0,
        }
    };
    Ok(dw + extra)
}

/// Counts roots of `P_k − z₀ Q_k` within chordal `radius` of `w` along a
/// sequence converging to `g`.
pub fn count_preimages_near(
    fk: &[ProjectiveRatMap],
    g: &ProjectiveRatMap,
    phi: Option<(&ProjectiveRatMap, &SpherePoint)>,
    z0: &SpherePoint,
    w: &SpherePoint,
    radius: f64,
    tol: &Tolerances,
) -> Result<PreimageCount> {
    let predicted = predict_preimage_count(g, z0, w, tol)?;
    let bound = match phi {
        Some((p, a)) => Some(preimage_bound(p, a, w, tol)?),
        None => None,
    };
    let mut empirical = Vec::with_capacity(fk.len());
    for f in fk {
        let pre = f.preimages_raw(z0)?;
        empirical.push(pre.iter().filter(|p| p.chordal(w) <= radius).count());
    }
    let target = predicted.or(bound);
    let threshold = target.and_then(|t| {
        let mut first = None;
        for (i, c) in empirical.iter().enumerate().rev() {
            let ok = if predicted.is_some() { *c == t } else { *c <= t };
            if ok {
                first = Some(i);
            } else {
                break;
            }
        }
        first
    });
    // Agreement must hold on at least the last two samples.
    match threshold {
        Some(i) if i + 2 <= empirical.len() => Ok(PreimageCount {
            predicted,
            bound,
            empirical,
            threshold,
        }),
        _ => Err(Error::InconclusiveK),
    }
}
