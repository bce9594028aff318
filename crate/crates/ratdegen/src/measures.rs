//! Finite atomic measures on the sphere and their push-forwards and
//! pull-backs, including pull-backs by degenerate maps.

use std::collections::HashMap;

use rand::Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::harmonics;
use crate::ratmap::{ProjectiveRatMap, ReducedForm};
use crate::sphere::{MoebiusClass, MoebiusMap, SpherePoint};

#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(SpherePoint, f64)>,
    mass: f64,
}

/// Merges atoms closer than `tol` (chordal) into the first one seen.
fn merge_atoms(raw: Vec<(SpherePoint, f64)>, tol: f64) -> Vec<(SpherePoint, f64)> {
    // Chordal distance is half the Euclidean distance in R³.
    let cell = (2.0 * tol).max(1e-300);
    let key = |v: [f64; 3]| -> (i64, i64, i64) {
        (
            (v[0] / cell).floor() as i64,
            (v[1] / cell).floor() as i64,
            (v[2] / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut out: Vec<(SpherePoint, f64)> = Vec::with_capacity(raw.len());
    for (p, w) in raw {
        let v = p.stereographic();
        let k = key(v);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = grid.get(&(k.0 + dx, k.1 + dy, k.2 + dz)) {
                        for &i in ids {
                            if out[i].0.chordal(&p) <= tol {
                                found = Some(i);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        match found {
            Some(i) => out[i].1 += w,
            None => {
                grid.entry(k).or_default().push(out.len());
                out.push((p, w));
            }
        }
    }
    out
}

impl AtomicMeasure {
    /// Builds a measure, dropping zero weights and merging atoms within
    /// `tol_pt`.
    pub fn new(atoms: Vec<(SpherePoint, f64)>, tol_pt: f64) -> Result<Self> {
        if atoms.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Schema("atom weights must be finite and nonnegative".into()));
        }
        let atoms: Vec<_> = atoms.into_iter().filter(|(_, w)| *w > 0.0).collect();
        let atoms = merge_atoms(atoms, tol_pt);
        let mass = atoms.iter().map(|(_, w)| w).sum();
        Ok(AtomicMeasure { atoms, mass })
    }

    pub fn zero() -> Self {
        AtomicMeasure {
            atoms: vec![],
            mass: 0.0,
        }
    }

    pub fn dirac(p: SpherePoint) -> Self {
        AtomicMeasure {
            atoms: vec![(p, 1.0)],
            mass: 1.0,
        }
    }

    /// Probability measure with equal weights on `points`.
    pub fn uniform(points: &[SpherePoint], tol_pt: f64) -> Self {
        let w = 1.0 / points.len() as f64;
        Self::new(points.iter().map(|p| (*p, w)).collect(), tol_pt).expect("positive weights")
    }

    /// `n` equally spaced atoms on the circle `|z| = r`.
    pub fn circle(n: usize, r: f64, tol_pt: f64) -> Self {
        let pts: Vec<SpherePoint> = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                SpherePoint::from_re_im(r * a.cos(), r * a.sin())
            })
            .collect();
        Self::uniform(&pts, tol_pt)
    }

    pub fn atoms(&self) -> &[(SpherePoint, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn scaled(&self, s: f64) -> Self {
        AtomicMeasure {
            atoms: self.atoms.iter().map(|(p, w)| (*p, w * s)).collect(),
            mass: self.mass * s,
        }
    }

    pub fn normalized(&self) -> Self {
        if self.mass == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / self.mass)
        }
    }

    pub fn sum(&self, o: &AtomicMeasure, tol_pt: f64) -> Self {
        let mut a = self.atoms.clone();
        a.extend_from_slice(&o.atoms);
        Self::new(a, tol_pt).expect("weights stay positive")
    }

    /// Total weight within chordal distance `r` of `p`.
    pub fn mass_near(&self, p: &SpherePoint, r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(q, _)| q.chordal(p) <= r)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn integrate<F: Fn(&SpherePoint) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|(p, w)| w * f(p)).sum()
    }

    /// Dictionary moments `∫ Y_{l,m} dμ` for `l ≤ lmax`.
    pub fn harmonic_moments(&self, lmax: usize) -> Vec<f64> {
        let mut acc = vec![0.0; harmonics::dictionary_size(lmax)];
        for (p, w) in &self.atoms {
            let y = harmonics::eval_all(p.stereographic(), lmax);
            for (a, v) in acc.iter_mut().zip(y) {
                *a += w * v;
            }
        }
        acc
    }

    /// Weighted resampling to `n` equal atoms (systematic scheme).
    pub fn resample<R: Rng>(&self, n: usize, rng: &mut R, tol_pt: f64) -> Self {
        if self.atoms.is_empty() || n == 0 {
            return self.clone();
        }
        let step = self.mass / n as f64;
        let mut u = rng.gen::<f64>() * step;
        let mut out = Vec::with_capacity(n);
        let mut cum = 0.0;
        let mut i = 0;
        for _ in 0..n {
            while i + 1 < self.atoms.len() && cum + self.atoms[i].1 < u {
                cum += self.atoms[i].1;
                i += 1;
            }
            out.push((self.atoms[i].0, step));
            u += step;
        }
        Self::new(out, tol_pt).expect("positive weights")
    }
}

/// Dictionary distance `max |∫Y dμ − ∫Y dν|` over harmonics of degree ≤ `lmax`.
pub fn weakstar_distance(mu: &AtomicMeasure, nu: &AtomicMeasure, lmax: usize) -> f64 {
    let a = mu.harmonic_moments(lmax);
    let b = nu.harmonic_moments(lmax);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `A_*μ`. A degenerate `A` sends everything to its reduction point and
/// fails if `μ` charges the hole.
pub fn push_forward(a: &MoebiusMap, mu: &AtomicMeasure, tol: &Tolerances) -> Result<AtomicMeasure> {
    match a.classify(tol) {
        MoebiusClass::Nondegenerate(m) => {
            let atoms = mu
                .atoms
                .iter()
                .map(|(p, w)| Ok((m.apply_raw(p).ok_or(Error::HoleEvaluation)?, *w)))
                .collect::<Result<Vec<_>>>()?;
            AtomicMeasure::new(atoms, tol.tau_pt)
        }
        MoebiusClass::Degenerate { reduction, hole } => {
            if mu.atoms.iter().any(|(p, _)| p.chordal(&hole) <= tol.tau_pt) {
                return Err(Error::HoleMass);
            }
            Ok(AtomicMeasure::new(vec![(reduction, mu.mass)], tol.tau_pt)?)
        }
    }
}

/// `f_*μ` for a rational map (atoms mapped through the reduction).
pub fn push_forward_map(f: &ProjectiveRatMap, mu: &AtomicMeasure, tol: &Tolerances) -> Result<AtomicMeasure> {
    let red = f.reduce(tol)?;
    let atoms = mu
        .atoms
        .iter()
        .map(|(p, w)| Ok((red.reduction.eval_raw(p).ok_or(Error::HoleEvaluation)?, *w)))
        .collect::<Result<Vec<_>>>()?;
    AtomicMeasure::new(atoms, tol.tau_pt)
}

/// `η_g = Σ d_h(g) δ_h`.
pub fn depth_measure(g: &ProjectiveRatMap, tol: &Tolerances) -> Result<AtomicMeasure> {
    let red = g.reduce(tol)?;
    depth_measure_of(&red, tol)
}

pub fn depth_measure_of(red: &ReducedForm, tol: &Tolerances) -> Result<AtomicMeasure> {
    if red.holes.is_empty() {
        return Err(Error::NotDegenerate);
    }
    AtomicMeasure::new(
        red.holes.iter().map(|h| (h.point, h.depth as f64)).collect(),
        tol.tau_pt,
    )
}

/// `g*μ = g̃*μ + μ(C̄)·η_g`, or the usual pull-back for nondegenerate maps.
pub fn pull_back(f: &ProjectiveRatMap, mu: &AtomicMeasure, tol: &Tolerances) -> Result<AtomicMeasure> {
    let red = f.reduce(tol)?;
    pull_back_reduced(&red, mu, tol)
}

/// Pull-back with a precomputed reduced form.
pub fn pull_back_reduced(red: &ReducedForm, mu: &AtomicMeasure, tol: &Tolerances) -> Result<AtomicMeasure> {
    let mut atoms: Vec<(SpherePoint, f64)> = Vec::new();
    if red.reduction_degree() == 0 {
        let c = red.constant_value().ok_or(Error::HoleEvaluation)?;
        if mu.atoms.iter().any(|(p, _)| p.chordal(&c) <= tol.tau_cluster) {
            return Err(Error::ExceptionalMass);
        }
    } else {
        for (p, w) in &mu.atoms {
            for q in red.reduction.preimages_raw(p)? {
                atoms.push((q, *w));
            }
        }
    }
    for h in &red.holes {
        atoms.push((h.point, mu.mass * h.depth as f64));
    }
    AtomicMeasure::new(atoms, tol.tau_pt)
}

/// `(g_*φ)(x) = (g̃_*φ)(x) + Σ_h d_h(g) φ(h)`.
pub fn push_forward_function<F: Fn(&SpherePoint) -> f64>(
    red: &ReducedForm,
    phi: F,
    x: &SpherePoint,
) -> Result<f64> {
    let mut s: f64 = red.holes.iter().map(|h| h.depth as f64 * phi(&h.point)).sum();
    if red.reduction_degree() > 0 {
        for q in red.reduction.preimages_raw(x)? {
            s += phi(&q);
        }
    }
    Ok(s)
}

/// `μ` charges no exceptional point of any map in the list.
pub fn is_nonexceptional(mu: &AtomicMeasure, maps: &[ProjectiveRatMap], tol: &Tolerances) -> Result<bool> {
    for f in maps {
        for e in f.exceptional_set(tol)? {
            if mu.mass_near(&e, tol.tau_cluster) > 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
