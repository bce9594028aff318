//! Measure of maximal entropy: exact pull-back iteration and inverse
//! iteration sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::measures::{self, AtomicMeasure};
use crate::par::{self, Exec};
use crate::ratmap::ProjectiveRatMap;
use crate::sphere::{MoebiusMap, SpherePoint};

/// Steps discarded at the start of every chain.
pub const BURN_IN: usize = 10;

/// Candidate chain starts, tried in order until one avoids `E_f`.
const STARTS: [(f64, f64); 4] = [(0.3, 0.2), (0.7, -0.4), (-0.55, 0.9), (1.3, 0.45)];

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn start_point(f: &ProjectiveRatMap, tol: &Tolerances) -> Result<SpherePoint> {
    let ex = f.exceptional_set(tol)?;
    for (re, im) in STARTS {
        let p = SpherePoint::from_re_im(re, im);
        if ex.iter().all(|e| e.chordal(&p) > 1e-3) {
            return Ok(p);
        }
    }
    Err(Error::ExceptionalMass)
}

/// `(1/d^n)(f^n)*μ₀`, resampled to at most `cap` atoms after each step.
pub fn pullback_iterate(
    f: &ProjectiveRatMap,
    mu0: &AtomicMeasure,
    n: usize,
    cap: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<AtomicMeasure> {
    let red = f.reduce(tol)?;
    if red.is_degenerate() {
        return Err(Error::Schema("pull-back iteration needs a nondegenerate map".into()));
    }
    for e in f.exceptional_set(tol)? {
        if mu0.mass_near(&e, tol.tau_cluster) > 0.0 {
            return Err(Error::ExceptionalMass);
        }
    }
    let d = f.degree() as f64;
    let mut mu = mu0.normalized();
    for step in 0..n {
        mu = measures::pull_back_reduced(&red, &mu, tol)?.scaled(1.0 / d);
        if mu.len() > cap {
            let mut rng = rng_for(seed, step as u64);
            mu = mu.resample(cap, &mut rng, tol.tau_pt);
        }
    }
    Ok(mu)
}

/// `n` independent inverse-orbit chains of `n_steps` uniform preimage
/// choices; chain `i` uses stream `i` of the seeded generator.
pub fn mme_sample(
    f: &ProjectiveRatMap,
    n: usize,
    n_steps: usize,
    seed: u64,
    exec: Exec,
    tol: &Tolerances,
) -> Result<AtomicMeasure> {
    if f.degree() < 2 {
        return Err(Error::Schema("sampler needs degree at least 2".into()));
    }
    if n_steps < BURN_IN {
        return Err(Error::Schema(format!("n_steps must be at least {BURN_IN}")));
    }
    if f.is_degenerate(tol)? {
        return Err(Error::HypothesisUnmet("sampler needs a nondegenerate map".into()));
    }
    let start = start_point(f, tol)?;
    let fl = f.to_float();
    let pts = par::map_indexed(exec, n, |i| -> Result<SpherePoint> {
        let mut rng = rng_for(seed, i as u64);
        let mut z = start;
        for _ in 0..n_steps {
            let pre = fl.preimages_raw(&z)?;
            z = pre[rng.gen_range(0..pre.len())];
        }
        Ok(z)
    });
    let pts = pts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(AtomicMeasure::uniform(&pts, tol.tau_pt))
}

/// Dictionary distance between `(1/d) f*μ̂` and `μ̂`.
pub fn mme_fixed_point_residual(f: &ProjectiveRatMap, mu: &AtomicMeasure, tol: &Tolerances) -> Result<f64> {
    let pb = measures::pull_back(f, mu, tol)?.scaled(1.0 / f.degree() as f64);
    Ok(measures::weakstar_distance(&pb, mu, tol.harmonic_l))
}

/// Distance between two sampler runs with different seeds.
pub fn noise_floor(
    f: &ProjectiveRatMap,
    n: usize,
    n_steps: usize,
    seeds: (u64, u64),
    exec: Exec,
    tol: &Tolerances,
) -> Result<f64> {
    let a = mme_sample(f, n, n_steps, seeds.0, exec, tol)?;
    let b = mme_sample(f, n, n_steps, seeds.1, exec, tol)?;
    Ok(measures::weakstar_distance(&a, &b, tol.harmonic_l))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakPairReport {
    /// `dist(μ̂_k, (1/d) φ*(A_k)_*μ̂_k)` per sample.
    pub residuals: Vec<f64>,
    /// True when the last residual does not exceed the first.
    pub converging: bool,
}

/// Residuals of `μ = (1/d) φ*ν` along a scaled sequence.
#[allow(clippy::too_many_arguments)]
pub fn weak_pair_limit_check(
    fk: &[ProjectiveRatMap],
    ak: &[MoebiusMap],
    phi: &ProjectiveRatMap,
    n: usize,
    n_steps: usize,
    seed: u64,
    exec: Exec,
    tol: &Tolerances,
) -> Result<WeakPairReport> {
    if fk.len() != ak.len() || fk.is_empty() {
        return Err(Error::Schema("need one scaling per map".into()));
    }
    let d = phi.degree() as f64;
    let phi_red = phi.reduce(tol)?;
    let mut residuals = Vec::with_capacity(fk.len());
    for (f, a) in fk.iter().zip(ak) {
        let mu = mme_sample(f, n, n_steps, seed, exec, tol)?;
        let nu = measures::push_forward(a, &mu, tol)?;
        let rhs = measures::pull_back_reduced(&phi_red, &nu, tol)?.scaled(1.0 / d);
        residuals.push(measures::weakstar_distance(&mu, &rhs, tol.harmonic_l));
    }
    let converging = residuals.last() <= residuals.first();
    Ok(WeakPairReport {
        residuals,
        converging,
    })
}
