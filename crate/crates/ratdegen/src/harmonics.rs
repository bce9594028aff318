//! Real spherical harmonics on the unit sphere, scaled so that each
//! function has sup norm at most one: `Σ_m Y_{l,m}(x)² = 1` for every `l`.

/// Number of dictionary functions up to degree `l`.
pub fn dictionary_size(l: usize) -> usize {
    (l + 1) * (l + 1)
}

/// Index of `(l, m)` in the dictionary, with `m ∈ −l..=l`.
pub fn index(l: usize, m: i64) -> usize {
    (l * l) as usize + (m + l as i64) as usize
}

/// All harmonics of degree ≤ `lmax` at the unit vector `v`.
/// Ordering: degree by degree, `m = −l..=l` (negative `m` = sine part).
pub fn eval_all(v: [f64; 3], lmax: usize) -> Vec<f64> {
    let (x, y, z) = (v[0], v[1], v[2]);
    let mut out = vec![0.0; dictionary_size(lmax)];
    // q[l][m] = P_l^m(z) / sin^m θ, filled by the standard recurrences.
    let mut q = vec![vec![0.0; lmax + 1]; lmax + 1];
    for m in 0..=lmax {
        // P_m^m / s^m = (2m − 1)!!
        let mut pmm = 1.0;
        for k in 1..=m {
            pmm *= (2 * k - 1) as f64;
        }
        q[m][m] = pmm;
        if m < lmax {
            q[m + 1][m] = z * (2 * m + 1) as f64 * pmm;
        }
        for l in (m + 2)..=lmax {
            q[l][m] = ((2 * l - 1) as f64 * z * q[l - 1][m] - (l + m - 1) as f64 * q[l - 2][m])
                / (l - m) as f64;
        }
    }
    // (x + iy)^m = s^m e^{imφ}.
    let mut cs = vec![(1.0, 0.0); lmax + 1];
    for m in 1..=lmax {
        let (a, b) = cs[m - 1];
        cs[m] = (a * x - b * y, a * y + b * x);
    }
    for l in 0..=lmax {
        out[index(l, 0)] = q[l][0];
        let mut ratio = 1.0; // (l − m)! / (l + m)!
        for m in 1..=l {
            ratio /= ((l + m) * (l - m + 1)) as f64;
            let s = (2.0 * ratio).sqrt();
            out[index(l, m as i64)] = s * q[l][m] * cs[m].0;
            out[index(l, -(m as i64))] = s * q[l][m] * cs[m].1;
        }
    }
    out
}

/// Rotation-invariant power per degree from dictionary moments.
pub fn power_spectrum(moments: &[f64], lmax: usize) -> Vec<f64> {
    (0..=lmax)
        .map(|l| {
            (-(l as i64)..=(l as i64))
                .map(|m| moments[index(l, m)].powi(2))
                .sum()
        })
        .collect()
}
