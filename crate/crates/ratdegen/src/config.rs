//! Numerical tolerances shared by every module.
//!
//! All values can be overridden from a JSON file; missing keys keep their
//! defaults.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Point equality in the chordal metric.
    pub tau_pt: f64,
    /// Möbius degeneracy threshold on |det M| / ‖M‖².
    pub tau_moeb: f64,
    /// Minimum chordal separation of a triple handed to `fit_moebius`.
    pub tau_sep: f64,
    /// Unitarity tolerance for rotation detection.
    pub tau_rot: f64,
    /// Root clustering radius (chordal) for multiplicities and holes.
    pub tau_cluster: f64,
    /// Relative singular value threshold for the Sylvester rank.
    pub tau_gcd: f64,
    /// Barycenter stopping threshold on the moment norm.
    pub tau_bc: f64,
    /// Guard band around the 1/2 atom threshold.
    pub tau_atom: f64,
    /// Boundary separation required for polynomial-like certificates.
    pub tau_ann: f64,
    /// Projective agreement for the decomposition identity.
    pub tau_proj: f64,
    /// Relative size below which limit coefficients are set to zero.
    pub tau_snap: f64,
    /// Required accuracy of an extrapolated limit.
    pub tau_limit: f64,
    /// Comparison tolerance for pairwise limit points in sphere trees.
    pub tau_glue: f64,
    /// Harmonic cutoff of the weak-* dictionary.
    pub harmonic_l: usize,
    /// Bit-size cap on exact coefficients before `CoefficientOverflow`.
    pub exact_bits_cap: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_pt: 1e-9,
            tau_moeb: 1e-9,
            tau_sep: 1e-3,
            tau_rot: 1e-8,
            tau_cluster: 1e-6,
            tau_gcd: 1e-8,
            tau_bc: 1e-9,
            tau_atom: 1e-9,
            tau_ann: 1e-3,
            tau_proj: 1e-7,
            tau_snap: 1e-9,
            tau_limit: 1e-6,
            tau_glue: 1e-6,
            harmonic_l: 8,
            exact_bits_cap: 1 << 16,
        }
    }
}

impl Tolerances {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
