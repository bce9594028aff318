//! Degenerate rational maps on the Riemann sphere: reductions, holes and
//! depths, measure pull-backs, rescaling limits of degenerating families,
//! trees of spheres, conformal barycenters and polynomial-like restrictions.

pub mod barycenter;
pub mod config;
pub mod error;
pub mod forms;
pub mod harmonics;
pub mod limits;
pub mod measures;
pub mod mme;
pub mod par;
pub mod polylike;
pub mod ratmap;
pub mod rescaling;
pub mod roots;
pub mod scalar;
pub mod sphere;
pub mod spheretree;

pub use config::Tolerances;
pub use error::{Error, ErrorClass, Result};
pub use ratmap::{GitClass, Hole, ProjectiveRatMap, ReducedForm};
pub use scalar::{GaussRat, C64};
pub use sphere::{MoebiusMap, SpherePoint};
