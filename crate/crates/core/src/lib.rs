//! Numerical evidence for interpolation by discrete multiplicity varieties in
//! algebras of entire functions with non-isotropic Beurling weights
//! `p(z) = |Im z| + ω(|z|)`.
//!
//! The crate evaluates the two geometric conditions that characterize such
//! varieties (an integrated counting bound and bounded Poisson balayage of
//! the part off the strip) over finite truncations, and builds the explicit
//! objects used to prove them: half-plane Blaschke sums, a subharmonic
//! regularization of `p`, and the smooth interpolant with its `∂̄` data.

pub mod conditions;
pub mod error;
pub mod extension;
pub mod generators;
pub mod halfplane;
pub mod index;
pub mod io;
pub mod quad;
pub mod regularization;
pub mod report;
pub mod sum;
pub mod variety;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use variety::{Variety, WeightedPoint, P_MIN};
pub use weights::{BeurlingWeight, GrowthWeight, OmegaProfile};
