//! Möbius solutions of the n-body problem on the positive space form 𝕄²_R.
//!
//! Positions live on the Riemann sphere of radius `R` in stereographic
//! coordinates, with the conformal metric `ds² = 4R⁴ dz dz̄ / (R² + |z|²)²`.
//! Bodies interact through the cotangent potential. The crate is split into:
//!
//! - [`geometry`]: metric factor, geodesic distance, the cotangent kernel,
//!   singular-set detection and region labels.
//! - [`mobius`]: 2×2 complex matrices, one-parameter subgroups and their
//!   fields, the Iwasawa factorization and the conjugation to rotations.
//! - [`dynamics`]: potential, gradient, equations of motion, an adaptive
//!   Dormand–Prince integrator and conserved quantities.
//! - [`equilibria`]: residual systems for elliptic, hyperbolic and parabolic
//!   Möbius solutions and the two-, three- and four-body solvers.
//! - [`report`]: JSON documents and CSV trajectory export.

pub mod dynamics;
pub mod equilibria;
pub mod geometry;
pub mod mobius;
pub mod report;

pub use num_complex::Complex64;

pub use dynamics::{SystemConfig, SystemState};
pub use geometry::{ExtendedPoint, RegionLabel, SpaceForm};
pub use mobius::{KillingKind, Mat2C};
