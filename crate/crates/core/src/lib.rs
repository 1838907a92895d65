//! Numerical toolkit for operator compactness on Bergman and Bargmann-Fock spaces.
//!
//! The crate builds Toeplitz-type operators as truncated matrices in the
//! orthonormal monomial basis, evaluates reproducing kernels and Berezin
//! transforms, certifies weak-localization integral conditions, and
//! cross-checks compactness against singular-value structure at desk scale.
//!
//! Modules follow the pipeline:
//!
//! * [`space`] — space descriptors and domain points,
//! * [`geometry`] — Möbius maps and the pseudohyperbolic/Bergman metrics,
//! * [`covering`] — disjoint cell coverings with bounded-overlap enlargements,
//! * [`quadrature`] — polar product rules for the ball and the plane,
//! * [`kernels`] — reproducing kernels, normalizations, translations,
//! * [`operators`] — truncated operator matrices and the spectral backend,
//! * [`symbols`] — bounded symbols and the built-in test battery,
//! * [`localization`] — localization integrals, Rudin-Forelli estimates,
//!   Schur bounds and certificates,
//! * [`diagnostics`] — essential-norm proxies, Berezin profiles and
//!   compactness reports,
//! * [`config`] / [`runner`] — experiment configuration and batch execution.

pub mod config;
pub mod covering;
pub mod diagnostics;
pub mod geometry;
pub mod kernels;
pub mod localization;
pub mod operators;
pub mod quadrature;
pub mod runner;
pub mod space;
pub mod symbols;

mod error;

pub use error::{Error, Result};
pub use space::{BallPoint, Family, PlanePoint, Space};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
