//! Space descriptors and domain points.
//!
//! A [`Space`] names the function space every other module works against:
//! the Bergman space `A^p` of the unit ball in `C^n` (Lebesgue measure
//! normalized to total mass one) or the Bargmann-Fock space `F^p` over
//! `C^n` with Gaussian weight `phi(z) = alpha |z|^2 / 2`, so that
//! `K(z, w) = exp(alpha <w, z>)` and `||K_z|| = exp(alpha |z|^2 / 2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which family of reproducing-kernel spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bergman,
    Fock,
}

/// Descriptor of the ambient function space.
///
/// `alpha` is the Gaussian weight parameter and is only meaningful for the
/// Fock family (the classical space is `alpha = 1`); Bergman descriptors
/// carry `alpha = 1` as a placeholder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub family: Family,
    /// Complex dimension of the domain; 1 or 2.
    pub n: usize,
    /// Integrability exponent, in (1, infinity).
    pub p: f64,
    /// Gaussian weight parameter (Fock only).
    pub alpha: f64,
}

impl Space {
    pub fn bergman(n: usize, p: f64) -> Result<Self> {
        let s = Space {
            family: Family::Bergman,
            n,
            p,
            alpha: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn fock(n: usize, p: f64, alpha: f64) -> Result<Self> {
        let s = Space {
            family: Family::Fock,
            n,
            p,
            alpha,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension n must be 1 or 2, got {}",
                self.n
            )));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponent p must lie in (1, inf), got {}",
                self.p
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight parameter alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Conjugate exponent p' = p / (p - 1).
    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Checks that `z` is a valid point of the domain.
    pub fn validate_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::Domain(format!(
                "point has {} coordinates, space has dimension {}",
                z.len(),
                self.n
            )));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("point has non-finite coordinates".into()));
        }
        if self.family == Family::Bergman && norm_sq(z) >= 1.0 {
            return Err(Error::Domain(format!(
                "|z| = {} >= 1 is outside the unit ball",
                norm_sq(z).sqrt()
            )));
        }
        Ok(())
    }
}

/// Squared Euclidean norm of a coordinate vector.
pub fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// Hermitian pairing `<z, w> = sum_j z_j conj(w_j)`.
pub fn pairing(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

/// A point of the open unit ball in `C^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    coords: Vec<Complex64>,
}

impl BallPoint {
    /// Rejects points with `|z| >= 1` or non-finite coordinates.
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return Err(Error::Domain(format!(
                "ball point must have 1 or 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        if norm_sq(&coords) >= 1.0 {
            return Err(Error::Domain(format!(
                "|z| = {} >= 1",
                norm_sq(&coords).sqrt()
            )));
        }
        Ok(BallPoint { coords })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coords)
    }
}

/// A point of `C^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    coords: Vec<Complex64>,
}

impl PlanePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return Err(Error::Domain(format!(
                "plane point must have 1 or 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        Ok(PlanePoint { coords })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ball_point_rejects_boundary() {
        assert!(BallPoint::new(vec![c(1.0, 0.0)]).is_err());
        assert!(BallPoint::new(vec![c(0.8, 0.8)]).is_err());
        assert!(BallPoint::new(vec![c(0.999, 0.0)]).is_ok());
        // two-dimensional norm counts both coordinates
        assert!(BallPoint::new(vec![c(0.8, 0.0), c(0.7, 0.0)]).is_err());
        assert!(BallPoint::new(vec![c(0.5, 0.0), c(0.5, 0.0)]).is_ok());
    }

    #[test]
    fn space_validation() {
        assert!(Space::bergman(1, 2.0).is_ok());
        assert!(Space::bergman(3, 2.0).is_err());
        assert!(Space::bergman(1, 1.0).is_err());
        assert!(Space::fock(1, 2.0, 0.0).is_err());
        let s = Space::bergman(1, 4.0).unwrap();
        assert!((s.conjugate_exponent() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bergman_point_validation() {
        let s = Space::bergman(1, 2.0).unwrap();
        assert!(s.validate_point(&[c(0.5, 0.0)]).is_ok());
        assert!(s.validate_point(&[c(1.5, 0.0)]).is_err());
        let f = Space::fock(1, 2.0, 1.0).unwrap();
        assert!(f.validate_point(&[c(7.0, 3.0)]).is_ok());
    }
}
