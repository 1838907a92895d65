//! Möbius automorphisms of the unit ball and the associated metrics.
//!
//! `phi_a` is the involutive automorphism interchanging `0` and `a`; the
//! pseudohyperbolic metric is `rho(z, w) = |phi_z(w)|` and the Bergman
//! metric is `beta = (1/2) log((1 + rho) / (1 - rho)) = arctanh(rho)`.

use num_complex::Complex64;

use crate::space::{norm_sq, pairing};
use crate::{Error, Result};

/// Floor applied to `1 - rho^2` so the Bergman metric stays finite
/// (equivalent to clamping `rho` at `1 - 1e-15`).
const ONE_MINUS_RHO_SQ_FLOOR: f64 = 2e-15;

fn check_ball(z: &[Complex64]) -> Result<()> {
    if z.is_empty() || z.len() > 2 {
        return Err(Error::Domain(format!(
            "expected 1 or 2 coordinates, got {}",
            z.len()
        )));
    }
    if norm_sq(z) >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} >= 1", norm_sq(z).sqrt())));
    }
    Ok(())
}

/// Möbius map `phi_a(w)` of the unit ball in `C^n`, `n <= 2`.
///
/// Involutive, with `phi_a(0) = a` and `phi_a(a) = 0`. For `n = 1` this is
/// `(a - w) / (1 - conj(a) w)`; for general `n` the projection form
/// `(a - P_a w - s_a Q_a w) / (1 - <w, a>)` with `s_a = sqrt(1 - |a|^2)`.
pub fn mobius(a: &[Complex64], w: &[Complex64]) -> Result<Vec<Complex64>> {
    check_ball(a)?;
    check_ball(w)?;
    if a.len() != w.len() {
        return Err(Error::Mismatch(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            w.len()
        )));
    }
    let a_sq = norm_sq(a);
    if a_sq == 0.0 {
        return Ok(w.iter().map(|c| -c).collect());
    }
    let s_a = (1.0 - a_sq).sqrt();
    let wa = pairing(w, a); // <w, a>
    let denom = Complex64::new(1.0, 0.0) - wa;
    let proj_coeff = wa / a_sq;
    let out = a
        .iter()
        .zip(w)
        .map(|(ai, wi)| {
            let p = proj_coeff * ai; // P_a w component
            let q = wi - p; // Q_a w component
            (ai - p - s_a * q) / denom
        })
        .collect();
    Ok(out)
}

/// `1 - rho(z, w)^2` through the closed identity
/// `(1 - |z|^2)(1 - |w|^2) / |1 - <w, z>|^2`, which avoids cancellation
/// as `rho` approaches one.
pub fn one_minus_rho_sq(z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    check_ball(z)?;
    check_ball(w)?;
    let num = (1.0 - norm_sq(z)) * (1.0 - norm_sq(w));
    let d = Complex64::new(1.0, 0.0) - pairing(w, z);
    Ok(num / d.norm_sqr())
}

/// Pseudohyperbolic distance `rho(z, w) = |phi_z(w)|`, in `[0, 1)`.
pub fn pseudo_hyperbolic(z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    let om = one_minus_rho_sq(z, w)?;
    Ok((1.0 - om).max(0.0).sqrt())
}

/// Bergman metric `beta(z, w) = arctanh(rho(z, w))`.
///
/// `rho` is clamped at `1 - 1e-15`, capping the returned distance near 17.6.
pub fn bergman_metric(z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    let om = one_minus_rho_sq(z, w)?.max(ONE_MINUS_RHO_SQ_FLOOR);
    let rho = (1.0 - om).max(0.0).sqrt();
    // (1/2) log((1+rho)/(1-rho)) with 1-rho^2 carried exactly
    Ok((1.0 + rho).ln() - 0.5 * om.ln())
}

/// Euclidean distance on `C^n`.
pub fn euclidean(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter()
        .zip(w)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_interchanges_zero_and_base() {
        let z = [c(0.5, 0.0)];
        let at_zero = mobius(&z, &[c(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(at_zero[0].re, 0.5, epsilon = 1e-15);
        let at_z = mobius(&z, &z).unwrap();
        assert_abs_diff_eq!(at_z[0].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mobius_one_dim_value() {
        // (0.5 - 0.2) / (1 - 0.1) = 1/3
        let v = mobius(&[c(0.5, 0.0)], &[c(0.2, 0.0)]).unwrap();
        assert_abs_diff_eq!(v[0].re, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mobius_rejects_outside() {
        assert!(mobius(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).is_err());
        assert!(mobius(&[c(0.2, 0.0)], &[c(0.0, 1.2)]).is_err());
    }

    #[test]
    fn mobius_involution_two_dim() {
        let a = [c(0.3, 0.1), c(-0.2, 0.4)];
        let w = [c(0.1, -0.5), c(0.05, 0.2)];
        let fw = mobius(&a, &w).unwrap();
        let back = mobius(&a, &fw).unwrap();
        for (orig, b) in w.iter().zip(&back) {
            assert_abs_diff_eq!(orig.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(orig.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn rho_against_mobius_modulus() {
        let z = [c(0.5, 0.0)];
        let w = [c(0.2, 0.0)];
        assert_abs_diff_eq!(pseudo_hyperbolic(&z, &w).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        // rho(0, w) = |w|
        assert_abs_diff_eq!(
            pseudo_hyperbolic(&[c(0.0, 0.0)], &[c(0.3, 0.4)]).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(pseudo_hyperbolic(&z, &z).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bergman_metric_values() {
        let zero = [c(0.0, 0.0)];
        assert_abs_diff_eq!(
            bergman_metric(&zero, &[c(0.5, 0.0)]).unwrap(),
            0.5 * 3.0_f64.ln(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(bergman_metric(&zero, &zero).unwrap(), 0.0, epsilon = 1e-15);
        // tanh(beta(0, x)) = x
        let b = bergman_metric(&zero, &[c(0.9, 0.0)]).unwrap();
        assert_abs_diff_eq!(b.tanh(), 0.9, epsilon = 1e-14);
    }

    #[test]
    fn metric_identity_matches_direct_evaluation() {
        let z = [c(0.35, -0.2)];
        let w = [c(-0.6, 0.31)];
        let om = one_minus_rho_sq(&z, &w).unwrap();
        let fw = mobius(&z, &w).unwrap();
        assert_abs_diff_eq!(om, 1.0 - norm_sq(&fw), epsilon = 1e-14);
    }

    #[test]
    fn metric_clamp_stays_finite() {
        let z = [c(0.999_999_999_999, 0.0)];
        let w = [c(-0.999_999_999_999, 0.0)];
        let b = bergman_metric(&z, &w).unwrap();
        assert!(b.is_finite());
    }
}
