//! Reproducing kernels, their normalizations, and translation operators.
//!
//! Bergman: `K_z(w) = (1 - <w, z>)^-(n+1)` with `||K_z|| = (1-|z|^2)^-(n+1)/2`.
//! Fock with weight `phi = alpha |z|^2 / 2`: `K_z(w) = exp(alpha <w, z>)` with
//! `||K_z|| = exp(alpha |z|^2 / 2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry;
use crate::space::{norm_sq, pairing, Family, Space};
use crate::{Error, Result};

/// Reproducing kernel `K_z(w)`.
///
/// Hermitian: `K_z(w) = conj(K_w(z))`. Errors on domain violations and on
/// magnitudes that would overflow (`Bergman` as `|<w, z>| -> 1`, `Fock` for
/// extremely large arguments).
pub fn kernel_eval(space: &Space, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    space.validate_point(z)?;
    space.validate_point(w)?;
    kernel_eval_unchecked(space, z, w)
}

pub(crate) fn kernel_eval_unchecked(
    space: &Space,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    match space.family {
        Family::Bergman => {
            let d = Complex64::new(1.0, 0.0) - pairing(w, z);
            if d.norm_sqr() < 1e-60 {
                return Err(Error::Numerical(
                    "Bergman kernel overflow: <w, z> too close to 1".into(),
                ));
            }
            Ok(d.powi(-(space.n as i32 + 1)))
        }
        Family::Fock => {
            let e = space.alpha * pairing(w, z);
            if e.re > 700.0 {
                return Err(Error::Numerical("Fock kernel overflow".into()));
            }
            Ok(e.exp())
        }
    }
}

/// `||K_z||` in closed form.
pub fn kernel_norm(space: &Space, z: &[Complex64]) -> Result<f64> {
    space.validate_point(z)?;
    Ok(kernel_norm_from_gap(space, boundary_gap(space, z)))
}

/// `||K_z||` from the boundary gap `s = 1 - |z|^2` (Bergman) or from
/// `|z|^2` passed as `1 - s` (Fock); lets quadrature nodes near the sphere
/// keep full precision.
pub(crate) fn kernel_norm_from_gap(space: &Space, gap_or_tsq: f64) -> f64 {
    match space.family {
        Family::Bergman => gap_or_tsq.powf(-0.5 * (space.n as f64 + 1.0)),
        Family::Fock => (0.5 * space.alpha * gap_or_tsq).exp(),
    }
}

/// For Bergman returns `1 - |z|^2`; for Fock returns `|z|^2`.
pub(crate) fn boundary_gap(space: &Space, z: &[Complex64]) -> f64 {
    match space.family {
        Family::Bergman => 1.0 - norm_sq(z),
        Family::Fock => norm_sq(z),
    }
}

/// Normalized-kernel correlation `<k_z, k_w> = K_z(w) / (||K_z|| ||K_w||)`.
pub fn correlation_closed_form(
    space: &Space,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    space.validate_point(z)?;
    space.validate_point(w)?;
    correlation_closed_form_unchecked(space, z, w)
}

pub(crate) fn correlation_closed_form_unchecked(
    space: &Space,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    match space.family {
        Family::Bergman => {
            // (s_z s_w)^((n+1)/2) / (1 - <w, z>)^(n+1), with the modulus
            // equal to 1 / ||K_{phi_z(w)}||
            let d = Complex64::new(1.0, 0.0) - pairing(w, z);
            let np1 = space.n as f64 + 1.0;
            let scale = ((1.0 - norm_sq(z)) * (1.0 - norm_sq(w))).powf(0.5 * np1);
            Ok(scale * d.powf(-np1))
        }
        Family::Fock => {
            // exp(alpha <w,z> - alpha |z|^2/2 - alpha |w|^2/2);
            // modulus exp(-alpha |z - w|^2 / 2)
            let e = space.alpha
                * (pairing(w, z) - Complex64::new(0.5 * (norm_sq(z) + norm_sq(w)), 0.0));
            Ok(e.exp())
        }
    }
}

/// `|<k_z, k_w>|` without forming the possibly huge kernel values.
pub fn correlation_modulus(space: &Space, z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    space.validate_point(z)?;
    space.validate_point(w)?;
    match space.family {
        Family::Bergman => {
            // equals 1 / ||K_{phi_z(w)}||
            let om = geometry::one_minus_rho_sq(z, w)?;
            Ok(om.powf(0.5 * (space.n as f64 + 1.0)))
        }
        Family::Fock => {
            let d2: f64 = z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum();
            Ok((-0.5 * space.alpha * d2).exp())
        }
    }
}

/// Which normalization a kernel vector carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    /// Raw `K_z`.
    Unnormalized,
    /// `k_z = K_z / ||K_z||` (unit 2-norm).
    Normalized,
    /// `k_z^(p) = K_z / ||K_z||^(2/p')`; coincides with `k_z` at `p = 2`.
    PNormalized { p: f64 },
}

/// An evaluable kernel vector at a fixed base point.
#[derive(Debug, Clone)]
pub struct KernelVector {
    pub space: Space,
    pub base: Vec<Complex64>,
    pub normalization: Normalization,
}

impl KernelVector {
    pub fn new(space: &Space, base: &[Complex64], normalization: Normalization) -> Result<Self> {
        space.validate_point(base)?;
        if let Normalization::PNormalized { p } = normalization {
            if !(p > 1.0 && p.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "p must lie in (1, inf), got {p}"
                )));
            }
        }
        Ok(KernelVector {
            space: *space,
            base: base.to_vec(),
            normalization,
        })
    }

    /// Divisor applied to `K_z`.
    pub fn scale(&self) -> f64 {
        let nz = kernel_norm_from_gap(&self.space, boundary_gap(&self.space, &self.base));
        match self.normalization {
            Normalization::Unnormalized => 1.0,
            Normalization::Normalized => nz,
            Normalization::PNormalized { p } => {
                let pc = p / (p - 1.0);
                nz.powf(2.0 / pc)
            }
        }
    }

    pub fn eval(&self, w: &[Complex64]) -> Result<Complex64> {
        let k = kernel_eval(&self.space, &self.base, w)?;
        Ok(k / self.scale())
    }
}

/// `p`-normalized kernel `k_z^(p)`.
pub fn p_normalized_kernel(space: &Space, z: &[Complex64], p: f64) -> Result<KernelVector> {
    KernelVector::new(space, z, Normalization::PNormalized { p })
}

/// Bergman translation `U_z^(p) f(w) = f(phi_z(w)) (k_z(w))^(2/p)`.
///
/// The fractional power uses the principal branch of `log k_z(w)`; since
/// `1 - <w, z>` has positive real part on the ball the branch is smooth.
#[derive(Clone)]
pub struct BergmanTranslate<F> {
    space: Space,
    z: Vec<Complex64>,
    p: f64,
    f: F,
    log_prefactor: f64, // (n+1)/2 * ln(1 - |z|^2)
}

impl<F> BergmanTranslate<F>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    pub fn new(space: &Space, z: &[Complex64], p: f64, f: F) -> Result<Self> {
        if space.family != Family::Bergman {
            return Err(Error::Mismatch("Bergman translation on a Fock space".into()));
        }
        space.validate_point(z)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p out of range: {p}")));
        }
        let s_z = 1.0 - norm_sq(z);
        Ok(BergmanTranslate {
            space: *space,
            z: z.to_vec(),
            p,
            f,
            log_prefactor: 0.5 * (space.n as f64 + 1.0) * s_z.ln(),
        })
    }

    pub fn eval(&self, w: &[Complex64]) -> Result<Complex64> {
        let moved = geometry::mobius(&self.z, w)?;
        let np1 = self.space.n as f64 + 1.0;
        let d = Complex64::new(1.0, 0.0) - pairing(w, &self.z);
        // log k_z(w), principal branch
        let log_k = Complex64::new(self.log_prefactor, 0.0) - np1 * d.ln();
        let factor = ((2.0 / self.p) * log_k).exp();
        Ok((self.f)(&moved) * factor)
    }
}

/// Fock translation `U_z f(w) = f(z - w) k_z(w)`; an isometry on `F^p`.
#[derive(Clone)]
pub struct FockTranslate<F> {
    space: Space,
    z: Vec<Complex64>,
    f: F,
}

impl<F> FockTranslate<F>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    pub fn new(space: &Space, z: &[Complex64], f: F) -> Result<Self> {
        if space.family != Family::Fock {
            return Err(Error::Mismatch("Fock translation on a Bergman space".into()));
        }
        space.validate_point(z)?;
        Ok(FockTranslate {
            space: *space,
            z: z.to_vec(),
            f,
        })
    }

    pub fn eval(&self, w: &[Complex64]) -> Result<Complex64> {
        let shifted: Vec<Complex64> = self.z.iter().zip(w).map(|(a, b)| a - b).collect();
        let kz = KernelVector::new(&self.space, &self.z, Normalization::Normalized)?;
        Ok((self.f)(&shifted) * kz.eval(w)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bergman_kernel_values() {
        let s = Space::bergman(1, 2.0).unwrap();
        // K_0 is identically 1
        let v = kernel_eval(&s, &[c(0.0, 0.0)], &[c(0.3, -0.4)]).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        // K_{0.5}(0.5) = (1 - 0.25)^{-2} = 16/9
        let v = kernel_eval(&s, &[c(0.5, 0.0)], &[c(0.5, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.re, 16.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn fock_kernel_values() {
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        let v = kernel_eval(&s, &[c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.re, std::f64::consts::E, epsilon = 1e-14);
        // e^{|z|^2 / 2} = e^2 at z = 2
        assert_abs_diff_eq!(kernel_norm(&s, &[c(2.0, 0.0)]).unwrap(), 2.0_f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn kernel_norms() {
        let s = Space::bergman(1, 2.0).unwrap();
        assert_abs_diff_eq!(kernel_norm(&s, &[c(0.0, 0.0)]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            kernel_norm(&s, &[c(0.5, 0.0)]).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-14
        );
        // ||K_z||^2 = K_z(z)
        let z = [c(0.31, 0.42)];
        let nz = kernel_norm(&s, &z).unwrap();
        let kzz = kernel_eval(&s, &z, &z).unwrap();
        assert_abs_diff_eq!(nz * nz, kzz.re, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_symmetry() {
        for s in [Space::bergman(2, 2.0).unwrap(), Space::fock(2, 2.0, 0.7).unwrap()] {
            let z = [c(0.2, 0.1), c(-0.3, 0.25)];
            let w = [c(-0.1, 0.4), c(0.15, -0.2)];
            let a = kernel_eval(&s, &z, &w).unwrap();
            let b = kernel_eval(&s, &w, &z).unwrap().conj();
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn correlation_values() {
        let s = Space::bergman(1, 2.0).unwrap();
        let z = [c(0.37, -0.22)];
        let one = correlation_closed_form(&s, &z, &z).unwrap();
        assert_abs_diff_eq!(one.re, 1.0, epsilon = 1e-13);
        let v = correlation_closed_form(&s, &[c(0.0, 0.0)], &[c(0.5, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.re, 0.75, epsilon = 1e-14);
        // cross-check against 1/||K_{phi_z(w)}||
        let m = geometry::mobius(&[c(0.0, 0.0)], &[c(0.5, 0.0)]).unwrap();
        assert_abs_diff_eq!(
            v.norm(),
            1.0 / kernel_norm(&s, &m).unwrap(),
            epsilon = 1e-14
        );

        let f = Space::fock(1, 2.0, 1.0).unwrap();
        let v = correlation_closed_form(&f, &[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.norm(), (-0.5_f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            correlation_modulus(&f, &[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap(),
            (-0.5_f64).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn p_normalized_matches_spec_example() {
        let s = Space::bergman(1, 4.0).unwrap();
        let kv = p_normalized_kernel(&s, &[c(0.5, 0.0)], 4.0).unwrap();
        let w = [c(0.2, 0.3)];
        let expect = (Complex64::new(1.0, 0.0) - c(0.5, 0.0) * w[0]).powi(-2) * 0.75_f64.powf(1.5);
        let got = kv.eval(&w).unwrap();
        assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-13);
        assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-13);
    }

    #[test]
    fn p2_normalization_is_the_normalized_kernel() {
        let s = Space::bergman(1, 2.0).unwrap();
        let z = [c(0.4, -0.1)];
        let a = KernelVector::new(&s, &z, Normalization::Normalized).unwrap();
        let b = p_normalized_kernel(&s, &z, 2.0).unwrap();
        for k in 0..20 {
            let w = [c(0.04 * k as f64 - 0.4, 0.02 * k as f64 - 0.2)];
            let va = a.eval(&w).unwrap();
            let vb = b.eval(&w).unwrap();
            assert_abs_diff_eq!(va.re, vb.re, epsilon = 1e-13);
            assert_abs_diff_eq!(va.im, vb.im, epsilon = 1e-13);
        }
    }

    #[test]
    fn fock_translate_basics() {
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        // U_0 f(w) = f(-w) since k_0 = 1
        let f = |w: &[Complex64]| w[0] * w[0] + c(1.0, 0.0);
        let u = FockTranslate::new(&s, &[c(0.0, 0.0)], f).unwrap();
        let w = [c(0.7, -0.3)];
        let expect = f(&[-w[0]]);
        let got = u.eval(&w).unwrap();
        assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-14);
    }

    #[test]
    fn fock_translate_modulus_identity() {
        // |U_z k_w(u)| = |k_{z-w}(u)| exactly for the Gaussian weight
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        let z = [c(1.2, 0.4)];
        let w = [c(-0.3, 0.9)];
        let kw = KernelVector::new(&s, &w, Normalization::Normalized).unwrap();
        let u_z = FockTranslate::new(&s, &z, move |x| kw.eval(x).unwrap()).unwrap();
        let kzw = KernelVector::new(&s, &[z[0] - w[0]], Normalization::Normalized).unwrap();
        for k in 0..50 {
            let u = [c(0.17 * k as f64 - 4.0, 0.11 * (k % 7) as f64)];
            assert_abs_diff_eq!(
                u_z.eval(&u).unwrap().norm(),
                kzw.eval(&u).unwrap().norm(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn bergman_translate_of_one_is_kz() {
        let s = Space::bergman(1, 2.0).unwrap();
        let z = [c(0.5, 0.2)];
        let u = BergmanTranslate::new(&s, &z, 2.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let kz = KernelVector::new(&s, &z, Normalization::Normalized).unwrap();
        let w = [c(-0.3, 0.45)];
        let a = u.eval(&w).unwrap();
        let b = kz.eval(&w).unwrap();
        assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-13);
        assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-13);
    }

    #[test]
    fn bergman_translate_modulus_identity() {
        // |U_z^{(2)} k_w(u)| = |k_{phi_z(w)}(u)|
        let s = Space::bergman(1, 2.0).unwrap();
        let z = [c(0.5, -0.1)];
        let w = [c(0.2, 0.3)];
        let kw = KernelVector::new(&s, &w, Normalization::Normalized).unwrap();
        let u_z = BergmanTranslate::new(&s, &z, 2.0, move |x| kw.eval(x).unwrap()).unwrap();
        let moved = geometry::mobius(&z, &w).unwrap();
        let km = KernelVector::new(&s, &moved, Normalization::Normalized).unwrap();
        for k in 0..50 {
            let u = [c(0.035 * k as f64 - 0.8, 0.021 * (k % 9) as f64 - 0.1)];
            assert_abs_diff_eq!(
                u_z.eval(&u).unwrap().norm(),
                km.eval(&u).unwrap().norm(),
                epsilon = 1e-10
            );
        }
    }
}
