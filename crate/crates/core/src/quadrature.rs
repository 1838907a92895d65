//! Polar product quadrature over the unit ball and the complex plane.
//!
//! Ball rules integrate against the normalized volume measure `dv`
//! (`v(B_n) = 1`) or the invariant measure `d(lambda) = dv / (1-|z|^2)^(n+1)`.
//! The radial direction substitutes `t = |z|^2 = 1 - e^(-u)` and places
//! Gauss-Legendre nodes in `u`, so the node's boundary gap `s = 1 - t = e^(-u)`
//! is carried exactly even when `t` rounds to `1.0`; integrands that need the
//! boundary distance read it from the node view instead of recomputing it
//! from coordinates.
//!
//! Plane rules are polar Gauss-Legendre x trapezoid over a disk of finite
//! radius against plain Lebesgue measure; the Gaussian inner-product weight
//! `(alpha/pi)^n exp(-alpha |z|^2)` enters through the node view. The mass
//! missed beyond the disk is recorded as a closed-form Gaussian tail.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::space::pairing;
use crate::{Error, Result};

/// Nodes and weights of the Gauss-Legendre rule on `[-1, 1]`, ascending.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    assert!(m >= 1);
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        // Tricomi-type initial guess, then Newton on P_m.
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_with_derivative(m, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule scaled to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, m: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    gauss_legendre(m)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Measure selector for ball rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMeasure {
    /// Normalized volume measure, `v(B_n) = 1`.
    Lebesgue,
    /// Invariant measure `dv / (1-|z|^2)^(n+1)`.
    Invariant,
}

/// One quadrature node of a ball rule together with its exact boundary gap.
pub struct BallNodeView<'a> {
    /// Coordinates; for very deep rules `|z|` may round to 1.
    pub z: &'a [Complex64],
    /// `|z|^2`, possibly rounded to 1 for deep rules.
    pub t: f64,
    /// Exact `1 - |z|^2`, never rounded away.
    pub s: f64,
}

/// Serializable construction parameters; rules rebuild deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallRuleSpec {
    pub n: usize,
    pub radial: usize,
    pub angular: usize,
    /// Boundary gap `1 - rho_max^2` of the radial support.
    pub boundary_gap: f64,
}

/// Polar product rule over `{ |z| <= rho_max }` in `B_n`, `n <= 2`.
#[derive(Debug, Clone)]
pub struct BallRule {
    pub n: usize,
    radial_t: Vec<f64>,
    radial_s: Vec<f64>,
    /// Weight for integrals `int g(t) dt` on the radial segment.
    radial_w: Vec<f64>,
    angular: usize,
    angles: Vec<(f64, f64)>, // (cos, sin)
    /// Gauss-Legendre nodes on [0, 1] splitting |z1|^2 vs |z2|^2 (n = 2 only).
    sigma: Vec<(f64, f64)>,
    s_min: f64,
    u_lo: f64,
    u_hi: f64,
}

impl BallRule {
    /// Rule over `{ |z| <= rho_max }`. Rejects `rho_max >= 1` and fewer than
    /// 4 nodes per direction.
    pub fn build(n: usize, radial: usize, angular: usize, rho_max: f64) -> Result<Self> {
        if !(rho_max > 0.0 && rho_max < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho_max must lie in (0, 1), got {rho_max}"
            )));
        }
        let gap = (1.0 - rho_max) * (1.0 + rho_max);
        Self::with_boundary_gap(n, radial, angular, gap)
    }

    /// Rule whose radial support ends at `1 - |z|^2 = boundary_gap`.
    ///
    /// Gaps far below machine epsilon are allowed; such rules are only
    /// usable through [`BallRule::integrate_nodes`] because node coordinates
    /// degenerate onto the sphere.
    pub fn with_boundary_gap(n: usize, radial: usize, angular: usize, gap: f64) -> Result<Self> {
        if n == 0 || n > 2 {
            return Err(Error::InvalidParameter(format!("n must be 1 or 2, got {n}")));
        }
        if radial < 4 || angular < 4 {
            return Err(Error::InvalidParameter(
                "at least 4 radial and 4 angular nodes required".into(),
            ));
        }
        if !(gap > 0.0 && gap < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "boundary gap must lie in (0, 1), got {gap}"
            )));
        }
        Self::on_u_interval(n, radial, angular, 0.0, -gap.ln(), gap)
    }

    fn on_u_interval(
        n: usize,
        radial: usize,
        angular: usize,
        u_lo: f64,
        u_hi: f64,
        s_min: f64,
    ) -> Result<Self> {
        let mut radial_t = Vec::with_capacity(radial);
        let mut radial_s = Vec::with_capacity(radial);
        let mut radial_w = Vec::with_capacity(radial);
        for (u, w) in gauss_legendre_on(u_lo, u_hi, radial) {
            let s = (-u).exp();
            radial_t.push(-(-u).exp_m1()); // t = 1 - e^{-u}, exact for small u
            radial_s.push(s);
            radial_w.push(w * s); // dt = e^{-u} du
        }
        let angles = (0..angular)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / angular as f64;
                (th.cos(), th.sin())
            })
            .collect();
        let sigma = if n == 2 {
            gauss_legendre_on(0.0, 1.0, (radial / 2).max(8))
        } else {
            Vec::new()
        };
        Ok(BallRule {
            n,
            radial_t,
            radial_s,
            radial_w,
            angular,
            angles,
            sigma,
            s_min,
            u_lo,
            u_hi,
        })
    }

    /// Same support with `k` times the resolution in every direction.
    pub fn refined(&self, k: usize) -> Result<Self> {
        Self::on_u_interval(
            self.n,
            self.radial_t.len() * k,
            self.angular * k,
            self.u_lo,
            self.u_hi,
            self.s_min,
        )
    }

    /// Sub-rule on the annulus `t_lo <= |z|^2 <= rho_max^2`, same resolution.
    pub fn annulus(&self, t_lo: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&t_lo) {
            return Err(Error::InvalidParameter(format!(
                "annulus start must lie in [0, 1), got {t_lo}"
            )));
        }
        let u_start = -(-t_lo).ln_1p(); // -ln(1 - t_lo)
        if u_start >= self.u_hi {
            return Err(Error::InvalidParameter(
                "annulus lies outside the rule support".into(),
            ));
        }
        Self::on_u_interval(
            self.n,
            self.radial_t.len(),
            self.angular,
            u_start.max(self.u_lo),
            self.u_hi,
            self.s_min,
        )
    }

    pub fn spec(&self) -> BallRuleSpec {
        BallRuleSpec {
            n: self.n,
            radial: self.radial_t.len(),
            angular: self.angular,
            boundary_gap: self.s_min,
        }
    }

    pub fn from_spec(spec: &BallRuleSpec) -> Result<Self> {
        Self::with_boundary_gap(spec.n, spec.radial, spec.angular, spec.boundary_gap)
    }

    pub fn boundary_gap(&self) -> f64 {
        self.s_min
    }

    /// `rho_max^2` of the support (rounds to 1 for deep rules).
    pub fn t_max(&self) -> f64 {
        1.0 - self.s_min
    }

    pub fn node_count(&self) -> usize {
        if self.n == 1 {
            self.radial_t.len() * self.angular
        } else {
            self.radial_t.len() * self.sigma.len() * self.angular * self.angular
        }
    }

    /// Closed-form mass of the supported region.
    pub fn exact_mass(&self, measure: BallMeasure) -> f64 {
        let t = self.t_max();
        match measure {
            BallMeasure::Lebesgue => t.powi(self.n as i32),
            BallMeasure::Invariant => (t / self.s_min).powi(self.n as i32),
        }
    }

    /// Whether node coordinates are valid interior points (deep rules place
    /// nodes that round onto the sphere).
    pub fn points_representable(&self) -> bool {
        self.s_min >= 1e-13
    }

    /// Radial structure `(t, s, w)` with `w` the weight for `int g(t) dt`.
    pub fn radial_view(&self) -> Vec<(f64, f64, f64)> {
        self.radial_t
            .iter()
            .zip(&self.radial_s)
            .zip(&self.radial_w)
            .map(|((&t, &s), &w)| (t, s, w))
            .collect()
    }

    /// Fixed-order integration passing the node view (coordinates plus exact
    /// boundary gap) to the integrand. Deterministic regardless of thread
    /// count: per-ring partial sums are combined by an index-ordered pairwise
    /// tree.
    pub fn integrate_nodes<F>(&self, measure: BallMeasure, f: F) -> Complex64
    where
        F: Fn(&BallNodeView) -> Complex64 + Sync,
    {
        let partials: Vec<Complex64> = (0..self.radial_t.len())
            .into_par_iter()
            .map(|i| self.ring_sum(i, measure, &f))
            .collect();
        pairwise_sum(&partials)
    }

    fn ring_sum<F>(&self, i: usize, measure: BallMeasure, f: &F) -> Complex64
    where
        F: Fn(&BallNodeView) -> Complex64 + Sync,
    {
        let t = self.radial_t[i];
        let s = self.radial_s[i];
        let w_radial = self.radial_w[i];
        let density = match measure {
            BallMeasure::Lebesgue => 1.0,
            BallMeasure::Invariant => 1.0 / s.powi(self.n as i32 + 1),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        if self.n == 1 {
            let r = t.sqrt();
            let w = w_radial * density / self.angular as f64;
            let mut z = [Complex64::new(0.0, 0.0)];
            for &(c, sn) in &self.angles {
                z[0] = Complex64::new(r * c, r * sn);
                acc += f(&BallNodeView { z: &z, t, s }) * w;
            }
        } else {
            let m = self.angular as f64;
            for &(sig, w_sig) in &self.sigma {
                let r1 = (t * (1.0 - sig)).sqrt();
                let r2 = (t * sig).sqrt();
                let w = 2.0 * t * w_radial * w_sig * density / (m * m);
                let mut z = [Complex64::new(0.0, 0.0); 2];
                for &(c1, s1) in &self.angles {
                    z[0] = Complex64::new(r1 * c1, r1 * s1);
                    for &(c2, s2) in &self.angles {
                        z[1] = Complex64::new(r2 * c2, r2 * s2);
                        acc += f(&BallNodeView { z: &z, t, s }) * w;
                    }
                }
            }
        }
        acc
    }

    /// Integration of a plain point function. Fails on deep rules whose
    /// nodes are not representable interior points, and on non-finite
    /// integrand values.
    pub fn integrate<F>(&self, measure: BallMeasure, f: F) -> Result<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        if !self.points_representable() {
            return Err(Error::Unsupported(
                "rule reaches too close to the boundary for point evaluation; \
                 use integrate_nodes"
                    .into(),
            ));
        }
        let bad = std::sync::Mutex::new(None::<String>);
        let result = self.integrate_nodes(measure, |node| {
            let v = f(node.z);
            if !v.re.is_finite() || !v.im.is_finite() {
                let mut slot = bad.lock().unwrap();
                if slot.is_none() {
                    *slot = Some(format!("{:?}", node.z));
                }
            }
            v
        });
        if let Some(at) = bad.into_inner().unwrap() {
            return Err(Error::Numerical(format!(
                "non-finite integrand value at node {at}"
            )));
        }
        Ok(result)
    }
}

/// Integral of `|f|` over the complement of the Bergman-metric disk
/// `D(center, big_r)` intersected with the rule's support, against the
/// selected measure.
///
/// Computed after the Möbius change of variables `w = phi_center(u)`, which
/// maps the excluded region onto the centered disk `|u| < tanh(big_r)`; the
/// invariant measure is preserved and the Lebesgue measure picks up the
/// Jacobian `((1-|c|^2) / |1 - <u, c>|^2)^(n+1)`. The integrand receives the
/// transformed node (coordinates plus exact boundary gap).
pub fn ball_tail_integral<F>(
    rule: &BallRule,
    measure: BallMeasure,
    center: &[Complex64],
    big_r: f64,
    f: F,
) -> Result<f64>
where
    F: Fn(&BallNodeView) -> f64 + Sync,
{
    if big_r < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tail radius must be nonnegative, got {big_r}"
        )));
    }
    if center.len() != rule.n {
        return Err(Error::Mismatch(format!(
            "center has {} coordinates, rule has n = {}",
            center.len(),
            rule.n
        )));
    }
    let c_sq = crate::space::norm_sq(center);
    if c_sq >= 1.0 {
        return Err(Error::Domain("tail center outside the unit ball".into()));
    }
    let rho_lo = big_r.tanh();
    let sub = if rho_lo * rho_lo > 0.0 {
        rule.annulus(rho_lo * rho_lo)?
    } else {
        rule.clone()
    };
    let s_c = 1.0 - c_sq;
    let np1 = rule.n as i32 + 1;
    let value = sub.integrate_nodes(BallMeasure::Invariant, |node| {
        let w = mobius_unchecked(center, node.z);
        // 1 - |phi_c(u)|^2 in closed form; exact even when |u| rounds to 1.
        let denom_sq = (Complex64::new(1.0, 0.0) - pairing(node.z, center)).norm_sqr();
        let s_w = s_c * node.s / denom_sq;
        let view = BallNodeView {
            z: &w,
            t: 1.0 - s_w,
            s: s_w,
        };
        let density = match measure {
            BallMeasure::Lebesgue => s_w.powi(np1), // dv = s^(n+1) d(lambda)
            BallMeasure::Invariant => 1.0,
        };
        Complex64::new(f(&view).abs() * density, 0.0)
    });
    Ok(value.re)
}

/// Möbius map without domain checks, for quadrature-transformed nodes whose
/// coordinates may sit on the sphere after rounding.
fn mobius_unchecked(a: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
    let a_sq = crate::space::norm_sq(a);
    if a_sq == 0.0 {
        return w.iter().map(|c| -c).collect();
    }
    let s_a = (1.0 - a_sq).sqrt();
    let wa = pairing(w, a);
    let denom = Complex64::new(1.0, 0.0) - wa;
    let proj = wa / a_sq;
    a.iter()
        .zip(w)
        .map(|(ai, wi)| {
            let p = proj * ai;
            (ai - p - s_a * (wi - p)) / denom
        })
        .collect()
}

/// One node of a plane rule.
pub struct PlaneNodeView<'a> {
    pub z: &'a [Complex64],
    /// `|z|^2` relative to the rule's center.
    pub t: f64,
    /// Gaussian inner-product density `(alpha/pi)^n exp(-alpha |z|^2)`
    /// evaluated at the node's absolute position.
    pub gaussian_density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneRuleSpec {
    pub n: usize,
    pub alpha: f64,
    pub range: f64,
    pub radial: usize,
    pub angular: usize,
}

/// Polar rule over the disk `{ |z - center| <= range }` in `C^n` against
/// plain Lebesgue measure.
#[derive(Debug, Clone)]
pub struct PlaneRule {
    pub n: usize,
    pub alpha: f64,
    range: f64,
    center: Vec<Complex64>,
    radial: Vec<(f64, f64)>, // (t, weight for int g(t) dt)
    angular: usize,
    angles: Vec<(f64, f64)>,
    sigma: Vec<(f64, f64)>,
    radial_count: usize,
    t_lo: f64,
}

impl PlaneRule {
    /// Rejects nonpositive `alpha` or `range_r`.
    pub fn build(
        n: usize,
        alpha: f64,
        range_r: f64,
        radial: usize,
        angular: usize,
    ) -> Result<Self> {
        if n == 0 || n > 2 {
            return Err(Error::InvalidParameter(format!("n must be 1 or 2, got {n}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(range_r > 0.0 && range_r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "range must be positive, got {range_r}"
            )));
        }
        if radial < 4 || angular < 4 {
            return Err(Error::InvalidParameter(
                "at least 4 radial and 4 angular nodes required".into(),
            ));
        }
        Self::annulus_about(
            n,
            alpha,
            &vec![Complex64::new(0.0, 0.0); n],
            0.0,
            range_r,
            radial,
            angular,
        )
    }

    /// Rule over the annulus `r_lo <= |z - center| <= r_hi`.
    pub fn annulus_about(
        n: usize,
        alpha: f64,
        center: &[Complex64],
        r_lo: f64,
        r_hi: f64,
        radial: usize,
        angular: usize,
    ) -> Result<Self> {
        if center.len() != n {
            return Err(Error::Mismatch("center dimension != n".into()));
        }
        if !(r_hi > r_lo && r_lo >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= r_lo < r_hi, got [{r_lo}, {r_hi}]"
            )));
        }
        let t_lo = r_lo * r_lo;
        let radial_nodes = gauss_legendre_on(t_lo, r_hi * r_hi, radial);
        let angles = (0..angular)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / angular as f64;
                (th.cos(), th.sin())
            })
            .collect();
        let sigma = if n == 2 {
            gauss_legendre_on(0.0, 1.0, (radial / 2).max(8))
        } else {
            Vec::new()
        };
        Ok(PlaneRule {
            n,
            alpha,
            range: r_hi,
            center: center.to_vec(),
            radial: radial_nodes,
            angular,
            angles,
            sigma,
            radial_count: radial,
            t_lo,
        })
    }

    /// Same disk recentered at `center`.
    pub fn recentered(&self, center: &[Complex64]) -> Result<Self> {
        Self::annulus_about(
            self.n,
            self.alpha,
            center,
            self.t_lo.sqrt(),
            self.range,
            self.radial_count,
            self.angular,
        )
    }

    pub fn refined(&self, k: usize) -> Result<Self> {
        Self::annulus_about(
            self.n,
            self.alpha,
            &self.center,
            self.t_lo.sqrt(),
            self.range,
            self.radial_count * k,
            self.angular * k,
        )
    }

    pub fn spec(&self) -> PlaneRuleSpec {
        PlaneRuleSpec {
            n: self.n,
            alpha: self.alpha,
            range: self.range,
            radial: self.radial_count,
            angular: self.angular,
        }
    }

    pub fn from_spec(spec: &PlaneRuleSpec) -> Result<Self> {
        Self::build(spec.n, spec.alpha, spec.range, spec.radial, spec.angular)
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn node_count(&self) -> usize {
        if self.n == 1 {
            self.radial.len() * self.angular
        } else {
            self.radial.len() * self.sigma.len() * self.angular * self.angular
        }
    }

    /// Lebesgue mass of the supported region.
    pub fn exact_mass(&self) -> f64 {
        let t = self.range * self.range - self.t_lo;
        match self.n {
            1 => std::f64::consts::PI * t,
            _ => {
                let pi2 = std::f64::consts::PI * std::f64::consts::PI;
                pi2 * (self.range.powi(4) - self.t_lo * self.t_lo) / 2.0
            }
        }
    }

    /// Gaussian mass `int (alpha/pi)^n e^(-alpha |z|^2) dv` missed beyond the
    /// rule's disk when centered at the origin; the recorded truncation bound.
    pub fn gaussian_tail_bound(&self) -> f64 {
        let a = self.alpha * self.range * self.range;
        match self.n {
            1 => (-a).exp(),
            _ => (-a).exp() * (1.0 + a),
        }
    }

    /// Fixed-order integration against Lebesgue measure; the node view also
    /// carries the Gaussian density for weighted inner products.
    pub fn integrate_nodes<F>(&self, f: F) -> Complex64
    where
        F: Fn(&PlaneNodeView) -> Complex64 + Sync,
    {
        let partials: Vec<Complex64> = (0..self.radial.len())
            .into_par_iter()
            .map(|i| self.ring_sum(i, &f))
            .collect();
        pairwise_sum(&partials)
    }

    fn ring_sum<F>(&self, i: usize, f: &F) -> Complex64
    where
        F: Fn(&PlaneNodeView) -> Complex64 + Sync,
    {
        let (t, w_t) = self.radial[i];
        let gauss_norm = (self.alpha / std::f64::consts::PI).powi(self.n as i32);
        let mut acc = Complex64::new(0.0, 0.0);
        if self.n == 1 {
            let r = t.sqrt();
            let w = std::f64::consts::PI * w_t / self.angular as f64;
            let mut z = [Complex64::new(0.0, 0.0)];
            for &(c, sn) in &self.angles {
                z[0] = self.center[0] + Complex64::new(r * c, r * sn);
                let gd = gauss_norm * (-self.alpha * z[0].norm_sqr()).exp();
                acc += f(&PlaneNodeView {
                    z: &z,
                    t,
                    gaussian_density: gd,
                }) * w;
            }
        } else {
            let m = self.angular as f64;
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            for &(sig, w_sig) in &self.sigma {
                let r1 = (t * (1.0 - sig)).sqrt();
                let r2 = (t * sig).sqrt();
                let w = pi2 * t * w_t * w_sig / (m * m);
                let mut z = [Complex64::new(0.0, 0.0); 2];
                for &(c1, s1) in &self.angles {
                    z[0] = self.center[0] + Complex64::new(r1 * c1, r1 * s1);
                    for &(c2, s2) in &self.angles {
                        z[1] = self.center[1] + Complex64::new(r2 * c2, r2 * s2);
                        let gd = gauss_norm
                            * (-self.alpha * (z[0].norm_sqr() + z[1].norm_sqr())).exp();
                        acc += f(&PlaneNodeView {
                            z: &z,
                            t,
                            gaussian_density: gd,
                        }) * w;
                    }
                }
            }
        }
        acc
    }

    /// Integration of a plain point function with finiteness checking.
    pub fn integrate<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let bad = std::sync::Mutex::new(None::<String>);
        let result = self.integrate_nodes(|node| {
            let v = f(node.z);
            if !v.re.is_finite() || !v.im.is_finite() {
                let mut slot = bad.lock().unwrap();
                if slot.is_none() {
                    *slot = Some(format!("{:?}", node.z));
                }
            }
            v
        });
        if let Some(at) = bad.into_inner().unwrap() {
            return Err(Error::Numerical(format!(
                "non-finite integrand value at node {at}"
            )));
        }
        Ok(result)
    }
}

/// Integral of `|f|` (Lebesgue) over `{ |w - center| >= big_r }` within
/// reach `center + range`; the remainder beyond the rule's range is governed
/// by the rule's recorded Gaussian tail bound.
pub fn plane_tail_integral<F>(
    rule: &PlaneRule,
    center: &[Complex64],
    big_r: f64,
    f: F,
) -> Result<f64>
where
    F: Fn(&PlaneNodeView) -> f64 + Sync,
{
    if big_r < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tail radius must be nonnegative, got {big_r}"
        )));
    }
    if big_r >= rule.range() {
        return Ok(0.0);
    }
    let sub = PlaneRule::annulus_about(
        rule.n,
        rule.alpha,
        center,
        big_r,
        rule.range(),
        rule.radial_count,
        rule.angular,
    )?;
    let v = sub.integrate_nodes(|node| Complex64::new(f(node).abs(), 0.0));
    Ok(v.re)
}

/// A quadrature rule for either domain; what configuration files and the
/// command-line tool carry around.
#[derive(Debug, Clone)]
pub enum Rule {
    Ball(BallRule),
    Plane(PlaneRule),
}

/// Serializable form of [`Rule`]; rules rebuild deterministically from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum RuleSpec {
    Ball(BallRuleSpec),
    PlaneGaussian(PlaneRuleSpec),
}

impl Rule {
    pub fn ball(&self) -> Result<&BallRule> {
        match self {
            Rule::Ball(r) => Ok(r),
            Rule::Plane(_) => Err(Error::Mismatch("expected a ball rule".into())),
        }
    }

    pub fn plane(&self) -> Result<&PlaneRule> {
        match self {
            Rule::Plane(r) => Ok(r),
            Rule::Ball(_) => Err(Error::Mismatch("expected a plane rule".into())),
        }
    }

    pub fn spec(&self) -> RuleSpec {
        match self {
            Rule::Ball(r) => RuleSpec::Ball(r.spec()),
            Rule::Plane(r) => RuleSpec::PlaneGaussian(r.spec()),
        }
    }

    pub fn from_spec(spec: &RuleSpec) -> Result<Self> {
        match spec {
            RuleSpec::Ball(s) => Ok(Rule::Ball(BallRule::from_spec(s)?)),
            RuleSpec::PlaneGaussian(s) => Ok(Rule::Plane(PlaneRule::from_spec(s)?)),
        }
    }

    pub fn refined(&self, k: usize) -> Result<Self> {
        match self {
            Rule::Ball(r) => Ok(Rule::Ball(r.refined(k)?)),
            Rule::Plane(r) => Ok(Rule::Plane(r.refined(k)?)),
        }
    }
}

/// Index-ordered pairwise tree summation; deterministic for a fixed slice.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_five_points() {
        let gl = gauss_legendre(5);
        assert_abs_diff_eq!(gl[0].0, -0.906_179_845_938_664, epsilon = 1e-14);
        assert_abs_diff_eq!(gl[2].0, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gl[2].1, 0.568_888_888_888_888_9, epsilon = 1e-14);
        assert_abs_diff_eq!(gl[4].1, 0.236_926_885_056_189_08, epsilon = 1e-14);
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // m nodes are exact through degree 2m - 1
        let gl = gauss_legendre_on(0.0, 1.0, 8);
        for k in 0..=15 {
            let val: f64 = gl.iter().map(|(x, w)| w * x.powi(k)).sum();
            assert_abs_diff_eq!(val, 1.0 / (k as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn ball_rule_masses() {
        let rule = BallRule::build(1, 80, 32, 0.999).unwrap();
        let one = rule
            .integrate(BallMeasure::Lebesgue, |_| Complex64::new(1.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(one.re, 0.998001, epsilon = 1e-12);
        let inv = rule
            .integrate(BallMeasure::Invariant, |_| Complex64::new(1.0, 0.0))
            .unwrap();
        let exact = rule.exact_mass(BallMeasure::Invariant);
        assert!((inv.re - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn ball_rule_odd_symmetry_and_second_moment() {
        let rule = BallRule::build(1, 120, 64, 1.0 - 1e-12).unwrap();
        let odd = rule
            .integrate(BallMeasure::Lebesgue, |z| z[0])
            .unwrap();
        assert_abs_diff_eq!(odd.norm(), 0.0, epsilon = 1e-14);
        let second = rule
            .integrate(BallMeasure::Lebesgue, |z| {
                Complex64::new(z[0].norm_sqr(), 0.0)
            })
            .unwrap();
        assert_abs_diff_eq!(second.re, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn ball_rule_two_dim_mass_and_monomial() {
        let rule = BallRule::build(2, 40, 16, 0.999).unwrap();
        let one = rule
            .integrate(BallMeasure::Lebesgue, |_| Complex64::new(1.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(one.re, 0.998001_f64.powi(2), epsilon = 1e-9);
        // ||z1^1 z2^1||^2 = 2! 1! 1! / 4! = 1/12 on the full ball
        let rule_full = BallRule::with_boundary_gap(2, 60, 16, 1e-10).unwrap();
        let m = rule_full.integrate_nodes(BallMeasure::Lebesgue, |node| {
            Complex64::new(node.z[0].norm_sqr() * node.z[1].norm_sqr(), 0.0)
        });
        assert_abs_diff_eq!(m.re, 1.0 / 12.0, epsilon = 1e-9);
    }

    #[test]
    fn deep_rule_requires_node_view() {
        let deep = BallRule::with_boundary_gap(1, 60, 8, 1e-30).unwrap();
        assert!(deep.integrate(BallMeasure::Lebesgue, |_| Complex64::new(1.0, 0.0)).is_err());
        // int (1-t)^{-1/2} dv = int_0^1 s^{-1/2} ds = 2 needs the exact gap
        let v = deep.integrate_nodes(BallMeasure::Lebesgue, |node| {
            Complex64::new(node.s.powf(-0.5), 0.0)
        });
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn plane_rule_gaussian_moments() {
        let rule = PlaneRule::build(1, 1.0, 8.0, 120, 32).unwrap();
        let pi = std::f64::consts::PI;
        let mass = rule
            .integrate(|z| Complex64::new((-z[0].norm_sqr()).exp() / pi, 0.0))
            .unwrap();
        assert_abs_diff_eq!(mass.re, 1.0, epsilon = 1e-12);
        let first = rule
            .integrate(|z| z[0] * (-z[0].norm_sqr()).exp() / pi)
            .unwrap();
        assert_abs_diff_eq!(first.norm(), 0.0, epsilon = 1e-14);
        let second = rule
            .integrate(|z| Complex64::new(z[0].norm_sqr() * (-z[0].norm_sqr()).exp() / pi, 0.0))
            .unwrap();
        assert_abs_diff_eq!(second.re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn plane_rule_two_dim_gaussian_mass() {
        let rule = PlaneRule::build(2, 1.0, 6.0, 60, 16).unwrap();
        let v = rule.integrate_nodes(|node| Complex64::new(node.gaussian_density, 0.0));
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn plane_tail_gaussian() {
        let rule = PlaneRule::build(1, 1.0, 8.0, 120, 32).unwrap();
        let center = [Complex64::new(0.7, -0.3)];
        let tail = plane_tail_integral(&rule, &center, 2.0, |node| {
            let d2 = (node.z[0] - center[0]).norm_sqr();
            (-0.5 * d2).exp()
        })
        .unwrap();
        assert_abs_diff_eq!(tail, 2.0 * std::f64::consts::PI * (-2.0_f64).exp(), epsilon = 1e-10);
        // R = 0 gives the full integral
        let full = plane_tail_integral(&rule, &center, 0.0, |node| {
            (-0.5 * (node.z[0] - center[0]).norm_sqr()).exp()
        })
        .unwrap();
        assert_abs_diff_eq!(full, 2.0 * std::f64::consts::PI, epsilon = 1e-9);
    }

    #[test]
    fn ball_tail_rudin_forelli_closed_form() {
        // integrand (1-|w|^2)^{a-1} against dv: full integral 1/a at a = 0.5,
        // tail over |w| >= R' equal to (1-R'^2)^a / a
        let rule = BallRule::with_boundary_gap(1, 200, 16, 1e-30).unwrap();
        let zero = [Complex64::new(0.0, 0.0)];
        let a = 0.5;
        let full = ball_tail_integral(&rule, BallMeasure::Lebesgue, &zero, 0.0, |node| {
            node.s.powf(a - 1.0)
        })
        .unwrap();
        assert_abs_diff_eq!(full, 2.0, epsilon = 1e-10);
        let big_r = 0.96_f64.atanh();
        let tail = ball_tail_integral(&rule, BallMeasure::Lebesgue, &zero, big_r, |node| {
            node.s.powf(a - 1.0)
        })
        .unwrap();
        let expect = (1.0 - 0.96_f64 * 0.96).powf(a) / a; // = 0.56
        assert_abs_diff_eq!(tail, expect, epsilon = 1e-10);
    }

    #[test]
    fn tail_monotone_in_radius() {
        let rule = BallRule::build(1, 100, 32, 1.0 - 1e-9).unwrap();
        let c = [Complex64::new(0.3, 0.2)];
        let f = |node: &BallNodeView| node.s; // nonnegative
        let t2 = ball_tail_integral(&rule, BallMeasure::Lebesgue, &c, 2.0, f).unwrap();
        let t4 = ball_tail_integral(&rule, BallMeasure::Lebesgue, &c, 4.0, f).unwrap();
        assert!(t2 >= t4);
    }

    #[test]
    fn refinement_converges() {
        let coarse = BallRule::build(1, 40, 24, 1.0 - 1e-6).unwrap();
        let fine = coarse.refined(2).unwrap();
        let g = |z: &[Complex64]| Complex64::new((1.0 - z[0].norm_sqr()).powf(-0.5), 0.0);
        let a = coarse.integrate(BallMeasure::Lebesgue, g).unwrap().re;
        let b = fine.integrate(BallMeasure::Lebesgue, g).unwrap().re;
        assert!((a - b).abs() / b.abs() < 5e-3);
    }
}
