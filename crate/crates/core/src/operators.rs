//! Truncated operator matrices in the orthonormal monomial basis.
//!
//! Operators are compressions `P_D T P_D` stored as matrices of
//! `<T e_j, e_k>` over monomials of total degree at most `D`. Kernel
//! correlations `<T k_z, k_w>` are evaluated through closed-form kernel
//! coefficients, never by quadrature, and carry the coefficient-tail
//! truncation bar of the compression.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::{gauss_legendre_on, BallRule, PlaneRule, Rule};
use crate::space::{norm_sq, Family, Space};
use crate::symbols::Symbol;
use crate::{Error, Result};

/// Ordered monomial basis of total degree at most `D` with normalization
/// constants making it orthonormal: Bergman `n = 1`: `sqrt(k+1) z^k`;
/// Fock `n = 1`: `sqrt(alpha^k / k!) z^k`; degree-graded for `n = 2`.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub space: Space,
    pub degree: usize,
    /// Multi-indices `(a, b)`; `b = 0` when `n = 1`.
    pub indices: Vec<(usize, usize)>,
    /// Normalization constants `c_gamma` (so `e_gamma = c_gamma z^gamma`).
    pub consts: Vec<f64>,
}

/// Basis description for a space and truncation degree.
pub fn monomial_basis(space: &Space, degree: usize) -> MonomialBasis {
    let mut indices = Vec::new();
    if space.n == 1 {
        for k in 0..=degree {
            indices.push((k, 0));
        }
    } else {
        for d in 0..=degree {
            for a in (0..=d).rev() {
                indices.push((a, d - a));
            }
        }
    }
    let consts = indices
        .iter()
        .map(|&(a, b)| norm_const(space, a, b))
        .collect();
    MonomialBasis {
        space: *space,
        degree,
        indices,
        consts,
    }
}

/// `1 / ||z^gamma||`: Bergman `sqrt((n+|gamma|)! / (n! a! b!))`,
/// Fock `sqrt(alpha^|gamma| / (a! b!))`, accumulated as products of ratios.
fn norm_const(space: &Space, a: usize, b: usize) -> f64 {
    match space.family {
        Family::Bergman => {
            let d = a + b;
            // (n+d)! / (n! a! b!) -- build from ratios to avoid overflow
            let mut c_sq = 1.0;
            for i in 1..=d {
                c_sq *= (space.n + i) as f64;
            }
            for i in 1..=a {
                c_sq /= i as f64;
            }
            for i in 1..=b {
                c_sq /= i as f64;
            }
            c_sq.sqrt()
        }
        Family::Fock => {
            let mut c_sq = 1.0;
            for i in 1..=a {
                c_sq *= space.alpha / i as f64;
            }
            for i in 1..=b {
                c_sq *= space.alpha / i as f64;
            }
            c_sq.sqrt()
        }
    }
}

impl MonomialBasis {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn index_degree(&self, j: usize) -> usize {
        let (a, b) = self.indices[j];
        a + b
    }

    /// `e_j(z) = c_j z^gamma_j`.
    pub fn eval(&self, j: usize, z: &[Complex64]) -> Complex64 {
        let (a, b) = self.indices[j];
        let mut v = Complex64::new(self.consts[j], 0.0) * z[0].powu(a as u32);
        if self.space.n == 2 {
            v *= z[1].powu(b as u32);
        }
        v
    }

    /// `sum_j coeffs[j] e_j(z)` using power tables.
    pub fn eval_series(&self, coeffs: &[Complex64], z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(coeffs.len(), self.dim());
        let p1 = power_table(z[0], self.degree);
        let p2 = if self.space.n == 2 {
            power_table(z[1], self.degree)
        } else {
            Vec::new()
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &(a, b)) in self.indices.iter().enumerate() {
            let mut term = coeffs[j] * self.consts[j] * p1[a];
            if self.space.n == 2 {
                term *= p2[b];
            }
            acc += term;
        }
        acc
    }
}

fn power_table(z: Complex64, degree: usize) -> Vec<Complex64> {
    let mut t = Vec::with_capacity(degree + 1);
    let mut cur = Complex64::new(1.0, 0.0);
    for _ in 0..=degree {
        t.push(cur);
        cur *= z;
    }
    t
}

/// Closed-form coefficients `<k_z, e_j>` of the normalized kernel.
///
/// Bergman: `(1-|z|^2)^((n+1)/2) c_j conj(z)^gamma`; Fock:
/// `exp(-alpha |z|^2 / 2) c_j conj(z)^gamma`. No quadrature involved.
pub fn kernel_coefficients(
    space: &Space,
    z: &[Complex64],
    degree: usize,
) -> Result<Vec<Complex64>> {
    space.validate_point(z)?;
    let basis = monomial_basis(space, degree);
    let gap = match space.family {
        Family::Bergman => 1.0 - norm_sq(z),
        Family::Fock => norm_sq(z),
    };
    Ok(kernel_coefficients_with_gap(&basis, z, gap))
}

/// Same, reading the boundary gap (Bergman: `1-|z|^2`; Fock: `|z|^2`) from
/// the caller so quadrature nodes close to the sphere keep full precision.
pub fn kernel_coefficients_with_gap(
    basis: &MonomialBasis,
    z: &[Complex64],
    gap: f64,
) -> Vec<Complex64> {
    let pref = coefficient_prefactor(&basis.space, gap);
    let zc1 = power_table(z[0].conj(), basis.degree);
    let zc2 = if basis.space.n == 2 {
        power_table(z[1].conj(), basis.degree)
    } else {
        Vec::new()
    };
    basis
        .indices
        .iter()
        .zip(&basis.consts)
        .map(|(&(a, b), &c)| {
            let mut v = Complex64::new(pref * c, 0.0) * zc1[a];
            if basis.space.n == 2 {
                v *= zc2[b];
            }
            v
        })
        .collect()
}

fn coefficient_prefactor(space: &Space, gap: f64) -> f64 {
    match space.family {
        Family::Bergman => gap.powf(0.5 * (space.n as f64 + 1.0)),
        Family::Fock => (-0.5 * space.alpha * gap).exp(),
    }
}

/// Squared 2-norm of the coefficient tail `||(I - P_D) k_z||^2`.
///
/// Bergman `n = 1` has the closed form `q^(D+1) ((D+2) - (D+1) q)` with
/// `q = |z|^2`; the other cases sum the geometric / Poisson tail.
pub fn coefficient_tail_sq(space: &Space, z: &[Complex64], degree: usize) -> f64 {
    let q = norm_sq(z);
    coefficient_tail_sq_from_abs(space, q, degree)
}

/// Tail from `q = |z|^2` directly.
pub fn coefficient_tail_sq_from_abs(space: &Space, q: f64, degree: usize) -> f64 {
    match space.family {
        Family::Bergman => {
            if space.n == 1 {
                let d = degree as f64;
                (q.powi(degree as i32 + 1) * ((d + 2.0) - (d + 1.0) * q)).max(0.0)
            } else {
                // (1-q)^3 sum_{d > D} (d+1)(d+2)/2 q^d
                let one_minus = (1.0 - q).powi(3);
                let mut sum = 0.0;
                let mut qd = q.powi(degree as i32 + 1);
                for d in (degree + 1)..(degree + 200_000) {
                    let c = ((d + 1) * (d + 2)) as f64 / 2.0;
                    let term = c * qd;
                    sum += term;
                    qd *= q;
                    if term < 1e-18 * (1.0 + sum) {
                        break;
                    }
                }
                (one_minus * sum).min(1.0)
            }
        }
        Family::Fock => {
            // upper Poisson tail beyond D at mean alpha |z|^2, times the
            // dimension-d multiplicity collapsed by the multinomial theorem
            let lambda = space.alpha * q;
            if lambda == 0.0 {
                return 0.0;
            }
            let mut p = (-lambda).exp();
            if p == 0.0 {
                // far regime: effectively all mass beyond the truncation
                return 1.0;
            }
            let mut cdf = p;
            for d in 1..=degree {
                p *= lambda / d as f64;
                cdf += p;
            }
            (1.0 - cdf).clamp(0.0, 1.0)
        }
    }
}

/// A finite compression `P_D T P_D` stored as the matrix of `<T e_j, e_k>`.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub space: Space,
    pub degree: usize,
    /// Entry `(k, j)` is `<T e_j, e_k>`.
    pub matrix: DMatrix<Complex64>,
    pub provenance: String,
    norm_hint: f64,
}

impl TruncatedOperator {
    pub fn from_matrix(
        space: &Space,
        degree: usize,
        matrix: DMatrix<Complex64>,
        provenance: &str,
    ) -> Result<Self> {
        let dim = monomial_basis(space, degree).dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Mismatch(format!(
                "matrix is {}x{}, basis dimension is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical("non-finite matrix entry".into()));
        }
        let norm_hint = matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        Ok(TruncatedOperator {
            space: *space,
            degree,
            matrix,
            provenance: provenance.to_string(),
            norm_hint,
        })
    }

    pub fn identity(space: &Space, degree: usize) -> Self {
        let dim = monomial_basis(space, degree).dim();
        let m = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0, 0.0));
        TruncatedOperator::from_matrix(space, degree, m, "identity").unwrap()
    }

    pub fn zero(space: &Space, degree: usize) -> Self {
        let dim = monomial_basis(space, degree).dim();
        TruncatedOperator::from_matrix(space, degree, DMatrix::zeros(dim, dim), "zero").unwrap()
    }

    /// Rank-one operator `f -> <f, g_in> g_out` from basis coefficients.
    pub fn rank_one(
        space: &Space,
        degree: usize,
        g_out: &[Complex64],
        g_in: &[Complex64],
        label: &str,
    ) -> Result<Self> {
        let dim = monomial_basis(space, degree).dim();
        if g_out.len() != dim || g_in.len() != dim {
            return Err(Error::Mismatch(
                "coefficient length != basis dimension".into(),
            ));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            for j in 0..dim {
                m[(k, j)] = g_out[k] * g_in[j].conj();
            }
        }
        TruncatedOperator::from_matrix(space, degree, m, label)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius norm; a cheap upper bound for the operator norm used in
    /// truncation bars.
    pub fn norm_hint(&self) -> f64 {
        self.norm_hint
    }

    pub fn compose(&self, other: &TruncatedOperator) -> Result<Self> {
        self.check_compatible(other)?;
        let m = &self.matrix * &other.matrix;
        TruncatedOperator::from_matrix(
            &self.space,
            self.degree,
            m,
            &format!("({}) . ({})", self.provenance, other.provenance),
        )
    }

    pub fn adjoint(&self) -> Self {
        TruncatedOperator::from_matrix(
            &self.space,
            self.degree,
            self.matrix.adjoint(),
            &format!("({})*", self.provenance),
        )
        .unwrap()
    }

    pub fn combine(
        c1: Complex64,
        a: &TruncatedOperator,
        c2: Complex64,
        b: &TruncatedOperator,
    ) -> Result<Self> {
        a.check_compatible(b)?;
        let m = &a.matrix * c1 + &b.matrix * c2;
        TruncatedOperator::from_matrix(
            &a.space,
            a.degree,
            m,
            &format!("{c1}*({}) + {c2}*({})", a.provenance, b.provenance),
        )
    }

    fn check_compatible(&self, other: &TruncatedOperator) -> Result<()> {
        if self.space != other.space || self.degree != other.degree {
            return Err(Error::Mismatch(format!(
                "operators live on different truncations: ({:?}, D={}) vs ({:?}, D={})",
                self.space.family, self.degree, other.space.family, other.degree
            )));
        }
        Ok(())
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64> {
        Ok(*self.singular_values()?.first().expect("nonempty spectrum"))
    }

    /// Full singular spectrum, descending. Reports non-convergence.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let svd = nalgebra::SVD::try_new(self.matrix.clone(), false, false, 1e-13, 4000)
            .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(sv)
    }

    /// Matrix-vector application in basis coefficients.
    pub fn apply(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.dim() {
            return Err(Error::Mismatch("coefficient length != dimension".into()));
        }
        let v = nalgebra::DVector::from_column_slice(coeffs);
        Ok((&self.matrix * v).iter().copied().collect())
    }
}

/// Serialized operator form: row-major complex pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub space: Space,
    pub degree: usize,
    pub provenance: String,
    pub matrix: Vec<[f64; 2]>,
}

impl From<&TruncatedOperator> for OperatorRecord {
    fn from(t: &TruncatedOperator) -> Self {
        let dim = t.dim();
        let mut m = Vec::with_capacity(dim * dim);
        for k in 0..dim {
            for j in 0..dim {
                let c = t.matrix[(k, j)];
                m.push([c.re, c.im]);
            }
        }
        OperatorRecord {
            space: t.space,
            degree: t.degree,
            provenance: t.provenance.clone(),
            matrix: m,
        }
    }
}

impl TryFrom<&OperatorRecord> for TruncatedOperator {
    type Error = Error;

    fn try_from(r: &OperatorRecord) -> Result<Self> {
        let dim = monomial_basis(&r.space, r.degree).dim();
        if r.matrix.len() != dim * dim {
            return Err(Error::Mismatch(format!(
                "record has {} entries, expected {}",
                r.matrix.len(),
                dim * dim
            )));
        }
        let m = DMatrix::from_fn(dim, dim, |k, j| {
            let [re, im] = r.matrix[k * dim + j];
            Complex64::new(re, im)
        });
        TruncatedOperator::from_matrix(&r.space, r.degree, m, &r.provenance)
    }
}

/// A kernel correlation together with the compression truncation bar.
#[derive(Debug, Clone, Copy)]
pub struct Correlation {
    pub value: Complex64,
    /// `||T|| (tau_z + tau_w + tau_z tau_w)` with the Frobenius hint for
    /// `||T||`; bounds the distance to the untruncated correlation.
    pub truncation_bar: f64,
}

/// `<T k_z, k_w>` of the compression, via closed-form kernel coefficients.
pub fn correlation(
    t: &TruncatedOperator,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Correlation> {
    t.space.validate_point(z)?;
    t.space.validate_point(w)?;
    let cz = kernel_coefficients(&t.space, z, t.degree)?;
    let cw = kernel_coefficients(&t.space, w, t.degree)?;
    let y = t.apply(&cz)?;
    let value = hermitian_dot(&cw, &y);
    let tz = coefficient_tail_sq(&t.space, z, t.degree).sqrt();
    let tw = coefficient_tail_sq(&t.space, w, t.degree).sqrt();
    Ok(Correlation {
        value,
        truncation_bar: t.norm_hint() * (tz + tw + tz * tw),
    })
}

/// Berezin transform `<T k_z, k_z>` normalized within the compression model,
/// i.e. against the reproducing kernel `P_D k_z` of the truncated space (the
/// identity compression has Berezin transform exactly one everywhere).
pub fn berezin(t: &TruncatedOperator, z: &[Complex64]) -> Result<Correlation> {
    t.space.validate_point(z)?;
    let cz = kernel_coefficients(&t.space, z, t.degree)?;
    berezin_from_coeffs(t, &cz)
}

pub(crate) fn berezin_from_coeffs(t: &TruncatedOperator, cz: &[Complex64]) -> Result<Correlation> {
    let y = t.apply(cz)?;
    let num = hermitian_dot(cz, &y);
    let den: f64 = cz.iter().map(|c| c.norm_sqr()).sum();
    if den < 1e-280 {
        return Err(Error::Numerical(
            "kernel coefficients vanish at this point for the chosen degree".into(),
        ));
    }
    let tz_sq = (1.0 - den).max(0.0);
    let tz = tz_sq.sqrt();
    Ok(Correlation {
        value: num / den,
        truncation_bar: t.norm_hint() * (2.0 * tz + tz_sq),
    })
}

/// `sum_k conj(a_k) b_k`.
pub fn hermitian_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// The function `w -> <T k_z, k_w>` for fixed `z`, in a form evaluable at
/// quadrature nodes: `pref(w) * sum_gamma a_gamma w^gamma` where `pref` is
/// the space's coefficient prefactor.
pub struct CorrelationSeries {
    space: Space,
    degree: usize,
    indices: Vec<(usize, usize)>,
    a: Vec<Complex64>,
}

/// Builds the correlation series `w -> <T k_z, k_w>`.
pub fn correlation_series(t: &TruncatedOperator, z: &[Complex64]) -> Result<CorrelationSeries> {
    t.space.validate_point(z)?;
    let basis = monomial_basis(&t.space, t.degree);
    let cz = kernel_coefficients(&t.space, z, t.degree)?;
    let y = t.apply(&cz)?;
    let a = basis.consts.iter().zip(&y).map(|(&c, yk)| yk * c).collect();
    Ok(CorrelationSeries {
        space: t.space,
        degree: t.degree,
        indices: basis.indices,
        a,
    })
}

impl CorrelationSeries {
    /// Evaluate at a node with an explicitly carried boundary gap
    /// (Bergman: `1-|w|^2`; Fock: `|w|^2`).
    pub fn eval_with_gap(&self, w: &[Complex64], gap: f64) -> Complex64 {
        let pref = coefficient_prefactor(&self.space, gap);
        if pref == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if self.space.n == 1 {
            // Horner over k
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (0..self.a.len()).rev() {
                acc = acc * w[0] + self.a[j];
            }
            return acc * pref;
        }
        let p1 = power_table(w[0], self.degree);
        let p2 = power_table(w[1], self.degree);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &(k1, k2)) in self.indices.iter().enumerate() {
            acc += self.a[j] * p1[k1] * p2[k2];
        }
        acc * pref
    }

    pub fn eval(&self, w: &[Complex64]) -> Result<Complex64> {
        self.space.validate_point(w)?;
        let gap = match self.space.family {
            Family::Bergman => 1.0 - norm_sq(w),
            Family::Fock => norm_sq(w),
        };
        Ok(self.eval_with_gap(w, gap))
    }
}

// ---------------------------------------------------------------------------
// Toeplitz construction
// ---------------------------------------------------------------------------

/// Toeplitz compression `P_D M_u P_D` for a bounded symbol.
///
/// Radial symbols produce exactly diagonal matrices through one-dimensional
/// radial quadrature (split at declared breakpoints); general symbols use
/// the rule's angular grid, which must resolve all basis frequency
/// differences (`angular >= 2 D + 2`). For the Fock family the radial
/// moment integrals extend beyond the rule's range as needed so that
/// `t^k e^(-alpha t)` is captured for every basis moment.
pub fn toeplitz(
    space: &Space,
    u: &Symbol,
    degree: usize,
    rule: &Rule,
) -> Result<TruncatedOperator> {
    space.validate()?;
    match (space.family, rule) {
        (Family::Bergman, Rule::Ball(r)) => toeplitz_ball(space, u, degree, r),
        (Family::Fock, Rule::Plane(r)) => toeplitz_plane(space, u, degree, r),
        _ => Err(Error::Mismatch(
            "quadrature rule family does not match the space".into(),
        )),
    }
}

fn radial_segments(breaks: &[f64], t_max: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > 0.0 && b < t_max)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut segs = Vec::new();
    let mut lo = 0.0;
    for b in cuts {
        segs.push((lo, b));
        lo = b;
    }
    segs.push((lo, t_max));
    segs
}

fn angular_bins(
    u: &Symbol,
    r: f64,
    angles: &[f64],
    degree: usize,
    pos: &mut [Complex64],
    neg: &mut [Complex64],
) -> Result<()> {
    pos.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
    neg.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
    for &theta in angles {
        let z = [Complex64::from_polar(r, theta)];
        let val = u.eval(&z);
        u.check_bound(val, &format!("z={}", z[0]))?;
        let phase = Complex64::from_polar(1.0, theta);
        let mut acc_p = val;
        let mut acc_n = val;
        for d in 0..=degree {
            pos[d] += acc_p;
            neg[d] += acc_n;
            acc_p *= phase;
            acc_n *= phase.conj();
        }
    }
    let minv = 1.0 / angles.len() as f64;
    pos.iter_mut().for_each(|c| *c *= minv);
    neg.iter_mut().for_each(|c| *c *= minv);
    Ok(())
}

fn toeplitz_ball(
    space: &Space,
    u: &Symbol,
    degree: usize,
    rule: &BallRule,
) -> Result<TruncatedOperator> {
    if rule.n != space.n {
        return Err(Error::Mismatch("rule dimension != space dimension".into()));
    }
    let basis = monomial_basis(space, degree);
    let dim = basis.dim();
    let label = format!("T[{}]", u.label);
    let spec = rule.spec();

    if u.is_radial() {
        // n=1: d_k = (k+1) I_k ; n=2: d_gamma = (|gamma|+2) I_{|gamma|+1},
        // with I_m = int_0^{t_max} u(t) t^m dt
        let max_m = degree + space.n;
        let seg_nodes = spec.radial.max(2 * (max_m + 2));
        let mut moments = vec![0.0; max_m + 1];
        for (lo, hi) in radial_segments(&u.breakpoints, rule.t_max()) {
            for (t, w) in gauss_legendre_on(lo, hi, seg_nodes) {
                let v = u.eval_radial(t).unwrap();
                u.check_bound(Complex64::new(v, 0.0), &format!("t={t}"))?;
                let mut pw = 1.0;
                for m in moments.iter_mut() {
                    *m += w * v * pw;
                    pw *= t;
                }
            }
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (j, &(a, b)) in basis.indices.iter().enumerate() {
            let d = a + b;
            let val = if space.n == 1 {
                (d as f64 + 1.0) * moments[d]
            } else {
                (d as f64 + 2.0) * moments[d + 1]
            };
            m[(j, j)] = Complex64::new(val, 0.0);
        }
        return TruncatedOperator::from_matrix(space, degree, m, &label);
    }

    if space.n != 1 {
        return Err(Error::Unsupported(
            "general (non-radial) symbols are implemented for n = 1 only".into(),
        ));
    }
    if spec.angular < 2 * degree + 2 {
        return Err(Error::InvalidParameter(format!(
            "angular resolution {} cannot resolve frequency differences up to {}",
            spec.angular,
            2 * degree
        )));
    }
    if !rule.points_representable() {
        return Err(Error::Unsupported(
            "rule reaches too close to the boundary for symbol evaluation".into(),
        ));
    }
    let angles: Vec<f64> = (0..spec.angular)
        .map(|l| 2.0 * std::f64::consts::PI * l as f64 / spec.angular as f64)
        .collect();
    let mut entries = DMatrix::zeros(dim, dim);
    let mut pos = vec![Complex64::new(0.0, 0.0); degree + 1];
    let mut neg = vec![Complex64::new(0.0, 0.0); degree + 1];
    let mut r_pows = vec![0.0; 2 * degree + 1];
    for (t, _s, w_t) in rule.radial_view() {
        let r = t.sqrt();
        angular_bins(u, r, &angles, degree, &mut pos, &mut neg)?;
        let mut pw = 1.0;
        for p in r_pows.iter_mut() {
            *p = pw;
            pw *= r;
        }
        for k in 0..dim {
            for j in 0..dim {
                let d = j as isize - k as isize;
                let bin = if d >= 0 {
                    pos[d as usize]
                } else {
                    neg[(-d) as usize]
                };
                let c = basis.consts[j] * basis.consts[k];
                entries[(k, j)] += bin * (w_t * c * r_pows[j + k]);
            }
        }
    }
    TruncatedOperator::from_matrix(space, degree, entries, &label)
}

fn toeplitz_plane(
    space: &Space,
    u: &Symbol,
    degree: usize,
    rule: &PlaneRule,
) -> Result<TruncatedOperator> {
    if rule.n != space.n {
        return Err(Error::Mismatch("rule dimension != space dimension".into()));
    }
    let basis = monomial_basis(space, degree);
    let dim = basis.dim();
    let label = format!("T[{}]", u.label);
    let alpha = space.alpha;

    // radial extent covering every basis moment t^m e^{-alpha t}
    let max_m = 2 * degree + 2;
    let t_mom = ((max_m as f64) + 12.0 * (max_m as f64).sqrt() + 30.0) / alpha;
    let t_hi = t_mom.max(rule.range() * rule.range());
    let radial_nodes = rule.spec().radial.max(max_m + 60);

    if u.is_radial() {
        // scaled moments int u(t) B_m(t) dt with B_m = (alpha t)^m e^{-alpha t} / m!,
        // so that d entries are alpha * moment (all magnitudes bounded)
        let top = degree + space.n;
        let mut moments = vec![0.0; top + 1];
        for (lo, hi) in radial_segments(&u.breakpoints, t_hi) {
            for (t, w) in gauss_legendre_on(lo, hi, radial_nodes) {
                let v = u.eval_radial(t).unwrap();
                u.check_bound(Complex64::new(v, 0.0), &format!("t={t}"))?;
                let mut bm = (-alpha * t).exp();
                for (m, slot) in moments.iter_mut().enumerate() {
                    *slot += w * v * bm;
                    if m < top {
                        bm *= alpha * t / (m as f64 + 1.0);
                    }
                }
            }
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (j, &(a, b)) in basis.indices.iter().enumerate() {
            let d = a + b;
            // alpha^{d+n+1}/(d+n-1 ..)! collapses to alpha * int u B_m
            let val = if space.n == 1 {
                alpha * moments[d]
            } else {
                alpha * moments[d + 1]
            };
            m[(j, j)] = Complex64::new(val, 0.0);
        }
        return TruncatedOperator::from_matrix(space, degree, m, &label);
    }

    if space.n != 1 {
        return Err(Error::Unsupported(
            "general (non-radial) symbols are implemented for n = 1 only".into(),
        ));
    }
    let m_ang = rule.spec().angular;
    if m_ang < 2 * degree + 2 {
        return Err(Error::InvalidParameter(format!(
            "angular resolution {m_ang} cannot resolve frequency differences up to {}",
            2 * degree
        )));
    }
    let angles: Vec<f64> = (0..m_ang)
        .map(|l| 2.0 * std::f64::consts::PI * l as f64 / m_ang as f64)
        .collect();
    let mut entries = DMatrix::zeros(dim, dim);
    let mut pos = vec![Complex64::new(0.0, 0.0); degree + 1];
    let mut neg = vec![Complex64::new(0.0, 0.0); degree + 1];
    // normalized radial factors b_k = sqrt((alpha t)^k / k!) e^{-alpha t / 2}
    let mut b = vec![0.0; degree + 1];
    for (t, w_t) in gauss_legendre_on(0.0, t_hi, radial_nodes) {
        let r = t.sqrt();
        angular_bins(u, r, &angles, degree, &mut pos, &mut neg)?;
        b[0] = (-0.5 * alpha * t).exp();
        for k in 1..=degree {
            b[k] = b[k - 1] * (alpha * t / k as f64).sqrt();
        }
        for k in 0..dim {
            for j in 0..dim {
                let d = j as isize - k as isize;
                let bin = if d >= 0 {
                    pos[d as usize]
                } else {
                    neg[(-d) as usize]
                };
                entries[(k, j)] += bin * (alpha * w_t * b[j] * b[k]);
            }
        }
    }
    TruncatedOperator::from_matrix(space, degree, entries, &label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bergman_rule() -> Rule {
        Rule::Ball(BallRule::with_boundary_gap(1, 160, 128, 1e-13).unwrap())
    }

    fn fock_rule() -> Rule {
        Rule::Plane(PlaneRule::build(1, 1.0, 8.0, 120, 128).unwrap())
    }

    #[test]
    fn basis_normalization_examples() {
        let s = Space::bergman(1, 2.0).unwrap();
        let b = monomial_basis(&s, 5);
        assert_abs_diff_eq!(b.consts[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.consts[3], 2.0, epsilon = 1e-14); // sqrt(4)
        let f = Space::fock(1, 2.0, 1.0).unwrap();
        let bf = monomial_basis(&f, 5);
        assert_abs_diff_eq!(bf.consts[4], 1.0 / 24.0_f64.sqrt(), epsilon = 1e-15);
        // n = 2 Bergman: ||z1 z2||^2 = 2 a! b! / (a+b+2)! = 2/24 = 1/12
        let s2 = Space::bergman(2, 2.0).unwrap();
        let b2 = monomial_basis(&s2, 3);
        let idx = b2.indices.iter().position(|&g| g == (1, 1)).unwrap();
        assert_abs_diff_eq!(b2.consts[idx], 12.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn basis_dims() {
        let s2 = Space::bergman(2, 2.0).unwrap();
        assert_eq!(monomial_basis(&s2, 20).dim(), 231);
        let s1 = Space::bergman(1, 2.0).unwrap();
        assert_eq!(monomial_basis(&s1, 60).dim(), 61);
    }

    #[test]
    fn kernel_coefficient_values() {
        let s = Space::bergman(1, 2.0).unwrap();
        let cz = kernel_coefficients(&s, &[c(0.0, 0.0)], 10).unwrap();
        assert_abs_diff_eq!(cz[0].re, 1.0, epsilon = 1e-15);
        assert!(cz[1..].iter().all(|v| v.norm() == 0.0));
        let cz = kernel_coefficients(&s, &[c(0.5, 0.0)], 10).unwrap();
        assert_abs_diff_eq!(cz[1].re, 0.75 * 2.0_f64.sqrt() * 0.5, epsilon = 1e-14);
        // 2-norm approaches 1
        let cz = kernel_coefficients(&s, &[c(0.5, 0.0)], 60).unwrap();
        let nrm: f64 = cz.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert_abs_diff_eq!(nrm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn coefficient_tail_matches_norm_deficit() {
        for s in [
            Space::bergman(1, 2.0).unwrap(),
            Space::fock(1, 2.0, 1.0).unwrap(),
            Space::bergman(2, 2.0).unwrap(),
        ] {
            let z: Vec<Complex64> = if s.n == 1 {
                vec![c(0.7, 0.2)]
            } else {
                vec![c(0.5, 0.1), c(-0.3, 0.2)]
            };
            let d = 25;
            let cz = kernel_coefficients(&s, &z, d).unwrap();
            let captured: f64 = cz.iter().map(|v| v.norm_sqr()).sum();
            let tail = coefficient_tail_sq(&s, &z, d);
            assert_abs_diff_eq!(captured + tail, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn toeplitz_constant_is_identity() {
        let s = Space::bergman(1, 2.0).unwrap();
        let t = toeplitz(&s, &Symbol::constant(1.0), 60, &bergman_rule()).unwrap();
        for k in 0..=60 {
            for j in 0..=60 {
                let expect = if k == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(t.matrix[(k, j)].re, expect, epsilon = 1e-10);
                assert_abs_diff_eq!(t.matrix[(k, j)].im, 0.0, epsilon = 1e-12);
            }
        }
        let f = Space::fock(1, 2.0, 1.0).unwrap();
        let t = toeplitz(&f, &Symbol::constant(1.0), 60, &fock_rule()).unwrap();
        for k in 0..=60 {
            assert_abs_diff_eq!(t.matrix[(k, k)].re, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn toeplitz_abs_sq_diagonals() {
        let s = Space::bergman(1, 2.0).unwrap();
        let t = toeplitz(&s, &Symbol::abs_sq(1.0), 40, &bergman_rule()).unwrap();
        for k in 0..=40 {
            let expect = (k as f64 + 1.0) / (k as f64 + 2.0);
            assert_abs_diff_eq!(t.matrix[(k, k)].re, expect, epsilon = 1e-10);
        }
        let f = Space::fock(1, 2.0, 1.0).unwrap();
        let t = toeplitz(&f, &Symbol::abs_sq(1e9), 40, &fock_rule()).unwrap();
        for k in 0..=40 {
            assert_abs_diff_eq!(t.matrix[(k, k)].re, k as f64 + 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn toeplitz_coordinate_symbol_subdiagonal() {
        // <z e_j, e_{j+1}> = sqrt((j+1)/(j+2)) on the Bergman space
        let s = Space::bergman(1, 2.0).unwrap();
        let t = toeplitz(&s, &Symbol::coordinate(1.0), 20, &bergman_rule()).unwrap();
        for j in 0..20 {
            let expect = ((j as f64 + 1.0) / (j as f64 + 2.0)).sqrt();
            assert_abs_diff_eq!(t.matrix[(j + 1, j)].re, expect, epsilon = 1e-10);
            // everything else in that column vanishes
            for k in 0..=20 {
                if k != j + 1 {
                    assert!(t.matrix[(k, j)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn toeplitz_step_diagonal_closed_form() {
        // u = 1_{t >= 1/2}: d_k = 1 - (1/2)^{k+1} up to the support cutoff
        let s = Space::bergman(1, 2.0).unwrap();
        let t = toeplitz(&s, &Symbol::radial_step(0.5), 30, &bergman_rule()).unwrap();
        for k in 0..=30 {
            let expect = 1.0 - 0.5_f64.powi(k as i32 + 1);
            assert_abs_diff_eq!(t.matrix[(k, k)].re, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn sup_bound_violation_detected() {
        let s = Space::bergman(1, 2.0).unwrap();
        let lying = Symbol::radial("liar", 0.5, |t| t); // claims sup 0.5, reaches ~1
        let r = toeplitz(&s, &lying, 10, &bergman_rule());
        assert!(matches!(r, Err(Error::SupBound { .. })));
    }

    #[test]
    fn identity_correlation_matches_closed_form() {
        let s = Space::bergman(1, 2.0).unwrap();
        let t = TruncatedOperator::identity(&s, 60);
        let z = [c(0.5, 0.2)];
        let w = [c(-0.4, 0.3)];
        let got = correlation(&t, &z, &w).unwrap().value;
        let expect = crate::kernels::correlation_closed_form(&s, &z, &w).unwrap();
        assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-8);
        assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-8);
    }

    #[test]
    fn berezin_values() {
        let s = Space::bergman(1, 2.0).unwrap();
        let id = TruncatedOperator::identity(&s, 60);
        for q in [0.0, 0.5, 0.95] {
            let v = berezin(&id, &[c(q, 0.0)]).unwrap().value;
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        }
        let t = toeplitz(&s, &Symbol::abs_sq(1.0), 60, &bergman_rule()).unwrap();
        let v = berezin(&t, &[c(0.0, 0.0)]).unwrap().value;
        assert_abs_diff_eq!(v.re, 0.5, epsilon = 1e-10);

        let f = Space::fock(1, 2.0, 1.0).unwrap();
        let tf = toeplitz(&f, &Symbol::abs_sq(1e9), 60, &fock_rule()).unwrap();
        let v = berezin(&tf, &[c(0.0, 0.0)]).unwrap().value;
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn algebra_ops() {
        let s = Space::bergman(1, 2.0).unwrap();
        let t = toeplitz(&s, &Symbol::abs_sq(1.0), 30, &bergman_rule()).unwrap();
        let id = TruncatedOperator::identity(&s, 30);
        // adjoint is an involution
        let add = t.adjoint().adjoint();
        assert!((&add.matrix - &t.matrix).iter().all(|v| v.norm() == 0.0));
        // identity composes trivially
        let comp = id.compose(&t).unwrap();
        assert!((&comp.matrix - &t.matrix).iter().all(|v| v.norm() < 1e-15));
        // squared diagonal
        let sq = t.compose(&t).unwrap();
        assert_abs_diff_eq!(sq.matrix[(0, 0)].re, 0.25, epsilon = 1e-9);
        // degree mismatch rejected
        let small = TruncatedOperator::identity(&s, 10);
        assert!(t.compose(&small).is_err());
    }

    #[test]
    fn spectral_values() {
        let s = Space::bergman(1, 2.0).unwrap();
        let id = TruncatedOperator::identity(&s, 20);
        let sv = id.singular_values().unwrap();
        assert!(sv.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let t = toeplitz(&s, &Symbol::abs_sq(1.0), 30, &bergman_rule()).unwrap();
        assert_abs_diff_eq!(t.operator_norm().unwrap(), 31.0 / 32.0, epsilon = 1e-9);
        let z = TruncatedOperator::zero(&s, 20);
        assert_abs_diff_eq!(z.operator_norm().unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn correlation_series_matches_direct() {
        let s = Space::bergman(1, 2.0).unwrap();
        let t = toeplitz(&s, &Symbol::coordinate(1.0), 30, &bergman_rule()).unwrap();
        let z = [c(0.3, -0.2)];
        let series = correlation_series(&t, &z).unwrap();
        for k in 0..10 {
            let w = [c(-0.5 + 0.1 * k as f64, 0.2)];
            let a = series.eval(&w).unwrap();
            let b = correlation(&t, &z, &w).unwrap().value;
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn operator_record_roundtrip() {
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        let t = toeplitz(&s, &Symbol::gaussian_decay(), 15, &fock_rule()).unwrap();
        let rec = OperatorRecord::from(&t);
        let back = TruncatedOperator::try_from(&rec).unwrap();
        assert!((&back.matrix - &t.matrix).iter().all(|v| v.norm() == 0.0));
    }
}
