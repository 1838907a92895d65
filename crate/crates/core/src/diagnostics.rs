//! Desk-scale executables of the compactness theorems: essential-norm
//! proxies, boundary Berezin profiles, the essential-norm right-hand-side
//! quantity, localized decomposition defects, and the equivalence probe.
//!
//! Everything here is stated at the compression level `P_D T P_D`. Shells
//! are admitted only while the kernel-coefficient tail of the compression
//! stays small (`tau^2 <= 2%`), which caps Bergman shells at `|z| = 0.95`
//! for `D = 60`; truncation bars are reported alongside every value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covering::{build_covering, Covering, Region};
use crate::geometry;
use crate::kernels::kernel_norm_from_gap;
use crate::localization::{
    bergman_localization_tail, certify, fock_localization_tail, LocalizationCertificate,
    LocalizationParams, Thresholds,
};
use crate::operators::{
    berezin, coefficient_tail_sq_from_abs, correlation, monomial_basis, MonomialBasis,
    TruncatedOperator,
};
use crate::quadrature::{BallRule, PlaneRule, Rule};
use crate::space::{norm_sq, Family, Space};
use crate::symbols;
use crate::{Error, Result};

/// Compression-fidelity cap: shells whose kernel-coefficient tail exceeds
/// this squared mass are refused.
pub const SHELL_TAIL_CAP_SQ: f64 = 0.02;

/// `max(||T Q_m||, ||Q_m T||)` where `Q_m` projects onto basis elements of
/// total degree at least `m`; vanishes with `m` exactly for compact-type
/// compressions and stays at `||T||` for identity-like ones.
pub fn essential_norm_proxy(t: &TruncatedOperator, m: usize) -> Result<f64> {
    if m > t.degree {
        return Err(Error::InvalidParameter(format!(
            "proxy degree m = {m} exceeds the truncation degree {}",
            t.degree
        )));
    }
    let basis = monomial_basis(&t.space, t.degree);
    let mut right = t.matrix.clone(); // T Q_m: zero columns of degree < m
    let mut left = t.matrix.clone(); // Q_m T: zero rows of degree < m
    for j in 0..basis.dim() {
        if basis.index_degree(j) < m {
            for k in 0..basis.dim() {
                right[(k, j)] = Complex64::new(0.0, 0.0);
                left[(j, k)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let a = TruncatedOperator::from_matrix(&t.space, t.degree, right, "proxy-right")?;
    let b = TruncatedOperator::from_matrix(&t.space, t.degree, left, "proxy-left")?;
    Ok(a.operator_norm()?.max(b.operator_norm()?))
}

/// A scalar together with its truncation error bar.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ValueWithBar {
    pub value: f64,
    pub bar: f64,
}

/// One shell of a boundary profile.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub shell: f64,
    pub value: f64,
    pub bar: f64,
}

/// Shells the compression can actually represent; the rest are refused.
pub fn admissible_shells(space: &Space, degree: usize, shells: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut ok = Vec::new();
    let mut refused = Vec::new();
    for &s in shells {
        let q = match space.family {
            Family::Bergman => s * s,
            Family::Fock => s * s,
        };
        if coefficient_tail_sq_from_abs(space, q, degree) <= SHELL_TAIL_CAP_SQ {
            ok.push(s);
        } else {
            refused.push(s);
        }
    }
    (ok, refused)
}

fn shell_points(shell: f64, angles: usize, n: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(angles);
    for j in 0..angles {
        let th = 2.0 * std::f64::consts::PI * j as f64 / angles as f64;
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        z[0] = Complex64::from_polar(shell, th);
        out.push(z);
    }
    out
}

/// Sample points of the metric disk `D(z, r)`: the center plus rings at
/// fractional radii.
fn disk_samples(space: &Space, z: &[Complex64], r: f64, angles: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut out = vec![z.to_vec()];
    for &frac in &[0.35, 0.7, 1.0] {
        for j in 0..angles {
            let th = 2.0 * std::f64::consts::PI * j as f64 / angles as f64;
            match space.family {
                Family::Bergman => {
                    let rho = (r * frac).tanh();
                    let mut u = vec![Complex64::new(0.0, 0.0); space.n];
                    u[0] = Complex64::from_polar(rho, th);
                    out.push(geometry::mobius(z, &u)?);
                }
                Family::Fock => {
                    let mut w = z.to_vec();
                    w[0] += Complex64::from_polar(r * frac, th);
                    out.push(w);
                }
            }
        }
    }
    Ok(out)
}

/// The essential-norm bound right-hand side: the sup over outer-shell `z`
/// and `w` in the metric disk `D(z, r)` of `|<T k_z^(p), k_w^(p')>|`
/// (p-normalized kernels on the Bergman side, plain normalized kernels on
/// the Fock side).
pub fn theorem_rhs(
    t: &TruncatedOperator,
    r: f64,
    shells: &[f64],
    angles: usize,
    p: f64,
) -> Result<ValueWithBar> {
    let (ok_shells, _) = admissible_shells(&t.space, t.degree, shells);
    let outer = ok_shells
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !outer.is_finite() {
        return Err(Error::InvalidParameter(
            "no admissible shell for this degree".into(),
        ));
    }
    let mut best = 0.0_f64;
    let mut bar = 0.0_f64;
    for z in shell_points(outer, angles, t.space.n) {
        for w in disk_samples(&t.space, &z, r, angles)? {
            let v = p_correlation(t, &z, &w, p)?;
            if v.value > best {
                best = v.value;
            }
            bar = bar.max(v.bar);
        }
    }
    Ok(ValueWithBar { value: best, bar })
}

/// `|<T k_z^(p), k_w^(p')>|` with its truncation bar. On the Fock side the
/// essential-norm bound is stated for plain normalized kernels, so `p`
/// weighting applies only to Bergman operators.
fn p_correlation(
    t: &TruncatedOperator,
    z: &[Complex64],
    w: &[Complex64],
    p: f64,
) -> Result<ValueWithBar> {
    let c = correlation(t, z, w)?;
    // model normalization: divide by the compressed kernel norms so the
    // identity compression scores exactly one on the diagonal
    let nz_sq = 1.0 - coefficient_tail_sq_from_abs(&t.space, norm_sq(z), t.degree);
    let nw_sq = 1.0 - coefficient_tail_sq_from_abs(&t.space, norm_sq(w), t.degree);
    let denom = (nz_sq * nw_sq).sqrt().max(1e-280);
    // k^(p) = k ||K||^(2/p - 1); the pair of conjugate exponents puts
    // reciprocal powers on z and w
    let (fz, fw) = match t.space.family {
        Family::Bergman => {
            let e = 2.0 / p - 1.0;
            let nz = kernel_norm_from_gap(&t.space, 1.0 - norm_sq(z));
            let nw = kernel_norm_from_gap(&t.space, 1.0 - norm_sq(w));
            (nz.powf(e), nw.powf(-e))
        }
        Family::Fock => (1.0, 1.0),
    };
    Ok(ValueWithBar {
        value: c.value.norm() / denom * fz * fw,
        bar: c.truncation_bar / denom * fz * fw,
    })
}

/// Per-shell sup of `|<T k_z, k_z>|` (model-normalized Berezin transform)
/// over angular samples.
pub fn berezin_boundary_profile(
    t: &TruncatedOperator,
    shells: &[f64],
    angles: usize,
) -> Result<Vec<ProfilePoint>> {
    let (ok_shells, _) = admissible_shells(&t.space, t.degree, shells);
    let mut out = Vec::with_capacity(ok_shells.len());
    for shell in ok_shells {
        let mut sup = 0.0_f64;
        let mut bar = 0.0_f64;
        for z in shell_points(shell, angles, t.space.n) {
            let b = berezin(t, &z)?;
            sup = sup.max(b.value.norm());
            bar = bar.max(b.truncation_bar);
        }
        out.push(ProfilePoint {
            shell,
            value: sup,
            bar,
        });
    }
    Ok(out)
}

/// Report of the localized decomposition defect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// Schur bound on the defect operator norm.
    pub schur_bound: f64,
    pub covering_r: f64,
    pub covering_cells: usize,
    /// `||S f||_p / ||f||_p` for the test battery.
    pub test_ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Schur-test bound plus a direct test-function evaluation of the defect
/// `S = T P - sum_j M_(1_Fj) T P M_(1_Gj)` for the covering's radius.
///
/// The Schur bound applies the classical test with the conjugate-exponent
/// kernel weights, which reduces exactly to the weak-localization tails of
/// `T` and `T*` at radius `covering.r`; the battery evaluates `||S f||_p`
/// by quadrature over the covered region.
pub fn decomposition_error(
    t: &TruncatedOperator,
    covering: &Covering,
    params: &LocalizationParams,
    z_grid: &[Vec<Complex64>],
    rule: &Rule,
) -> Result<DecompositionReport> {
    let adj = t.adjoint();
    let r = covering.r;
    let mut schur: f64 = 0.0;
    match (t.space.family, rule) {
        (Family::Bergman, Rule::Ball(ball)) => {
            let a_t = params.exponent_t();
            let a_ts = params.exponent_t_star();
            for z in z_grid {
                schur = schur.max(bergman_localization_tail(&adj, z, r, a_ts, ball)?);
                schur = schur.max(bergman_localization_tail(t, z, r, a_t, ball)?);
            }
        }
        (Family::Fock, Rule::Plane(plane)) => {
            for z in z_grid {
                schur = schur.max(fock_localization_tail(&adj, z, r, plane)?);
                schur = schur.max(fock_localization_tail(t, z, r, plane)?);
            }
        }
        _ => {
            return Err(Error::Mismatch(
                "rule family does not match the operator's space".into(),
            ))
        }
    }
    let basis = monomial_basis(&t.space, t.degree);
    let battery = defect_battery(&t.space, &basis);
    let mut ratios = Vec::with_capacity(battery.len());
    for f in &battery {
        ratios.push(defect_ratio(t, covering, &basis, f, params.p, rule)?);
    }
    let max_ratio = ratios.iter().copied().fold(0.0_f64, f64::max);
    Ok(DecompositionReport {
        schur_bound: schur,
        covering_r: r,
        covering_cells: covering.cells.len(),
        test_ratios: ratios,
        max_ratio,
    })
}

/// Five analytic test functions as basis-coefficient vectors.
fn defect_battery(space: &Space, basis: &MonomialBasis) -> Vec<Vec<Complex64>> {
    let dim = basis.dim();
    let mut out = Vec::new();
    let unit = |j: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[j] = Complex64::new(1.0, 0.0);
        v
    };
    out.push(unit(0));
    out.push(unit(dim / 3));
    let mix: Vec<Complex64> = (0..dim)
        .map(|j| Complex64::new(1.0 / ((j + 1) as f64), 0.0))
        .collect();
    out.push(normalize(mix));
    let kernel_like = |z: Vec<Complex64>| {
        crate::operators::kernel_coefficients(space, &z, basis.degree).unwrap()
    };
    match space.family {
        Family::Bergman => {
            out.push(kernel_like(vec![Complex64::new(0.45, 0.0); space.n]));
            out.push(kernel_like(vec![
                Complex64::from_polar(0.7, 1.0);
                space.n
            ]));
        }
        Family::Fock => {
            out.push(kernel_like(vec![Complex64::new(1.0, 0.0); space.n]));
            out.push(kernel_like(vec![
                Complex64::from_polar(2.5, 1.0);
                space.n
            ]));
        }
    }
    out
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in v.iter_mut() {
        *c /= n;
    }
    v
}

/// `||S f||_p / ||f||_p` by quadrature over the covered region.
fn defect_ratio(
    t: &TruncatedOperator,
    covering: &Covering,
    basis: &MonomialBasis,
    f: &[Complex64],
    p: f64,
    rule: &Rule,
) -> Result<f64> {
    // P(1_{G_j} f) coefficients by one sweep over the nodes, then T applied
    // per cell; S f is evaluated against each node's unique F-cell
    let dim = basis.dim();
    let cells = covering.cells.len();
    let tf = t.apply(f)?;
    match (t.space.family, rule) {
        (Family::Bergman, Rule::Ball(ball)) => {
            let mut g = vec![vec![Complex64::new(0.0, 0.0); dim]; cells];
            // first sweep: accumulate <1_{G_j} f, e_k> over Lebesgue nodes
            let nodes = collect_ball_nodes(ball);
            for (z, w_leb) in &nodes {
                let fz = basis.eval_series(f, z);
                for j in 0..cells {
                    if covering.enlarged_contains(j, z) {
                        for k in 0..dim {
                            g[j][k] += fz * basis.eval(k, z).conj() * *w_leb;
                        }
                    }
                }
            }
            let tg: Vec<Vec<Complex64>> =
                g.iter().map(|gj| t.apply(gj)).collect::<Result<_>>()?;
            let mut num = 0.0_f64;
            let mut den = 0.0_f64;
            for (z, w_leb) in &nodes {
                let fz = basis.eval_series(f, z);
                den += fz.norm().powf(p) * w_leb;
                if let Some(j) = covering.locate(z) {
                    let s_val = basis.eval_series(&tf, z) - basis.eval_series(&tg[j], z);
                    num += s_val.norm().powf(p) * w_leb;
                }
            }
            Ok((num / den).powf(1.0 / p))
        }
        (Family::Fock, Rule::Plane(plane)) => {
            let alpha = t.space.alpha;
            let mut g = vec![vec![Complex64::new(0.0, 0.0); dim]; cells];
            let nodes = collect_plane_nodes(plane);
            for (z, w_leb, gauss) in &nodes {
                let fz = basis.eval_series(f, z);
                for j in 0..cells {
                    if covering.enlarged_contains(j, z) {
                        for k in 0..dim {
                            g[j][k] += fz * basis.eval(k, z).conj() * (w_leb * gauss);
                        }
                    }
                }
            }
            let tg: Vec<Vec<Complex64>> =
                g.iter().map(|gj| t.apply(gj)).collect::<Result<_>>()?;
            let mut num = 0.0_f64;
            let mut den = 0.0_f64;
            for (z, w_leb, _) in &nodes {
                let weight = (-0.5 * p * alpha * norm_sq(z)).exp() * w_leb;
                let fz = basis.eval_series(f, z);
                den += fz.norm().powf(p) * weight;
                if let Some(j) = covering.locate(z) {
                    let s_val = basis.eval_series(&tf, z) - basis.eval_series(&tg[j], z);
                    num += s_val.norm().powf(p) * weight;
                }
            }
            Ok((num / den).powf(1.0 / p))
        }
        _ => Err(Error::Mismatch(
            "rule family does not match the operator's space".into(),
        )),
    }
}

fn collect_ball_nodes(rule: &BallRule) -> Vec<(Vec<Complex64>, f64)> {
    let mut out = Vec::new();
    let angular = rule.spec().angular;
    for (t, _s, w_t) in rule.radial_view() {
        let r = t.sqrt();
        let w = w_t / angular as f64; // normalized-volume weight
        for j in 0..angular {
            let th = 2.0 * std::f64::consts::PI * j as f64 / angular as f64;
            out.push((vec![Complex64::from_polar(r, th)], w));
        }
    }
    out
}

fn collect_plane_nodes(rule: &PlaneRule) -> Vec<(Vec<Complex64>, f64, f64)> {
    let mut out = Vec::new();
    let spec = rule.spec();
    let angular = spec.angular;
    for (t, w_t) in plane_radial_view(rule) {
        let r = t.sqrt();
        let w = std::f64::consts::PI * w_t / angular as f64;
        for j in 0..angular {
            let th = 2.0 * std::f64::consts::PI * j as f64 / angular as f64;
            let z = vec![Complex64::from_polar(r, th)];
            let gauss = (spec.alpha / std::f64::consts::PI) * (-spec.alpha * t).exp();
            out.push((z, w, gauss));
        }
    }
    out
}

fn plane_radial_view(rule: &PlaneRule) -> Vec<(f64, f64)> {
    crate::quadrature::gauss_legendre_on(0.0, rule.range() * rule.range(), rule.spec().radial)
}

/// The three quantities of the equivalence check: disk-sup correlation
/// profiles for every listed radius, the same at one fixed radius, and the
/// Berezin profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub per_r: Vec<(f64, Vec<ProfilePoint>)>,
    pub fixed_r: f64,
    pub fixed_profile: Vec<ProfilePoint>,
    pub berezin_profile: Vec<ProfilePoint>,
}

impl EquivalenceReport {
    /// Outermost-shell values of the three quantities: max over the radius
    /// family of (a), the fixed-radius (b), and the Berezin (c).
    pub fn boundary_triple(&self) -> (f64, f64, f64) {
        let last = |prof: &Vec<ProfilePoint>| prof.last().map(|p| p.value).unwrap_or(0.0);
        let a = self
            .per_r
            .iter()
            .map(|(_, prof)| last(prof))
            .fold(0.0_f64, f64::max);
        (a, last(&self.fixed_profile), last(&self.berezin_profile))
    }
}

/// Computes sup-correlation boundary profiles for each radius, one fixed
/// radius, and the Berezin profile side by side.
pub fn equivalence_probe(
    t: &TruncatedOperator,
    r_list: &[f64],
    fixed_r: f64,
    shells: &[f64],
    angles: usize,
    p: f64,
) -> Result<EquivalenceReport> {
    let (ok_shells, _) = admissible_shells(&t.space, t.degree, shells);
    let profile_for = |r: f64| -> Result<Vec<ProfilePoint>> {
        let mut prof = Vec::with_capacity(ok_shells.len());
        for &shell in &ok_shells {
            let mut sup = 0.0_f64;
            let mut bar = 0.0_f64;
            for z in shell_points(shell, angles, t.space.n) {
                for w in disk_samples(&t.space, &z, r, angles)? {
                    let v = p_correlation(t, &z, &w, p)?;
                    sup = sup.max(v.value);
                    bar = bar.max(v.bar);
                }
            }
            prof.push(ProfilePoint {
                shell,
                value: sup,
                bar,
            });
        }
        Ok(prof)
    };
    let per_r = r_list
        .iter()
        .map(|&r| Ok((r, profile_for(r)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport {
        per_r,
        fixed_r,
        fixed_profile: profile_for(fixed_r)?,
        berezin_profile: berezin_boundary_profile(t, &ok_shells, angles)?,
    })
}

/// Verdict of a compactness report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CompactConsistent,
    NonCompactConsistent,
    Inconclusive,
}

/// Thresholds of the verdict rule.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CompactnessThresholds {
    /// Berezin boundary sup below which the transform counts as vanishing.
    pub tau_berezin: f64,
    /// Essential-norm proxy below which the operator counts as compact.
    pub tau_ess: f64,
    /// Proxy above which the operator counts as non-compact.
    pub tau_noncompact: f64,
}

impl Default for CompactnessThresholds {
    fn default() -> Self {
        CompactnessThresholds {
            tau_berezin: 0.05,
            tau_ess: 0.1,
            tau_noncompact: 0.5,
        }
    }
}

/// Full configuration of a compactness report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactnessConfig {
    pub shells: Vec<f64>,
    pub angles: usize,
    /// Cut degree of the proxy projection; defaults to `2D/3`.
    pub proxy_cut: Option<usize>,
    pub theorem_r: f64,
    pub covering_r: f64,
    pub region_radius: f64,
    pub r_list: Vec<f64>,
    pub p: f64,
    pub delta: f64,
    pub thresholds: Thresholds,
    pub compact_thresholds: CompactnessThresholds,
}

impl CompactnessConfig {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Bergman => CompactnessConfig {
                shells: vec![0.6, 0.8, 0.9, 0.95],
                angles: 8,
                proxy_cut: None,
                theorem_r: 1.0,
                covering_r: 2.0,
                region_radius: 5.0,
                r_list: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                p: 2.0,
                delta: 1.0,
                thresholds: Thresholds::default(),
                compact_thresholds: CompactnessThresholds::default(),
            },
            Family::Fock => CompactnessConfig {
                shells: vec![1.0, 2.0, 3.0, 4.0],
                angles: 8,
                proxy_cut: None,
                theorem_r: 1.0,
                covering_r: 2.0,
                region_radius: 12.0,
                r_list: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                p: 2.0,
                delta: 1.0,
                thresholds: Thresholds::default(),
                compact_thresholds: CompactnessThresholds::default(),
            },
        }
    }
}

/// All theorem-side quantities for one operator, with the verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactnessReport {
    pub provenance: String,
    pub family: Family,
    pub degree: usize,
    pub berezin_boundary_sup: f64,
    pub berezin_bar: f64,
    pub berezin_profile: Vec<ProfilePoint>,
    pub certificate: LocalizationCertificate,
    pub essnorm_proxy: f64,
    pub proxy_cut: usize,
    pub theorem_rhs: f64,
    pub theorem_rhs_bar: f64,
    pub decomposition: DecompositionReport,
    /// Recorded empirical ratio `proxy / theorem_rhs`; the theorems'
    /// constant `C` is reported, never asserted.
    pub proxy_over_rhs: f64,
    pub refused_shells: Vec<f64>,
    pub verdict: Verdict,
}

/// Assembles certificate, Berezin profile, essential-norm proxy, theorem
/// right-hand side and decomposition defect, then applies the verdict rule:
/// compact-consistent iff the certificate passes, the Berezin boundary sup
/// stays under `tau_berezin` and the proxy under `tau_ess`;
/// non-compact-consistent iff the proxy exceeds `tau_noncompact`.
pub fn compactness_report(
    t: &TruncatedOperator,
    cfg: &CompactnessConfig,
    rule: &Rule,
) -> Result<CompactnessReport> {
    let params = LocalizationParams::new(cfg.p, cfg.delta, t.space.n)?;
    let z_grid = match t.space.family {
        Family::Bergman => crate::localization::default_bergman_grid(),
        Family::Fock => crate::localization::default_fock_grid(),
    };
    let certificate = certify(t, &params, &cfg.r_list, &z_grid, rule, &cfg.thresholds)?;
    let (ok_shells, refused_shells) = admissible_shells(&t.space, t.degree, &cfg.shells);
    if ok_shells.is_empty() {
        return Err(Error::InvalidParameter(
            "every requested shell exceeds the compression's reach; lower the shells \
             or raise the degree"
                .into(),
        ));
    }
    let berezin_profile = berezin_boundary_profile(t, &ok_shells, cfg.angles)?;
    let outer = berezin_profile.last().expect("nonempty profile");
    let proxy_cut = cfg.proxy_cut.unwrap_or(2 * t.degree / 3);
    let essnorm_proxy = essential_norm_proxy(t, proxy_cut)?;
    let rhs = theorem_rhs(t, cfg.theorem_r, &ok_shells, cfg.angles, cfg.p)?;
    let region = Region::MetricBall {
        radius: cfg.region_radius,
    };
    let covering = build_covering(&t.space, cfg.covering_r, region)?;
    let decomposition = decomposition_error(t, &covering, &params, &z_grid, rule)?;
    let ct = &cfg.compact_thresholds;
    let verdict = if certificate.pass
        && outer.value < ct.tau_berezin
        && essnorm_proxy < ct.tau_ess
    {
        Verdict::CompactConsistent
    } else if essnorm_proxy > ct.tau_noncompact {
        Verdict::NonCompactConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(CompactnessReport {
        provenance: t.provenance.clone(),
        family: t.space.family,
        degree: t.degree,
        berezin_boundary_sup: outer.value,
        berezin_bar: outer.bar,
        berezin_profile,
        certificate,
        essnorm_proxy,
        proxy_cut,
        theorem_rhs: rhs.value,
        theorem_rhs_bar: rhs.bar,
        decomposition,
        proxy_over_rhs: essnorm_proxy / rhs.value.max(1e-300),
        refused_shells,
        verdict,
    })
}

/// The built-in battery paired with compactness expectations, ready for
/// report sweeps.
pub struct BatteryOperator {
    pub label: String,
    pub operator: TruncatedOperator,
    pub compact_side: bool,
}

/// Builds Toeplitz compressions for the whole built-in battery of a family.
pub fn battery_operators(
    space: &Space,
    degree: usize,
    rule: &Rule,
) -> Result<Vec<BatteryOperator>> {
    symbols::battery(space.family)
        .into_iter()
        .map(|member| {
            let op = crate::operators::toeplitz(space, &member.symbol, degree, rule)?;
            Ok(BatteryOperator {
                label: member.symbol.label.clone(),
                operator: op,
                compact_side: member.compact_side,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{BallRule, PlaneRule};
    use crate::symbols::Symbol;
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
    fn proxy_values() {
        let s = Space::bergman(1, 2.0).unwrap();
        let id = TruncatedOperator::identity(&s, 60);
        assert_abs_diff_eq!(essential_norm_proxy(&id, 40).unwrap(), 1.0, epsilon = 1e-12);
        let z = TruncatedOperator::zero(&s, 60);
        assert_abs_diff_eq!(essential_norm_proxy(&z, 40).unwrap(), 0.0, epsilon = 1e-15);
        let t = crate::operators::toeplitz(&s, &Symbol::abs_sq(1.0), 60, &bergman_rule()).unwrap();
        assert_abs_diff_eq!(
            essential_norm_proxy(&t, 40).unwrap(),
            61.0 / 62.0,
            epsilon = 1e-9
        );
        assert!(essential_norm_proxy(&t, 61).is_err());
    }

    #[test]
    fn theorem_rhs_identity_is_one() {
        let s = Space::bergman(1, 2.0).unwrap();
        let id = TruncatedOperator::identity(&s, 60);
        let v = theorem_rhs(&id, 1.0, &[0.6, 0.8, 0.9, 0.95], 8, 2.0).unwrap();
        assert_abs_diff_eq!(v.value, 1.0, epsilon = 1e-10);
        let z = TruncatedOperator::zero(&s, 60);
        let v = theorem_rhs(&z, 1.0, &[0.9], 8, 2.0).unwrap();
        assert_abs_diff_eq!(v.value, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn berezin_profile_shapes() {
        let s = Space::bergman(1, 2.0).unwrap();
        let id = TruncatedOperator::identity(&s, 60);
        let prof = berezin_boundary_profile(&id, &[0.0, 0.3, 0.6, 0.9], 8).unwrap();
        for p in &prof {
            assert_abs_diff_eq!(p.value, 1.0, epsilon = 1e-12);
        }
        // 1 - |w|^2 decreases strictly along shells
        let t = crate::operators::toeplitz(&s, &Symbol::one_minus_abs_sq(), 60, &bergman_rule())
            .unwrap();
        let prof = berezin_boundary_profile(&t, &[0.0, 0.3, 0.6, 0.9], 8).unwrap();
        assert_abs_diff_eq!(prof[0].value, 0.5, epsilon = 1e-9);
        for w in prof.windows(2) {
            assert!(w[1].value < w[0].value);
        }
    }

    #[test]
    fn shells_refused_beyond_fidelity() {
        let s = Space::bergman(1, 2.0).unwrap();
        let (ok, refused) = admissible_shells(&s, 60, &[0.9, 0.95, 0.99]);
        assert_eq!(ok, vec![0.9, 0.95]);
        assert_eq!(refused, vec![0.99]);
    }

    #[test]
    fn equivalence_identity_profiles_constant() {
        let s = Space::bergman(1, 2.0).unwrap();
        let id = TruncatedOperator::identity(&s, 60);
        let rep = equivalence_probe(&id, &[0.5, 1.0], 1.0, &[0.6, 0.9, 0.95], 8, 2.0).unwrap();
        let (a, b, cc) = rep.boundary_triple();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(cc, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fock_identity_decomposition_matches_gaussian_tail() {
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        let id = TruncatedOperator::identity(&s, 60);
        let params = LocalizationParams::new(2.0, 1.0, 1).unwrap();
        let grid = crate::localization::default_fock_grid();
        let rule = fock_rule();
        for &r in &[2.0_f64, 3.0] {
            let cov = build_covering(&s, r, Region::MetricBall { radius: 12.0 }).unwrap();
            let rep = decomposition_error(&id, &cov, &params, &grid, &rule).unwrap();
            let expect = 2.0 * std::f64::consts::PI * (-0.5 * r * r).exp();
            assert!(
                (rep.schur_bound - expect).abs() / expect < 0.1,
                "r={r}: {} vs {expect}",
                rep.schur_bound
            );
            assert!(rep.max_ratio <= rep.schur_bound * 1.05 + 1e-12);
        }
    }
}
