//! Batch experiment runner: one subcommand, one validated config, artifacts
//! on disk.
//!
//! Every artifact embeds the config hash and the quadrature resolution;
//! identical configs produce byte-identical outputs. Profile CSVs use the
//! columns `shell_or_r,value,error_bar`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, ValidatedConfig};
use crate::covering::{build_covering, verify_covering};
use crate::diagnostics::compactness_report;
use crate::geometry;
use crate::kernels;
use crate::localization::{certify, fock_rf_tail, rudin_forelli_check, rudin_forelli_tail};
use crate::operators::{berezin, toeplitz, OperatorRecord, TruncatedOperator};
use crate::quadrature::Rule;
use crate::space::{Family, Space};
use crate::{Error, Result};

/// The experiment pipelines exposed by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    KernelIdentities,
    RudinForelli,
    Toeplitz,
    BerezinMap,
    Localize,
    Covering,
    Compactness,
    Spectrum,
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "kernel-identities" => Subcommand::KernelIdentities,
            "rudin-forelli" => Subcommand::RudinForelli,
            "toeplitz" => Subcommand::Toeplitz,
            "berezin-map" => Subcommand::BerezinMap,
            "localize" => Subcommand::Localize,
            "covering" => Subcommand::Covering,
            "compactness" => Subcommand::Compactness,
            "spectrum" => Subcommand::Spectrum,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown subcommand `{other}`"
                )))
            }
        })
    }
}

#[derive(Serialize)]
struct Artifact<T: Serialize> {
    config_hash: String,
    subcommand: &'static str,
    resolution: ResolutionMeta,
    payload: T,
}

#[derive(Serialize)]
struct ResolutionMeta {
    degree: usize,
    radial: usize,
    angular: usize,
    boundary_gap: f64,
    range: f64,
    node_count: usize,
}

fn resolution_meta(cfg: &ExperimentConfig, v: &ValidatedConfig) -> ResolutionMeta {
    let node_count = match &v.rule {
        Rule::Ball(r) => r.node_count(),
        Rule::Plane(r) => r.node_count(),
    };
    ResolutionMeta {
        degree: cfg.degree,
        radial: cfg.quadrature.radial,
        angular: cfg.quadrature.angular,
        boundary_gap: cfg.quadrature.boundary_gap,
        range: cfg.quadrature.range,
        node_count,
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    cfg: &ExperimentConfig,
    v: &ValidatedConfig,
    sub: &'static str,
    payload: T,
) -> Result<()> {
    let artifact = Artifact {
        config_hash: cfg.content_hash(),
        subcommand: sub,
        resolution: resolution_meta(cfg, v),
        payload,
    };
    write_file(dir, name, &serde_json::to_string_pretty(&artifact)?)
}

/// CSV rows with the profile contract `shell_or_r,value,error_bar`.
fn profile_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("shell_or_r,value,error_bar\n");
    for (x, v, b) in rows {
        let _ = writeln!(out, "{x},{v},{b}");
    }
    out
}

/// Runs a subcommand and writes its artifacts into `out_dir`.
pub fn run(sub: Subcommand, cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let v = cfg.validate()?;
    write_file(
        out_dir,
        "config.echo.json",
        &serde_json::to_string_pretty(cfg)?,
    )?;
    match sub {
        Subcommand::KernelIdentities => kernel_identities(cfg, &v, out_dir),
        Subcommand::RudinForelli => rudin_forelli(cfg, &v, out_dir),
        Subcommand::Toeplitz => toeplitz_cmd(cfg, &v, out_dir),
        Subcommand::BerezinMap => berezin_map(cfg, &v, out_dir),
        Subcommand::Localize => localize(cfg, &v, out_dir),
        Subcommand::Covering => covering_cmd(cfg, &v, out_dir),
        Subcommand::Compactness => compactness(cfg, &v, out_dir),
        Subcommand::Spectrum => spectrum(cfg, &v, out_dir),
    }
}

fn random_ball_point(rng: &mut ChaCha8Rng, n: usize, max_abs: f64) -> Vec<Complex64> {
    loop {
        let z: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    max_abs * (2.0 * rng.gen::<f64>() - 1.0),
                    max_abs * (2.0 * rng.gen::<f64>() - 1.0),
                )
            })
            .collect();
        if crate::space::norm_sq(&z) < max_abs * max_abs {
            return z;
        }
    }
}

fn random_plane_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            Complex64::new(
                scale * (2.0 * rng.gen::<f64>() - 1.0),
                scale * (2.0 * rng.gen::<f64>() - 1.0),
            )
        })
        .collect()
}

/// The geometry/kernels invariant suite on seeded random samples.
pub fn kernel_identity_checks(seed: u64, samples: usize) -> Result<Vec<IdentityCheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut record = |name: &str, samples: usize, max_error: f64, tolerance: f64| {
        out.push(IdentityCheckResult {
            name: name.to_string(),
            samples,
            max_error,
            tolerance,
            pass: max_error <= tolerance,
        });
    };

    for n in [1usize, 2] {
        // Möbius involution
        let mut err: f64 = 0.0;
        for _ in 0..samples {
            let a = random_ball_point(&mut rng, n, 0.98);
            let w = random_ball_point(&mut rng, n, 0.98);
            let back = geometry::mobius(&a, &geometry::mobius(&a, &w)?)?;
            let d: f64 = w
                .iter()
                .zip(&back)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            err = err.max(d);
        }
        record(&format!("mobius_involution_n{n}"), samples, err, 1e-10);

        // 1 - |phi_z(w)|^2 identity
        let mut err: f64 = 0.0;
        for _ in 0..samples {
            let a = random_ball_point(&mut rng, n, 0.95);
            let w = random_ball_point(&mut rng, n, 0.95);
            let direct = 1.0 - crate::space::norm_sq(&geometry::mobius(&a, &w)?);
            let closed = geometry::one_minus_rho_sq(&a, &w)?;
            err = err.max((direct - closed).abs());
        }
        record(&format!("mobius_identity_n{n}"), samples, err, 1e-12);

        // metric invariance under automorphisms
        let mut err: f64 = 0.0;
        for _ in 0..samples {
            let a = random_ball_point(&mut rng, n, 0.9);
            let z = random_ball_point(&mut rng, n, 0.95);
            let w = random_ball_point(&mut rng, n, 0.95);
            let rho = geometry::pseudo_hyperbolic(&z, &w)?;
            let rho_moved = geometry::pseudo_hyperbolic(
                &geometry::mobius(&a, &z)?,
                &geometry::mobius(&a, &w)?,
            )?;
            err = err.max((rho - rho_moved).abs());
            let beta = geometry::bergman_metric(&z, &w)?;
            let beta_moved = geometry::bergman_metric(
                &geometry::mobius(&a, &z)?,
                &geometry::mobius(&a, &w)?,
            )?;
            err = err.max((beta - beta_moved).abs());
        }
        record(&format!("metric_invariance_n{n}"), samples, err, 1e-10);

        // kernel-Möbius identity |<k_z, k_w>| ||K_{phi_z(w)}|| = 1
        let space = Space::bergman(n, 2.0)?;
        let mut err: f64 = 0.0;
        for _ in 0..samples {
            let z = random_ball_point(&mut rng, n, 0.97);
            let w = random_ball_point(&mut rng, n, 0.97);
            let corr = kernels::correlation_modulus(&space, &z, &w)?;
            let moved = geometry::mobius(&z, &w)?;
            let product = corr * kernels::kernel_norm(&space, &moved)?;
            err = err.max((product - 1.0).abs());
        }
        record(&format!("kernel_mobius_identity_n{n}"), samples, err, 1e-10);

        // Hermitian symmetry, both families
        for space in [Space::bergman(n, 2.0)?, Space::fock(n, 2.0, 1.0)?] {
            let mut err: f64 = 0.0;
            for _ in 0..samples / 2 {
                let (z, w) = match space.family {
                    Family::Bergman => (
                        random_ball_point(&mut rng, n, 0.95),
                        random_ball_point(&mut rng, n, 0.95),
                    ),
                    Family::Fock => (
                        random_plane_point(&mut rng, n, 3.0),
                        random_plane_point(&mut rng, n, 3.0),
                    ),
                };
                let a = kernels::kernel_eval(&space, &z, &w)?;
                let b = kernels::kernel_eval(&space, &w, &z)?.conj();
                err = err.max((a - b).norm() / a.norm().max(1.0));
            }
            record(
                &format!("hermitian_symmetry_{:?}_n{n}", space.family).to_lowercase(),
                samples / 2,
                err,
                1e-14,
            );
        }
    }

    // Fock modulus law and its exponential-bound consequence
    let space = Space::fock(1, 2.0, 1.0)?;
    let mut err: f64 = 0.0;
    let mut bound_err: f64 = 0.0;
    for _ in 0..samples {
        let z = random_plane_point(&mut rng, 1, 4.0);
        let w = random_plane_point(&mut rng, 1, 4.0);
        let corr = kernels::correlation_modulus(&space, &z, &w)?;
        let d = geometry::euclidean(&z, &w);
        err = err.max((corr - (-0.5 * d * d).exp()).abs());
        if d >= 1.0 {
            // e^{-d^2/2} <= e^{-d/4} for d >= 1/2
            bound_err = bound_err.max(corr - (-(0.25) * d).exp());
        }
    }
    record("fock_modulus_law", samples, err, 1e-12);
    record("fock_exponential_bound", samples, bound_err, 0.0);

    Ok(out)
}

/// Result row of the identity suite.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheckResult {
    pub name: String,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn kernel_identities(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    let checks = kernel_identity_checks(cfg.seed, 1000)?;
    if checks.iter().any(|c| !c.pass) {
        // still written below, but surface the failure through the exit code
        write_json(dir, "report.json", cfg, v, "kernel-identities", &checks)?;
        return Err(Error::Numerical(
            "kernel identity suite exceeded tolerance".into(),
        ));
    }
    write_json(dir, "report.json", cfg, v, "kernel-identities", &checks)
}

fn rudin_forelli(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    match (&v.rule, v.space.family) {
        (Rule::Ball(ball), Family::Bergman) => {
            let grid = cfg.z_grid();
            let mut values = String::from("a,value_at_origin,grid_sup,truncation_bound,divergent\n");
            let mut tails = String::from("a,shell_or_r,value,error_bar\n");
            let mut reports = Vec::new();
            for &a in &cfg.rudin_forelli.a_values {
                let rep = rudin_forelli_check(v.space.n, a, &grid, ball)?;
                let origin = rudin_forelli_check(
                    v.space.n,
                    a,
                    &[vec![Complex64::new(0.0, 0.0); v.space.n]],
                    ball,
                )?;
                let bound = ball.boundary_gap().powf(a) / a;
                let _ = writeln!(
                    values,
                    "{a},{},{},{bound},{}",
                    origin.per_z[0], rep.sup, rep.divergent
                );
                if (0.0..1.0).contains(&a)
                    && a > (v.space.n as f64 - 1.0) / (v.space.n as f64 + 1.0)
                {
                    for (r, t) in
                        rudin_forelli_tail(v.space.n, a, &cfg.grids.r_list, &grid, ball)?
                    {
                        let _ = writeln!(tails, "{a},{r},{t},{bound}");
                    }
                }
                reports.push(rep);
            }
            write_file(dir, "rf_values.csv", &values)?;
            write_file(dir, "rf_tails.csv", &tails)?;
            write_json(dir, "report.json", cfg, v, "rudin-forelli", &reports)
        }
        (Rule::Plane(plane), Family::Fock) => {
            let grid = cfg.z_grid();
            let prof = fock_rf_tail(v.space.n, v.space.alpha, &cfg.grids.r_list, &grid, plane)?;
            let rows: Vec<(f64, f64, f64)> = prof
                .iter()
                .map(|&(r, t)| (r, t, plane.gaussian_tail_bound()))
                .collect();
            write_file(dir, "rf_tails.csv", &profile_csv(&rows))?;
            write_json(dir, "report.json", cfg, v, "rudin-forelli", &prof)
        }
        _ => Err(Error::Mismatch("rule does not match the space family".into())),
    }
}

fn build_configured_operator(v: &ValidatedConfig, degree: usize) -> Result<TruncatedOperator> {
    toeplitz(&v.space, &v.symbol, degree, &v.rule)
}

fn toeplitz_cmd(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    let t = build_configured_operator(v, cfg.degree)?;
    write_json(
        dir,
        "operator.json",
        cfg,
        v,
        "toeplitz",
        OperatorRecord::from(&t),
    )
}

fn berezin_map(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    let t = build_configured_operator(v, cfg.degree)?;
    let grid = cfg.z_grid();
    let mut csv = String::from("re_z,im_z,abs_z,value_re,value_im,error_bar\n");
    for z in &grid {
        let b = berezin(&t, z)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            z[0].re,
            z[0].im,
            z[0].norm(),
            b.value.re,
            b.value.im,
            b.truncation_bar
        );
    }
    write_file(dir, "berezin.csv", &csv)?;
    write_json(
        dir,
        "report.json",
        cfg,
        v,
        "berezin-map",
        serde_json::json!({ "points": grid.len() }),
    )
}

fn localize(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    let t = build_configured_operator(v, cfg.degree)?;
    let grid = cfg.z_grid();
    let cert = certify(&t, &v.params, &cfg.grids.r_list, &grid, &v.rule, &v.thresholds)?;
    let rows: Vec<(f64, f64, f64)> = cert
        .tail_profile
        .iter()
        .map(|tp| (tp.r, tp.sup(), cert.truncation_note))
        .collect();
    write_file(dir, "certificate_tails.csv", &profile_csv(&rows))?;
    write_json(dir, "certificate.json", cfg, v, "localize", &cert)
}

fn covering_cmd(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    let covering = build_covering(&v.space, cfg.covering.r, cfg.covering.region)?;
    let report = verify_covering(&covering, cfg.covering.verify_samples, cfg.seed);
    write_file(
        dir,
        "covering.json",
        &serde_json::to_string_pretty(&covering.record())?,
    )?;
    write_json(dir, "report.json", cfg, v, "covering", &report)
}

fn compactness(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    let t = build_configured_operator(v, cfg.degree)?;
    let report = compactness_report(&t, &v.compactness, &v.rule)?;
    let rows: Vec<(f64, f64, f64)> = report
        .berezin_profile
        .iter()
        .map(|p| (p.shell, p.value, p.bar))
        .collect();
    write_file(dir, "berezin_profile.csv", &profile_csv(&rows))?;
    let tail_rows: Vec<(f64, f64, f64)> = report
        .certificate
        .tail_profile
        .iter()
        .map(|tp| (tp.r, tp.sup(), report.certificate.truncation_note))
        .collect();
    write_file(dir, "certificate_tails.csv", &profile_csv(&tail_rows))?;
    write_json(dir, "report.json", cfg, v, "compactness", &report)
}

fn spectrum(cfg: &ExperimentConfig, v: &ValidatedConfig, dir: &Path) -> Result<()> {
    let t = build_configured_operator(v, cfg.degree)?;
    let sv = t.singular_values()?;
    let mut csv = String::from("index,sigma\n");
    for (i, s) in sv.iter().enumerate() {
        let _ = writeln!(csv, "{i},{s}");
    }
    write_file(dir, "spectrum.csv", &csv)?;
    write_json(
        dir,
        "report.json",
        cfg,
        v,
        "spectrum",
        serde_json::json!({
            "top": sv.first(),
            "count": sv.len(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_suite_passes() {
        let checks = kernel_identity_checks(7, 200).unwrap();
        for c in &checks {
            assert!(c.pass, "{} failed: {} > {}", c.name, c.max_error, c.tolerance);
        }
    }

    #[test]
    fn subcommand_parsing() {
        assert_eq!(
            Subcommand::from_str("kernel-identities").unwrap(),
            Subcommand::KernelIdentities
        );
        assert!(Subcommand::from_str("bogus").is_err());
    }

    #[test]
    fn runner_writes_artifacts() {
        let dir = std::env::temp_dir().join("bergfock-runner-test");
        let _ = std::fs::remove_dir_all(&dir);
        let mut cfg = ExperimentConfig::default_bergman();
        cfg.degree = 20;
        cfg.quadrature.radial = 60;
        cfg.quadrature.angular = 48;
        run(Subcommand::Spectrum, &cfg, &dir).unwrap();
        assert!(dir.join("spectrum.csv").exists());
        assert!(dir.join("report.json").exists());
        assert!(dir.join("config.echo.json").exists());
        let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
        assert!(report.contains(&cfg.content_hash()));
        let _ = std::fs::remove_dir_all(&dir);
    }
}
