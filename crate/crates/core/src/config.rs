//! Experiment configuration: one structured JSON document per run.
//!
//! All parameter ranges are validated before any computation starts, and a
//! config round-trips through serialization bit-exactly (ordered struct
//! fields, ordered maps). The FNV-1a hash of the canonical serialization is
//! embedded in every artifact an experiment writes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::covering::Region;
use crate::diagnostics::{CompactnessConfig, CompactnessThresholds};
use crate::localization::{LocalizationParams, Thresholds};
use crate::quadrature::{BallRule, PlaneRule, Rule};
use crate::space::{Family, Space};
use crate::symbols::Symbol;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpaceCfg {
    pub family: Family,
    pub n: usize,
    pub p: f64,
    /// Gaussian weight parameter; ignored by Bergman configs.
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SymbolCfg {
    /// Built-in symbol name; see [`Symbol::by_name`].
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QuadCfg {
    pub radial: usize,
    pub angular: usize,
    /// Ball rules: `1 - rho_max^2` of the radial support.
    pub boundary_gap: f64,
    /// Plane rules: disk radius.
    pub range: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridCfg {
    /// Boundary-profile shells (`|z|` values).
    pub shells: Vec<f64>,
    pub angles: usize,
    /// Tail radii for certificates and profiles.
    pub r_list: Vec<f64>,
    /// Radii of the certification grid.
    pub z_radii: Vec<f64>,
    /// Disk radius of the essential-norm bound quantity.
    pub theorem_r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LocalizationCfg {
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ThresholdCfg {
    pub certificate_full: f64,
    pub certificate_tail_ratio: f64,
    pub tau_berezin: f64,
    pub tau_ess: f64,
    pub tau_noncompact: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoveringCfg {
    pub r: f64,
    pub region: Region,
    /// Monte-Carlo samples used by verification.
    pub verify_samples: usize,
}

/// Rudin-Forelli sweep parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RudinForelliCfg {
    pub a_values: Vec<f64>,
}

/// Everything one experiment needs; serialized as the run's single input.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub space: SpaceCfg,
    pub symbol: SymbolCfg,
    pub degree: usize,
    pub quadrature: QuadCfg,
    pub grids: GridCfg,
    pub localization: LocalizationCfg,
    pub thresholds: ThresholdCfg,
    pub covering: CoveringCfg,
    pub rudin_forelli: RudinForelliCfg,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn default_bergman() -> Self {
        ExperimentConfig {
            space: SpaceCfg {
                family: Family::Bergman,
                n: 1,
                p: 2.0,
                alpha: 1.0,
            },
            symbol: SymbolCfg {
                name: "one_minus_abs_sq".into(),
                params: BTreeMap::new(),
            },
            degree: 60,
            quadrature: QuadCfg {
                radial: 200,
                angular: 128,
                boundary_gap: 1e-13,
                range: 8.0,
            },
            grids: GridCfg {
                shells: vec![0.6, 0.8, 0.9, 0.95],
                angles: 8,
                r_list: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                z_radii: vec![0.0, 0.3, 0.6, 0.8, 0.9, 0.95],
                theorem_r: 1.0,
            },
            localization: LocalizationCfg { delta: 1.0 },
            thresholds: ThresholdCfg {
                certificate_full: 50.0,
                certificate_tail_ratio: 0.05,
                tau_berezin: 0.05,
                tau_ess: 0.1,
                tau_noncompact: 0.5,
            },
            covering: CoveringCfg {
                r: 2.0,
                region: Region::MetricBall { radius: 5.0 },
                verify_samples: 4000,
            },
            rudin_forelli: RudinForelliCfg {
                a_values: vec![0.3, 0.5, 0.7, 0.9],
            },
            seed: 20_26,
        }
    }

    pub fn default_fock() -> Self {
        let mut cfg = Self::default_bergman();
        cfg.space.family = Family::Fock;
        cfg.symbol = SymbolCfg {
            name: "gaussian_decay".into(),
            params: BTreeMap::new(),
        };
        cfg.grids.shells = vec![1.0, 2.0, 3.0, 4.0];
        cfg.grids.z_radii = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        cfg.covering.region = Region::MetricBall { radius: 12.0 };
        cfg
    }

    /// Validates every range and materializes the run-time objects.
    pub fn validate(&self) -> Result<ValidatedConfig> {
        let space = match self.space.family {
            Family::Bergman => Space::bergman(self.space.n, self.space.p)?,
            Family::Fock => Space::fock(self.space.n, self.space.p, self.space.alpha)?,
        };
        if self.degree == 0 || self.degree > 300 {
            return Err(Error::InvalidParameter(format!(
                "degree {} out of the supported range 1..=300",
                self.degree
            )));
        }
        let symbol = Symbol::by_name(&self.symbol.name, &self.symbol.params)?;
        let rule = match space.family {
            Family::Bergman => Rule::Ball(BallRule::with_boundary_gap(
                space.n,
                self.quadrature.radial,
                self.quadrature.angular,
                self.quadrature.boundary_gap,
            )?),
            Family::Fock => Rule::Plane(PlaneRule::build(
                space.n,
                space.alpha,
                self.quadrature.range,
                self.quadrature.radial,
                self.quadrature.angular,
            )?),
        };
        let params = LocalizationParams::new(space.p, self.localization.delta, space.n)?;
        for &s in &self.grids.shells {
            if s < 0.0 || (space.family == Family::Bergman && s >= 1.0) {
                return Err(Error::InvalidParameter(format!("shell {s} out of range")));
            }
        }
        for &r in &self.grids.z_radii {
            if r < 0.0 || (space.family == Family::Bergman && r >= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "grid radius {r} out of range"
                )));
            }
        }
        if self.grids.angles == 0 || self.grids.r_list.is_empty() {
            return Err(Error::InvalidParameter(
                "grids need at least one angle and one tail radius".into(),
            ));
        }
        for &a in &self.rudin_forelli.a_values {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "rudin-forelli exponent {a} must be positive"
                )));
            }
        }
        let thresholds = Thresholds {
            full: self.thresholds.certificate_full,
            tail_ratio: self.thresholds.certificate_tail_ratio,
        };
        let compactness = CompactnessConfig {
            shells: self.grids.shells.clone(),
            angles: self.grids.angles,
            proxy_cut: None,
            theorem_r: self.grids.theorem_r,
            covering_r: self.covering.r,
            region_radius: match self.covering.region {
                Region::MetricBall { radius } => radius,
                Region::Square { half_width } => half_width,
            },
            r_list: self.grids.r_list.clone(),
            p: space.p,
            delta: self.localization.delta,
            thresholds,
            compact_thresholds: CompactnessThresholds {
                tau_berezin: self.thresholds.tau_berezin,
                tau_ess: self.thresholds.tau_ess,
                tau_noncompact: self.thresholds.tau_noncompact,
            },
        };
        Ok(ValidatedConfig {
            space,
            symbol,
            rule,
            params,
            thresholds,
            compactness,
        })
    }

    /// FNV-1a hash of the canonical serialization.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Grid of certification points from the configured radii and angles.
    pub fn z_grid(&self) -> Vec<Vec<num_complex::Complex64>> {
        crate::localization::radial_grid(&self.grids.z_radii, self.grids.angles)
    }
}

/// Materialized, validated run-time objects.
pub struct ValidatedConfig {
    pub space: Space,
    pub symbol: Symbol,
    pub rule: Rule,
    pub params: LocalizationParams,
    pub thresholds: Thresholds,
    pub compactness: CompactnessConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let cfg = ExperimentConfig::default_bergman();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
        let json2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, json2);
        assert_eq!(cfg.content_hash(), back.content_hash());
    }

    #[test]
    fn validation_catches_bad_ranges() {
        let mut cfg = ExperimentConfig::default_bergman();
        assert!(cfg.validate().is_ok());
        cfg.space.p = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default_bergman();
        cfg.grids.shells = vec![1.5];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default_bergman();
        cfg.symbol.name = "no_such_symbol".into();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default_fock();
        cfg.space.alpha = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default_bergman();
        let mut b = a.clone();
        assert_eq!(a.content_hash(), b.content_hash());
        b.seed += 1;
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
