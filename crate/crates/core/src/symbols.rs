//! Bounded symbols for Toeplitz operators and the built-in test battery.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::space::{norm_sq, Family};
use crate::{Error, Result};

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type GeneralFn = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// How a symbol is evaluated.
#[derive(Clone)]
pub enum SymbolKind {
    /// Real-valued radial profile as a function of `t = |z|^2`.
    Radial(RadialFn),
    /// Arbitrary bounded complex-valued function.
    General(GeneralFn),
}

/// A bounded measurable symbol with a declared sup-norm bound.
///
/// The bound is checked lazily at every quadrature node actually used
/// (hard error on violation). Radial symbols may list jump locations in
/// `t`; radial quadrature splits at them.
#[derive(Clone)]
pub struct Symbol {
    pub label: String,
    pub sup_bound: f64,
    pub kind: SymbolKind,
    /// Discontinuity locations of a radial profile, in the `t = |z|^2` variable.
    pub breakpoints: Vec<f64>,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("label", &self.label)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl Symbol {
    pub fn radial<F>(label: &str, sup_bound: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Symbol {
            label: label.to_string(),
            sup_bound,
            kind: SymbolKind::Radial(Arc::new(f)),
            breakpoints: Vec::new(),
        }
    }

    pub fn radial_with_breakpoints<F>(label: &str, sup_bound: f64, breaks: Vec<f64>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Symbol {
            label: label.to_string(),
            sup_bound,
            kind: SymbolKind::Radial(Arc::new(f)),
            breakpoints: breaks,
        }
    }

    pub fn general<F>(label: &str, sup_bound: f64, f: F) -> Self
    where
        F: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    {
        Symbol {
            label: label.to_string(),
            sup_bound,
            kind: SymbolKind::General(Arc::new(f)),
            breakpoints: Vec::new(),
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, SymbolKind::Radial(_))
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        match &self.kind {
            SymbolKind::Radial(f) => Complex64::new(f(norm_sq(z)), 0.0),
            SymbolKind::General(f) => f(z),
        }
    }

    pub fn eval_radial(&self, t: f64) -> Option<f64> {
        match &self.kind {
            SymbolKind::Radial(f) => Some(f(t)),
            SymbolKind::General(_) => None,
        }
    }

    /// Hard error if the declared bound is violated at a used node.
    pub fn check_bound(&self, value: Complex64, at: &str) -> Result<()> {
        let m = value.norm();
        if m > self.sup_bound + 1e-9 {
            return Err(Error::SupBound {
                label: self.label.clone(),
                at: at.to_string(),
                value: m,
                bound: self.sup_bound,
            });
        }
        Ok(())
    }

    // --- built-in library ---

    pub fn constant(c: f64) -> Self {
        Symbol::radial(&format!("constant({c})"), c.abs().max(1e-300), move |_| c)
    }

    /// `1 - |z|^2`; vanishes at the ball boundary.
    pub fn one_minus_abs_sq() -> Self {
        Symbol::radial("one_minus_abs_sq", 1.0, |t| 1.0 - t)
    }

    /// `|z|^2` with an explicit bound over the quadrature support.
    pub fn abs_sq(sup: f64) -> Self {
        Symbol::radial("abs_sq", sup, |t| t)
    }

    /// Radial step `1_{ |z|^2 >= t0 }`; does not vanish at the boundary.
    pub fn radial_step(t0: f64) -> Self {
        Symbol::radial_with_breakpoints("radial_step", 1.0, vec![t0], move |t| {
            if t >= t0 {
                1.0
            } else {
                0.0
            }
        })
    }

    /// `(1 - |z|^2)^2`; a radial bump vanishing at the boundary fast enough
    /// to sit clearly on the compact side of the report thresholds.
    pub fn boundary_bump() -> Self {
        Symbol::radial("boundary_bump", 1.0, |t| (1.0 - t) * (1.0 - t))
    }

    /// The first coordinate function `z_1`; an `e^{i theta}`-modulated,
    /// non-radial symbol.
    pub fn coordinate(sup: f64) -> Self {
        Symbol::general("coordinate", sup, |z| z[0])
    }

    /// `exp(-|z|^2)`; Gaussian decay at infinity (Fock compact side).
    pub fn gaussian_decay() -> Self {
        Symbol::radial("gaussian_decay", 1.0, |t| (-t).exp())
    }

    /// Look up a built-in symbol by name.
    ///
    /// `params` may carry `value` (constant), `t0` (radial_step) and
    /// `sup` (abs_sq / coordinate over unbounded domains).
    pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Symbol> {
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        match name {
            "constant" => Ok(Symbol::constant(get("value", 1.0))),
            "one_minus_abs_sq" => Ok(Symbol::one_minus_abs_sq()),
            "abs_sq" => Ok(Symbol::abs_sq(get("sup", 1.0))),
            "radial_step" => Ok(Symbol::radial_step(get("t0", 0.5))),
            "boundary_bump" => Ok(Symbol::boundary_bump()),
            "coordinate" => Ok(Symbol::coordinate(get("sup", 1.0))),
            "gaussian_decay" => Ok(Symbol::gaussian_decay()),
            other => Err(Error::InvalidParameter(format!(
                "unknown symbol `{other}`; built-ins: constant, one_minus_abs_sq, abs_sq, \
                 radial_step, boundary_bump, coordinate, gaussian_decay"
            ))),
        }
    }
}

/// A battery member together with the side of the compactness split it is
/// expected to land on.
pub struct BatteryMember {
    pub symbol: Symbol,
    pub family: Family,
    pub compact_side: bool,
}

/// The built-in seven-symbol battery used by the diagnostics checks:
/// Bergman constant / `|z|^2` / radial step / coordinate (non-compact side),
/// Bergman boundary bump and Fock Gaussian decay (compact side), and the
/// Fock constant (non-compact side).
pub fn battery(family: Family) -> Vec<BatteryMember> {
    match family {
        Family::Bergman => vec![
            BatteryMember {
                symbol: Symbol::constant(1.0),
                family,
                compact_side: false,
            },
            BatteryMember {
                symbol: Symbol::abs_sq(1.0),
                family,
                compact_side: false,
            },
            BatteryMember {
                symbol: Symbol::radial_step(0.5),
                family,
                compact_side: false,
            },
            BatteryMember {
                symbol: Symbol::coordinate(1.0),
                family,
                compact_side: false,
            },
            BatteryMember {
                symbol: Symbol::boundary_bump(),
                family,
                compact_side: true,
            },
        ],
        Family::Fock => vec![
            BatteryMember {
                symbol: Symbol::constant(1.0),
                family,
                compact_side: false,
            },
            BatteryMember {
                symbol: Symbol::gaussian_decay(),
                family,
                compact_side: true,
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_lookup() {
        let mut params = BTreeMap::new();
        params.insert("t0".to_string(), 0.25);
        let s = Symbol::by_name("radial_step", &params).unwrap();
        assert_eq!(s.eval_radial(0.3), Some(1.0));
        assert_eq!(s.eval_radial(0.2), Some(0.0));
        assert!(Symbol::by_name("nope", &params).is_err());
    }

    #[test]
    fn bound_check() {
        let s = Symbol::constant(2.0);
        assert!(s.check_bound(Complex64::new(2.0, 0.0), "x").is_ok());
        assert!(s.check_bound(Complex64::new(2.5, 0.0), "x").is_err());
    }

    #[test]
    fn battery_has_both_sides() {
        let b: Vec<_> = battery(Family::Bergman)
            .into_iter()
            .chain(battery(Family::Fock))
            .collect();
        assert!(b.len() >= 6);
        assert!(b.iter().any(|m| m.compact_side));
        assert!(b.iter().any(|m| !m.compact_side));
    }
}
