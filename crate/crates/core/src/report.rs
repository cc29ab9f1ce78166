//! Machine-readable verification reports.
//!
//! Every bound check emits either an [`InequalityReport`] (pointwise
//! coefficient inequalities with an explicit paper constant) or a
//! [`BoundReport`] (fitted constants whose existence, not value, is
//! asserted, together with their stability under one grid refinement).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Result of a pointwise inequality check against an explicit constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub constant_paper: f64,
    pub constant_empirical: f64,
    pub worst_radius: f64,
    pub pass: bool,
}

/// Result of a fitted-constant check with refinement-stability metadata.
///
/// `constants` holds the fitted values at the base resolution, `refined`
/// the same fit after one grid refinement. `stability` is the largest
/// relative change among the constants named in `stability_keys` and the
/// verdict requires it below `stability_tol` together with every sampled
/// inequality holding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub constants: BTreeMap<String, f64>,
    pub refined: BTreeMap<String, f64>,
    pub sample: String,
    pub stability: f64,
    pub stability_tol: f64,
    pub violations: usize,
    pub pass: bool,
    /// Context a reader needs to reproduce the number (resolved radii,
    /// diffusion model, normalization convention, ...).
    pub metadata: BTreeMap<String, String>,
}

impl BoundReport {
    pub fn new(name: &str, sample: String, stability_tol: f64) -> Self {
        BoundReport {
            name: name.into(),
            constants: BTreeMap::new(),
            refined: BTreeMap::new(),
            sample,
            stability: 0.0,
            stability_tol,
            violations: 0,
            pass: false,
        metadata: BTreeMap::new(),
        }
    }

    /// Relative change of a constant between the base and refined fits.
    pub fn relative_change(base: f64, refined: f64) -> f64 {
        let scale = base.abs().max(refined.abs());
        if scale == 0.0 {
            0.0
        } else {
            (base - refined).abs() / scale
        }
    }

    /// Fills `stability` from the named constants and sets the verdict.
    pub fn finish(&mut self, keys: &[&str], extra_ok: bool) {
        let mut worst = 0.0f64;
        for k in keys {
            let b = self.constants.get(*k).copied().unwrap_or(f64::NAN);
            let r = self.refined.get(*k).copied().unwrap_or(f64::NAN);
            let change = if b.is_finite() && r.is_finite() {
                Self::relative_change(b, r)
            } else {
                f64::INFINITY
            };
            worst = worst.max(change);
        }
        self.stability = worst;
        let finite = self
            .constants
            .values()
            .chain(self.refined.values())
            .all(|v| v.is_finite());
        self.pass = extra_ok && finite && self.violations == 0 && worst <= self.stability_tol;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stability_and_verdict() {
        let mut r = BoundReport::new("demo", "unit test".into(), 0.25);
        r.constants.insert("c".into(), 1.0);
        r.refined.insert("c".into(), 1.2);
        r.finish(&["c"], true);
        assert!((r.stability - 0.2 / 1.2).abs() < 1e-15);
        assert!(r.pass);

        r.constants.insert("c".into(), 1.0);
        r.refined.insert("c".into(), 2.0);
        r.finish(&["c"], true);
        assert!(!r.pass);
    }

    #[test]
    fn zero_constants_are_stable() {
        assert_eq!(BoundReport::relative_change(0.0, 0.0), 0.0);
    }
}
