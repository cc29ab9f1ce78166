//! Operator coefficients, weighted measure, regime classification and the
//! explicit pointwise coefficient inequalities.
//!
//! The operator is `A φ = a(x) Δφ - θ² V(x) φ` with `a(x) = 1+|x|^α` and
//! `V(x) = |x|^β`, considered on the weighted space `L²_μ`,
//! `dμ = a(x)^{-1} dx`, where it is self-adjoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::InequalityReport;

/// Diffusion coefficient model.
///
/// `Weighted` is the operator itself, `a(r) = 1+r^α`. `Unit` replaces it by
/// `a ≡ 1` (and the measure by Lebesgue) so that textbook closed forms —
/// harmonic-oscillator spectrum, Mehler kernel, power-rule barrier
/// integrals — are available as exact oracles. Reports record which model
/// produced them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Diffusion {
    #[default]
    Weighted,
    Unit,
}

/// The parameter tuple (α, β, N, θ) plus the diffusion model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    /// Growth exponent of the diffusion coefficient, in [0, 2].
    pub alpha: f64,
    /// Growth exponent of the potential, ≥ 0.
    pub beta: f64,
    /// Spatial dimension N ≥ 1.
    pub dim: usize,
    /// Potential scale θ > 0; the potential term is θ²|x|^β.
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub diffusion: Diffusion,
}

fn default_theta() -> f64 {
    1.0
}

/// Which estimates hold for a given parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// Semigroup generation: α ∈ [0,2], β ≥ 0.
    pub generation: bool,
    /// Discrete spectrum accumulating at -∞: β > 0.
    pub discrete_spectrum: bool,
    /// Two-sided kernel estimates: N > 2, α ∈ [0,2), β > 2.
    pub kernel_estimates: bool,
    /// Two-sided f₀ sandwich for the ground state: α + β > 2.
    pub sandwich: bool,
}

impl OperatorParams {
    pub fn new(alpha: f64, beta: f64, dim: usize, theta: f64) -> Result<Self> {
        Self::with_diffusion(alpha, beta, dim, theta, Diffusion::Weighted)
    }

    pub fn with_diffusion(
        alpha: f64,
        beta: f64,
        dim: usize,
        theta: f64,
        diffusion: Diffusion,
    ) -> Result<Self> {
        let p = OperatorParams { alpha, beta, dim, theta, diffusion };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.alpha) || !self.alpha.is_finite() {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in [0, 2], got {}",
                self.alpha
            )));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(Error::InvalidParams(
                "degenerate coefficients: alpha and beta cannot both vanish".into(),
            ));
        }
        if self.dim < 1 {
            return Err(Error::InvalidParams("dim must be >= 1".into()));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidParams(format!("theta must be > 0, got {}", self.theta)));
        }
        Ok(())
    }

    /// Diffusion coefficient a(r).
    pub fn coeff_a(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self.diffusion {
            Diffusion::Weighted => 1.0 + r.powf(self.alpha),
            Diffusion::Unit => 1.0,
        }
    }

    /// Radial derivative a'(r) (one-sided at r = 0 for α < 1).
    pub fn coeff_a_prime(&self, r: f64) -> f64 {
        match self.diffusion {
            Diffusion::Weighted => {
                if self.alpha == 0.0 {
                    0.0
                } else {
                    self.alpha * r.powf(self.alpha - 1.0)
                }
            }
            Diffusion::Unit => 0.0,
        }
    }

    /// Potential θ²r^β.
    pub fn potential_v(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        self.theta * self.theta * r.powf(self.beta)
    }

    /// Unscaled potential r^β (the θ-free symbol the asymptotic ratios use).
    pub fn potential_bare(&self, r: f64) -> f64 {
        r.powf(self.beta)
    }

    /// Density of μ against Lebesgue measure, 1/a(r) ∈ (0, 1].
    pub fn measure_weight(&self, r: f64) -> f64 {
        1.0 / self.coeff_a(r)
    }

    /// Coefficient ratio Ξ(r) = θ²V(r)/a(r).
    pub fn xi(&self, r: f64) -> f64 {
        self.potential_v(r) / self.coeff_a(r)
    }

    /// Logarithmic derivative Ξ'(r)/Ξ(r) = β/r - a'(r)/a(r).
    pub fn xi_log_deriv(&self, r: f64) -> f64 {
        self.beta / r - self.coeff_a_prime(r) / self.coeff_a(r)
    }

    /// κ = α·2^{1-α/2}, the constant with |a'(r)| ≤ κ·a(r)^{1/2} on r ≥ 1/2.
    pub fn kappa(&self) -> f64 {
        self.alpha * 2f64.powf(1.0 - self.alpha / 2.0)
    }

    /// c₁ = 16(2|β-α| + 3β + 4α)², the quadratic constant with
    /// |Ξ'| ≤ √c₁·Ξ on r ≥ 1/2.
    pub fn c1(&self) -> f64 {
        let s = 2.0 * (self.beta - self.alpha).abs() + 3.0 * self.beta + 4.0 * self.alpha;
        16.0 * s * s
    }

    pub fn classify_regime(&self) -> RegimeFlags {
        RegimeFlags {
            generation: (0.0..=2.0).contains(&self.alpha) && self.beta >= 0.0,
            discrete_spectrum: self.beta > 0.0,
            kernel_estimates: self.dim > 2 && self.alpha < 2.0 && self.beta > 2.0,
            sandwich: self.alpha + self.beta > 2.0,
        }
    }

    /// Effective α exponent entering the barrier prefactor; the unit model
    /// behaves as α = 0 with the +1 dropped from a.
    pub fn alpha_eff(&self) -> f64 {
        match self.diffusion {
            Diffusion::Weighted => self.alpha,
            Diffusion::Unit => 0.0,
        }
    }
}

fn check_sample(radii: &[f64], min_r: f64) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(&bad) = radii.iter().find(|&&r| r < min_r || !r.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "sampled radius {bad} below the admissible threshold {min_r}"
        )));
    }
    Ok(())
}

/// Checks the two pointwise coefficient inequalities on the sampled radii:
/// `|a'(r)| ≤ κ a(r)^{1/2}` and `|Ξ'(r)| ≤ √c₁ Ξ(r)` for `r ≥ 1/2`,
/// with κ and c₁ the explicit constants above. Returns both paper constants
/// and the empirical maxima of the corresponding ratios.
pub fn verify_coefficient_inequalities(
    params: &OperatorParams,
    radii: &[f64],
) -> Result<[InequalityReport; 2]> {
    check_sample(radii, 0.5)?;

    let kappa = params.kappa();
    let mut max_grad = 0.0f64;
    let mut worst_grad = radii[0];
    let mut max_xi = 0.0f64;
    let mut worst_xi = radii[0];
    for &r in radii {
        let g = params.coeff_a_prime(r).abs() / params.coeff_a(r).sqrt();
        if g > max_grad {
            max_grad = g;
            worst_grad = r;
        }
        let x = params.xi_log_deriv(r).abs();
        if x > max_xi {
            max_xi = x;
            worst_xi = r;
        }
    }

    let slack = 1.0 + 1e-12;
    let grad = InequalityReport {
        name: "grad_a_vs_sqrt_a".into(),
        constant_paper: kappa,
        constant_empirical: max_grad,
        worst_radius: worst_grad,
        pass: max_grad <= kappa * slack,
    };
    let sqrt_c1 = params.c1().sqrt();
    let xi = InequalityReport {
        name: "grad_xi_vs_xi".into(),
        constant_paper: sqrt_c1,
        constant_empirical: max_xi,
        worst_radius: worst_xi,
        pass: max_xi <= sqrt_c1 * slack,
    };
    Ok([grad, xi])
}

/// Smallest c₁ ≥ 0 with `Ξ'(r)² ≤ c₁ Ξ(r)² + c₂ Ξ(r)³` at every sampled
/// radius (the Okazawa-type hypothesis with a cubic slack term).
pub fn verify_okazawa(params: &OperatorParams, radii: &[f64], c2: f64) -> Result<InequalityReport> {
    check_sample(radii, 0.5)?;
    if !(c2 > 0.0) {
        return Err(Error::InvalidParams(format!("c2 must be > 0, got {c2}")));
    }

    let mut c1_needed = 0.0f64;
    let mut worst = radii[0];
    for &r in radii {
        let xi = params.xi(r);
        let dxi = params.xi_log_deriv(r) * xi;
        let need = (dxi * dxi - c2 * xi * xi * xi) / (xi * xi);
        if need > c1_needed {
            c1_needed = need;
            worst = r;
        }
    }

    Ok(InequalityReport {
        name: "okazawa_c1".into(),
        constant_paper: params.c1(),
        constant_empirical: c1_needed,
        worst_radius: worst,
        pass: c1_needed.is_finite() && c1_needed <= params.c1() * (1.0 + 1e-12),
    })
}

/// Geometric radius ladder, the default sample for the inequality checks.
pub fn geometric_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let q = (hi / lo).powf(1.0 / (n as f64 - 1.0));
    (0..n).map(|i| lo * q.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(alpha: f64, beta: f64, dim: usize, theta: f64) -> OperatorParams {
        OperatorParams::new(alpha, beta, dim, theta).unwrap()
    }

    #[test]
    fn coefficient_values() {
        assert_relative_eq!(p(2.0, 1.0, 3, 1.0).coeff_a(0.0), 1.0);
        assert_relative_eq!(p(0.0, 1.0, 3, 1.0).coeff_a(5.0), 2.0);
        assert_relative_eq!(p(1.5, 1.0, 3, 1.0).coeff_a(4.0), 9.0);
        assert!(p(1.0, 1.0, 3, 1.0).coeff_a(7.0) >= 1.0);
    }

    #[test]
    fn potential_values() {
        assert_relative_eq!(p(1.0, 2.0, 3, 1.0).potential_v(3.0), 9.0);
        assert_relative_eq!(p(1.0, 3.0, 3, 2.0).potential_v(1.0), 4.0);
        assert_relative_eq!(p(1.0, 0.7, 3, 1.0).potential_v(0.0), 0.0);
    }

    #[test]
    fn measure_weight_values() {
        assert_relative_eq!(p(0.0, 1.0, 3, 1.0).measure_weight(17.3), 0.5);
        assert_relative_eq!(p(2.0, 1.0, 3, 1.0).measure_weight(1.0), 0.5);
        assert_relative_eq!(p(2.0, 1.0, 3, 1.0).measure_weight(3.0), 0.1);
        let pr = p(1.3, 1.0, 3, 1.0);
        for r in [0.0, 0.4, 2.0, 50.0] {
            let w = pr.measure_weight(r);
            assert!(w > 0.0 && w <= 1.0);
        }
    }

    #[test]
    fn paper_constants_arithmetic() {
        assert_eq!(p(2.0, 1.0, 3, 1.0).kappa(), 2.0);
        assert_eq!(p(0.0, 1.0, 3, 1.0).kappa(), 0.0);
        // 16(2|3-1| + 9 + 4)^2 = 16 * 17^2
        assert_eq!(p(1.0, 3.0, 3, 1.0).c1(), 4624.0);
    }

    #[test]
    fn coeff_a_nondecreasing() {
        for &alpha in &[0.0, 0.3, 1.0, 1.7, 2.0] {
            let pr = p(alpha, 1.0, 3, 1.0);
            let mut prev = pr.coeff_a(0.0);
            for i in 1..200 {
                let a = pr.coeff_a(i as f64 * 0.05);
                assert!(a >= prev - 1e-15);
                prev = a;
            }
        }
    }

    #[test]
    fn alpha_version_of_gradient_bound_for_alpha_ge_1() {
        // |a'| <= alpha * a^{1/2} holds globally only for alpha in [1,2].
        for &alpha in &[1.0, 1.3, 1.8, 2.0] {
            let pr = p(alpha, 1.0, 3, 1.0);
            for &r in &geometric_radii(1e-3, 1e3, 400) {
                assert!(pr.coeff_a_prime(r).abs() <= alpha * pr.coeff_a(r).sqrt() * (1.0 + 1e-13));
            }
        }
        // and genuinely fails near r = 1/2 for alpha < 1, which is why the
        // checked constant on r >= 1/2 is kappa.
        let pr = p(0.5, 1.0, 3, 1.0);
        assert!(pr.coeff_a_prime(0.5).abs() > 0.5 * pr.coeff_a(0.5).sqrt());
        assert!(pr.coeff_a_prime(0.5).abs() <= pr.kappa() * pr.coeff_a(0.5).sqrt());
    }

    #[test]
    fn inequality_sweep_passes() {
        let radii = geometric_radii(0.5, 1e3, 2000);
        for &(alpha, beta) in &[(0.0, 2.0), (0.5, 0.5), (1.0, 3.0), (1.7, 5.5), (2.0, 4.0)] {
            let pr = p(alpha, beta, 3, 1.0);
            let reps = verify_coefficient_inequalities(&pr, &radii).unwrap();
            assert!(reps[0].pass, "grad bound failed at ({alpha},{beta}): {reps:?}");
            assert!(reps[1].pass, "xi bound failed at ({alpha},{beta}): {reps:?}");
        }
    }

    #[test]
    fn okazawa_degenerate_and_dominated() {
        // alpha = 0, beta = 0 is rejected at construction.
        assert!(OperatorParams::new(0.0, 0.0, 3, 1.0).is_err());
        // a constant-xi stand-in: alpha = beta gives xi' -> 0 at infinity but
        // not identically; the direct degenerate analogue is alpha=0 beta=0,
        // so assert instead that the cubic term always helps.
        let radii = geometric_radii(0.5, 100.0, 500);
        for &(alpha, beta, c2) in &[(1.0, 3.0, 0.1), (2.0, 4.0, 1.0), (0.5, 2.0, 0.7)] {
            let pr = p(alpha, beta, 3, 1.0);
            let with_cubic = verify_okazawa(&pr, &radii, c2).unwrap();
            let quad_only = verify_coefficient_inequalities(&pr, &radii).unwrap()[1]
                .constant_empirical
                .powi(2);
            assert!(with_cubic.constant_empirical <= quad_only + 1e-12);
            assert!(with_cubic.pass, "{with_cubic:?}");
        }
    }

    #[test]
    fn okazawa_rejects_bad_samples() {
        let pr = p(1.0, 3.0, 3, 1.0);
        assert!(matches!(verify_okazawa(&pr, &[], 0.1), Err(Error::EmptySample)));
        assert!(verify_okazawa(&pr, &[0.4, 1.0], 0.1).is_err());
        assert!(verify_okazawa(&pr, &[1.0], 0.0).is_err());
    }

    #[test]
    fn regime_classification() {
        let f = p(1.0, 3.0, 3, 1.0).classify_regime();
        assert!(f.generation && f.discrete_spectrum && f.kernel_estimates && f.sandwich);

        let f = p(0.0, 2.0, 3, 1.0).classify_regime();
        assert!(f.discrete_spectrum && !f.kernel_estimates);

        let f = p(1.5, 1.0, 3, 1.0).classify_regime();
        assert!(f.sandwich && !f.kernel_estimates);

        // beta > 2 forces both discreteness and the sandwich.
        for &(alpha, beta, dim) in &[(0.0, 2.5, 3), (1.0, 4.0, 4), (1.9, 2.1, 5)] {
            let f = p(alpha, beta, dim, 1.0).classify_regime();
            if f.kernel_estimates {
                assert!(f.discrete_spectrum && f.sandwich);
            }
        }
    }

    #[test]
    fn param_validation() {
        assert!(OperatorParams::new(-0.1, 1.0, 3, 1.0).is_err());
        assert!(OperatorParams::new(2.1, 1.0, 3, 1.0).is_err());
        assert!(OperatorParams::new(1.0, -1.0, 3, 1.0).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 0, 1.0).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 3, 0.0).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 1, 0.5).is_ok());
    }
}
