//! Graded cell-centered radial grids with μ-weighted quadrature weights.
//!
//! Cell centers avoid r = 0, so the coefficient r^α is never differentiated
//! at the origin. The μ-weight of cell i is `w_i = r_i^{N-1} Δr_i / a(r_i)`,
//! a midpoint rule for the radial part of dμ (the sphere area factor is
//! applied by the kernel module).

use std::io::Write;

use crate::barrier::i1_direct;
use crate::error::{Error, Result};
use crate::model::OperatorParams;
use crate::quad::integrate;

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub params: OperatorParams,
    /// Strictly increasing cell centers r_1 < ... < r_M.
    pub nodes: Vec<f64>,
    /// Cell faces g_0 = 0 < g_1 < ... < g_M = r_max.
    pub faces: Vec<f64>,
    /// Per-cell widths Δr_i = g_i - g_{i-1}.
    pub spacings: Vec<f64>,
    /// μ-quadrature weights w_i = r_i^{N-1} Δr_i / a(r_i).
    pub mu_weights: Vec<f64>,
    pub r_max: f64,
}

/// Cell faces for a geometrically graded partition of [0, r_max]:
/// spacing ratio q with Δr_M / Δr_1 = grading.
fn graded_faces(n_cells: usize, r_max: f64, grading: f64) -> Vec<f64> {
    let mut faces = Vec::with_capacity(n_cells + 1);
    faces.push(0.0);
    if grading == 1.0 || n_cells == 1 {
        for i in 1..=n_cells {
            faces.push(r_max * i as f64 / n_cells as f64);
        }
        return faces;
    }
    let q = grading.powf(1.0 / (n_cells as f64 - 1.0));
    // Δr_1 (q^M - 1)/(q - 1) = r_max
    let d1 = r_max * (q - 1.0) / (q.powi(n_cells as i32) - 1.0);
    let mut acc = 0.0;
    for i in 0..n_cells {
        acc += d1 * q.powi(i as i32);
        faces.push(acc);
    }
    *faces.last_mut().unwrap() = r_max; // absorb roundoff
    faces
}

/// Builds the graded cell-centered grid. `grading = 1` is uniform;
/// `grading > 1` concentrates cells near the origin.
pub fn build_grid(
    params: &OperatorParams,
    n_cells: usize,
    r_max: f64,
    grading: f64,
) -> Result<RadialGrid> {
    if n_cells < 16 {
        return Err(Error::InvalidConfig(format!("n_cells must be >= 16, got {n_cells}")));
    }
    if !(r_max > 1.0) {
        return Err(Error::InvalidConfig(format!("r_max must exceed 1, got {r_max}")));
    }
    if !(grading >= 1.0) {
        return Err(Error::InvalidConfig(format!("grading must be >= 1, got {grading}")));
    }
    let faces = graded_faces(n_cells, r_max, grading);
    let mut nodes = Vec::with_capacity(n_cells);
    let mut spacings = Vec::with_capacity(n_cells);
    let mut mu_weights = Vec::with_capacity(n_cells);
    let nm1 = params.dim as i32 - 1;
    for i in 0..n_cells {
        let r = 0.5 * (faces[i] + faces[i + 1]);
        let dr = faces[i + 1] - faces[i];
        nodes.push(r);
        spacings.push(dr);
        mu_weights.push(r.powi(nm1) * dr * params.measure_weight(r));
    }
    Ok(RadialGrid { params: *params, nodes, faces, spacings, mu_weights, r_max })
}

impl RadialGrid {
    pub fn n_cells(&self) -> usize {
        self.nodes.len()
    }

    /// Discrete μ mass Σ w_i; approximates ∫_0^{r_max} r^{N-1}/a(r) dr.
    pub fn mu_mass(&self) -> f64 {
        self.mu_weights.iter().sum()
    }

    /// Relative defect of the discrete μ mass against adaptive quadrature.
    pub fn mu_mass_defect(&self) -> Result<f64> {
        let p = self.params;
        let nm1 = p.dim as i32 - 1;
        let exact =
            integrate(&|r: f64| r.powi(nm1) * p.measure_weight(r), 0.0, self.r_max, 1e-12)?;
        Ok((self.mu_mass() - exact).abs() / exact)
    }

    /// Discrete L²_μ inner product of two radial grid vectors.
    pub fn inner_mu(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.mu_weights).map(|((a, b), w)| a * b * w).sum()
    }

    pub fn norm_mu(&self, u: &[f64]) -> f64 {
        self.inner_mu(u, u).sqrt()
    }

    /// CSV dump (node, spacing, mu_weight) for debugging.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "node,spacing,mu_weight")?;
        for i in 0..self.n_cells() {
            writeln!(out, "{:e},{:e},{:e}", self.nodes[i], self.spacings[i], self.mu_weights[i])?;
        }
        Ok(())
    }
}

/// Smallest truncation radius R ≥ 4 with `f₀(R)/f₀(2) ≤ tol`, computed from
/// the decay of the λ = 0 barrier function. The search works on log f₀, so
/// arbitrarily small tolerances cannot underflow.
pub fn auto_truncation_radius(params: &OperatorParams, tol: f64) -> Result<f64> {
    if !params.classify_regime().discrete_spectrum {
        return Err(Error::RegimeViolation(
            "truncation by barrier decay needs a confining potential (beta > 0)".into(),
        ));
    }
    if !(tol > 0.0 && tol <= 1.0) {
        return Err(Error::InvalidConfig(format!("truncation tol must lie in (0, 1], got {tol}")));
    }
    let p0 = (params.alpha_eff() - params.beta) / 4.0 - (params.dim as f64 - 1.0) / 2.0;
    let log_f0 = |r: f64| -> Result<f64> {
        Ok(p0 * r.ln() - params.theta * i1_direct(params, r, 1e-10)?)
    };
    let target = tol.ln() + log_f0(2.0)?;
    if log_f0(4.0)? <= target {
        return Ok(4.0);
    }
    // Bracket by doubling, then bisect.
    let mut lo = 4.0;
    let mut hi = 8.0;
    while log_f0(hi)? > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence(format!(
                "truncation radius for tol {tol} exceeds 1e6"
            )));
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if log_f0(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-9 * hi {
            break;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Diffusion;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn unit(beta: f64, dim: usize) -> OperatorParams {
        OperatorParams::with_diffusion(0.0, beta, dim, 1.0, Diffusion::Unit).unwrap()
    }

    #[test]
    fn uniform_cell_centers() {
        // 4-cell layout of the spec example, scaled: 16 cells on [0, 16].
        let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
        let g = build_grid(&p, 16, 16.0, 1.0).unwrap();
        for (i, &r) in g.nodes.iter().enumerate() {
            assert_relative_eq!(r, 0.5 + i as f64, max_relative = 1e-14);
        }
        // and the unchecked 4-cell layout itself
        let faces = graded_faces(4, 4.0, 1.0);
        let centers: Vec<f64> = (0..4).map(|i| 0.5 * (faces[i] + faces[i + 1])).collect();
        assert_eq!(centers, vec![0.5, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn rejects_bad_config() {
        let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
        assert!(build_grid(&p, 8, 10.0, 1.0).is_err());
        assert!(build_grid(&p, 32, 0.5, 1.0).is_err());
        assert!(build_grid(&p, 32, 10.0, 0.5).is_err());
    }

    #[test]
    fn midpoint_weights_constant_density() {
        // N = 1, α = 0 (a ≡ 2): Σ w_i = Σ 0.1 · 1/2 = 0.5 = ∫_0^1 dr/2.
        let p = OperatorParams::new(0.0, 2.0, 1, 1.0).unwrap();
        let faces = graded_faces(10, 1.0, 1.0);
        let mass: f64 = (0..10)
            .map(|i| {
                let dr = faces[i + 1] - faces[i];
                dr * p.measure_weight(0.5 * (faces[i] + faces[i + 1]))
            })
            .sum();
        assert_abs_diff_eq!(mass, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn graded_spacings_geometric() {
        let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
        let g = build_grid(&p, 16, 10.0, 2.0).unwrap();
        let q = 2f64.powf(1.0 / 15.0);
        for i in 1..16 {
            assert_relative_eq!(g.spacings[i] / g.spacings[i - 1], q, max_relative = 1e-10);
        }
        assert_relative_eq!(g.spacings[15] / g.spacings[0], 2.0, max_relative = 1e-10);
        assert_abs_diff_eq!(g.spacings.iter().sum::<f64>(), 10.0, epsilon = 1e-12);
        assert!(g.nodes.iter().all(|&r| r > 0.0));
        assert!(g.mu_weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn mu_mass_close_to_quadrature() {
        for &(alpha, beta, dim) in &[(1.0, 3.0, 3), (0.5, 2.0, 2), (2.0, 4.0, 5)] {
            let p = OperatorParams::new(alpha, beta, dim, 1.0).unwrap();
            for &(n, grading) in &[(128usize, 1.0), (256, 1.5)] {
                let g = build_grid(&p, n, 12.0, grading).unwrap();
                let defect = g.mu_mass_defect().unwrap();
                assert!(defect <= 1e-3, "mass defect {defect:.2e} at ({alpha},{beta},{dim},{n})");
            }
        }
    }

    #[test]
    fn truncation_radius_oscillator() {
        // unit model, β = 2, N = 3: solve r²/2 - 2 + 1.5 ln(r/2) = 14 ln 10.
        let r = auto_truncation_radius(&unit(2.0, 3), 1e-14).unwrap();
        assert!((7.5..8.6).contains(&r), "oscillator truncation radius {r}");
        // tol = 1: the floor applies.
        assert_eq!(auto_truncation_radius(&unit(2.0, 3), 1.0).unwrap(), 4.0);
        // unit model, β = 4: exponent (r³-1)/3 reaches 14 ln 10 near 4.7.
        let r = auto_truncation_radius(&unit(4.0, 3), 1e-14).unwrap();
        assert!((4.3..5.2).contains(&r), "quartic truncation radius {r}");
    }

    #[test]
    fn truncation_radius_monotone_in_tol() {
        let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
        let r_loose = auto_truncation_radius(&p, 1e-6).unwrap();
        let r_tight = auto_truncation_radius(&p, 1e-14).unwrap();
        assert!(r_tight > r_loose);
        assert!(auto_truncation_radius(&OperatorParams::new(1.0, 0.0, 3, 1.0).unwrap(), 0.5).is_err());
    }
}
