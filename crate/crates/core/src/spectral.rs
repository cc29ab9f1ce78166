//! Eigenmodes and the spectral decomposition consumed by the kernel and
//! evolution modules.
//!
//! Radial profiles are normalized in the discrete L²_μ norm of the *radial*
//! measure `r^{N-1} a(r)^{-1} dr` (no sphere factor); the angular
//! multiplicity of each mode is stored as metadata and applied by the
//! kernel module through the addition theorem. The ground-state profile
//! `phi0` is normalized over ℝ^N, i.e. divided by `|S^{N-1}|^{1/2}`.

use crate::error::{Error, Result};
use crate::grid::{auto_truncation_radius, build_grid, RadialGrid};
use crate::matrix::{assemble_mode, ModeMatrix};
use crate::model::OperatorParams;
use crate::sphere::{harmonic_dim, sphere_area};

#[derive(Debug, Clone)]
pub struct EigenMode {
    pub ell: usize,
    /// Eigenvalues sorted descending: λ_{ℓ,0} > λ_{ℓ,1} > ...
    pub eigenvalues: Vec<f64>,
    /// Radial profiles R_{ℓ,n} at the grid nodes, μ-orthonormal.
    pub profiles: Vec<Vec<f64>>,
    /// dim of the degree-ℓ harmonic space (angular multiplicity).
    pub multiplicity: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub params: OperatorParams,
    pub grid: RadialGrid,
    pub modes: Vec<EigenMode>,
    /// Global top eigenvalue; equals the ℓ = 0 top eigenvalue.
    pub lambda0: f64,
    /// Ground-state profile, normalized in L²_μ over ℝ^N, strictly positive.
    pub phi0: Vec<f64>,
}

/// Grid/solver configuration for the decomposition drivers.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub n_cells: usize,
    /// Explicit truncation radius; `None` selects it from barrier decay.
    pub r_max: Option<f64>,
    pub grading: f64,
    pub truncation_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { n_cells: 512, r_max: None, grading: 1.0, truncation_tol: 1e-14 }
    }
}

impl SolverConfig {
    pub fn resolve_r_max(&self, params: &OperatorParams) -> Result<f64> {
        match self.r_max {
            Some(r) => Ok(r),
            None => auto_truncation_radius(params, self.truncation_tol),
        }
    }

    pub fn build(&self, params: &OperatorParams) -> Result<RadialGrid> {
        build_grid(params, self.n_cells, self.resolve_r_max(params)?, self.grading)
    }

    pub fn refined(&self) -> Self {
        SolverConfig { n_cells: self.n_cells * 2, ..*self }
    }
}

/// Solves the top `n_modes` eigenpairs of one mode matrix.
///
/// Dense QL when most of the spectrum is wanted, Sturm bisection + inverse
/// iteration otherwise. Deterministic up to sign; the sign is fixed so the
/// entry of largest magnitude is positive.
pub fn solve_mode(matrix: &ModeMatrix, n_modes: usize) -> Result<EigenMode> {
    let dim = matrix.dimension();
    if n_modes > dim {
        return Err(Error::InvalidConfig(format!(
            "requested {n_modes} modes from a {dim}-cell discretization"
        )));
    }
    let (values, vectors) = if n_modes * 4 >= dim {
        let (mut v, mut z) = matrix.sym.eigen_full()?;
        v.truncate(n_modes);
        z.truncate(n_modes);
        (v, z)
    } else {
        matrix.sym.eigen_topk(n_modes)?
    };

    let mut profiles = Vec::with_capacity(n_modes);
    for vec in &vectors {
        // v is unit in ℓ², so R = v/√w is unit in the discrete L²_μ norm.
        let mut profile = matrix.profile_from_weighted(vec);
        let (mut max_abs, mut sign) = (0.0f64, 1.0f64);
        for &x in &profile {
            if x.abs() > max_abs {
                max_abs = x.abs();
                sign = if x >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        if sign < 0.0 {
            profile.iter_mut().for_each(|x| *x = -*x);
        }
        profiles.push(profile);
    }

    Ok(EigenMode {
        ell: matrix.ell,
        eigenvalues: values,
        profiles,
        multiplicity: harmonic_dim(matrix.params.dim, matrix.ell),
    })
}

/// Solves modes ℓ = 0..=l_max on the given grid.
pub fn full_decomposition(
    params: &OperatorParams,
    grid: &RadialGrid,
    l_max: usize,
    n_per_mode: usize,
) -> Result<SpectralDecomposition> {
    let n = n_per_mode.min(grid.n_cells());
    let mut modes = Vec::with_capacity(l_max + 1);
    for ell in 0..=l_max {
        let matrix = assemble_mode(params, grid, ell);
        modes.push(solve_mode(&matrix, n)?);
    }
    let lambda0 = modes[0].eigenvalues[0];
    debug_assert!(
        modes.iter().flat_map(|m| &m.eigenvalues).all(|&v| v <= lambda0 + 1e-12 * lambda0.abs()),
        "ground state not radial in the discrete spectrum"
    );
    let root_area = sphere_area(params.dim).sqrt();
    let phi0: Vec<f64> = modes[0].profiles[0].iter().map(|&x| x / root_area).collect();
    Ok(SpectralDecomposition { params: *params, grid: grid.clone(), modes, lambda0, phi0 })
}

/// Convenience driver: grid construction plus the (λ₀, φ₀) pair.
pub fn ground_state(params: &OperatorParams, cfg: &SolverConfig) -> Result<SpectralDecomposition> {
    if !params.classify_regime().discrete_spectrum {
        return Err(Error::RegimeViolation(
            "ground-state extraction needs a confining potential (beta > 0)".into(),
        ));
    }
    let grid = cfg.build(params)?;
    full_decomposition(params, &grid, 0, 2.min(grid.n_cells()))
}

impl SpectralDecomposition {
    /// Pooled eigenvalues across modes, sorted descending. With `expand`
    /// each level is repeated with its angular multiplicity.
    pub fn pooled_eigenvalues(&self, expand: bool) -> Vec<(f64, usize, usize)> {
        let mut pool = Vec::new();
        for mode in &self.modes {
            let copies = if expand { mode.multiplicity.round() as usize } else { 1 };
            for (n, &v) in mode.eigenvalues.iter().enumerate() {
                for _ in 0..copies.max(1) {
                    pool.push((v, mode.ell, n));
                }
            }
        }
        pool.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        pool
    }

    /// Largest Gram defect `max |⟨R_i, R_j⟩_μ - δ_ij|` within each mode.
    pub fn gram_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for mode in &self.modes {
            for i in 0..mode.profiles.len() {
                for j in 0..=i {
                    let dot = self.grid.inner_mu(&mode.profiles[i], &mode.profiles[j]);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((dot - expect).abs());
                }
            }
        }
        worst
    }
}

/// Second-order Richardson combination of the same quantity computed at
/// cell counts M and 2M: value `(4 v_{2M} - v_M)/3`, error `|v_{2M}-v_M|/3`.
pub fn richardson_extrapolate(v_coarse: f64, v_fine: f64) -> (f64, f64) {
    ((4.0 * v_fine - v_coarse) / 3.0, (v_fine - v_coarse).abs() / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Diffusion;
    use approx::assert_abs_diff_eq;

    fn oscillator() -> OperatorParams {
        OperatorParams::with_diffusion(0.0, 2.0, 3, 1.0, Diffusion::Unit).unwrap()
    }

    fn grid_for(p: &OperatorParams, n: usize) -> RadialGrid {
        SolverConfig { n_cells: n, ..Default::default() }.build(p).unwrap()
    }

    #[test]
    fn oscillator_radial_levels() {
        // Δ - r² on ℝ³: λ = -(3 + 2ℓ + 4n).
        let p = oscillator();
        let g = grid_for(&p, 256);
        let m0 = solve_mode(&assemble_mode(&p, &g, 0), 3).unwrap();
        for (n, expect) in [(0usize, -3.0), (1, -7.0), (2, -11.0)] {
            assert_abs_diff_eq!(m0.eigenvalues[n], expect, epsilon = 3e-3);
        }
        let m1 = solve_mode(&assemble_mode(&p, &g, 1), 2).unwrap();
        assert_abs_diff_eq!(m1.eigenvalues[0], -5.0, epsilon = 3e-3);
        assert_abs_diff_eq!(m1.eigenvalues[1], -9.0, epsilon = 6e-3);
        // centrifugal monotonicity
        assert!(m1.eigenvalues[0] < m0.eigenvalues[0]);
    }

    #[test]
    fn richardson_hits_oscillator_ground_level() {
        let p = oscillator();
        let r_max = SolverConfig::default().resolve_r_max(&p).unwrap();
        let lam = |n: usize| {
            let g = build_grid(&p, n, r_max, 1.0).unwrap();
            solve_mode(&assemble_mode(&p, &g, 0), 1).unwrap().eigenvalues[0]
        };
        let (improved, err) = richardson_extrapolate(lam(256), lam(512));
        assert_abs_diff_eq!(improved, -3.0, epsilon = 1e-4);
        assert!(err < 1e-2);
    }

    #[test]
    fn richardson_arithmetic() {
        assert_eq!(richardson_extrapolate(1.5, 1.5), (1.5, 0.0));
        let (v, e) = richardson_extrapolate(-2.9, -2.975);
        assert_abs_diff_eq!(v, -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e, 0.025, epsilon = 1e-12);
    }

    #[test]
    fn ground_profile_matches_gaussian() {
        // unit model, β = 2, N = 3 at 512 cells: φ ∝ e^{-r²/2} to 1e-3 in
        // relative L²_μ error.
        let p = oscillator();
        let dec = ground_state(&p, &SolverConfig::default()).unwrap();
        let g = &dec.grid;
        let mut exact: Vec<f64> = g.nodes.iter().map(|&r| (-0.5 * r * r).exp()).collect();
        let norm = g.norm_mu(&exact);
        exact.iter_mut().for_each(|x| *x /= norm);
        // compare radial-normalized profiles
        let profile = &dec.modes[0].profiles[0];
        let diff: Vec<f64> = profile.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let rel = g.norm_mu(&diff);
        assert!(rel <= 1e-3, "relative profile error {rel:.2e}");
        assert!(dec.lambda0 < 0.0);
        assert!(dec.phi0.iter().all(|&x| x > 0.0), "ground state not strictly positive");
    }

    #[test]
    fn orthonormality_and_simplicity() {
        let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
        let g = grid_for(&p, 192);
        let dec = full_decomposition(&p, &g, 2, 6).unwrap();
        assert!(dec.gram_defect() <= 1e-10, "gram defect {:.2e}", dec.gram_defect());
        for mode in &dec.modes {
            for w in mode.eigenvalues.windows(2) {
                assert!(w[0] > w[1], "eigenvalues not strictly decreasing: {w:?}");
            }
            assert!(mode.eigenvalues.iter().all(|&v| v < 0.0));
        }
        // the gap above the ground state is strict
        let pool = dec.pooled_eigenvalues(false);
        assert!(pool[0].0 - pool[1].0 > 1e-6);
        assert_eq!(pool[0].1, 0, "ground state must be radial");
        assert_abs_diff_eq!(pool[0].0, dec.lambda0);
    }

    #[test]
    fn oscillator_degeneracy_pooling() {
        let p = oscillator();
        let g = grid_for(&p, 256);
        let dec = full_decomposition(&p, &g, 2, 3).unwrap();
        let pooled = dec.pooled_eigenvalues(true);
        let expect = [-3.0, -5.0, -5.0, -5.0, -7.0];
        for (k, &e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(pooled[k].0, e, epsilon = 5e-3);
        }
        // storage keeps one copy per radial problem
        assert_eq!(dec.modes[1].profiles.len(), 3);
        assert_eq!(dec.modes[1].multiplicity, 3.0);
    }

    #[test]
    fn theta_monotonicity() {
        // larger θ deepens the potential and lowers λ₀.
        let mut last = f64::INFINITY;
        for &theta in &[0.5, 1.0, 2.0] {
            let p = OperatorParams::new(1.0, 3.0, 3, theta).unwrap();
            let dec = ground_state(
                &p,
                &SolverConfig { n_cells: 128, ..Default::default() },
            )
            .unwrap();
            assert!(dec.lambda0 < last, "λ₀ not strictly decreasing in θ");
            last = dec.lambda0;
        }
    }

    #[test]
    fn dense_and_bisection_paths_agree() {
        let p = OperatorParams::new(0.5, 4.0, 3, 1.0).unwrap();
        let g = grid_for(&p, 160);
        let m = assemble_mode(&p, &g, 1);
        let full = solve_mode(&m, 160).unwrap(); // dense QL
        let topk = solve_mode(&m, 8).unwrap(); // bisection path
        for n in 0..8 {
            assert_abs_diff_eq!(full.eigenvalues[n], topk.eigenvalues[n], epsilon = 1e-9);
            let dot = g.inner_mu(&full.profiles[n], &topk.profiles[n]);
            assert_abs_diff_eq!(dot.abs(), 1.0, epsilon = 1e-9);
        }
    }
}
