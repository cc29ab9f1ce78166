//! Zonal spherical-harmonic machinery on S^{N-1}.
//!
//! The degree-ℓ reproducing (zonal) kernel is
//! `Z_ℓ(t) = (dim H_ℓ / |S^{N-1}|) · C_ℓ^ν(t)/C_ℓ^ν(1)`, ν = (N-2)/2,
//! so that `Σ_m Y_{ℓm}(x̂) Y_{ℓm}(ŷ) = Z_ℓ(x̂·ŷ)` and
//! `∫ Z_ℓ(x̂·ẑ) Z_{ℓ'}(ŷ·ẑ) dẑ = δ_{ℓℓ'} Z_ℓ(x̂·ŷ)`.
//!
//! The normalized ratio `P̃_ℓ = C_ℓ^ν/C_ℓ^ν(1)` satisfies
//! `(ℓ+2ν) P̃_{ℓ+1} = 2(ℓ+ν) t P̃_ℓ - ℓ P̃_{ℓ-1}`, which degenerates
//! gracefully to Chebyshev (N = 2) and Legendre (N = 3).

/// Surface area of the unit sphere S^{N-1} in ℝ^N.
pub fn sphere_area(dim: usize) -> f64 {
    assert!(dim >= 1);
    // |S^{N-1}| = 2 π^{N/2} / Γ(N/2), with Γ evaluated by half-integer
    // recursion from Γ(1) = 1, Γ(1/2) = √π.
    let n = dim as f64;
    let mut gamma = if dim % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut arg = if dim % 2 == 0 { 1.0 } else { 0.5 };
    while arg + 1.0 <= n / 2.0 + 1e-12 {
        gamma *= arg;
        arg += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma
}

/// Dimension of the space of degree-ℓ spherical harmonics on S^{N-1}.
pub fn harmonic_dim(dim: usize, ell: usize) -> f64 {
    match dim {
        1 => {
            // S^0 = {±1}: one even and one odd function.
            if ell <= 1 {
                1.0
            } else {
                0.0
            }
        }
        _ => {
            let binom = |n: i64, k: i64| -> f64 {
                if k < 0 || n < k {
                    return 0.0;
                }
                let mut v: u128 = 1;
                for i in 0..k {
                    v = v * (n - i) as u128 / (i + 1) as u128;
                }
                v as f64
            };
            let n = dim as i64;
            let l = ell as i64;
            binom(n + l - 1, l) - binom(n + l - 3, l - 2)
        }
    }
}

/// Normalized ultraspherical values P̃_ℓ(t) for ℓ = 0..=l_max; P̃_ℓ(1) = 1.
pub fn zonal_ratio(dim: usize, l_max: usize, t: f64) -> Vec<f64> {
    assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&t), "cos(angle) out of range: {t}");
    let t = t.clamp(-1.0, 1.0);
    if dim == 1 {
        // ℓ = 0 even, ℓ = 1 odd on {±1}
        return (0..=l_max).map(|l| if l == 0 { 1.0 } else { t.powi(l as i32) }).collect();
    }
    let nu = (dim as f64 - 2.0) / 2.0;
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(1.0);
    if l_max == 0 {
        return out;
    }
    out.push(t);
    for l in 1..l_max {
        let lf = l as f64;
        let next = (2.0 * (lf + nu) * t * out[l] - lf * out[l - 1]) / (lf + 2.0 * nu);
        out.push(next);
    }
    out
}

/// Zonal kernel values Z_ℓ(t) for ℓ = 0..=l_max.
pub fn zonal_kernel(dim: usize, l_max: usize, t: f64) -> Vec<f64> {
    let area = sphere_area(dim);
    zonal_ratio(dim, l_max, t)
        .into_iter()
        .enumerate()
        .map(|(l, p)| harmonic_dim(dim, l) / area * p)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn harmonic_dims() {
        // N = 3: 2ℓ+1; N = 2: 1, 2, 2, ...; N = 4: (ℓ+1)²
        for l in 0..10 {
            assert_eq!(harmonic_dim(3, l), (2 * l + 1) as f64);
            assert_eq!(harmonic_dim(4, l), ((l + 1) * (l + 1)) as f64);
        }
        assert_eq!(harmonic_dim(2, 0), 1.0);
        for l in 1..10 {
            assert_eq!(harmonic_dim(2, l), 2.0);
        }
    }

    #[test]
    fn legendre_cross_check_n3() {
        // ν = 1/2 reduces to Legendre; compare with explicit P_4 and P_5.
        let p4 = |x: f64| (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0;
        let p5 = |x: f64| (63.0 * x.powi(5) - 70.0 * x.powi(3) + 15.0 * x) / 8.0;
        for &t in &[-0.9, -0.3, 0.0, 0.4, 0.95, 1.0] {
            let vals = zonal_ratio(3, 5, t);
            assert_abs_diff_eq!(vals[4], p4(t), epsilon = 1e-14);
            assert_abs_diff_eq!(vals[5], p5(t), epsilon = 1e-14);
        }
    }

    #[test]
    fn chebyshev_cross_check_n2() {
        for &t in &[-0.8f64, -0.1, 0.33, 0.99] {
            let theta = t.acos();
            let vals = zonal_ratio(2, 8, t);
            for l in 0..=8 {
                assert_abs_diff_eq!(vals[l], (l as f64 * theta).cos(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zonal_at_one_is_density() {
        // Z_ℓ(1) = dim H_ℓ / |S^{N-1}|
        for dim in [2usize, 3, 4, 6] {
            let z = zonal_kernel(dim, 6, 1.0);
            for l in 0..=6 {
                assert_relative_eq!(
                    z[l],
                    harmonic_dim(dim, l) / sphere_area(dim),
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn addition_theorem_quadrature_n3() {
        // ∫ Z_ℓ(x̂·ẑ)Z_ℓ'(ŷ·ẑ) dẑ = δ Z_ℓ(x̂·ŷ) on S²; reduce to a 1D
        // integral by Legendre orthogonality: ∫_{-1}^{1} P_l P_l' du =
        // 2/(2l+1) δ. Checked through the kernel normalization.
        let gamma: f64 = 0.7;
        for l in 0..5usize {
            let z = zonal_kernel(3, l, gamma.cos());
            // composition of degree-l with itself at angle gamma:
            // (2l+1)/(4π) P_l(cos γ) must equal Z_l(cos γ)
            let expect = (2 * l + 1) as f64 / (4.0 * PI) * zonal_ratio(3, l, gamma.cos())[l];
            assert_relative_eq!(z[l], expect, max_relative = 1e-13);
        }
    }
}
