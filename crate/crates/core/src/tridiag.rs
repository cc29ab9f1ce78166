//! Symmetric tridiagonal eigensolvers.
//!
//! Two routes, which cross-check each other in the tests:
//! - `eigen_full`: implicit-QL with eigenvector accumulation (dense path,
//!   O(M³) with vectors), for full decompositions at desk scale;
//! - `eigen_topk`: Sturm-count bisection for the k largest eigenvalues plus
//!   inverse iteration for their vectors, O(M) per eigenvalue. The mode
//!   matrices are Sturm–Liouville discretizations, so their per-mode spectra
//!   are simple and inverse iteration is safe; a Gram–Schmidt pass guards
//!   the (never observed) near-degenerate case.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// Off-diagonal entries; `off[i]` couples i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// Gershgorin bounds (lo, hi) containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below x (Sturm / LDLᵀ inertia count).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            if q == 0.0 {
                q = -1e-300;
            }
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues, descending; no vectors.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(d)
    }

    /// All eigenpairs, descending by eigenvalue; vectors orthonormal.
    pub fn eigen_full(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.n();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        let mut z: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut col = vec![0.0; n];
                col[j] = 1.0;
                col
            })
            .collect();
        ql_implicit(&mut d, &mut e, Some(&mut z))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap());
        let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
        let vectors: Vec<Vec<f64>> = order.iter().map(|&j| z[j].clone()).collect();
        Ok((values, vectors))
    }

    /// The k largest eigenpairs, descending.
    pub fn eigen_topk(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.n();
        assert!(k <= n, "requested {k} modes from a dimension-{n} matrix");
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).max(1e-300);
        let mut values: Vec<f64> = Vec::with_capacity(k);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);

        for j in 0..k {
            // bisect for the j-th largest eigenvalue: invariant
            // count_below(hi) >= n - j, count_below(lo) < n - j.
            let mut lo = glo;
            let mut hi = ghi + 1e-12 * span;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if self.count_below(mid) >= n - j {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * (lo.abs().max(hi.abs()) + 1.0) {
                    break;
                }
            }
            let lambda = 0.5 * (lo + hi);
            let mut near: Vec<&Vec<f64>> = Vec::new();
            for (v, vec) in values.iter().zip(&vectors) {
                if (v - lambda).abs() < 1e-8 * span {
                    near.push(vec);
                }
            }
            let (refined, v) = self.inverse_iterate(lambda, span, &near, j)?;
            values.push(refined);
            vectors.push(v);
        }
        Ok((values, vectors))
    }

    fn inverse_iterate(
        &self,
        lambda: f64,
        span: f64,
        orthogonalize_against: &[&Vec<f64>],
        seed_tag: usize,
    ) -> Result<(f64, Vec<f64>)> {
        let n = self.n();
        let mut state = 0x2545f4914f6cdd1du64 ^ (seed_tag as u64).wrapping_mul(0x9e3779b97f4a7c15);
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        // Offset the shift off the bisected eigenvalue: a shift that lands on
        // the eigenvalue to the last bit overflows the solve; 1e-13·span is
        // far below any gap of these simple Sturm–Liouville spectra.
        let mut offset = 1e-13 * span;
        let mut best_res = f64::INFINITY;
        for _attempt in 0..4 {
            let lu = ShiftedLu::factor(self, lambda + offset);
            let mut v: Vec<f64> = (0..n).map(|_| rand()).collect();
            normalize(&mut v);
            for _ in 0..8 {
                for q in orthogonalize_against {
                    let dot: f64 = v.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(q.iter()).for_each(|(a, b)| *a -= dot * b);
                }
                let mut w = lu.solve(&v);
                let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !wn.is_finite() || wn == 0.0 {
                    break; // overflowed or annihilated: retry with larger offset
                }
                normalize(&mut w);
                v = w;
                let av = self.apply(&v);
                let rayleigh: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
                let res: f64 = av
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - rayleigh * b) * (a - rayleigh * b))
                    .sum::<f64>()
                    .sqrt();
                if res <= 1e-13 * span {
                    return Ok((rayleigh, v));
                }
                best_res = best_res.min(res);
            }
            if best_res <= 1e-10 * span {
                let av = self.apply(&v);
                let rq: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
                return Ok((rq, v));
            }
            offset *= 100.0;
        }
        Err(Error::ConvergenceFailure(format!(
            "inverse iteration stalled at residual {best_res:.3e} near lambda = {lambda:.6e}"
        )))
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// LU factorization of (T - λI) with partial pivoting (dgttrf-style).
struct ShiftedLu {
    n: usize,
    low: Vec<f64>,  // multipliers
    d: Vec<f64>,    // main diagonal of U
    u1: Vec<f64>,   // first superdiagonal of U
    u2: Vec<f64>,   // second superdiagonal of U (fill-in)
    piv: Vec<bool>, // row i swapped with i+1
}

impl ShiftedLu {
    fn factor(t: &SymTridiag, lambda: f64) -> Self {
        let n = t.n();
        let mut d: Vec<f64> = t.diag.iter().map(|&x| x - lambda).collect();
        let dl = t.off.clone();
        let mut du = t.off.clone();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut low = vec![0.0; n.saturating_sub(1)];
        let mut piv = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let pivot = if d[i] != 0.0 { d[i] } else { 1e-300 };
                let m = dl[i] / pivot;
                low[i] = m;
                d[i + 1] -= m * du[i];
            } else {
                // swap rows i and i+1
                piv[i] = true;
                let m = d[i] / dl[i];
                low[i] = m;
                let du_old = du[i];
                d[i] = dl[i];
                du[i] = d[i + 1];
                d[i + 1] = du_old - m * d[i + 1];
                if i + 2 < n {
                    u2[i] = du[i + 1];
                    du[i + 1] = -m * du[i + 1];
                }
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = 1e-300;
        }
        ShiftedLu { n, low, d, u1: du, u2, piv }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.piv[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.low[i] * x[i];
        }
        x[n - 1] /= self.d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.u1[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.u1[i] * x[i + 1] - self.u2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

/// Implicit-QL with shifts; `d` = diagonal, `e` = subdiagonals (length n,
/// last entry scratch). If `z` is given its columns accumulate the
/// eigenvectors of the original matrix.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::ConvergenceFailure(format!(
                    "QL sweep cap exceeded at row {l} of {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g == 0.0 { 1.0 } else { g }));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut early = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (left, right) = z.split_at_mut(i + 1);
                    let (zi, zi1) = (&mut left[i], &mut right[0]);
                    for k in 0..zi.len() {
                        f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn laplacian_1d(n: usize) -> SymTridiag {
        SymTridiag { diag: vec![-2.0; n], off: vec![1.0; n - 1] }
    }

    fn random_tridiag(n: usize, seed: u64) -> SymTridiag {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        SymTridiag {
            diag: (0..n).map(|_| next() * 3.0).collect(),
            off: (0..n - 1).map(|_| next()).collect(),
        }
    }

    #[test]
    fn laplacian_spectrum_closed_form() {
        let n = 40;
        let t = laplacian_1d(n);
        let exact: Vec<f64> = (1..=n)
            .map(|k| -2.0 + 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos())
            .collect();
        let got = t.eigenvalues().unwrap();
        for (g, e) in got.iter().zip(exact.iter()) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-12);
        }
        let (vals, vecs) = t.eigen_full().unwrap();
        for (v, lam) in vecs.iter().zip(&vals) {
            let res: f64 = t
                .apply(v)
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lam * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-12, "residual {res}");
        }
    }

    #[test]
    fn topk_matches_full() {
        let t = random_tridiag(120, 0xABCD);
        let (full_vals, _) = t.eigen_full().unwrap();
        let (top_vals, top_vecs) = t.eigen_topk(15).unwrap();
        for j in 0..15 {
            assert_abs_diff_eq!(top_vals[j], full_vals[j], epsilon = 1e-11);
            let res: f64 = t
                .apply(&top_vecs[j])
                .iter()
                .zip(&top_vecs[j])
                .map(|(a, b)| (a - top_vals[j] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10, "residual {res} at mode {j}");
        }
        // orthonormality of the iterated vectors
        for i in 0..15 {
            for j in 0..=i {
                let dot: f64 = top_vecs[i].iter().zip(&top_vecs[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn full_vectors_orthonormal() {
        let t = random_tridiag(60, 0x1234);
        let (_, vecs) = t.eigen_full().unwrap();
        for i in 0..60 {
            for j in 0..=i {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sturm_count_consistent() {
        let t = random_tridiag(80, 0xFEED);
        let vals = t.eigenvalues().unwrap(); // descending
        let (lo, hi) = t.gershgorin();
        assert_eq!(t.count_below(lo - 1.0), 0);
        assert_eq!(t.count_below(hi + 1.0), 80);
        for probe in [-2.0, -0.5, 0.0, 0.7, 2.5] {
            let expect = vals.iter().filter(|&&v| v < probe).count();
            assert_eq!(t.count_below(probe), expect, "count at {probe}");
        }
    }
}
