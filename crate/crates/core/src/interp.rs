//! Local cubic (4-point Lagrange) interpolation on a sorted node ladder.
//!
//! Radial eigenfunction profiles are smooth away from the origin, so a
//! sliding 4-point stencil gives O(h⁴) accuracy without global spline
//! solves. Evaluation below the first node or above the last falls back to
//! the boundary stencil (mild extrapolation over at most half a cell).

/// Precomputed stencil: indices into the node array plus Lagrange weights.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub idx: [usize; 4],
    pub w: [f64; 4],
}

/// Builds the 4-point stencil for evaluation at `r`.
pub fn stencil(nodes: &[f64], r: f64) -> Stencil {
    let n = nodes.len();
    assert!(n >= 4, "need at least 4 nodes to interpolate");
    // first node strictly above r
    let k = nodes.partition_point(|&x| x <= r);
    let start = k.saturating_sub(2).min(n - 4);
    let xs = [nodes[start], nodes[start + 1], nodes[start + 2], nodes[start + 3]];
    let mut w = [0.0; 4];
    for i in 0..4 {
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..4 {
            if i != j {
                num *= r - xs[j];
                den *= xs[i] - xs[j];
            }
        }
        w[i] = num / den;
    }
    Stencil { idx: [start, start + 1, start + 2, start + 3], w }
}

impl Stencil {
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.w
            .iter()
            .zip(self.idx.iter())
            .map(|(w, &i)| w * values[i])
            .sum()
    }
}

/// One-off interpolation of `values` (samples at `nodes`) at `r`.
pub fn interp(nodes: &[f64], values: &[f64], r: f64) -> f64 {
    stencil(nodes, r).eval(values)
}
