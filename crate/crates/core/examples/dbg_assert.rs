use schrodlab::model::OperatorParams;
use schrodlab::spectral::{full_decomposition, SolverConfig};

fn main() {
    let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
    for n_cells in [512usize, 1024] {
        let cfg = SolverConfig { n_cells, ..Default::default() };
        let grid = cfg.build(&p).unwrap();
        match std::panic::catch_unwind(|| full_decomposition(&p, &grid, 12, 96).unwrap()) {
            Ok(dec) => {
                let lam0 = dec.lambda0;
                let mut worst = f64::NEG_INFINITY;
                let mut who = (0usize, 0usize);
                for m in &dec.modes {
                    for (n, &v) in m.eigenvalues.iter().enumerate() {
                        if v > worst { worst = v; who = (m.ell, n); }
                    }
                }
                println!("{n_cells}: ok lam0={lam0:.6} worst={worst:.6} at {who:?}");
            }
            Err(_) => {
                println!("{n_cells}: PANIC — dumping per-mode tops");
                for ell in 0..=12usize {
                    let m = schrodlab::matrix::assemble_mode(&p, &grid, ell);
                    let mode = schrodlab::spectral::solve_mode(&m, 96).unwrap();
                    let bad: Vec<(usize, f64)> = mode
                        .eigenvalues
                        .iter()
                        .enumerate()
                        .filter(|(_, &v)| v > -4.798)
                        .map(|(n, &v)| (n, v))
                        .collect();
                    if !bad.is_empty() {
                        println!("  ell={ell}: {bad:?}");
                    }
                    // monotonicity check within mode
                    for w in mode.eigenvalues.windows(2) {
                        if w[0] <= w[1] {
                            println!("  ell={ell}: NOT DESCENDING {w:?}");
                        }
                    }
                }
            }
        }
    }
}
