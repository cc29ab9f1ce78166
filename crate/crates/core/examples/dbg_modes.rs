use schrodlab::matrix::assemble_mode;
use schrodlab::model::OperatorParams;
use schrodlab::spectral::{solve_mode, SolverConfig};

fn main() {
    let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
    let cfg = SolverConfig { n_cells: 512, ..Default::default() };
    let grid = cfg.build(&p).unwrap();
    println!("r_max = {}", grid.r_max);
    for ell in 0..=12usize {
        let m = assemble_mode(&p, &grid, ell);
        let mode = solve_mode(&m, 96).unwrap();
        // residual of the top eigenpair
        let top = &mode.profiles[0];
        let v: Vec<f64> = top.iter().zip(&m.sqrt_w).map(|(x, s)| x * s).collect();
        let av = m.sym.apply(&v);
        let res: f64 = av.iter().zip(&v).map(|(a, b)| (a - mode.eigenvalues[0] * b).powi(2)).sum::<f64>().sqrt();
        println!("ell={ell:2} top={:+.8e} second={:+.8e} res={:.2e}", mode.eigenvalues[0], mode.eigenvalues[1], res);
    }
}
