use schrodlab::barrier::{residual_ratio, residual_ratio_fd};
use schrodlab::model::OperatorParams;
fn main() {
    for &(alpha, beta, theta) in &[(1.0, 3.0, 1.0), (1.0, 3.0, 2.0), (0.5, 4.0, 1.0)] {
        let p = OperatorParams::new(alpha, beta, 3, theta).unwrap();
        for &lam in &[0.0, -2.5] {
            for &r in &[5.0, 20.0, 80.0] {
                let e = residual_ratio(&p, lam, r);
                let f = residual_ratio_fd(&p, lam, r);
                println!("a={alpha} b={beta} th={theta} lam={lam} r={r}: exact={e:+.12e} fd={f:+.12e} rel={:.3e}", ((f-e)/e).abs());
            }
        }
    }
}
