use schrodlab::model::OperatorParams;
use schrodlab::spectral::SolverConfig;
use schrodlab::verify::*;
use std::time::Instant;

fn main() {
    let p = OperatorParams::new(1.0, 3.0, 3, 1.0).unwrap();
    let cfg = SolverConfig { n_cells: 512, ..Default::default() };
    let kcfg = KernelConfig::default();

    let t0 = Instant::now();
    let r = sandwich_report(&p, &cfg, true).unwrap();
    println!("sandwich [{:?}]: pass={} stab={:.3e} {:?}", t0.elapsed(), r.pass, r.stability, r.constants);

    let t0 = Instant::now();
    let r = gradient_ratio_report(&p, &cfg).unwrap();
    println!("gradient th=1 [{:?}]: pass={} {:?}", t0.elapsed(), r.pass, r.constants);

    let p2 = OperatorParams::new(1.0, 3.0, 3, 2.0).unwrap();
    let r = gradient_ratio_report(&p2, &cfg).unwrap();
    println!("gradient th=2: pass={} {:?}", r.pass, r.constants);

    let t0 = Instant::now();
    let r = diag_lower_report(&p, &cfg, &kcfg).unwrap();
    println!("diag lower [{:?}]: pass={} stab={:.3e} M={:?} meta={:?}", t0.elapsed(), r.pass, r.stability, r.constants, r.metadata.get("uniform_in_t"));

    let t0 = Instant::now();
    let r = upper_bound_report(&p, &cfg, &kcfg).unwrap();
    println!("upper bound [{:?}]: pass={} stab={:.3e} {:?} viol={} meta={:?}", t0.elapsed(), r.pass, r.stability, r.constants, r.violations, r.metadata);

    let t0 = Instant::now();
    let r = ultracontractivity_report(&p, &cfg, &kcfg).unwrap();
    println!("ultra [{:?}]: pass={} stab={:.3e} {:?}", t0.elapsed(), r.pass, r.stability, r.constants);

    let t0 = Instant::now();
    let r = ck_symmetry_positivity_report(&p, &cfg, &kcfg).unwrap();
    println!("ck [{:?}]: pass={} {:?}", t0.elapsed(), r.pass, r.constants);

    let t0 = Instant::now();
    let r = hille_yosida_report(&p, &cfg, 1.0, 100.0, 1001).unwrap();
    println!("hy [{:?}]: pass={} stab={:.3e} {:?}", t0.elapsed(), r.pass, r.stability, r.constants);

    let t0 = Instant::now();
    let r = cross_validation_report(&p, &cfg, 0.5).unwrap();
    println!("xval [{:?}]: pass={} {:?}", t0.elapsed(), r.pass, r.constants);
}
