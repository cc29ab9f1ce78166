//! Command-line driver: configuration, subcommand dispatch, and
//! machine-readable CSV/JSON outputs for the verification suites.
//!
//! Exit codes: 0 = every invoked verdict passed; 1 = a verification failed
//! (the first failing check is named on stderr); 2 = configuration or
//! regime error (e.g. a kernel bound requested outside its validity range).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use schrodlab::barrier::{residual_ratio, BarrierFunction};
use schrodlab::config::RunConfig;
use schrodlab::error::Error;
use schrodlab::evolve::{evolve, DtControl, EvolutionState, ResolventProber};
use schrodlab::interp;
use schrodlab::kernel::KernelEvaluator;
use schrodlab::matrix::assemble_mode;
use schrodlab::spectral::{full_decomposition, richardson_extrapolate, SolverConfig};
use schrodlab::verify;

#[derive(Parser)]
#[command(name = "schrodlab", version, about = "Radial spectral laboratory for (1+|x|^a)Δ - θ²|x|^b")]
struct Cli {
    /// Path to the TOML run configuration.
    config: PathBuf,
    /// Dotted-path overrides, e.g. --set grid.n_cells=256
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues per angular mode with Richardson error estimates (CSV).
    Spectrum,
    /// One radial eigenfunction profile (CSV: r, value).
    Eigfun {
        #[arg(long, default_value_t = 0)]
        ell: usize,
        #[arg(long, default_value_t = 0)]
        n: usize,
    },
    /// Barrier functions, sandwich/gradient-ratio checks (CSV + JSON).
    Asymptotics,
    /// Evaluate the heat kernel at one (t, x, y) triple.
    KernelEval {
        #[arg(long)]
        t: f64,
        /// Point as "r:theta" (polar) or "x,y,z" (Cartesian, dim 3).
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Full kernel bound suite (on-diagonal, upper bound, slope, CK).
    KernelVerify,
    /// Time-step the semigroup from a configured initial datum.
    Evolve,
    /// Resolvent-norm sweep along Re λ = 1 (CSV).
    Resolvent,
    /// Pointwise coefficient inequalities plus the 20-tuple sweep (JSON).
    Inequalities,
    /// Aggregate every verification into one JSON report.
    Report,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(pass) => {
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_)
                | Error::InvalidParams(_)
                | Error::RegimeViolation(_)
                | Error::Io(_) => 2,
                _ => 2,
            }
        }
    };
    std::process::exit(code);
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Error> {
    let dir = PathBuf::from(&cfg.output.directory);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = RunConfig::load(&cli.config, &cli.set)?;
    let dir = out_dir(&cfg)?;
    let params = cfg.params;
    let solver = cfg.solver();
    let kcfg = cfg.kernel_config();

    match &cli.cmd {
        Cmd::Spectrum => {
            let r_max = solver.resolve_r_max(&params)?;
            let pinned = SolverConfig { r_max: Some(r_max), ..solver };
            let grid = pinned.build(&params)?;
            let fine = pinned.refined().build(&params)?;
            let n = cfg.spectral.n_per_mode.min(grid.n_cells());
            let coarse_dec = full_decomposition(&params, &grid, cfg.spectral.l_max, n)?;
            let fine_dec = full_decomposition(&params, &fine, cfg.spectral.l_max, n)?;
            let mut csv = String::from("ell,n,eigenvalue,error_estimate\n");
            for (mc, mf) in coarse_dec.modes.iter().zip(&fine_dec.modes) {
                for (i, (&vc, &vf)) in mc.eigenvalues.iter().zip(&mf.eigenvalues).enumerate() {
                    let (improved, err) = richardson_extrapolate(vc, vf);
                    csv.push_str(&format!("{},{},{:e},{:e}\n", mc.ell, i, improved, err));
                }
            }
            write_file(&dir, "spectrum.csv", &csv)?;
            println!("lambda0 = {:e}", fine_dec.lambda0);
            Ok(true)
        }

        Cmd::Eigfun { ell, n } => {
            let grid = solver.build(&params)?;
            if *ell > cfg.spectral.l_max {
                return Err(Error::InvalidConfig(format!(
                    "ell = {ell} above configured l_max = {}",
                    cfg.spectral.l_max
                )));
            }
            let dec = full_decomposition(&params, &grid, *ell, (*n + 1).max(1))?;
            let mode = &dec.modes[*ell];
            let profile = mode.profiles.get(*n).ok_or_else(|| {
                Error::InvalidConfig(format!("mode n = {n} not solved (ell = {ell})"))
            })?;
            let mut csv = String::from("r,value\n");
            for (r, v) in grid.nodes.iter().zip(profile) {
                csv.push_str(&format!("{r:e},{v:e}\n"));
            }
            write_file(&dir, "eigfun.csv", &csv)?;
            Ok(true)
        }

        Cmd::Asymptotics => {
            let flags = params.classify_regime();
            let r_max = solver.resolve_r_max(&params)?;
            let pinned = SolverConfig { r_max: Some(r_max), ..solver };
            let grid = pinned.build(&params)?;
            let dec = full_decomposition(&params, &grid, 0, 1)?;
            let f0 = BarrierFunction::new(params, 0.0, grid.r_max * 1.001)?;
            let table = verify::gradient_ratio_table(&dec, 48);
            let mut csv = String::from("r,f_lambda,phi,ratio,h_lambda\n");
            for &(r, ratio) in &table {
                let phi = interp::interp(&grid.nodes, &dec.phi0, r);
                csv.push_str(&format!(
                    "{r:e},{:e},{phi:e},{ratio:e},{:e}\n",
                    f0.eval(r),
                    residual_ratio(&params, 0.0, r)
                ));
            }
            write_file(&dir, "asymptotics.csv", &csv)?;

            let mut reports = Vec::new();
            reports.push(verify::sandwich_report(&params, &pinned, flags.sandwich)?);
            reports.push(verify::gradient_ratio_report(&params, &pinned)?);
            if flags.kernel_estimates {
                reports.push(verify::decay_report(&params, &pinned, 2, 3)?);
            }
            let pass = reports.iter().all(|r| r.pass);
            write_file(&dir, "asymptotics.json", &to_json(&reports))?;
            report_verdict(&reports);
            Ok(pass)
        }

        Cmd::KernelEval { t, x, y } => {
            let px = parse_point(x, params.dim)?;
            let py = parse_point(y, params.dim)?;
            let (rx, ry, cos_gamma) = pair_geometry(&px, &py)?;
            let grid = solver.build(&params)?;
            let dec =
                full_decomposition(&params, &grid, cfg.spectral.l_max, cfg.spectral.n_per_mode)?;
            let ev = KernelEvaluator::new(dec);
            let kmu = ev.eval_k_mu(*t, rx, ry, cos_gamma);
            let k = ev.eval_k(*t, rx, ry, cos_gamma);
            let out = serde_json::json!({
                "t": t, "rx": rx, "ry": ry, "cos_gamma": cos_gamma,
                "k_mu": kmu.value, "k": k.value,
                "tail": kmu.tail, "tail_green": kmu.green(),
            });
            write_file(&dir, "kernel-eval.json", &to_json(&out))?;
            println!("k_mu = {:e}  k = {:e}  tail = {:.2e}", kmu.value, k.value, kmu.tail);
            Ok(true)
        }

        Cmd::KernelVerify => {
            let flags = params.classify_regime();
            if !flags.kernel_estimates {
                return Err(Error::RegimeViolation(format!(
                    "kernel bounds hold for N > 2, alpha in [0,2), beta > 2; \
                     got (alpha={}, beta={}, N={})",
                    params.alpha, params.beta, params.dim
                )));
            }
            let r_max = solver.resolve_r_max(&params)?;
            let pinned = SolverConfig { r_max: Some(r_max), ..solver };
            let reports = vec![
                verify::diag_lower_report(&params, &pinned, &kcfg)?,
                verify::upper_bound_report(&params, &pinned, &kcfg)?,
                verify::ultracontractivity_report(&params, &pinned, &kcfg)?,
                verify::ck_symmetry_positivity_report(&params, &pinned, &kcfg)?,
            ];
            let pass = reports.iter().all(|r| r.pass);
            write_file(&dir, "kernel-verify.json", &to_json(&reports))?;
            report_verdict(&reports);
            Ok(pass)
        }

        Cmd::Evolve => {
            let grid = solver.build(&params)?;
            let matrix = assemble_mode(&params, &grid, cfg.evolve.ell);
            let datum = initial_datum(&cfg, &grid)?;
            let ctrl = DtControl { local_tol: cfg.evolve.local_tol, ..Default::default() };
            let state = EvolutionState::new(&matrix, datum.clone());
            let out = evolve(&state, &matrix, cfg.evolve.t_final, &ctrl)?;
            let mut csv = String::from("r,initial,evolved\n");
            for i in 0..grid.n_cells() {
                csv.push_str(&format!("{:e},{:e},{:e}\n", grid.nodes[i], datum[i], out.profile[i]));
            }
            write_file(&dir, "evolve.csv", &csv)?;
            let stride = (out.norm_history.len() / 256).max(1);
            let history: Vec<(f64, f64)> = out
                .norm_history
                .iter()
                .step_by(stride)
                .chain(out.norm_history.last())
                .cloned()
                .collect();
            let meta = serde_json::json!({
                "t_final": out.time,
                "steps_accepted": out.norm_history.len() - 1,
                "norm_history": history,
            });
            write_file(&dir, "evolve.json", &to_json(&meta))?;
            Ok(true)
        }

        Cmd::Resolvent => {
            let grid = solver.build(&params)?;
            let matrix = assemble_mode(&params, &grid, 0);
            let prober = ResolventProber::new(&matrix)?;
            let mut csv = String::from("re,im,norm,hy_product\n");
            let mut sup = 0.0f64;
            for k in 0..1001 {
                let tau = -100.0 + 0.2 * k as f64;
                let probe = prober.probe(num_complex::Complex64::new(1.0, tau))?;
                sup = sup.max(probe.hy_product);
                csv.push_str(&format!(
                    "{:e},{:e},{:e},{:e}\n",
                    probe.re, probe.im, probe.norm, probe.hy_product
                ));
            }
            write_file(&dir, "resolvent.csv", &csv)?;
            println!("sup |lambda|*norm along Re lambda = 1: {sup:e}");
            Ok(true)
        }

        Cmd::Inequalities => {
            let reports = verify::inequalities_suite(&params, 10_000, kcfg.seed)?;
            let pass = reports.iter().all(|r| r.pass);
            write_file(&dir, "inequalities.json", &to_json(&reports))?;
            if let Some(first) = reports.iter().find(|r| !r.pass) {
                eprintln!(
                    "FAIL {}: empirical {:e} > paper {:e} at r = {:e}",
                    first.name, first.constant_empirical, first.constant_paper, first.worst_radius
                );
            }
            Ok(pass)
        }

        Cmd::Report => {
            let full = verify::full_report(&params, &solver, &kcfg)?;
            let out = serde_json::json!({
                "resolved_config": &cfg,
                "resolved_r_max": full.resolved_r_max,
                "report": &full,
            });
            write_file(&dir, "report.json", &to_json(&out))?;
            if let Some(first) = full.bounds.iter().find(|b| !b.pass) {
                eprintln!("FAIL {}: sample {}", first.name, first.sample);
            }
            if let Some(first) = full.inequalities.iter().find(|r| !r.pass) {
                eprintln!(
                    "FAIL {}: empirical {:e} > paper {:e} at r = {:e}",
                    first.name, first.constant_empirical, first.constant_paper, first.worst_radius
                );
            }
            println!("overall: {}", if full.pass { "PASS" } else { "FAIL" });
            Ok(full.pass)
        }
    }
}

fn report_verdict(reports: &[schrodlab::report::BoundReport]) {
    for r in reports {
        println!(
            "{:<28} {}  (stability {:.3e})",
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.stability
        );
    }
    if let Some(first) = reports.iter().find(|r| !r.pass) {
        eprintln!("FAIL {}: sample {}", first.name, first.sample);
    }
}

enum PointSpec {
    Polar { r: f64, theta: f64 },
    Cartesian(Vec<f64>),
}

fn parse_point(text: &str, dim: usize) -> Result<PointSpec, Error> {
    if let Some((r, theta)) = text.split_once(':') {
        let r: f64 = r
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad polar radius in '{text}'")))?;
        let theta: f64 = theta
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad polar angle in '{text}'")))?;
        if r < 0.0 {
            return Err(Error::InvalidConfig("polar radius must be nonnegative".into()));
        }
        return Ok(PointSpec::Polar { r, theta });
    }
    let coords: Result<Vec<f64>, _> = text.split(',').map(str::parse::<f64>).collect();
    let coords =
        coords.map_err(|_| Error::InvalidConfig(format!("bad Cartesian point '{text}'")))?;
    if coords.len() != dim {
        return Err(Error::InvalidConfig(format!(
            "Cartesian point '{text}' has {} coordinates, expected dim = {dim}",
            coords.len()
        )));
    }
    Ok(PointSpec::Cartesian(coords))
}

fn pair_geometry(px: &PointSpec, py: &PointSpec) -> Result<(f64, f64, f64), Error> {
    match (px, py) {
        (PointSpec::Polar { r: rx, theta: tx }, PointSpec::Polar { r: ry, theta: ty }) => {
            Ok((*rx, *ry, (tx - ty).cos()))
        }
        (PointSpec::Cartesian(a), PointSpec::Cartesian(b)) => {
            let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
            let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                return Err(Error::InvalidConfig(
                    "kernel evaluation at the origin is not radially resolved; use r > 0".into(),
                ));
            }
            Ok((na, nb, (dot / (na * nb)).clamp(-1.0, 1.0)))
        }
        _ => Err(Error::InvalidConfig(
            "mixed polar/Cartesian point specifications are not supported".into(),
        )),
    }
}

fn initial_datum(cfg: &RunConfig, grid: &schrodlab::grid::RadialGrid) -> Result<Vec<f64>, Error> {
    let spec = cfg.evolve.datum.as_str();
    if spec == "gaussian" {
        return Ok(grid.nodes.iter().map(|&r| (-r * r).exp()).collect());
    }
    if spec == "bump" {
        return Ok(grid
            .nodes
            .iter()
            .map(|&r| if (1.0..2.0).contains(&r) { 1.0 } else { 0.0 })
            .collect());
    }
    if let Some(n) = spec.strip_prefix("eigenmode:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad eigenmode index in '{spec}'")))?;
        let dec = full_decomposition(&cfg.params, grid, cfg.evolve.ell, n + 1)?;
        return Ok(dec.modes[cfg.evolve.ell].profiles[n].clone());
    }
    if let Some(path) = spec.strip_prefix("csv:") {
        let text = fs::read_to_string(path)?;
        let mut rs = Vec::new();
        let mut vs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.chars().any(|c| c.is_alphabetic())) {
                continue; // header or blank
            }
            let mut cols = line.split(',');
            let (r, v) = (cols.next(), cols.next());
            match (r.and_then(|s| s.trim().parse::<f64>().ok()), v.and_then(|s| s.trim().parse::<f64>().ok())) {
                (Some(r), Some(v)) => {
                    rs.push(r);
                    vs.push(v);
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "csv datum line {} is not 'r,value'",
                        i + 1
                    )))
                }
            }
        }
        if rs.len() < 4 {
            return Err(Error::InvalidConfig("csv datum needs at least 4 rows".into()));
        }
        return Ok(grid.nodes.iter().map(|&r| interp::interp(&rs, &vs, r)).collect());
    }
    Err(Error::InvalidConfig(format!(
        "unknown initial datum '{spec}' (gaussian | bump | eigenmode:<n> | csv:<path>)"
    )))
}
