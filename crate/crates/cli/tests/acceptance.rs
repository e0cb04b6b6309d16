//! End-to-end acceptance suite. Prints one line per criterion and exits
//! non-zero if any of them fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command as Process, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use fracmin_core::diagnostics::{
    acf_psi, density_report, dyadic_radii, el_residual, holder_fit, lambda_product, weiss_phi,
};
use fracmin_core::extension::{calibrate_samples, poisson_extension, CalibrationParams, ExtensionMesh, MAX_SPREAD};
use fracmin_core::grid::{BoundaryData, Cell, Configuration, Domain, Exterior, IndicatorSet, ScalarField};
use fracmin_core::harmonic::{dirichlet_energy, energy_difference, orthogonality_residual, ReplacementProblem};
use fracmin_core::kernel::{build_weight_table, per_sigma, CurvatureEvaluator, DEFAULT_DEPTH};
use fracmin_core::minimize::{
    exact_flip_delta, interface_scan_1d, minimize, minimize_from, FlipScope, Problem, SearchParams,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn dom(n: usize, h: f64) -> Arc<Domain> {
    Arc::new(Domain::ball(n, 1.0, h, 2.0).unwrap())
}

fn normal(n: usize) -> [f64; 2] {
    if n == 1 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

fn half_space(d: &Arc<Domain>) -> IndicatorSet {
    IndicatorSet::from_exterior(d.clone(), Exterior::half_space(normal(d.n()), 0.0))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `φ = x_n` above and `β x_n` below in 1D; `φ = x₂` in 2D.
fn benchmark(n: usize, h: f64, beta: f64) -> Problem {
    let d = dom(n, h);
    let data = if n == 1 { BoundaryData::TwoPhaseLinear(beta) } else { BoundaryData::Linear([0.0, 1.0]) };
    Problem::new(data.sample(d), Exterior::half_space(normal(n), 0.0), 0.5).unwrap()
}

fn minimizer(n: usize, h: f64, beta: f64) -> Result<Configuration, String> {
    let res = minimize(&benchmark(n, h, beta), &SearchParams::default()).map_err(|e| e.to_string())?;
    if !res.converged {
        return Err(format!("n={n} h={h} did not converge"));
    }
    Ok(res.config)
}

fn spread(xs: &[f64]) -> f64 {
    xs.iter().fold(f64::MIN, |m, &x| m.max(x)) - xs.iter().fold(f64::MAX, |m, &x| m.min(x))
}

/// Largest drop `values[i] − values[j]` over `i < j`.
fn worst_drop(values: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            worst = worst.max(values[i] - values[j]);
        }
    }
    worst
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn kernel_exactness() -> Outcome {
    let t0 = Instant::now();
    let d = dom(1, 0.01);
    let set = half_space(&d);
    let table = Arc::new(build_weight_table(&d, 0.5, DEFAULT_DEPTH).map_err(|e| e.to_string())?);
    let p = per_sigma(&set, &table).map_err(|e| e.to_string())?.total;
    let exact = 4.0 * 2f64.sqrt();
    let rel = (p / exact - 1.0).abs();
    let el = t0.elapsed();
    check(rel <= 1e-3 && el < Duration::from_secs(1), format!("per_sigma={p:.6} rel_err={rel:.1e} time={el:.2?}"))
}

fn kernel_scaling() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for n in [1, 2] {
        for sigma in [0.3, 0.5, 0.7] {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for lam in [1.0, 2.0, 4.0] {
                let h = if n == 1 { lam / 32.0 } else { lam / 8.0 };
                let d = Arc::new(Domain::ball(n, lam, h, 2.0 * lam).map_err(|e| e.to_string())?);
                let ext = if n == 1 {
                    Exterior::half_space([1.0, 0.0], 0.25 * lam)
                } else {
                    Exterior::half_space([0.3, 1.0], 0.1 * lam)
                };
                let set = IndicatorSet::from_exterior(d.clone(), ext);
                let t = Arc::new(build_weight_table(&d, sigma, 3).map_err(|e| e.to_string())?);
                xs.push(f64::ln(lam));
                ys.push(per_sigma(&set, &t).map_err(|e| e.to_string())?.total.ln());
            }
            worst = worst.max((slope(&xs, &ys) - (n as f64 - sigma)).abs());
        }
    }
    let el = t0.elapsed();
    check(worst <= 1e-2 && el < Duration::from_secs(30), format!("max |slope-(n-sigma)|={worst:.1e} time={el:.2?}"))
}

fn harmonic_replacement() -> Outcome {
    let h = 0.01;
    let d = dom(1, h);
    let phi = BoundaryData::Constant(1.0).sample(d.clone());
    let k: Vec<Cell> = d.omega().iter().copied().filter(|&c| (-0.5..=0.0).contains(&d.center(c)[0])).collect();
    let v = ReplacementProblem::new(&phi, &k).and_then(|p| p.solve()).map_err(|e| e.to_string())?;
    let e = dirichlet_energy(&v);
    let rel = (e / 3.0 - 1.0).abs();

    let d = dom(2, 1.0 / 24.0);
    let phi = BoundaryData::TwoPhaseLinear(2.0).sample(d.clone()).map(|v| v.abs());
    let k: Vec<Cell> = d
        .omega()
        .iter()
        .copied()
        .filter(|&c| {
            let x = d.center(c);
            (x[0] - 0.2).hypot(x[1]) < 0.3
        })
        .collect();
    let prob = ReplacementProblem::new(&phi, &k).map_err(|e| e.to_string())?;
    let w = prob.solve().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let no = d.omega().len();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let vals = (0..d.field_len())
            .map(|i| if i < no && !prob.vanish_mask()[i] { rng.gen_range(-1.0..1.0) } else { 0.0 })
            .collect();
        let psi = ScalarField::from_values(d.clone(), vals);
        let r = orthogonality_residual(&w, prob.vanish_mask(), &psi).map_err(|e| e.to_string())?;
        worst = worst.max(r.abs());
    }
    check(rel <= 0.02 && worst <= 1e-8, format!("energy={e:.5} rel_err={rel:.2e} max_orthogonality={worst:.1e}"))
}

type Triple = (ScalarField, IndicatorSet, Vec<Cell>);

/// `φ₁ ≤ φ₂`, `E₁ ⊂ E₂`, `A₁ ⊂ A₂ ⊂ E`.
fn nested_triple(d: &Arc<Domain>, rng: &mut ChaCha8Rng) -> [Triple; 2] {
    let no = d.omega().len();
    let p1: Vec<f64> = (0..d.field_len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let p2: Vec<f64> = p1.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
    let c = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
    let r2 = rng.gen_range(0.45..0.8);
    let set2 = IndicatorSet::with_omega(d.clone(), Exterior::AllOutside, |x| (x[0] - c[0]).hypot(x[1] - c[1]) < r2);
    let mut set1 = set2.clone();
    for k in 0..no {
        if set2.omega_phase(k) > 0 && rng.gen_bool(0.15) {
            set1.flip(d.omega()[k]).unwrap();
        }
    }
    let ra = rng.gen_range(0.1..0.35);
    let a2: Vec<Cell> = (0..no)
        .filter(|&k| set2.omega_phase(k) > 0 && {
            let x = d.center(d.omega()[k]);
            (x[0] - c[0]).hypot(x[1] - c[1]) < ra
        })
        .map(|k| d.omega()[k])
        .collect();
    let a1: Vec<Cell> = a2.iter().copied().filter(|&cell| set1.phase(cell) > 0 && rng.gen_bool(0.7)).collect();
    [
        (ScalarField::from_values(d.clone(), p1), set1, a1),
        (ScalarField::from_values(d.clone(), p2), set2, a2),
    ]
}

fn comparison() -> Outcome {
    let d = dom(2, 1.0 / 16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    for _ in 0..50 {
        let [(p1, e1, a1), (p2, e2, a2)] = nested_triple(&d, &mut rng);
        let f = |p: &ScalarField, e: &IndicatorSet, a: &[Cell]| energy_difference(p, e, a).map(|r| r.value);
        let lo = f(&p1, &e1, &a1).map_err(|e| e.to_string())?;
        let hi = f(&p2, &e2, &a2).map_err(|e| e.to_string())?;
        let mids = [f(&p2, &e1, &a1), f(&p1, &e2, &a1), f(&p1, &e2, &a2)];
        if lo > hi + 1e-8 {
            violations += 1;
        }
        for m in mids {
            let m = m.map_err(|e| e.to_string())?;
            if lo > m + 1e-8 || m > hi + 1e-8 {
                violations += 1;
            }
        }
    }
    check(violations == 0, format!("50 triples, violations={violations}"))
}

fn minimizer_optimality() -> Outcome {
    let t0 = Instant::now();
    let h = 0.01;
    let mut lines = Vec::new();
    let mut ok = true;
    for (beta, start) in [(1.0, None), (2.0, Some(0.0)), (2.0, Some(0.6))] {
        let p = benchmark(1, h, beta);
        let params = SearchParams::default();
        let res = match start {
            None => minimize(&p, &params),
            Some(t) => minimize_from(&p, &p.set_from(|x| x[0] > t), &params),
        }
        .map_err(|e| e.to_string())?;
        let scan = interface_scan_1d(&p, 1).map_err(|e| e.to_string())?;
        let best = scan.iter().min_by(|a, b| a.breakdown.total.total_cmp(&b.breakdown.total)).unwrap();
        let pts = res.config.set.interface_points();
        let total = res.config.breakdown.map_or(f64::NAN, |b| b.total);
        let dj = (total - best.breakdown.total).abs();
        let dt = pts.first().map_or(f64::INFINITY, |p| (p[0] - best.t).abs());
        ok &= res.converged && pts.len() == 1 && dj < 1e-3 && dt <= 2.0 * h + 1e-12;
        lines.push(format!("beta={beta}: dJ={dj:.1e} dt={dt:.3}"));
    }
    let el = t0.elapsed();
    ok &= el < Duration::from_secs(120);
    check(ok, format!("{} time={el:.2?}", lines.join("; ")))
}

fn local_minimality() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let cases: [(Problem, Box<dyn Fn([f64; 2]) -> bool>); 2] = [
        (benchmark(1, 0.02, 2.0), Box::new(|x| x[0] > -0.2)),
        (benchmark(2, 1.0 / 16.0, 1.0), Box::new(|x| x[1] > 0.2 * x[0] * x[0])),
    ];
    for (i, (p, start)) in cases.iter().enumerate() {
        let res = minimize_from(p, &p.set_from(start), &SearchParams::default()).map_err(|e| e.to_string())?;
        let d = p.domain();
        let mut cells = FlipScope::BoundaryBand(2).cells(&res.config.set);
        let mut rest: Vec<usize> = (0..d.omega().len()).filter(|k| !cells.contains(k)).collect();
        rest.shuffle(&mut ChaCha8Rng::seed_from_u64(i as u64 + 1));
        cells.extend(rest.into_iter().take(20));
        let mut worst = f64::INFINITY;
        for &k in &cells {
            worst = worst.min(exact_flip_delta(p, &res.config, d.omega()[k]).map_err(|e| e.to_string())?);
        }
        ok &= res.converged && cells.len() >= 20 && worst >= -1e-8;
        lines.push(format!("n={}: {} flips, min dJ={worst:.2e}", d.n(), cells.len()));
    }
    check(ok, lines.join("; "))
}

fn euler_lagrange() -> Outcome {
    let mut trivial = 0.0f64;
    for (n, h) in [(1, 1.0 / 32.0), (2, 1.0 / 16.0)] {
        let d = dom(n, h);
        let ev = CurvatureEvaluator::new(&d, 0.5).map_err(|e| e.to_string())?;
        let set = half_space(&d);
        let zero = Configuration {
            sigma: 0.5,
            set,
            u_plus: ScalarField::zeros(d.clone()),
            u_minus: ScalarField::zeros(d.clone()),
            breakdown: None,
        };
        let rep = el_residual(&zero, &ev).map_err(|e| e.to_string())?;
        if rep.cells.is_empty() {
            return Err(format!("n={n}: no flat cells"));
        }
        trivial = trivial.max(rep.max_abs());
    }
    let res = |h: f64| -> Result<f64, String> {
        let c = minimizer(1, h, 3.0)?;
        let ev = CurvatureEvaluator::new(c.domain(), 0.5).map_err(|e| e.to_string())?;
        Ok(el_residual(&c, &ev).map_err(|e| e.to_string())?.max_abs())
    };
    let (a, b) = (res(0.02)?, res(0.01)?);
    check(trivial <= 1e-6 && a >= 1.5 * b, format!("trivial={trivial:.1e} beta=3: h=0.02 {a:.4}, h=0.01 {b:.4}, ratio={:.2}", a / b))
}

fn acf(planar: &Configuration) -> Outcome {
    let d = dom(2, 1.0 / 128.0);
    let up = ScalarField::from_fn(d.clone(), |x| x[1].max(0.0));
    let um = ScalarField::from_fn(d, |x| (-x[1]).max(0.0));
    let mut worst = 0.0f64;
    for r in [0.25, 0.5, 1.0] {
        let psi = acf_psi(&up, &um, r).map_err(|e| e.to_string())?;
        worst = worst.max((psi / (PI * PI / 4.0) - 1.0).abs());
    }
    let h = planar.domain().h();
    let psi: Vec<f64> = dyadic_radii(8.0 * h, 0.5)
        .iter()
        .map(|&r| acf_psi(&planar.u_plus, &planar.u_minus, r))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let scale = psi.iter().fold(0.0f64, |m, &x| m.max(x));
    let drop = worst_drop(&psi) / scale;
    check(worst <= 0.05 && drop <= 0.05, format!("u=x2 max rel_err={worst:.2e}; minimizer drop={:.1}% of max", 100.0 * drop))
}

fn weiss(c_hat: f64) -> Outcome {
    let h = 1.0 / 32.0;
    let d = dom(1, h);
    let e = half_space(&d);
    let mesh = Arc::new(ExtensionMesh::new(d.clone(), 0.5, 16).map_err(|e| e.to_string())?);
    let u = poisson_extension(&e, &mesh).map_err(|e| e.to_string())?;
    let cone = Configuration {
        sigma: 0.5,
        set: e,
        u_plus: ScalarField::zeros(d.clone()),
        u_minus: ScalarField::zeros(d.clone()),
        breakdown: None,
    };
    let phi: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&r| weiss_phi(&cone, &u, r, c_hat))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let cone_spread = spread(&phi) / (phi.iter().sum::<f64>() / 3.0);

    let c = minimizer(1, h, 1.0)?;
    let u = poisson_extension(&c.set, &mesh).map_err(|e| e.to_string())?;
    let phi: Vec<f64> = dyadic_radii(8.0 * h, 1.0)
        .iter()
        .map(|&r| weiss_phi(&c, &u, r, c_hat))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let range = spread(&phi);
    let drop = worst_drop(&phi);
    check(
        cone_spread <= 0.03 && drop <= 0.05 * range,
        format!("cone spread={:.2}%; minimizer drop={drop:.2e} range={range:.3e}", 100.0 * cone_spread),
    )
}

fn calibration() -> Result<(String, f64), String> {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut c1 = f64::NAN;
    for n in [1, 2] {
        let res = calibrate_samples(n, 0.5, &CalibrationParams::default_for(n)).map_err(|e| e.to_string())?;
        ok &= res.c_hat > 0.0 && res.spread <= MAX_SPREAD && res.samples.len() == 4;
        if n == 1 {
            c1 = res.c_hat;
        }
        lines.push(format!("n={n}: c_hat={:.4} spread={:.2}%", res.c_hat, 100.0 * res.spread));
    }
    let detail = lines.join("; ");
    if ok {
        Ok((detail, c1))
    } else {
        Err(detail)
    }
}

fn holder_density(minimizers: &[&Configuration]) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for c in minimizers {
        let (n, h, s) = (c.domain().n(), c.domain().h(), c.sigma);
        let radii = dyadic_radii(8.0 * h, 0.5);
        let alpha = holder_fit(&c.u(), &radii).map_err(|e| e.to_string())?.exponent;
        let dens = density_report(&c.set, &radii)
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let lam = lambda_product(&c.u_plus, &c.u_minus, &radii, s).map_err(|e| e.to_string())?;
        let lam_exp = lam.fit.map_or(f64::NAN, |f| f.exponent);
        ok &= alpha >= 1.0 - s / 2.0 - 0.1 && dens >= 0.05 && lam_exp >= s - 0.1;
        lines.push(format!("n={n}: alpha={alpha:.3} density_min={dens:.3} lambda_exp={lam_exp:.3}"));
    }
    check(ok, lines.join("; "))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "csv").then(|| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("exp.ini");
    let text = "[problem]\nn = 1\nh = 0.03125\nsigma_grid = 0.3, 0.5\n[search]\nseed = 11\n[diagnostics]\nc_hat = 2.97\n";
    fs::write(&cfg, text).map_err(|e| e.to_string())?;
    let commands = ["minimize", "persigma", "curvature", "diagnose", "blowup", "sweep-sigma", "calibrate"];
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        for cmd in commands {
            let o = Process::new(env!("CARGO_BIN_EXE_fracmin"))
                .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .output()
                .map_err(|e| e.to_string())?;
            if !o.status.success() {
                return Err(format!("{cmd}: {}", String::from_utf8_lossy(&o.stderr).trim()));
            }
        }
        runs.push(csv_files(&out));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = runs[0].iter().zip(&runs[1]).filter(|(a, b)| a != b).map(|(a, _)| a.0.as_str()).collect();
    check(
        runs[0].len() == runs[1].len() && differing.is_empty() && names.len() >= 9,
        format!("{} csv files over {} subcommands, differing={differing:?}", names.len(), commands.len()),
    )
}

fn main() -> ExitCode {
    // Cargo passes harness flags such as `--nocapture`; they do not apply here.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |i: usize| filter.is_empty() || filter.iter().any(|f| f == &i.to_string());

    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |i: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        if wanted(i) {
            let t0 = Instant::now();
            let out = f();
            let tag = if out.is_ok() { "PASS" } else { "FAIL" };
            let detail = out.as_ref().unwrap_or_else(|e| e);
            println!("criterion {i:>2} {tag} {name}: {detail} [{:.1?}]", t0.elapsed());
            results.push((i, name, out));
        }
    };

    run(1, "kernel exactness", &mut kernel_exactness);
    run(2, "kernel scaling", &mut kernel_scaling);
    run(3, "harmonic replacement", &mut harmonic_replacement);
    run(4, "comparison monotonicity", &mut comparison);
    run(5, "minimizer optimality", &mut minimizer_optimality);
    run(6, "local minimality", &mut local_minimality);
    run(7, "Euler-Lagrange residual", &mut euler_lagrange);

    let mut planar: Option<Result<Configuration, String>> = None;
    let mut planar_min = || planar.get_or_insert_with(|| minimizer(2, 1.0 / 32.0, 1.0)).clone();
    run(8, "ACF monotonicity", &mut || acf(&planar_min()?));

    let mut c_hat = None;
    run(10, "calibration", &mut || {
        calibration().map(|(detail, c)| {
            c_hat = Some(c);
            detail
        })
    });
    run(9, "Weiss monotonicity", &mut || {
        let c = match c_hat {
            Some(c) => c,
            None => calibrate_samples(1, 0.5, &CalibrationParams::default_for(1)).map_err(|e| e.to_string())?.c_hat,
        };
        weiss(c)
    });
    run(11, "Holder growth and density", &mut || {
        let line = minimizer(1, 0.01, 1.0)?;
        holder_density(&[&line, &planar_min()?])
    });
    run(12, "determinism", &mut determinism);

    let failed: Vec<_> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    println!("acceptance: {} passed, {} failed {failed:?}", results.len() - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
