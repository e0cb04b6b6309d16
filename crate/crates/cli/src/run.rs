//! Subcommand drivers. Each run owns its output directory through a lock
//! file and writes deterministic CSV artifacts.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fracmin_core::diagnostics::{blowup_sequence, diagnostics_report, dyadic_radii, DiagnosticsReport, ReportParams};
use fracmin_core::extension::{calibrate_samples, CalibrationParams, MAX_SPREAD};
use fracmin_core::grid::snapshot::{read_snapshot, write_snapshot};
use fracmin_core::grid::{Configuration, Domain, IndicatorSet};
use fracmin_core::kernel::{build_weight_table, per_sigma, CurvatureEvaluator, DEFAULT_DEPTH};
use fracmin_core::minimize::{minimize, Problem};
use fracmin_core::FracError;
use thiserror::Error;

use crate::config::{ExperimentConfig, ReportKind};
use crate::plot::plot_csv;

pub const LOCK_FILE: &str = ".fracmin.lock";
pub const SNAPSHOT_FILE: &str = "snapshot.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Minimize,
    Persigma,
    Curvature,
    Diagnose,
    Calibrate,
    SweepSigma,
    Blowup,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] FracError),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),
    #[error("{0}")]
    Config(String),
}

impl RunError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Core(_) => "core",
            RunError::Io(_) => "io",
            RunError::Locked(_) => "lock",
            RunError::Config(_) => "config",
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Input snapshot for `diagnose`, `blowup`, and optionally `persigma`
    /// and `curvature`; `diagnose` and `blowup` default to the one in `out`.
    pub snapshot: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    /// Human-readable `key = value` lines.
    pub messages: Vec<String>,
    /// Hard gates that did not pass.
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> RunResult<OutputLock> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(RunError::Locked(dir.to_path_buf())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

struct Writer<'a> {
    dir: &'a Path,
    plot: bool,
    outcome: RunOutcome,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> RunResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.outcome.artifacts.push(path);
        if self.plot {
            if let Some(stem) = name.strip_suffix(".csv") {
                if let Some(svg) = plot_csv(stem, contents) {
                    let p = self.dir.join(format!("{stem}.svg"));
                    fs::write(&p, svg)?;
                    self.outcome.artifacts.push(p);
                }
            }
        }
        Ok(())
    }

    fn say(&mut self, msg: String) {
        self.outcome.messages.push(msg);
    }

    fn fail(&mut self, msg: String) {
        self.outcome.failures.push(msg);
    }
}

fn domain(cfg: &ExperimentConfig) -> RunResult<Arc<Domain>> {
    let p = &cfg.problem;
    Ok(Arc::new(Domain::ball(p.n, p.radius, p.h, p.truncation)?))
}

fn problem(cfg: &ExperimentConfig, sigma: f64) -> RunResult<Problem> {
    let d = domain(cfg)?;
    let data = cfg.problem.data.boundary_data(cfg.problem.n).map_err(RunError::Config)?;
    let ext = cfg.problem.exterior.exterior().map_err(RunError::Config)?;
    Ok(Problem::new(data.sample(d), ext, sigma)?)
}

fn load_snapshot(path: &Path) -> RunResult<Configuration> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(read_snapshot(&text)?)
}

/// The configured set, or the one stored in `--snapshot`.
fn described_set(cfg: &ExperimentConfig, opts: &RunOptions) -> RunResult<(IndicatorSet, f64)> {
    if let Some(p) = &opts.snapshot {
        let c = load_snapshot(p)?;
        return Ok((c.set, c.sigma));
    }
    let ext = cfg.problem.exterior.exterior().map_err(RunError::Config)?;
    Ok((IndicatorSet::from_exterior(domain(cfg)?, ext), cfg.problem.sigma))
}

fn radii(cfg: &ExperimentConfig, h: f64) -> RunResult<Vec<f64>> {
    let r = if cfg.diagnostics.radii.is_empty() {
        dyadic_radii(8.0 * h, 0.5)
    } else {
        cfg.diagnostics.radii.clone()
    };
    if r.is_empty() {
        return Err(RunError::Config(format!("no dyadic radius fits in [8h, 1/2] for h = {h}")));
    }
    Ok(r)
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> RunResult<RunOutcome> {
    let _lock = OutputLock::acquire(&opts.out)?;
    let mut w = Writer {
        dir: &opts.out,
        plot: cfg.output.plot,
        outcome: RunOutcome::default(),
    };
    match cmd {
        Command::Minimize => run_minimize(cfg, &mut w)?,
        Command::Persigma => run_persigma(cfg, opts, &mut w)?,
        Command::Curvature => run_curvature(cfg, opts, &mut w)?,
        Command::Diagnose => run_diagnose(cfg, opts, &mut w)?,
        Command::Calibrate => run_calibrate(cfg, &mut w)?,
        Command::SweepSigma => run_sweep_sigma(cfg, &mut w)?,
        Command::Blowup => run_blowup(cfg, opts, &mut w)?,
    }
    Ok(w.outcome)
}

fn run_minimize(cfg: &ExperimentConfig, w: &mut Writer) -> RunResult<()> {
    let p = problem(cfg, cfg.problem.sigma)?;
    let res = minimize(&p, &cfg.search.params)?;
    w.write(SNAPSHOT_FILE, &write_snapshot(&res.config))?;
    w.write("history.csv", &res.history_csv())?;
    let b = res.config.breakdown.expect("evaluated");
    w.say(format!("dirichlet = {}", b.dirichlet));
    w.say(format!("per_sigma = {}", b.per_sigma));
    w.say(format!("total = {}", b.total));
    w.say(format!("converged = {}", res.converged));
    if !res.converged {
        w.fail("search did not converge".to_string());
    }
    Ok(())
}

fn run_persigma(cfg: &ExperimentConfig, opts: &RunOptions, w: &mut Writer) -> RunResult<()> {
    let (set, sigma) = described_set(cfg, opts)?;
    let table = Arc::new(build_weight_table(set.domain(), sigma, DEFAULT_DEPTH)?);
    let per = per_sigma(&set, &table)?;
    w.write(
        "persigma.csv",
        &format!("interior,exterior,total\n{},{},{}\n", per.interior, per.exterior, per.total),
    )?;
    w.say(format!("per_sigma = {}", per.total));
    Ok(())
}

fn run_curvature(cfg: &ExperimentConfig, opts: &RunOptions, w: &mut Writer) -> RunResult<()> {
    let (set, sigma) = described_set(cfg, opts)?;
    let d = set.domain();
    let ev = CurvatureEvaluator::new(d, sigma)?;
    let faces = ev.along_boundary(&set);
    let mut csv = String::from(if d.n() == 1 { "ix,axis,kappa\n" } else { "ix,iy,axis,kappa\n" });
    for (c, axis, _, k) in &faces {
        if d.n() == 1 {
            let _ = writeln!(csv, "{},{axis},{k}", c[0]);
        } else {
            let _ = writeln!(csv, "{},{},{axis},{k}", c[0], c[1]);
        }
    }
    w.write("curvature.csv", &csv)?;
    w.say(format!("faces = {}", faces.len()));
    Ok(())
}

fn fits_csv(rep: &DiagnosticsReport) -> String {
    let mut out = String::from("quantity,value,constant,residual\n");
    match rep.holder {
        Some(f) => {
            let _ = writeln!(out, "holder_alpha,{},{},{}", f.exponent, f.constant, f.residual);
        }
        None => out.push_str("holder_alpha,flat,,\n"),
    }
    match rep.lambda.fit {
        Some(f) => {
            let _ = writeln!(out, "lambda_exponent,{},{},{}", f.exponent, f.constant, f.residual);
        }
        None => out.push_str("lambda_exponent,flat,,\n"),
    }
    if let Some(p) = rep.phi_trivial {
        let _ = writeln!(out, "phi_trivial,{p},,");
    }
    let _ = writeln!(out, "residual_max,{},,", rep.residuals.max_abs());
    let _ = writeln!(out, "residual_skipped,{},,", rep.residuals.skipped);
    out
}

fn snapshot_path(opts: &RunOptions) -> PathBuf {
    opts.snapshot.clone().unwrap_or_else(|| opts.out.join(SNAPSHOT_FILE))
}

fn run_diagnose(cfg: &ExperimentConfig, opts: &RunOptions, w: &mut Writer) -> RunResult<()> {
    let config = load_snapshot(&snapshot_path(opts))?;
    let d = config.domain().clone();
    let dg = &cfg.diagnostics;
    let c_hat = match (dg.weiss, dg.c_hat) {
        (false, _) => None,
        (true, Some(c)) => Some(c),
        (true, None) => {
            let cal = calibrate_samples(d.n(), config.sigma, &CalibrationParams::default_for(d.n()))?;
            w.say(format!("c_hat = {} (calibrated, spread {})", cal.c_hat, cal.spread));
            Some(cal.c_hat)
        }
    };
    let params = ReportParams {
        radii: radii(cfg, d.h())?,
        c_hat,
        sub: dg.sub,
        fan: dg.fan,
    };
    let rep = diagnostics_report(&config, &params)?;
    for kind in &dg.reports {
        match kind {
            ReportKind::Summary => w.write("report.csv", &rep.to_csv())?,
            ReportKind::Residuals => w.write("residuals.csv", &rep.residuals.to_csv())?,
            ReportKind::Blowup => w.write("blowup.csv", &blowup_csv(&rep.blowup))?,
            ReportKind::Fits => w.write("fits.csv", &fits_csv(&rep))?,
        }
    }
    if let Some(f) = rep.holder {
        w.say(format!("holder_alpha = {}", f.exponent));
    }
    w.say(format!("residual_max = {}", rep.residuals.max_abs()));
    Ok(())
}

fn blowup_csv(steps: &[fracmin_core::diagnostics::BlowupStep]) -> String {
    let mut out = String::from("from,to,defect\n");
    for s in steps {
        let _ = writeln!(out, "{},{},{}", s.from, s.to, s.defect);
    }
    out
}

fn run_blowup(cfg: &ExperimentConfig, opts: &RunOptions, w: &mut Writer) -> RunResult<()> {
    let config = load_snapshot(&snapshot_path(opts))?;
    let mut r = radii(cfg, config.domain().h())?;
    r.sort_by(|a, b| b.total_cmp(a));
    let steps = blowup_sequence(&config, &r)?;
    w.write("blowup.csv", &blowup_csv(&steps))?;
    w.say(format!("steps = {}", steps.len()));
    Ok(())
}

fn run_calibrate(cfg: &ExperimentConfig, w: &mut Writer) -> RunResult<()> {
    let n = cfg.problem.n;
    let res = calibrate_samples(n, cfg.problem.sigma, &CalibrationParams::default_for(n))?;
    let mut csv = String::from("radius,cells,delta_per,delta_energy,ratio\n");
    for s in &res.samples {
        let _ = writeln!(csv, "{},{},{},{},{}", s.radius, s.cells, s.delta_per, s.delta_energy, s.ratio);
    }
    w.write("calibration.csv", &csv)?;
    w.say(format!("c_hat = {}", res.c_hat));
    w.say(format!("spread = {}", res.spread));
    if res.spread > MAX_SPREAD {
        w.fail(format!("calibration spread {:.4} exceeds {MAX_SPREAD}", res.spread));
    }
    Ok(())
}

fn run_sweep_sigma(cfg: &ExperimentConfig, w: &mut Writer) -> RunResult<()> {
    let mut csv = String::from("sigma,dirichlet,per_sigma,total,converged\n");
    for &sigma in &cfg.problem.sigma_grid {
        let p = problem(cfg, sigma)?;
        let res = minimize(&p, &cfg.search.params)?;
        let b = res.config.breakdown.expect("evaluated");
        let _ = writeln!(csv, "{sigma},{},{},{},{}", b.dirichlet, b.per_sigma, b.total, res.converged as u8);
        if !res.converged {
            w.fail(format!("search did not converge at sigma = {sigma}"));
        }
    }
    w.write("sweep_sigma.csv", &csv)?;
    w.say(format!("rows = {}", cfg.problem.sigma_grid.len()));
    Ok(())
}
