//! INI-style experiment configuration.
//!
//! ```text
//! [problem]
//! n = 1
//! sigma = 0.5
//! data = two_phase_linear(1)
//!
//! [search]
//! seed = 7
//! ```
//! Every key except `problem.n` has a default; see [`ExperimentConfig`].

use std::fmt::{self, Write as _};

use fracmin_core::grid::snapshot::{parse_call, parse_exterior};
use fracmin_core::grid::{BoundaryData, Exterior};
use fracmin_core::minimize::{FlipScope, SearchParams};
use thiserror::Error;

pub const SIGMA_RANGE: (f64, f64) = (0.1, 0.9);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

/// Every problem found in a config, in line order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// A `name(args)` selector as written in the config.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    pub name: String,
    pub args: Vec<f64>,
}

impl Selector {
    fn parse(s: &str) -> Result<Selector, String> {
        let (name, args) = parse_call(s)?;
        Ok(Selector { name, args })
    }

    fn new(name: &str, args: &[f64]) -> Selector {
        Selector {
            name: name.to_string(),
            args: args.to_vec(),
        }
    }

    pub fn boundary_data(&self, n: usize) -> Result<BoundaryData, String> {
        let a = &self.args;
        let arity = |k: usize| {
            if a.len() == k {
                Ok(())
            } else {
                Err(format!("{} expects {k} argument(s), got {}", self.name, a.len()))
            }
        };
        match self.name.as_str() {
            "linear" => {
                if a.len() != n {
                    return Err(format!("linear expects {n} direction component(s), got {}", a.len()));
                }
                Ok(BoundaryData::Linear([a[0], a.get(1).copied().unwrap_or(0.0)]))
            }
            "constant" => arity(1).map(|_| BoundaryData::Constant(a[0])),
            "two_phase_linear" => arity(1).map(|_| BoundaryData::TwoPhaseLinear(a[0])),
            "radial_power" => arity(1).map(|_| BoundaryData::RadialPower(a[0])),
            other => Err(format!("unknown boundary data '{other}'")),
        }
    }

    pub fn exterior(&self) -> Result<Exterior, String> {
        parse_exterior(&self.to_string())
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() && matches!(self.name.as_str(), "all_inside" | "all_outside") {
            return write!(f, "{}", self.name);
        }
        let args: Vec<String> = self.args.iter().map(|x| format!("{x:?}")).collect();
        write!(f, "{}({})", self.name, args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemBlock {
    /// Dimension, 1 or 2 (required).
    pub n: usize,
    /// Radius of Ω (default 1).
    pub radius: f64,
    /// Lattice spacing (default 0.02).
    pub h: f64,
    /// Truncation radius of the lattice box (default 2).
    pub truncation: f64,
    /// Default 0.5.
    pub sigma: f64,
    /// Boundary data (default `two_phase_linear(1)`).
    pub data: Selector,
    /// Exterior datum `E₀` (default the half-space `{x_n > 0}`).
    pub exterior: Selector,
    /// Values used by `sweep-sigma` (default 0.2, 0.5, 0.8).
    pub sigma_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchBlock {
    pub params: SearchParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    /// `report.csv`.
    Summary,
    /// `residuals.csv`.
    Residuals,
    /// `blowup.csv`.
    Blowup,
    /// `fits.csv`.
    Fits,
}

impl ReportKind {
    pub const ALL: [ReportKind; 4] = [ReportKind::Summary, ReportKind::Residuals, ReportKind::Blowup, ReportKind::Fits];

    pub fn name(&self) -> &'static str {
        match self {
            ReportKind::Summary => "summary",
            ReportKind::Residuals => "residuals",
            ReportKind::Blowup => "blowup",
            ReportKind::Fits => "fits",
        }
    }

    fn parse(s: &str) -> Option<ReportKind> {
        ReportKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsBlock {
    /// Sample radii; empty means dyadic radii in `[8h, 1/2]`.
    pub radii: Vec<f64>,
    /// Compute the Weiss energy (default true).
    pub weiss: bool,
    /// Extension constant; calibrated when absent.
    pub c_hat: Option<f64>,
    /// Extension mesh refinement (default 4).
    pub sub: usize,
    /// Directions in the flatness search (default 36).
    pub fan: usize,
    /// Artifacts written by `diagnose` (default all).
    pub reports: Vec<ReportKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    /// Default `out`.
    pub directory: String,
    /// Companion SVG plots (default false).
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemBlock,
    pub search: SearchBlock,
    pub diagnostics: DiagnosticsBlock,
    pub output: OutputBlock,
}

impl ExperimentConfig {
    /// Defaults for dimension `n`.
    pub fn defaults(n: usize) -> ExperimentConfig {
        ExperimentConfig {
            problem: ProblemBlock {
                n,
                radius: 1.0,
                h: 0.02,
                truncation: 2.0,
                sigma: 0.5,
                data: Selector::new("two_phase_linear", &[1.0]),
                exterior: default_exterior(n),
                sigma_grid: vec![0.2, 0.5, 0.8],
            },
            search: SearchBlock {
                params: SearchParams::default(),
            },
            diagnostics: DiagnosticsBlock {
                radii: Vec::new(),
                weiss: true,
                c_hat: None,
                sub: 4,
                fan: 36,
                reports: ReportKind::ALL.to_vec(),
            },
            output: OutputBlock {
                directory: "out".to_string(),
                plot: false,
            },
        }
    }

    pub fn seed(&self) -> u64 {
        self.search.params.seed
    }
}

fn default_exterior(n: usize) -> Selector {
    if n == 2 {
        Selector::new("half_space", &[0.0, 1.0, 0.0])
    } else {
        Selector::new("half_space", &[1.0, 0.0, 0.0])
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn fmt_scope(s: FlipScope) -> String {
    match s {
        FlipScope::BoundaryOnly => "boundary".to_string(),
        FlipScope::BoundaryBand(k) => format!("band({k})"),
    }
}

/// Writes every field explicitly; `parse_config(&serialize(c)) == c`.
pub fn serialize(c: &ExperimentConfig) -> String {
    let p = &c.problem;
    let s = &c.search.params;
    let d = &c.diagnostics;
    let mut out = String::new();
    let _ = writeln!(out, "[problem]");
    let _ = writeln!(out, "n = {}", p.n);
    let _ = writeln!(out, "radius = {:?}", p.radius);
    let _ = writeln!(out, "h = {:?}", p.h);
    let _ = writeln!(out, "truncation = {:?}", p.truncation);
    let _ = writeln!(out, "sigma = {:?}", p.sigma);
    let _ = writeln!(out, "data = {}", p.data);
    let _ = writeln!(out, "exterior = {}", p.exterior);
    let _ = writeln!(out, "sigma_grid = {}", fmt_list(&p.sigma_grid));
    let _ = writeln!(out, "\n[search]");
    let _ = writeln!(out, "seed = {}", s.seed);
    let _ = writeln!(out, "max_sweeps = {}", s.max_sweeps);
    let _ = writeln!(out, "scope = {}", fmt_scope(s.scope));
    let _ = writeln!(out, "t0 = {:?}", s.t0);
    let _ = writeln!(out, "decay = {:?}", s.decay);
    let _ = writeln!(out, "patience = {}", s.patience);
    let _ = writeln!(out, "resolve_every = {}", s.resolve_every);
    let _ = writeln!(out, "polish_passes = {}", s.polish_passes);
    let _ = writeln!(out, "\n[diagnostics]");
    let _ = writeln!(out, "radii = {}", fmt_list(&d.radii));
    let _ = writeln!(out, "weiss = {}", d.weiss);
    if let Some(c) = d.c_hat {
        let _ = writeln!(out, "c_hat = {c:?}");
    }
    let _ = writeln!(out, "sub = {}", d.sub);
    let _ = writeln!(out, "fan = {}", d.fan);
    let reports: Vec<&str> = d.reports.iter().map(|r| r.name()).collect();
    let _ = writeln!(out, "reports = {}", reports.join(", "));
    let _ = writeln!(out, "\n[output]");
    let _ = writeln!(out, "directory = {}", c.output.directory);
    let _ = writeln!(out, "plot = {}", c.output.plot);
    out
}

/// One `key = value` line.
struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn parse_f64(v: &str) -> Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a finite number, got '{v}'"))
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("expected a nonnegative integer, got '{v}'"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|t| parse_f64(t.trim())).collect()
}

fn parse_scope(v: &str) -> Result<FlipScope, String> {
    if v == "boundary" {
        return Ok(FlipScope::BoundaryOnly);
    }
    match parse_call(v) {
        Ok((name, args)) if name == "band" && args.len() == 1 && args[0] >= 0.0 && args[0].fract() == 0.0 => {
            Ok(FlipScope::BoundaryBand(args[0] as usize))
        }
        _ => Err(format!("expected 'boundary' or 'band(k)', got '{v}'")),
    }
}

fn in_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<f64, String> {
    if (lo..=hi).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{name} out of range [{lo},{hi}]"))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, String> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{name} must be positive, got {x}"))
    }
}

fn tokenize(text: &str, errors: &mut Vec<ConfigError>) -> Vec<Entry> {
    const SECTIONS: [&str; 4] = ["problem", "search", "diagnostics", "output"];
    let mut section: Option<String> = None;
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.split(['#', ';']).next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        if let Some(name) = t.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                errors.push(ConfigError {
                    line,
                    message: format!("malformed section header '{t}'"),
                });
                continue;
            };
            let name = name.trim();
            if SECTIONS.contains(&name) {
                section = Some(name.to_string());
            } else {
                errors.push(ConfigError {
                    line,
                    message: format!("unknown section [{name}]"),
                });
                section = None;
            }
            continue;
        }
        let Some((k, v)) = t.split_once('=') else {
            errors.push(ConfigError {
                line,
                message: format!("expected 'key = value', got '{t}'"),
            });
            continue;
        };
        let Some(sec) = section.clone() else {
            errors.push(ConfigError {
                line,
                message: "key outside a known section".to_string(),
            });
            continue;
        };
        let key = k.trim().to_string();
        if let Some(prev) = entries.iter().find(|e| e.section == sec && e.key == key) {
            errors.push(ConfigError {
                line,
                message: format!("duplicate key '{key}' (first set on line {})", prev.line),
            });
            continue;
        }
        entries.push(Entry {
            line,
            section: sec,
            key,
            value: v.trim().to_string(),
        });
    }
    entries
}

/// Parses and validates a config, reporting every error with its line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let entries = tokenize(text, &mut errors);

    let n_entry = entries.iter().find(|e| e.section == "problem" && e.key == "n");
    let n = match n_entry {
        None => {
            errors.push(ConfigError {
                line: 0,
                message: "missing required field problem.n".to_string(),
            });
            1
        }
        Some(e) => match parse_usize(&e.value) {
            Ok(n @ (1 | 2)) => n,
            Ok(n) => {
                errors.push(ConfigError {
                    line: e.line,
                    message: format!("n must be 1 or 2, got {n}"),
                });
                1
            }
            Err(m) => {
                errors.push(ConfigError { line: e.line, message: m });
                1
            }
        },
    };

    let mut c = ExperimentConfig::defaults(n);
    let mut data_line = 0;
    let mut exterior_line = 0;
    for e in &entries {
        let v = e.value.as_str();
        let p = &mut c.problem;
        let s = &mut c.search.params;
        let d = &mut c.diagnostics;
        let res: Result<(), String> = match (e.section.as_str(), e.key.as_str()) {
            ("problem", "n") => Ok(()),
            ("problem", "radius") => parse_f64(v).and_then(|x| positive("radius", x)).map(|x| p.radius = x),
            ("problem", "h") => parse_f64(v).and_then(|x| positive("h", x)).map(|x| p.h = x),
            ("problem", "truncation") => parse_f64(v).and_then(|x| positive("truncation", x)).map(|x| p.truncation = x),
            ("problem", "sigma") => parse_f64(v)
                .and_then(|x| in_range("sigma", x, SIGMA_RANGE.0, SIGMA_RANGE.1))
                .map(|x| p.sigma = x),
            ("problem", "data") => {
                data_line = e.line;
                Selector::parse(v).map(|x| p.data = x)
            }
            ("problem", "exterior") => {
                exterior_line = e.line;
                Selector::parse(v).map(|x| p.exterior = x)
            }
            ("problem", "sigma_grid") => parse_list(v).and_then(|xs| {
                if xs.is_empty() {
                    return Err("sigma_grid must not be empty".to_string());
                }
                for &x in &xs {
                    in_range("sigma", x, SIGMA_RANGE.0, SIGMA_RANGE.1)?;
                }
                p.sigma_grid = xs;
                Ok(())
            }),
            ("search", "seed") => v
                .parse::<u64>()
                .map(|x| s.seed = x)
                .map_err(|_| format!("expected an unsigned integer seed, got '{v}'")),
            ("search", "max_sweeps") => parse_usize(v).map(|x| s.max_sweeps = x),
            ("search", "scope") => parse_scope(v).map(|x| s.scope = x),
            ("search", "t0") => parse_f64(v).map(|x| s.t0 = x),
            ("search", "decay") => parse_f64(v).map(|x| s.decay = x),
            ("search", "patience") => parse_usize(v).map(|x| s.patience = x),
            ("search", "resolve_every") => parse_usize(v).map(|x| s.resolve_every = x),
            ("search", "polish_passes") => parse_usize(v).map(|x| s.polish_passes = x),
            ("diagnostics", "radii") => parse_list(v).and_then(|xs| {
                for &x in &xs {
                    positive("radius", x)?;
                }
                d.radii = xs;
                Ok(())
            }),
            ("diagnostics", "weiss") => parse_bool(v).map(|x| d.weiss = x),
            ("diagnostics", "c_hat") => parse_f64(v).and_then(|x| positive("c_hat", x)).map(|x| d.c_hat = Some(x)),
            ("diagnostics", "sub") => parse_usize(v).and_then(|x| {
                if x == 0 {
                    Err("sub must be at least 1".to_string())
                } else {
                    d.sub = x;
                    Ok(())
                }
            }),
            ("diagnostics", "fan") => parse_usize(v).map(|x| d.fan = x.max(1)),
            ("diagnostics", "reports") => v
                .split(',')
                .map(|t| ReportKind::parse(t.trim()).ok_or_else(|| format!("unknown report '{}'", t.trim())))
                .collect::<Result<Vec<_>, _>>()
                .map(|x| d.reports = x),
            ("output", "directory") => {
                if v.is_empty() {
                    Err("directory must not be empty".to_string())
                } else {
                    c.output.directory = v.to_string();
                    Ok(())
                }
            }
            ("output", "plot") => parse_bool(v).map(|x| c.output.plot = x),
            (sec, key) => Err(format!("unknown key '{key}' in [{sec}]")),
        };
        if let Err(message) = res {
            errors.push(ConfigError { line: e.line, message });
        }
    }

    // Cross-field checks.
    if let Err(m) = c.problem.data.boundary_data(n) {
        errors.push(ConfigError {
            line: data_line,
            message: m,
        });
    }
    if let Err(m) = c.problem.exterior.exterior() {
        errors.push(ConfigError {
            line: exterior_line,
            message: m,
        });
    }
    if let Err(e) = c.search.params.validate() {
        let line = entries.iter().find(|e| e.section == "search").map_or(0, |e| e.line);
        errors.push(ConfigError {
            line,
            message: e.to_string(),
        });
    }

    if errors.is_empty() {
        Ok(c)
    } else {
        errors.sort_by_key(|e| e.line);
        Err(ConfigErrors(errors))
    }
}

