//! Versioned text snapshots of configurations.
//!
//! ```text
//! FRACMIN v1 n=2 h=0.0625 R=2 sigma=0.5 radius=1 exterior=half_space(0,1,0)
//! ix iy phase u
//! ```
//! One line per Ω cell followed by one line per boundary-layer cell.
//! Lattice cells outside Ω ∪ layer take their phase from the exterior.

use std::fmt::Write as _;
use std::sync::Arc;

use super::config::Configuration;
use super::domain::Domain;
use super::field::ScalarField;
use super::set::{Exterior, IndicatorSet};
use crate::error::{FracError, Result};

pub const SNAPSHOT_MAGIC: &str = "FRACMIN";
pub const SNAPSHOT_VERSION: &str = "v1";

pub fn format_exterior(e: &Exterior) -> String {
    match *e {
        Exterior::HalfSpace { normal, offset } => {
            format!("half_space({:?},{:?},{:?})", normal[0], normal[1], offset)
        }
        Exterior::ComplementOfBall { center, radius } => {
            format!("complement_of_ball({:?},{:?},{:?})", center[0], center[1], radius)
        }
        Exterior::Ball { center, radius } => format!("ball({:?},{:?},{:?})", center[0], center[1], radius),
        Exterior::AllInside => "all_inside".to_string(),
        Exterior::AllOutside => "all_outside".to_string(),
    }
}

/// Parses `name(args)` selector syntax into name and numeric arguments.
pub fn parse_call(s: &str) -> std::result::Result<(String, Vec<f64>), String> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s.to_string(), Vec::new())),
        Some(i) => {
            if !s.ends_with(')') {
                return Err(format!("missing ')' in '{s}'"));
            }
            let name = s[..i].trim().to_string();
            let inner = &s[i + 1..s.len() - 1];
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number '{}'", t.trim())))
                    .collect::<std::result::Result<Vec<_>, _>>()?
            };
            Ok((name, args))
        }
    }
}

pub fn parse_exterior(s: &str) -> std::result::Result<Exterior, String> {
    let (name, a) = parse_call(s)?;
    let need = |k: usize| -> std::result::Result<(), String> {
        if a.len() == k {
            Ok(())
        } else {
            Err(format!("{name} expects {k} arguments, got {}", a.len()))
        }
    };
    match name.as_str() {
        "half_space" => {
            need(3)?;
            if a[0] == 0.0 && a[1] == 0.0 {
                return Err("half_space normal must be nonzero".into());
            }
            Ok(Exterior::half_space([a[0], a[1]], a[2]))
        }
        "complement_of_ball" => {
            need(3)?;
            Ok(Exterior::ComplementOfBall {
                center: [a[0], a[1]],
                radius: a[2],
            })
        }
        "ball" => {
            need(3)?;
            Ok(Exterior::Ball {
                center: [a[0], a[1]],
                radius: a[2],
            })
        }
        "all_inside" => {
            need(0)?;
            Ok(Exterior::AllInside)
        }
        "all_outside" => {
            need(0)?;
            Ok(Exterior::AllOutside)
        }
        other => Err(format!("unknown exterior selector '{other}'")),
    }
}

/// Serializes a configuration.
pub fn write_snapshot(config: &Configuration) -> String {
    let d = config.domain();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} n={} h={:?} R={:?} sigma={:?} radius={:?} exterior={}",
        d.n(),
        d.h(),
        d.truncation(),
        config.sigma,
        d.radius(),
        format_exterior(&config.set.exterior())
    );
    let u = config.u();
    for k in 0..d.field_len() {
        let c = d.field_cell(k);
        let phase = config.set.phase(c);
        if d.n() == 1 {
            let _ = writeln!(out, "{} {} {:?}", c[0], phase, u.values()[k]);
        } else {
            let _ = writeln!(out, "{} {} {} {:?}", c[0], c[1], phase, u.values()[k]);
        }
    }
    out
}

fn fmt_err(line: usize, reason: impl Into<String>) -> FracError {
    FracError::Format {
        line,
        reason: reason.into(),
    }
}

/// Parses a snapshot written by [`write_snapshot`].
pub fn read_snapshot(text: &str) -> Result<Configuration> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| fmt_err(1, "empty snapshot"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(SNAPSHOT_MAGIC) {
        return Err(fmt_err(1, "missing FRACMIN header"));
    }
    match toks.next() {
        Some(SNAPSHOT_VERSION) => {}
        Some(v) => return Err(fmt_err(1, format!("unsupported snapshot version '{v}'"))),
        None => return Err(fmt_err(1, "missing version")),
    }
    let mut n = None;
    let mut h = None;
    let mut r_trunc = None;
    let mut sigma = None;
    let mut radius = None;
    let mut exterior = None;
    for t in toks {
        let (k, v) = t.split_once('=').ok_or_else(|| fmt_err(1, format!("bad header token '{t}'")))?;
        let num = || v.parse::<f64>().map_err(|_| fmt_err(1, format!("bad value for {k}")));
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|_| fmt_err(1, "bad n"))?),
            "h" => h = Some(num()?),
            "R" => r_trunc = Some(num()?),
            "sigma" => sigma = Some(num()?),
            "radius" => radius = Some(num()?),
            "exterior" => exterior = Some(parse_exterior(v).map_err(|e| fmt_err(1, e))?),
            _ => {}
        }
    }
    let n = n.ok_or_else(|| fmt_err(1, "missing n"))?;
    let h = h.ok_or_else(|| fmt_err(1, "missing h"))?;
    let r_trunc = r_trunc.ok_or_else(|| fmt_err(1, "missing R"))?;
    let sigma = sigma.ok_or_else(|| fmt_err(1, "missing sigma"))?;
    let radius = radius.unwrap_or(r_trunc / 2.0);
    let exterior = exterior.unwrap_or(Exterior::AllOutside);
    let domain = Arc::new(Domain::ball(n, radius, h, r_trunc)?);
    let mut set = IndicatorSet::from_exterior(domain.clone(), exterior);
    let mut phases = set.phases().to_vec();
    let mut u = vec![0.0; domain.field_len()];
    let mut seen = vec![false; domain.field_len()];
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != n + 2 {
            return Err(fmt_err(line_no, format!("expected {} columns", n + 2)));
        }
        let ix: i32 = parts[0].parse().map_err(|_| fmt_err(line_no, "bad ix"))?;
        let iy: i32 = if n == 2 {
            parts[1].parse().map_err(|_| fmt_err(line_no, "bad iy"))?
        } else {
            0
        };
        let phase: i8 = parts[n].parse().map_err(|_| fmt_err(line_no, "bad phase"))?;
        if phase != 1 && phase != -1 {
            return Err(fmt_err(line_no, "phase must be ±1"));
        }
        let val: f64 = parts[n + 1].parse().map_err(|_| fmt_err(line_no, "bad u"))?;
        let c = [ix, iy];
        let k = domain
            .field_index(c)
            .ok_or_else(|| fmt_err(line_no, format!("cell {c:?} is not a field cell")))?;
        phases[domain.linear(c)] = phase;
        u[k] = val;
        seen[k] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(fmt_err(0, format!("missing cell {:?}", domain.field_cell(k))));
    }
    set = IndicatorSet::from_phases(domain.clone(), phases, set.exterior())?;
    let uf = ScalarField::from_values(domain, u);
    Ok(Configuration {
        sigma,
        set,
        u_plus: uf.positive_part(),
        u_minus: uf.negative_part(),
        breakdown: None,
    })
}
