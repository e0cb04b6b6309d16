//! On-disk weight tables keyed by `(n, h, R, σ, depth)`.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::weights::WeightTable;
use crate::error::{FracError, Result};

const MAGIC: &str = "FRACMIN-WEIGHTS v1";

/// Hex digest identifying a weight table's parameters.
pub fn parameter_hash(n: usize, h: f64, trunc: f64, sigma: f64, depth: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("n={n};h={:016x};R={:016x};sigma={:016x};depth={depth}", h.to_bits(), trunc.to_bits(), sigma.to_bits()));
    hex::encode(hasher.finalize())
}

/// Serializes a table: a header with the parameter hash, then one
/// `Δ W₁(Δ)` line per offset (unit-spacing weights, full precision).
pub fn write_table(table: &WeightTable, trunc: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{MAGIC} hash={} n={} h={:e} R={:e} sigma={:e} depth={} max_offset={}",
        parameter_hash(table.n(), table.h(), trunc, table.sigma(), table.depth()),
        table.n(),
        table.h(),
        trunc,
        table.sigma(),
        table.depth(),
        table.max_offset()
    );
    for (d, w) in table.entries() {
        if table.n() == 1 {
            let _ = writeln!(s, "{} {:e}", d[0], w);
        } else {
            let _ = writeln!(s, "{} {} {:e}", d[0], d[1], w);
        }
    }
    s
}

fn field<'a>(tokens: &[&'a str], key: &str) -> Result<&'a str> {
    tokens
        .iter()
        .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| FracError::Format {
            line: 1,
            reason: format!("missing `{key}` in header"),
        })
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| FracError::Format {
        line,
        reason: format!("cannot parse `{s}`"),
    })
}

/// Parses a cached table, returning `None` when its parameters differ
/// from the requested ones.
pub fn read_table(text: &str, n: usize, h: f64, trunc: f64, sigma: f64, depth: usize) -> Result<Option<WeightTable>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(FracError::Format {
        line: 1,
        reason: "empty cache file".into(),
    })?;
    if !header.starts_with(MAGIC) {
        return Err(FracError::Format {
            line: 1,
            reason: "not a weight cache (unknown version or magic)".into(),
        });
    }
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if field(&tokens, "hash")? != parameter_hash(n, h, trunc, sigma, depth) {
        return Ok(None);
    }
    let max_offset: i32 = num(field(&tokens, "max_offset")?, 1)?;
    let side = (2 * max_offset + 1) as usize;
    let len = if n == 1 { side } else { side * side };
    let mut unit = Vec::with_capacity(len);
    for (k, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != n + 1 {
            return Err(FracError::Format {
                line: k + 2,
                reason: "wrong number of columns".into(),
            });
        }
        unit.push(num::<f64>(parts[n], k + 2)?);
    }
    if unit.len() != len {
        return Err(FracError::Format {
            line: unit.len() + 1,
            reason: format!("expected {len} entries"),
        });
    }
    Ok(Some(WeightTable::from_parts(n, h, sigma, depth, max_offset, unit)))
}

/// Loads the table from `path` when its key matches, otherwise builds it
/// with `build` and writes it back.
pub fn load_or_build<F: FnOnce() -> Result<WeightTable>>(
    path: &Path,
    n: usize,
    h: f64,
    trunc: f64,
    sigma: f64,
    depth: usize,
    build: F,
) -> Result<WeightTable> {
    if let Ok(text) = std::fs::read_to_string(path) {
        if let Some(t) = read_table(&text, n, h, trunc, sigma, depth)? {
            return Ok(t);
        }
    }
    let table = build()?;
    std::fs::write(path, write_table(&table, trunc))?;
    Ok(table)
}
