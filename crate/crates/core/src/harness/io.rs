//! File formats of the experiment harness: interval CSVs, curve CSVs with
//! provenance comments, PMF CSVs, and JSON summaries.
//!
//! Every writer is deterministic: identical inputs produce identical
//! bytes, so reruns of a seeded experiment can be compared with `diff`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::bsvr::process::{CensorClass, ObservedIntervalSet};
use crate::error::{Error, Result};
use crate::mpc::chord::RadiusPmf;

/// 64-bit FNV-1a hash, used to stamp outputs with their configuration.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Stable label of a censoring class, used in the interval CSV.
pub fn class_label(class: CensorClass) -> &'static str {
    match class {
        CensorClass::Interior => "interior",
        CensorClass::LeftCensored => "left_censored",
        CensorClass::RightCensored => "right_censored",
        CensorClass::DoublyCensored => "doubly_censored",
    }
}

/// Writes an interval set as CSV: a window header comment, a column
/// header, and one `a,b,class` row per interval.
pub fn write_intervals_csv<W: Write>(out: &mut W, set: &ObservedIntervalSet) -> Result<()> {
    let (x1, x2) = set.window();
    writeln!(out, "# x1={x1},x2={x2},delta0={}", set.delta0())?;
    writeln!(out, "a,b,class")?;
    for (i, (a, b)) in set.intervals().iter().enumerate() {
        writeln!(out, "{a},{b},{}", class_label(set.class_of(i)))?;
    }
    Ok(())
}

/// Reads an interval CSV produced by [`write_intervals_csv`].
///
/// The window header comment is required; the class column is optional
/// and ignored (classes are recomputed from the geometry).
pub fn read_intervals_csv<R: BufRead>(input: R) -> Result<ObservedIntervalSet> {
    let mut window: Option<(f64, f64, f64)> = None;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if window.is_none() {
                window = Some(parse_window_header(comment, lineno + 1)?);
            }
            continue;
        }
        let mut fields = line.split(',');
        let a = fields.next().unwrap_or("").trim();
        if a == "a" {
            continue; // column header row
        }
        let b = fields.next().unwrap_or("").trim();
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::Parse(format!("line {}: bad {what} value {s:?}", lineno + 1))
            })
        };
        intervals.push((parse(a, "interval start")?, parse(b, "interval end")?));
    }
    let (x1, x2, delta0) = window.ok_or_else(|| {
        Error::Parse("missing `# x1=..,x2=..,delta0=..` header".into())
    })?;
    ObservedIntervalSet::new(intervals, (x1, x2), delta0)
}

fn parse_window_header(comment: &str, lineno: usize) -> Result<(f64, f64, f64)> {
    let mut x1 = None;
    let mut x2 = None;
    let mut delta0 = None;
    for pair in comment.split(',') {
        let mut kv = pair.splitn(2, '=');
        let key = kv.next().unwrap_or("").trim();
        let value = kv.next().unwrap_or("").trim();
        let slot = match key {
            "x1" => &mut x1,
            "x2" => &mut x2,
            "delta0" => &mut delta0,
            _ => continue,
        };
        *slot = Some(value.parse::<f64>().map_err(|_| {
            Error::Parse(format!("line {lineno}: bad {key} value {value:?}"))
        })?);
    }
    match (x1, x2, delta0) {
        (Some(x1), Some(x2), Some(d)) => Ok((x1, x2, d)),
        _ => Err(Error::Parse(format!(
            "line {lineno}: header must define x1, x2, and delta0"
        ))),
    }
}

/// Renders a curve CSV: `# key=value` provenance comments, a column
/// header, and numeric rows.
pub fn render_curve_csv(
    comments: &[(&str, String)],
    columns: &[&str],
    rows: &[Vec<f64>],
) -> String {
    let mut out = String::new();
    for (key, value) in comments {
        let _ = writeln!(out, "# {key}={value}");
    }
    let _ = writeln!(out, "{}", columns.join(","));
    for row in rows {
        let rendered: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", rendered.join(","));
    }
    out
}

/// Renders a radius PMF as a two-column CSV with provenance comments.
pub fn render_pmf_csv(comments: &[(&str, String)], pmf: &RadiusPmf) -> String {
    let rows: Vec<Vec<f64>> = pmf
        .radii()
        .iter()
        .zip(pmf.weights())
        .map(|(r, w)| vec![*r, *w])
        .collect();
    render_curve_csv(comments, &["radius", "weight"], &rows)
}

/// Writes a string to a file, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Serializes a value as pretty JSON (with a trailing newline) to a file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}
