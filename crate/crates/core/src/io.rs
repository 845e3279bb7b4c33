//! Deterministic CSV and JSON artifacts.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::grid::Grid;
use crate::kernel::FrontKernelProfile;
use crate::waves::WaveProfile;

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV text: an optional `# ` metadata line, a header row and one line per
/// row, LF-terminated.
pub fn csv_string<R, I>(metadata: Option<&str>, header: &[&str], rows: I) -> String
where
    R: AsRef<[f64]>,
    I: IntoIterator<Item = R>,
{
    let mut out = String::new();
    if let Some(m) = metadata {
        out.push_str("# ");
        out.push_str(m);
        out.push('\n');
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let row = row.as_ref();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&fmt_float(*v));
        }
        out.push('\n');
    }
    out
}

pub fn front_profile_csv(profile: &FrontKernelProfile, metadata: Option<&str>) -> String {
    csv_string(metadata, &["s", "h"], profile.samples().map(|(s, h)| [s, h]))
}

pub fn wave_profile_csv(profile: &WaveProfile, metadata: Option<&str>) -> String {
    csv_string(metadata, &["s", "phi"], profile.samples().map(|(s, p)| [s, p]))
}

/// One-dimensional field as `x,u` rows.
pub fn field_csv_1d(grid: &Grid, values: &[f64], column: &str, metadata: Option<&str>) -> String {
    csv_string(metadata, &["x", column], (0..grid.len()).map(|k| [grid.coords(k)[0], values[k]]))
}

/// Two-dimensional field as a single `value` column in row-major order
/// (second axis fastest); geometry goes in the sidecar.
pub fn field_csv_flat(values: &[f64], column: &str, metadata: Option<&str>) -> String {
    csv_string(metadata, &[column], values.iter().map(|&v| [v]))
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSidecar<'a> {
    pub schema_version: u32,
    pub dim: usize,
    pub shape: [usize; 2],
    pub spacing: f64,
    pub origin: [f64; 2],
    pub time: f64,
    pub layout: &'static str,
    pub column: &'a str,
}

impl<'a> FieldSidecar<'a> {
    pub fn new(grid: &Grid, time: f64, column: &'a str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dim: grid.dim(),
            shape: grid.shape(),
            spacing: grid.spacing(),
            origin: grid.origin(),
            time,
            layout: "row_major",
            column,
        }
    }
}

/// Pretty JSON with sorted keys and a trailing newline. Non-finite floats
/// become strings so that the output stays valid JSON.
pub fn json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Serialises `f64` sequences with `±∞` mapped to `"inf"`/`"-inf"`.
pub fn float_or_string(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::String(fmt_float(x))
    }
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}
