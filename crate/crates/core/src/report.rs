//! Report persistence: JSON reports with 17-significant-digit floats, spectrum
//! CSV export, and symbol files.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

use crate::error::{OilError, Result};
use crate::hardy::Symbol;
use crate::linalg::C64;
use crate::spectral::SingularSpectrum;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output format of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// One experiment's outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub results: Value,
    pub residuals: Map<String, Value>,
    pub pass: bool,
    pub tool_version: String,
}

impl Report {
    pub fn new(command: impl Into<String>, params: Value, seed: u64) -> Self {
        Self {
            command: command.into(),
            params,
            seed,
            results: Value::Object(Map::new()),
            residuals: Map::new(),
            pass: true,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    /// Records a residual and folds `value <= tol` into `pass`.
    pub fn check(&mut self, name: &str, value: f64, tol: f64) {
        self.residuals.insert(
            name.to_string(),
            serde_json::json!({ "value": value, "tolerance": tol, "ok": value <= tol }),
        );
        self.pass &= value <= tol;
    }

    /// Records a lower-bound margin that must be `>= -tol`.
    pub fn check_at_least(&mut self, name: &str, value: f64, tol: f64) {
        self.residuals.insert(
            name.to_string(),
            serde_json::json!({ "value": value, "lower_bound": -tol, "ok": value >= -tol }),
        );
        self.pass &= value >= -tol;
    }

    /// Records a boolean assertion.
    pub fn check_flag(&mut self, name: &str, ok: bool) {
        self.residuals.insert(name.to_string(), serde_json::json!({ "ok": ok }));
        self.pass &= ok;
    }

    pub fn set_result(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        let v = serde_json::to_value(value)?;
        if let Value::Object(map) = &mut self.results {
            map.insert(key.to_string(), v);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// Compact JSON writer printing every float with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
struct SigDigitsFormatter;

impl Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", sig17(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{}", sig17(value as f64))
    }
}

/// `x` in scientific notation with 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// `k,sigma` rows, one per singular value.
pub fn spectrum_csv(s: &SingularSpectrum) -> String {
    let mut out = String::from("k,sigma\n");
    for (k, v) in s.values().iter().enumerate() {
        out.push_str(&format!("{k},{}\n", sig17(*v)));
    }
    out
}

pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    fs::write(path, report.to_json()?)?;
    Ok(())
}

pub fn write_spectrum_csv(s: &SingularSpectrum, path: &Path) -> Result<()> {
    fs::write(path, spectrum_csv(s))?;
    Ok(())
}

/// Parses `[[degree, re, im], ...]`.
pub fn parse_symbol(text: &str) -> Result<Symbol> {
    let value: Value = serde_json::from_str(text)?;
    let rows = value
        .as_array()
        .ok_or_else(|| OilError::InvalidParameter("symbol file must hold a JSON array".into()))?;
    let mut pairs = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let bad = || OilError::InvalidParameter(format!("entry {i} must be [degree, re, im]"));
        let triple = row.as_array().filter(|t| t.len() == 3).ok_or_else(bad)?;
        let degree = triple[0].as_i64().ok_or_else(bad)?;
        let re = triple[1].as_f64().ok_or_else(bad)?;
        let im = triple[2].as_f64().ok_or_else(bad)?;
        pairs.push((degree, C64::new(re, im)));
    }
    Symbol::new(pairs)
}

pub fn load_symbol_file(path: &Path) -> Result<Symbol> {
    parse_symbol(&fs::read_to_string(path)?)
}
