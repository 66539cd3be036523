use std::io::{Read, Write};
use std::path::Path;

use anyhow::anyhow;
use grasscurve::curve::SCHEMA_VERSION;
use grasscurve::{Curve, Error};
use serde::Serialize;
use serde_json::Value;

use crate::{Format, Global};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(msg: impl std::fmt::Display) -> Self {
        Self { code: 2, error: anyhow!("{msg}") }
    }

    pub fn domain(msg: impl std::fmt::Display) -> Self {
        Self { code: 1, error: anyhow!("{msg}") }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Json(_) | Error::InvalidCurve(_) | Error::DimensionMismatch(_) => 2,
            _ => 1,
        };
        Self { code, error: e.into() }
    }
}

pub fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))
    }
}

pub fn load_curve(path: &str) -> Result<Curve, Failure> {
    let text = read_input(path)?;
    Curve::from_json(&text).map_err(|e| Failure::input(format!("{path}: {e}")))
}

pub fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Sends `body` to `--out` or stdout.
pub fn deliver(g: &Global, body: &str) -> Result<(), Failure> {
    match &g.out {
        Some(p) => write_file(p, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::input(format!("stdout: {e}")))
        }
    }
}

/// Serialises a report with `schema_version` and `command` prepended.
pub fn json_report(command: &str, report: &impl Serialize) -> Result<String, Failure> {
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    map.insert("command".into(), command.into());
    match serde_json::to_value(report).map_err(Failure::domain)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(map)).map_err(Failure::domain)?;
    s.push('\n');
    Ok(s)
}

/// `key: value` lines from the top level of a JSON object.
pub fn text_report(command: &str, report: &impl Serialize) -> Result<String, Failure> {
    let value = serde_json::to_value(report).map_err(Failure::domain)?;
    let mut s = format!("{command}\n");
    if let Value::Object(fields) = value {
        let width = fields.keys().map(|k| k.len()).max().unwrap_or(0);
        for (k, v) in fields {
            let v = match v {
                Value::String(x) => x,
                Value::Null => "undefined".into(),
                other => other.to_string(),
            };
            s.push_str(&format!("  {k:width$}  {v}\n"));
        }
    }
    Ok(s)
}

pub fn emit(g: &Global, command: &str, report: &impl Serialize) -> Result<(), Failure> {
    let body = match g.format {
        Format::Json => json_report(command, report)?,
        Format::Text => text_report(command, report)?,
        Format::Csv => return Err(Failure::input(format!("--format csv is not available for {command}"))),
    };
    deliver(g, &body)
}

pub fn emit_curve(g: &Global, command: &str, c: &Curve) -> Result<(), Failure> {
    let body = match g.format {
        Format::Json => {
            let mut s = c.to_json_pretty();
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!("{command}: n = {}, d = {}\n", c.n(), c.d());
            for (alpha, a) in c.coeffs().iter().enumerate() {
                for r in 0..2 {
                    let row: Vec<String> = a.row(r).iter().map(|z| format!("{z:.6}")).collect();
                    s.push_str(&format!("  a{}^({}) = [{}]\n", r + 1, alpha + 1, row.join(", ")));
                }
            }
            s
        }
        Format::Csv => return Err(Failure::input(format!("--format csv is not available for {command}"))),
    };
    deliver(g, &body)
}

pub fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(Failure::domain)?;
    }
    let bytes = w.into_inner().map_err(Failure::domain)?;
    String::from_utf8(bytes).map_err(Failure::domain)
}
