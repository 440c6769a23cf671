//! Rendering of flat records as an aligned table, CSV or JSON lines.

use std::io::Write;

use fuzzstat_core::{Error, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

pub fn emit<T: Serialize, W: Write>(records: &[T], format: Format, out: &mut W) -> Result<()> {
    match format {
        Format::Table => table(records, out),
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut *out);
            for r in records {
                csv.serialize(r).map_err(csv_error)?;
            }
            csv.flush()?;
            Ok(())
        }
        Format::JsonLines => {
            for r in records {
                serde_json::to_writer(&mut *out, r).map_err(|e| Error::Io(e.into()))?;
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// Compact human-readable number.
pub fn number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == v.trunc() && v.abs() < 1e12 {
        return format!("{v:.0}");
    }
    let a = v.abs();
    if (1e-3..1e12).contains(&a) {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.4e}")
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (_, Some(i)) => i.to_string(),
            _ => number(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn table<T: Serialize, W: Write>(records: &[T], out: &mut W) -> Result<()> {
    let rows: Vec<Vec<(String, String)>> = records
        .iter()
        .map(|r| match serde_json::to_value(r) {
            Ok(Value::Object(map)) => Ok(map.iter().map(|(k, v)| (k.clone(), cell(v))).collect()),
            Ok(other) => Ok(vec![("value".to_string(), cell(&other))]),
            Err(e) => Err(Error::Io(e.into())),
        })
        .collect::<Result<_>>()?;
    match rows.as_slice() {
        [] => Ok(()),
        [single] => {
            let width = single.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in single {
                writeln!(out, "{k:<width$} : {v}")?;
            }
            Ok(())
        }
        many => {
            let header: Vec<&str> = many[0].iter().map(|(k, _)| k.as_str()).collect();
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in many {
                for (w, (_, v)) in widths.iter_mut().zip(row) {
                    *w = (*w).max(v.len());
                }
            }
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(out, "{}", line(header.clone()))?;
            for row in many {
                writeln!(out, "{}", line(row.iter().map(|(_, v)| v.as_str()).collect()))?;
            }
            Ok(())
        }
    }
}
