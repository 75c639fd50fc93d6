// SPDX-License-Identifier: MIT OR Apache-2.0

//! Flat-file series input: one value per line, `#` starts a comment, and an
//! optional single header line (single-column CSV).

use std::path::Path;

use crate::error::{Error, Result};
use crate::signals::TimeSeries;

pub fn parse_series(text: &str) -> Result<TimeSeries> {
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let field = line.trim_end_matches(',').trim();
        if field.contains(',') {
            return Err(Error::Parse(format!(
                "line {}: expected a single column, got `{line}`",
                lineno + 1
            )));
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => {
                return Err(Error::Parse(format!(
                    "line {}: non-finite value `{field}`",
                    lineno + 1
                )))
            }
            Err(_) if header_allowed => {}
            Err(_) => {
                return Err(Error::Parse(format!(
                    "line {}: cannot parse `{field}` as a number",
                    lineno + 1
                )))
            }
        }
        header_allowed = false;
    }
    TimeSeries::new(values).map_err(|e| match e {
        Error::SeriesTooShort { got, .. } => {
            Error::Parse(format!("series needs at least 2 values, found {got}"))
        }
        other => other,
    })
}

pub fn read_series(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_series(&text)
}

/// One value per line, round-trippable through [`parse_series`].
pub fn format_series(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 8);
    for v in values {
        out.push_str(&format!("{v:?}\n"));
    }
    out
}
