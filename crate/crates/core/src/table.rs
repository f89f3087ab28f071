//! Line-oriented CSV with `# key=value` preamble lines.
//!
//! None of the file formats in this crate quote fields, so a row is a plain
//! comma split. Floats are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub(crate) struct Table {
    pub preamble: BTreeMap<String, String>,
    pub header: Vec<String>,
    /// `(1-based line number, fields)`.
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn require_header(&self, expected: &[&str]) -> Result<()> {
        if self.header.len() < expected.len() || self.header[..expected.len()] != *expected {
            return Err(Error::Schema(format!(
                "expected header '{}', found '{}'",
                expected.join(","),
                self.header.join(",")
            )));
        }
        Ok(())
    }

    pub fn preamble_value(&self, key: &str) -> Result<&str> {
        self.preamble.get(key).map(String::as_str).ok_or_else(|| Error::Schema(format!("preamble is missing '{key}='")))
    }
}

pub(crate) fn parse_table(text: &str) -> Result<Table> {
    let mut table = Table::default();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if header_seen {
                return Err(Error::parse(line_no, "comment after header"));
            }
            for token in rest.split_whitespace() {
                let (k, v) = token
                    .split_once('=')
                    .ok_or_else(|| Error::parse(line_no, format!("preamble token '{token}' is not key=value")))?;
                table.preamble.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if !header_seen {
            table.header = fields;
            header_seen = true;
        } else {
            if fields.len() != table.header.len() {
                return Err(Error::parse(
                    line_no,
                    format!("expected {} fields, found {}", table.header.len(), fields.len()),
                ));
            }
            table.rows.push((line_no, fields));
        }
    }
    if !header_seen {
        return Err(Error::Schema("missing header line".into()));
    }
    Ok(table)
}

pub(crate) fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text)
}

pub(crate) fn render_table(preamble: &[(&str, String)], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    if !preamble.is_empty() {
        out.push('#');
        for (k, v) in preamble {
            out.push(' ');
            out.push_str(k);
            out.push('=');
            out.push_str(v);
        }
        out.push('\n');
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_real(field: &str, line: usize, column: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| Error::parse(line, format!("column {column}: '{field}' is not a number")))
}

pub(crate) fn parse_uint(field: &str, line: usize, column: &str) -> Result<u64> {
    field
        .parse::<u64>()
        .map_err(|_| Error::parse(line, format!("column {column}: '{field}' is not an unsigned integer")))
}
