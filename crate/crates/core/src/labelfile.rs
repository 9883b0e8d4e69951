//! The tab-separated label file format.
//!
//! One record per line: `label TAB value TAB url LF`, with value `1` or
//! `-1`. The same format is used for remote sources and for local storage.
//! Malformed lines are skipped and reported; a bad line never invalidates
//! the rest of the file.

use std::fmt;

use crate::canonical::{canonicalize_url, UrlError};
use crate::label::{LabelError, LabelName, LabelRecord, LabelValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WarningReason {
    NotUtf8,
    FieldCount(usize),
    BadLabel(LabelError),
    BadValue(String),
    BadUrl(UrlError),
}

impl fmt::Display for WarningReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarningReason::NotUtf8 => f.write_str("line is not valid UTF-8"),
            WarningReason::FieldCount(n) => write!(f, "expected 3 tab-separated fields, found {n}"),
            WarningReason::BadLabel(e) => write!(f, "bad label name: {e}"),
            WarningReason::BadValue(v) => write!(f, "bad value literal {v:?}"),
            WarningReason::BadUrl(e) => write!(f, "bad URL: {e}"),
        }
    }
}

/// A skipped line, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineWarning {
    pub line: usize,
    pub reason: WarningReason,
}

impl fmt::Display for LineWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedLabelFile {
    pub records: Vec<LabelRecord>,
    pub warnings: Vec<LineWarning>,
}

fn parse_line(line: &[u8]) -> Result<LabelRecord, WarningReason> {
    let line = std::str::from_utf8(line).map_err(|_| WarningReason::NotUtf8)?;
    let fields: Vec<&str> = line.split('\t').collect();
    let [label, value, url] = fields[..] else {
        return Err(WarningReason::FieldCount(fields.len()));
    };
    let label = LabelName::new(label).map_err(WarningReason::BadLabel)?;
    let value = LabelValue::from_literal(value).map_err(|_| WarningReason::BadValue(value.to_owned()))?;
    let item = canonicalize_url(url).map_err(WarningReason::BadUrl)?;
    Ok(LabelRecord { label, value, item })
}

/// Parses a label file. Records keep input order, duplicates included.
pub fn parse_label_file(bytes: &[u8]) -> ParsedLabelFile {
    let mut out = ParsedLabelFile::default();
    if bytes.is_empty() {
        return out;
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    for (idx, line) in body.split(|&b| b == b'\n').enumerate() {
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.warnings.push(LineWarning { line: idx + 1, reason }),
        }
    }
    out
}

/// Serializes records, one LF-terminated line each.
pub fn serialize_label_file<'a, I>(records: I) -> Vec<u8>
where
    I: IntoIterator<Item = &'a LabelRecord>,
{
    let mut out = Vec::new();
    for rec in records {
        out.extend_from_slice(rec.label.as_str().as_bytes());
        out.push(b'\t');
        out.extend_from_slice(rec.value.literal().as_bytes());
        out.push(b'\t');
        out.extend_from_slice(rec.item.as_str().as_bytes());
        out.push(b'\n');
    }
    out
}
