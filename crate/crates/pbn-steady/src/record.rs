//! Line-delimited structured output records.
//!
//! One record per line, tab-separated `key=value` fields, first field always
//! `record=<kind>`. Values are escaped so a record never spans lines and a
//! split on tabs followed by the first `=` recovers every field exactly.
//! `--pretty` switches to an aligned multi-line block per record.

use std::fmt::Display;
use std::fmt::Write as _;

/// An ordered list of key/value fields.
#[derive(Debug, Clone)]
pub struct Record {
    fields: Vec<(&'static str, String)>,
}

/// Escapes backslashes, tabs, and line breaks so a value stays inside its
/// field on one line.
pub fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out
}

impl Record {
    /// Starts a record of the given kind.
    pub fn new(kind: &'static str) -> Self {
        Self { fields: vec![("record", kind.to_owned())] }
    }

    /// Appends one field. Keys are static identifiers by construction;
    /// values go through [`escape`] at render time.
    pub fn push(&mut self, key: &'static str, value: impl Display) -> &mut Self {
        self.fields.push((key, value.to_string()));
        self
    }

    /// The one-line machine form (no trailing newline).
    pub fn line(&self) -> String {
        let mut out = String::new();
        for (i, (key, value)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push('\t');
            }
            out.push_str(key);
            out.push('=');
            out.push_str(&escape(value));
        }
        out
    }

    /// The human-readable block form: aligned `key: value` lines followed by
    /// a blank separator line.
    pub fn pretty(&self) -> String {
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (key, value) in &self.fields {
            let _ = writeln!(out, "{key:width$}  {value}");
        }
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Inverse of [`escape`], kept next to the tests as the format's
    /// executable definition.
    fn unescape(value: &str) -> String {
        let mut out = String::with_capacity(value.len());
        let mut chars = value.chars();
        while let Some(c) = chars.next() {
            if c != '\\' {
                out.push(c);
                continue;
            }
            match chars.next() {
                Some('\\') => out.push('\\'),
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                other => panic!("dangling escape {other:?}"),
            }
        }
        out
    }

    fn parse_line(line: &str) -> Vec<(String, String)> {
        line.split('\t')
            .map(|field| {
                let (key, value) = field.split_once('=').expect("field has no '='");
                (key.to_owned(), unescape(value))
            })
            .collect()
    }

    #[test]
    fn line_round_trips_awkward_values() {
        let mut rec = Record::new("demo");
        rec.push("path", "/tmp/a b\tc");
        rec.push("text", "line1\nline2\\end");
        rec.push("q_hat", 0.12345678901234567f64);
        let line = rec.line();
        assert!(!line.contains('\n'), "record must stay on one line");
        let fields = parse_line(&line);
        assert_eq!(fields[0], ("record".into(), "demo".into()));
        assert_eq!(fields[1], ("path".into(), "/tmp/a b\tc".into()));
        assert_eq!(fields[2], ("text".into(), "line1\nline2\\end".into()));
        let q: f64 = fields[3].1.parse().unwrap();
        assert_eq!(q, 0.12345678901234567, "float fields are read back bit-exactly");
    }

    #[test]
    fn pretty_lists_every_field() {
        let mut rec = Record::new("demo");
        rec.push("alpha_hat", 0.25);
        let pretty = rec.pretty();
        assert!(pretty.contains("record"));
        assert!(pretty.contains("alpha_hat  0.25"));
        assert!(pretty.ends_with("\n\n"));
    }
}
