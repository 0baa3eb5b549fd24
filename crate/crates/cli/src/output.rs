//! CSV assembly with a '#'-prefixed metadata header. All numeric formatting
//! is deterministic: identical inputs produce identical bytes.

use std::fmt::Write as _;

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Exponent form for probabilities and other small magnitudes.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:e}")
}

/// One output file under assembly.
pub struct CsvBuilder {
    metadata: Vec<(String, String)>,
    header: String,
    rows: Vec<String>,
}

impl CsvBuilder {
    pub fn new(header: &str) -> Self {
        CsvBuilder {
            metadata: Vec::new(),
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn finish(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.header);
        for row in &self.rows {
            let _ = writeln!(out, "{row}");
        }
        out
    }
}
