//! Text forms shared by every artifact: complex numbers, provenance and file names.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{param, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "hecke";

/// `a+bi` with 17 significant digits in each part; round-trips exactly.
pub fn fmt_complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses `a`, `a+bi`, `a-bi`, `bi` (exponents allowed in either part).
pub fn parse_complex(text: &str) -> CliResult<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || param(format!("cannot parse complex number '{text}'"));
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    let im = im.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Compact number for file names: `3`, `0.25`, `-0.25`.
pub fn fmt_tag(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('e') {
        format!("{x:e}")
    } else {
        s
    }
}

/// Parameters of one invocation, written into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// `# hecke 0.1.0 <command> k=v ...` header line for CSV files.
    pub fn csv_header(&self) -> String {
        let mut line = format!("# {} {} {}", self.tool, self.version, self.command);
        for (k, v) in &self.params {
            line.push_str(&format!(" {k}={v}"));
        }
        line.push_str(&format!(" schema_version={SCHEMA_VERSION}"));
        line
    }
}

/// Wraps a payload with `schema_version` and provenance.
#[derive(Debug, Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema_version: u32,
    pub provenance: &'a Provenance,
    #[serde(flatten)]
    pub body: T,
}

pub fn json_document<T: Serialize>(provenance: &Provenance, body: T) -> String {
    let doc = Document { schema_version: SCHEMA_VERSION, provenance, body };
    let mut s = serde_json::to_string_pretty(&doc).expect("artifact serializes");
    s.push('\n');
    s
}

/// Builds a CSV file: provenance line, column header, rows.
pub fn csv_document(provenance: &Provenance, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = provenance.csv_header();
    out.push('\n');
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_common_forms() {
        let cases = [
            ("2.0+0.0i", (2.0, 0.0)),
            ("1.5", (1.5, 0.0)),
            ("0.25-3i", (0.25, -3.0)),
            ("-1e-3+2.5e+1i", (-1e-3, 25.0)),
            ("4i", (0.0, 4.0)),
            ("1-i", (1.0, -1.0)),
            (" 0.5 + 2 i", (0.5, 2.0)),
        ];
        for (text, (re, im)) in cases {
            assert_eq!(parse_complex(text).unwrap(), Complex64::new(re, im), "{text}");
        }
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2j").is_err());
    }

    #[test]
    fn headers_are_sorted() {
        let p = Provenance::new("zeta").with("w", 3).with("rep", "trivial");
        assert_eq!(p.csv_header(), format!("# hecke {} zeta rep=trivial w=3 schema_version=1", p.version));
    }

    proptest! {
        #[test]
        fn complex_round_trip(re in -1e300f64..1e300, im in -1e300f64..1e300) {
            let z = Complex64::new(re, im);
            prop_assert_eq!(parse_complex(&fmt_complex(z)).unwrap(), z);
        }
    }
}
