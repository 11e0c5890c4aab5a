//! Experiment reports, their content hash and CSV views.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use lpball::Estimate;

use crate::error::{CliError, CliResult};

/// Version of the report layout. Readers ignore fields they do not know.
pub const SCHEMA_VERSION: u32 = 1;

/// Header of [`emit_plot_data`].
pub const PLOT_HEADER: &str = "x,value,lower,upper";

/// Header of the full row dump written next to each report.
pub const ROWS_HEADER: &str = "quantity,label,x,estimate,stderr,bound,margin,verdict";

/// A real that survives JSON: non-finite values are written as `"inf"`,
/// `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Num(pub f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        if v.is_nan() {
            f.write_str("nan")
        } else if v == f64::INFINITY {
            f.write_str("inf")
        } else if v == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{v:?}")
        }
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported without a pass/fail judgement.
    Report,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Report => "report",
        }
    }
}

/// One result of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    pub label: String,
    pub x: Num,
    pub estimate: Num,
    pub stderr: Num,
    #[serde(default)]
    pub bound: Option<Num>,
    #[serde(default)]
    pub margin: Option<Num>,
    pub verdict: Verdict,
}

impl Row {
    pub fn new(quantity: &str, label: impl Into<String>, x: f64, estimate: f64, stderr: f64) -> Self {
        Self {
            quantity: quantity.to_string(),
            label: label.into(),
            x: Num(x),
            estimate: Num(estimate),
            stderr: Num(stderr),
            bound: None,
            margin: None,
            verdict: Verdict::Report,
        }
    }

    pub fn from_estimate(quantity: &str, label: impl Into<String>, x: f64, e: &Estimate) -> Self {
        Self::new(quantity, label, x, e.value, e.stderr)
    }

    pub fn bound(mut self, b: f64) -> Self {
        self.bound = Some(Num(b));
        self
    }

    pub fn margin(mut self, m: f64) -> Self {
        self.margin = Some(Num(m));
        self
    }

    pub fn verdict(mut self, pass: bool) -> Self {
        self.verdict = Verdict::from_pass(pass);
        self
    }

    fn csv(&self) -> String {
        let opt = |v: Option<Num>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            csv_field(&self.quantity),
            csv_field(&self.label),
            self.x,
            self.estimate,
            self.stderr,
            opt(self.bound),
            opt(self.margin),
            self.verdict.as_str()
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub generator: String,
    pub seed: u64,
    pub scheme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub suite: String,
    pub config: BTreeMap<String, Vec<String>>,
    pub library_version: String,
    pub rng: RngProvenance,
    /// Multiplier used for confidence bands.
    pub z: Num,
    pub rows: Vec<Row>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub verdict: Verdict,
    /// Not part of the hash.
    #[serde(default)]
    pub wall_clock_seconds: f64,
    /// SHA-256 of the canonical JSON of every other field.
    #[serde(default)]
    pub hash: String,
}

impl ExperimentReport {
    pub fn quantities(&self) -> Vec<&str> {
        let mut q: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !q.contains(&r.quantity.as_str()) {
                q.push(&r.quantity);
            }
        }
        q
    }

    pub fn rows_of<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    /// Hash of the content, excluding wall-clock time and the hash itself.
    /// JSON objects are key-sorted, so the text is canonical.
    pub fn content_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(m) = v.as_object_mut() {
            m.remove("wall_clock_seconds");
            m.remove("hash");
        }
        let text = serde_json::to_string(&v).expect("values serialize");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        // newer schemas stay readable as long as the fields above exist
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_rows_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{ROWS_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.csv())?;
        }
        w.flush()
    }
}

/// `(x, value, lower, upper)` rows of one quantity, the band being
/// `value ± z·stderr`. A report without rows gives the header alone.
pub fn emit_plot_data<W: Write>(report: &ExperimentReport, quantity: &str, mut w: W) -> CliResult<()> {
    if !report.rows.is_empty() && report.rows_of(quantity).next().is_none() {
        return Err(CliError::UnknownQuantity(quantity.to_string()));
    }
    let z = report.z.0;
    writeln!(w, "{PLOT_HEADER}")?;
    for r in report.rows_of(quantity) {
        let (v, se) = (r.estimate.0, r.stderr.0);
        writeln!(w, "{},{},{},{}", r.x, r.estimate, Num(v - z * se), Num(v + z * se))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows in the order they were produced, also appended to a side file as
/// JSON lines so an interrupted run leaves its partial results behind.
pub struct Recorder {
    rows: Vec<Row>,
    notes: Vec<String>,
    partial: Option<BufWriter<File>>,
}

impl Recorder {
    pub fn new(partial: Option<File>) -> Self {
        Self {
            rows: Vec::new(),
            notes: Vec::new(),
            partial: partial.map(BufWriter::new),
        }
    }

    pub fn push(&mut self, row: Row) -> CliResult<()> {
        if let Some(w) = &mut self.partial {
            serde_json::to_writer(&mut *w, &row)?;
            writeln!(w)?;
            w.flush()?;
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn note(&mut self, note: impl Into<String>) {
        let n = note.into();
        if !self.notes.contains(&n) {
            self.notes.push(n);
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn finish(self) -> (Vec<Row>, Vec<String>) {
        (self.rows, self.notes)
    }
}

/// Rows that differ between two reports, matched by position.
pub fn diff_reports(a: &ExperimentReport, b: &ExperimentReport) -> Vec<String> {
    let mut out = Vec::new();
    if a.suite != b.suite {
        out.push(format!("suite: {} vs {}", a.suite, b.suite));
    }
    if a.config != b.config {
        out.push("config differs".to_string());
    }
    if a.rows.len() != b.rows.len() {
        out.push(format!("row count: {} vs {}", a.rows.len(), b.rows.len()));
    }
    for (i, (x, y)) in a.rows.iter().zip(&b.rows).enumerate() {
        if x.csv() != y.csv() {
            out.push(format!("row {i}:\n  - {}\n  + {}", x.csv(), y.csv()));
        }
    }
    if a.verdict != b.verdict {
        out.push(format!("verdict: {} vs {}", a.verdict.as_str(), b.verdict.as_str()));
    }
    out
}
