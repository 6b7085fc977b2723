//! Result tables and their CSV/JSON forms.
//!
//! Rows are scenarios (or exhibit rows), columns are outcomes. Every number
//! written out is rounded to six significant digits, and reading a file back
//! gives exactly the rounded table.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Significant digits kept on export.
pub const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot write {path}")]
    Write { path: String, source: io::Error },
    #[error("cannot read {path}")]
    Read { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed table: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`; expected csv or json")),
        }
    }
}

/// Cross-replication mean and standard deviation of one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// `axis=value` pairs joined by `;`, or an exhibit row name.
    pub label: String,
    /// Base seed the row was produced with; `None` for closed-form rows.
    pub seed: Option<u64>,
    pub replications: u32,
    /// One entry per table column; `None` where the outcome does not apply.
    pub cells: Vec<Option<Cell>>,
}

/// How a paper target is compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// `|actual - target| <= tolerance`.
    Band { target: f64, tolerance: f64 },
    /// `actual < bound`.
    Below { bound: f64 },
    /// A qualitative statement evaluated over several cells.
    Claim { statement: String },
}

/// One comparison against a published number, located by exhibit
/// coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub exhibit: String,
    pub row: String,
    pub column: String,
    pub kind: CheckKind,
    pub actual: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn band(exhibit: &str, row: &str, column: &str, target: f64, tolerance: f64, actual: Option<f64>) -> Self {
        let pass = actual.is_some_and(|a| (a - target).abs() <= tolerance);
        Self {
            exhibit: exhibit.into(),
            row: row.into(),
            column: column.into(),
            kind: CheckKind::Band { target, tolerance },
            actual,
            pass,
        }
    }

    pub fn below(exhibit: &str, row: &str, column: &str, bound: f64, actual: Option<f64>) -> Self {
        Self {
            exhibit: exhibit.into(),
            row: row.into(),
            column: column.into(),
            kind: CheckKind::Below { bound },
            actual,
            pass: actual.is_some_and(|a| a < bound),
        }
    }

    pub fn claim(exhibit: &str, row: &str, column: &str, statement: &str, pass: bool) -> Self {
        Self {
            exhibit: exhibit.into(),
            row: row.into(),
            column: column.into(),
            kind: CheckKind::Claim {
                statement: statement.into(),
            },
            actual: None,
            pass,
        }
    }

    pub fn abs_deviation(&self) -> Option<f64> {
        match (&self.kind, self.actual) {
            (CheckKind::Band { target, .. }, Some(a)) => Some(a - target),
            _ => None,
        }
    }

    pub fn rel_deviation(&self) -> Option<f64> {
        match (&self.kind, self.actual) {
            (CheckKind::Band { target, .. }, Some(a)) if *target != 0.0 => Some((a - target) / target),
            _ => None,
        }
    }
}

/// A scenario that could not be run; the rest of the table is still valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub label: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub failures: Vec<Failure>,
}

impl ResultTable {
    pub fn new(title: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            title: title.into(),
            columns,
            rows: Vec::new(),
            checks: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// True when at least one scenario failed.
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<Cell> {
        let j = self.column_index(column)?;
        self.row(row)?.cells[j]
    }

    pub fn mean(&self, row: &str, column: &str) -> Option<f64> {
        self.cell(row, column).map(|c| c.mean)
    }

    /// Copy with every number rounded as it would be on export.
    pub fn rounded(&self) -> Self {
        let mut t = self.clone();
        for row in &mut t.rows {
            for cell in row.cells.iter_mut().flatten() {
                cell.mean = round_sig(cell.mean);
                cell.sd = round_sig(cell.sd);
            }
        }
        for c in &mut t.checks {
            c.actual = c.actual.map(round_sig);
            if let CheckKind::Band { target, tolerance } = &mut c.kind {
                *target = round_sig(*target);
                *tolerance = round_sig(*tolerance);
            }
            if let CheckKind::Below { bound } = &mut c.kind {
                *bound = round_sig(*bound);
            }
        }
        t
    }

    pub fn to_csv(&self) -> Result<String, TableError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["scenario".to_owned(), "seed".to_owned(), "replications".to_owned()];
        for c in &self.columns {
            header.push(c.clone());
            header.push(format!("{c}_sd"));
        }
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![
                row.label.clone(),
                row.seed.map(|s| s.to_string()).unwrap_or_default(),
                row.replications.to_string(),
            ];
            for cell in &row.cells {
                match cell {
                    Some(c) => {
                        rec.push(format_sig(c.mean));
                        rec.push(format_sig(c.sd));
                    }
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| TableError::Malformed(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| TableError::Malformed(e.to_string()))
    }

    /// Inverse of [`to_csv`](Self::to_csv). Checks and failures are not part
    /// of the CSV form.
    pub fn from_csv(title: &str, text: &str) -> Result<Self, TableError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        if header.len() < 3 || (header.len() - 3) % 2 != 0 {
            return Err(TableError::Malformed(format!("{} header fields", header.len())));
        }
        let columns: Vec<String> = header.iter().skip(3).step_by(2).map(str::to_owned).collect();
        let mut table = ResultTable::new(title, columns);
        for rec in r.records() {
            let rec = rec?;
            let num = |s: &str| -> Result<f64, TableError> {
                s.parse()
                    .map_err(|_| TableError::Malformed(format!("`{s}` is not a number")))
            };
            let seed = match &rec[1] {
                "" => None,
                s => Some(s.parse().map_err(|_| TableError::Malformed(format!("bad seed `{s}`")))?),
            };
            let replications = rec[2]
                .parse()
                .map_err(|_| TableError::Malformed(format!("bad replication count `{}`", &rec[2])))?;
            let mut cells = Vec::with_capacity(table.columns.len());
            for j in 0..table.columns.len() {
                let (m, s) = (&rec[3 + 2 * j], &rec[4 + 2 * j]);
                cells.push(if m.is_empty() {
                    None
                } else {
                    Some(Cell {
                        mean: num(m)?,
                        sd: num(s)?,
                    })
                });
            }
            table.rows.push(Row {
                label: rec[0].to_owned(),
                seed,
                replications,
                cells,
            });
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Result<String, TableError> {
        Ok(serde_json::to_string_pretty(&self.rounded())?)
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: Format) -> Result<String, TableError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn export(&self, path: &Path, format: Format) -> Result<(), TableError> {
        let text = self.render(format)?;
        let err = |source| TableError::Write {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(err)?;
        }
        fs::write(path, text).map_err(err)
    }

    pub fn import(path: &Path, format: Format) -> Result<Self, TableError> {
        let text = fs::read_to_string(path).map_err(|source| TableError::Read {
            path: path.display().to_string(),
            source,
        })?;
        match format {
            Format::Csv => {
                let title = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
                Self::from_csv(title, &text)
            }
            Format::Json => Self::from_json(&text),
        }
    }

    /// Plain-text layout for terminals.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("{}\n", self.title);
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(8);
        for (j, col) in self.columns.iter().enumerate() {
            let _ = write!(out, "  {col}:");
            for row in &self.rows {
                match row.cells[j] {
                    Some(c) => {
                        let _ = write!(out, "\n    {:<width$}  {} ({})", row.label, format_sig(c.mean), format_sig(c.sd));
                    }
                    None => {
                        let _ = write!(out, "\n    {:<width$}  n/a", row.label);
                    }
                }
            }
            out.push('\n');
        }
        if !self.checks.is_empty() {
            out.push_str("checks:\n");
            for c in &self.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                let actual = c.actual.map(format_sig).unwrap_or_else(|| "-".into());
                let what = match &c.kind {
                    CheckKind::Band { target, tolerance } => {
                        format!("{actual} vs {} +- {}", format_sig(*target), format_sig(*tolerance))
                    }
                    CheckKind::Below { bound } => format!("{actual} < {}", format_sig(*bound)),
                    CheckKind::Claim { statement } => statement.clone(),
                };
                let _ = writeln!(out, "  {status} [{} | {} | {}] {what}", c.exhibit, c.row, c.column);
            }
        }
        for f in &self.failures {
            let _ = writeln!(out, "  FAILED {}: {}", f.label, f.error);
        }
        out
    }
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format_sig(x).parse().expect("formatted float parses")
}

/// Shortest decimal rendering of `x` at [`SIGNIFICANT_DIGITS`] significant
/// digits, without exponent notation for ordinary magnitudes.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&magnitude) {
        return format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new digit (9.999995 -> 10.00000); the extra
    // trailing digit is then beyond six significant figures.
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new("t", vec!["a".into(), "b".into()]);
        t.rows.push(Row {
            label: "opd_iat=3;consult_mean=5".into(),
            seed: Some(42),
            replications: 100,
            cells: vec![
                Some(Cell {
                    mean: 1.142_876_543,
                    sd: 0.000_123_456_78,
                }),
                None,
            ],
        });
        t
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig(1.142_876_543), "1.14288");
        assert_eq!(format_sig(0.000_123_456_78), "0.000123457");
        assert_eq!(format_sig(6789.0), "6789");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let text = t.to_csv().unwrap();
        let back = ResultTable::from_csv("t", &text).unwrap();
        assert_eq!(back, t.rounded());
        assert_eq!(back.to_csv().unwrap(), text);
    }

    #[test]
    fn json_round_trip() {
        let mut t = sample();
        t.checks.push(Check::band("Table 6", "Benchmark", "doctor_utilization", 1.142, 0.05, Some(1.1431)));
        let text = t.to_json().unwrap();
        let back = ResultTable::from_json(&text).unwrap();
        assert_eq!(back, t.rounded());
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable::new("e", vec!["a".into()]);
        assert_eq!(t.to_csv().unwrap(), "scenario,seed,replications,a,a_sd\n");
    }

    #[test]
    fn checks_report_deviation() {
        let c = Check::band("Table 6", "c1", "x", 2.0, 0.5, Some(2.4));
        assert!(c.pass);
        assert!((c.abs_deviation().unwrap() - 0.4).abs() < 1e-12);
        assert!((c.rel_deviation().unwrap() - 0.2).abs() < 1e-12);
        assert!(!Check::band("T", "r", "c", 2.0, 0.1, None).pass);
    }
}
