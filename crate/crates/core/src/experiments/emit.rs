//! CSV and JSON output with a provenance header.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ensembles::GENERATOR;
use crate::error::{Error, Result};

use super::bound_check::{BoundCheckRow, BOUND_COLUMNS};
use super::config::OutputFormat;
use super::stats::{SummaryRow, SUMMARY_COLUMNS};

pub const TOOL: &str = "condlab";

/// Provenance written ahead of the rows. Contains nothing that depends on
/// the machine or on parallelism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputMeta {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub generator: String,
    pub seed: u64,
    pub trials: usize,
    pub dist: String,
    /// How `std` is computed.
    pub std: String,
    pub resampled: u64,
    pub notes: Vec<String>,
}

impl OutputMeta {
    pub fn new(experiment: &str, seed: u64, trials: usize, dist: &str, resampled: u64) -> Self {
        Self {
            tool: TOOL.into(),
            version: crate::VERSION.into(),
            experiment: experiment.into(),
            generator: GENERATOR.into(),
            seed,
            trials,
            dist: dist.into(),
            std: "population".into(),
            resampled,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# tool: {} {}", self.tool, self.version),
            format!("# experiment: {}", self.experiment),
            format!("# generator: {}", self.generator),
            format!("# seed: {}", self.seed),
            format!("# trials: {}", self.trials),
            format!("# dist: {}", self.dist),
            format!("# std: {}", self.std),
            format!("# resampled: {}", self.resampled),
        ];
        lines.extend(self.notes.iter().map(|n| format!("# note: {n}")));
        lines
    }
}

/// Row types with a fixed CSV column order.
pub trait OutputRow: Serialize + DeserializeOwned {
    const COLUMNS: &'static [&'static str];
}

impl OutputRow for SummaryRow {
    const COLUMNS: &'static [&'static str] = &SUMMARY_COLUMNS;
}

impl OutputRow for BoundCheckRow {
    const COLUMNS: &'static [&'static str] = &BOUND_COLUMNS;
}

#[derive(Serialize)]
struct JsonOut<'a, R> {
    meta: &'a OutputMeta,
    rows: &'a [R],
}

#[derive(Deserialize)]
struct JsonIn<R> {
    meta: OutputMeta,
    rows: Vec<R>,
}

fn format_err(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string())
}

/// Render `rows` as CSV: comment header, column line, one line per row.
pub fn to_csv<R: OutputRow>(meta: &OutputMeta, rows: &[R]) -> Result<String> {
    let mut out = meta.comment_lines().join("\n");
    out.push('\n');
    out.push_str(&R::COLUMNS.join(","));
    out.push('\n');
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(format_err)?;
    }
    let body = w.into_inner().map_err(format_err)?;
    out.push_str(std::str::from_utf8(&body).map_err(format_err)?);
    Ok(out)
}

pub fn to_json<R: OutputRow>(meta: &OutputMeta, rows: &[R]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&JsonOut { meta, rows }).map_err(format_err)?;
    s.push('\n');
    Ok(s)
}

/// Parse CSV written by [`to_csv`]. Comment lines are skipped; the column
/// line must match `R::COLUMNS` exactly.
pub fn parse_csv<R: OutputRow>(text: &str) -> Result<Vec<R>> {
    let body: String = text
        .as_bytes()
        .lines()
        .map_while(|l| l.ok())
        .filter(|l| !l.starts_with('#'))
        .map(|l| l + "\n")
        .collect();
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header: Vec<String> = rd.headers().map_err(format_err)?.iter().map(String::from).collect();
    if header != R::COLUMNS {
        return Err(Error::Format(format!(
            "expected columns {}, found {}",
            R::COLUMNS.join(","),
            header.join(",")
        )));
    }
    rd.deserialize().map(|r| r.map_err(format_err)).collect()
}

pub fn parse_json<R: OutputRow>(text: &str) -> Result<(OutputMeta, Vec<R>)> {
    let v: JsonIn<R> = serde_json::from_str(text).map_err(format_err)?;
    Ok((v.meta, v.rows))
}

pub fn render<R: OutputRow>(meta: &OutputMeta, rows: &[R], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv(meta, rows),
        OutputFormat::Json => to_json(meta, rows),
    }
}

/// Write `rows` to `path` in `format`.
pub fn emit<R: OutputRow>(meta: &OutputMeta, rows: &[R], format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(meta, rows, format)?;
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::bound_check::Verdict;

    fn meta() -> OutputMeta {
        OutputMeta::new("table_norms", 7, 3, "uniform:-1,1", 0).note("n=1 smoke")
    }

    #[test]
    fn empty_is_header_only() {
        let s = to_csv::<SummaryRow>(&meta(), &[]).unwrap();
        let last = s.lines().last().unwrap();
        assert_eq!(last, "ensemble,n,metric,min,mean,max,std");
        assert!(s.lines().filter(|l| !l.starts_with('#')).count() == 1);
        assert!(s.contains("# seed: 7"));
        assert!(parse_csv::<SummaryRow>(&s).unwrap().is_empty());
    }

    #[test]
    fn one_row_in_order() {
        let row = SummaryRow::new("circulant", 4, "norm_1", &[1.0, 3.0]);
        let s = to_csv(&meta(), std::slice::from_ref(&row)).unwrap();
        assert_eq!(s.lines().last().unwrap(), "circulant,4,norm_1,1.0,2.0,3.0,1.0");
        assert_eq!(parse_csv::<SummaryRow>(&s).unwrap(), vec![row]);
    }

    #[test]
    fn roundtrips() {
        let rows = vec![
            SummaryRow::new("general", 32, "kappa_2", &[12.5, 1.0 / 3.0, 1e-300]),
            SummaryRow::new("toeplitz", 1024, "kappa_1", &[7.1e4]),
        ];
        assert_eq!(parse_csv::<SummaryRow>(&to_csv(&meta(), &rows).unwrap()).unwrap(), rows);
        let (m, back) = parse_json::<SummaryRow>(&to_json(&meta(), &rows).unwrap()).unwrap();
        assert_eq!((m, back), (meta(), rows));

        let b = vec![BoundCheckRow {
            bound: "norm_general".into(),
            n: 4,
            observable: "norm_2".into(),
            params: "n=4;mu=0;sigma=1".into(),
            y: 0.5,
            empirical: 0.0,
            theoretical: 0.0,
            raw: None,
            se: 0.0,
            verdict: Verdict::Vacuous,
        }];
        let s = to_csv(&meta(), &b).unwrap();
        assert!(s.ends_with(",,0.0,vacuous\n"));
        assert_eq!(parse_csv::<BoundCheckRow>(&s).unwrap(), b);
        assert_eq!(parse_json::<BoundCheckRow>(&to_json(&meta(), &b).unwrap()).unwrap().1, b);
    }

    #[test]
    fn wrong_columns_rejected() {
        let s = "# x\nensemble,n,metric\n";
        assert!(matches!(parse_csv::<SummaryRow>(s), Err(Error::Format(_))));
    }

    #[test]
    fn io_error_has_path() {
        let e = emit::<SummaryRow>(&meta(), &[], OutputFormat::Csv, Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/dir/out.csv"));
    }
}
