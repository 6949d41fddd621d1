//! Serialising results as JSON, CSV or markdown.
//!
//! JSON is lossless: every float is written with 17 significant digits, and
//! output contains no hash-ordered maps, so identical inputs give identical
//! bytes. CSV and markdown are verdict-table projections.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::harness::{AuditReport, AuditVerdict, MonteCarloReport, ScenarioResult};
use crate::persistence::{diagrams_to_csv, PersistenceDiagram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::param(
                "format",
                format!("expected json, csv or markdown, got {other:?}"),
            )),
        }
    }
}

/// Pretty JSON with `{:.16e}` floats.
struct PreciseFormatter(PrettyFormatter<'static>);

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Invariant(format!("serialisation failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Something that can be written in all three formats.
pub trait Report: Serialize {
    fn to_csv(&self) -> String;
    fn to_markdown(&self) -> String;

    fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => to_json(self),
            ReportFormat::Csv => Ok(self.to_csv()),
            ReportFormat::Markdown => Ok(self.to_markdown()),
        }
    }
}

/// Renders `report` and writes it to `path`, or to stdout when `path` is `None`.
pub fn emit_report<R: Report + ?Sized>(report: &R, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let text = report.render(format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            use io::Write;
            io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

pub const VERDICT_CSV_HEADER: &str = "claim_id,hom_dim,bound,measured,margin,verdict";

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() && x > 0.0 => "inf".into(),
        Some(x) if x.is_infinite() => "-inf".into(),
        Some(x) => format!("{x:?}"),
        None => String::new(),
    }
}

fn hom_dim_cell(v: &AuditVerdict) -> String {
    v.hom_dim.map_or_else(|| "max".into(), |k| k.to_string())
}

fn verdict_csv_row(v: &AuditVerdict) -> String {
    format!(
        "{},{},{},{},{},{}",
        v.label(),
        hom_dim_cell(v),
        cell(v.bound_value),
        cell(v.measured_value),
        cell(v.margin),
        v.verdict
    )
}

fn verdict_markdown_table<'a>(out: &mut String, rows: impl IntoIterator<Item = (Option<&'a str>, &'a AuditVerdict)>) {
    let rows: Vec<_> = rows.into_iter().collect();
    let with_scenario = rows.iter().any(|(s, _)| s.is_some());
    if with_scenario {
        out.push_str("| scenario | claim | hom_dim | bound | measured | margin | verdict |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
    } else {
        out.push_str("| claim | hom_dim | bound | measured | margin | verdict |\n");
        out.push_str("|---|---|---|---|---|---|\n");
    }
    for (scenario, v) in rows {
        if let Some(s) = scenario {
            let _ = write!(out, "| {s} ");
        }
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            v.label(),
            hom_dim_cell(v),
            cell(v.bound_value),
            cell(v.measured_value),
            cell(v.margin),
            v.verdict
        );
    }
}

impl Report for ScenarioResult {
    fn to_csv(&self) -> String {
        let mut out = format!("{VERDICT_CSV_HEADER}\n");
        for v in &self.verdicts {
            out.push_str(&verdict_csv_row(v));
            out.push('\n');
        }
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = format!("# Scenario `{}`\n\n", self.name);
        let _ = writeln!(
            out,
            "{} points in R^{}, factors {:?}, diam {:?} → {:?}, max_dim {}.\n",
            self.point_count, self.ambient_dim, self.factors, self.diam_original, self.diam_scaled, self.max_dim
        );
        let _ = writeln!(
            out,
            "Sup-norm stability: max d_B {} ≤ {:?}: {}\n",
            cell(Some(self.classical.max_bottleneck)),
            self.classical.bound,
            match self.classical.holds {
                Some(true) => "holds",
                Some(false) => "VIOLATED",
                None => "not applicable (explicit eps_cap)",
            }
        );
        verdict_markdown_table(&mut out, self.verdicts.iter().map(|v| (None, v)));
        out
    }
}

impl Report for AuditReport {
    /// Verdict rows of every scenario, prefixed by the scenario name.
    fn to_csv(&self) -> String {
        let mut out = format!("scenario,{VERDICT_CSV_HEADER}\n");
        for r in &self.scenarios {
            for v in &r.verdicts {
                let _ = writeln!(out, "{},{}", r.name, verdict_csv_row(v));
            }
        }
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = format!("# Audit `{}` (seed {})\n\n", self.suite, self.seed);
        out.push_str("| claim | PASS | FAIL | VACUOUS | max violation |\n|---|---|---|---|---|\n");
        for s in &self.summary {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                s.claim_id,
                s.pass,
                s.fail,
                s.vacuous,
                cell(Some(s.max_violation))
            );
        }
        let _ = writeln!(
            out,
            "\nSup-norm stability violations: {}\n",
            if self.classical_violations.is_empty() {
                "none".to_string()
            } else {
                self.classical_violations.join(", ")
            }
        );
        verdict_markdown_table(
            &mut out,
            self.scenarios
                .iter()
                .flat_map(|r| r.verdicts.iter().map(move |v| (Some(r.name.as_str()), v))),
        );
        out
    }
}

impl Report for MonteCarloReport {
    fn to_csv(&self) -> String {
        let mut out = format!("{VERDICT_CSV_HEADER}\n");
        for v in &self.verdicts {
            out.push_str(&verdict_csv_row(v));
            out.push('\n');
        }
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = String::from("# Monte Carlo\n\n");
        let _ = writeln!(
            out,
            "{} trials, {} points in R^{}, factors ~ Uniform({:?}, {:?}), seed {}.\n",
            self.trials, self.point_count, self.ambient_dim, self.config.a, self.config.b, self.config.seed
        );
        let _ = writeln!(
            out,
            "mean d_B = {} ± {} (stderr)\n",
            cell(Some(self.mean_db)),
            cell(Some(self.stderr))
        );
        let _ = writeln!(
            out,
            "bound (endpoint mode) = {:?}, bound (order statistics) = {:?}\n",
            self.bound_paper_mode, self.bound_orderstat_mode
        );
        verdict_markdown_table(&mut out, self.verdicts.iter().map(|v| (None, v)));
        out
    }
}

/// Diagrams of one cloud, as written by `persist`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct DiagramSet(pub Vec<PersistenceDiagram>);

impl Report for DiagramSet {
    fn to_csv(&self) -> String {
        diagrams_to_csv(&self.0)
    }

    fn to_markdown(&self) -> String {
        let mut out = String::from("| hom_dim | birth | death |\n|---|---|---|\n");
        for d in &self.0 {
            for p in &d.pairs {
                let _ = writeln!(out, "| {} | {:?} | {} |", d.hom_dim, p.birth, p.death);
            }
        }
        out
    }
}
