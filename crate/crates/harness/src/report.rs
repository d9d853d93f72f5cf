//! Monte-Carlo reports and their CSV/JSON forms.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use kljn_lab::stats::batch_sigma;
use kljn_lab::BitSituation;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::spec::{AttackId, ExperimentSpec, OutputFormat, SchemeKind};

type Res<T> = std::result::Result<T, HarnessError>;

/// A sweep-point parameter: a number, or a categorical setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

impl ParamValue {
    fn parse(s: &str) -> Self {
        s.parse().map_or_else(|_| Self::Text(s.to_string()), Self::Num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Num(v) => Some(*v),
            Self::Text(_) => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Num(v) => write!(f, "{v}"),
            Self::Text(s) => f.write_str(s),
        }
    }
}

/// One row of the main table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub params: Vec<(String, ParamValue)>,
    pub runs: usize,
    pub p: f64,
    pub sigma: f64,
}

impl ReportPoint {
    pub fn from_runs(params: Vec<(String, ParamValue)>, runs: &[RunSummary]) -> Self {
        let hits: Vec<bool> = runs.iter().map(|r| r.correct).collect();
        Self {
            params,
            runs: runs.len(),
            p: hit_rate(&hits),
            sigma: batch_sigma(&hits),
        }
    }

    pub fn param(&self, name: &str) -> Option<&ParamValue> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

fn hit_rate(hits: &[bool]) -> f64 {
    if hits.is_empty() {
        return 0.0;
    }
    hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64
}

/// Per-run row of the sibling `.runs.csv` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub truth: BitSituation,
    pub guess: Option<BitSituation>,
    pub correct: bool,
    pub decision_step: Option<usize>,
}

impl RunSummary {
    pub fn new(run: usize, truth: BitSituation, guess: Option<BitSituation>, decision_step: Option<usize>) -> Self {
        Self {
            run,
            truth,
            guess,
            correct: guess == Some(truth),
            decision_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub spec: ExperimentSpec,
    pub attack: AttackId,
    pub scheme: SchemeKind,
    /// Correct guesses over all runs of all points.
    pub p: f64,
    pub sigma: f64,
    pub points: Vec<ReportPoint>,
    /// Run indices are global: point `k` holds runs after those of points `0..k`.
    pub per_run: Vec<RunSummary>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl MonteCarloReport {
    pub fn new(
        spec: ExperimentSpec,
        points: Vec<ReportPoint>,
        per_run: Vec<RunSummary>,
        diagnostics: BTreeMap<String, f64>,
    ) -> Self {
        let hits: Vec<bool> = per_run.iter().map(|r| r.correct).collect();
        Self {
            attack: spec.attack,
            scheme: spec.scheme,
            spec,
            p: hit_rate(&hits),
            sigma: batch_sigma(&hits),
            points,
            per_run,
            diagnostics: diagnostics.into_iter().filter(|(_, v)| v.is_finite()).collect(),
        }
    }

    /// Joins single-sweep-point reports; diagnostics gain a `pointNNN.` prefix.
    pub fn concat(spec: ExperimentSpec, parts: Vec<MonteCarloReport>) -> Self {
        let many = parts.len() > 1;
        let mut points = Vec::new();
        let mut per_run = Vec::new();
        let mut diagnostics = BTreeMap::new();
        for (k, part) in parts.into_iter().enumerate() {
            let offset = per_run.len();
            per_run.extend(part.per_run.into_iter().map(|mut r| {
                r.run += offset;
                r
            }));
            points.extend(part.points);
            for (key, v) in part.diagnostics {
                let key = if many { format!("point{k:03}.{key}") } else { key };
                diagnostics.insert(key, v);
            }
        }
        Self::new(spec, points, per_run, diagnostics)
    }

    pub fn correct_count(&self) -> usize {
        self.per_run.iter().filter(|r| r.correct).count()
    }

    pub fn table(&self) -> ReportTable {
        ReportTable {
            attack: self.attack.as_str().to_string(),
            scheme: self.scheme.as_str().to_string(),
            points: self.points.clone(),
            per_run: self.per_run.clone(),
        }
    }
}

/// The content of the two CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub attack: String,
    pub scheme: String,
    pub points: Vec<ReportPoint>,
    pub per_run: Vec<RunSummary>,
}

impl ReportTable {
    /// Rebuilds the table from the main and per-run CSV texts.
    pub fn from_csv(main: &str, runs: &str) -> Res<Self> {
        let mut rdr = csv::Reader::from_reader(main.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let n = header.len();
        if n < 5 || header[0] != "attack" || header[1] != "scheme" || header[n - 3..] != ["runs", "p", "sigma"] {
            return Err(HarnessError::Parse(format!("unexpected header {header:?}")));
        }
        let names = &header[2..n - 3];
        let (mut attack, mut scheme, mut points) = (String::new(), String::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            attack = rec[0].to_string();
            scheme = rec[1].to_string();
            let params = names
                .iter()
                .zip(rec.iter().skip(2))
                .map(|(k, v)| (k.clone(), ParamValue::parse(v)))
                .collect();
            points.push(ReportPoint {
                params,
                runs: parse_field(&rec[n - 3], "runs")?,
                p: parse_field(&rec[n - 2], "p")?,
                sigma: parse_field(&rec[n - 1], "sigma")?,
            });
        }
        let mut rdr = csv::Reader::from_reader(runs.as_bytes());
        if rdr.headers()?.iter().collect::<Vec<_>>() != RUN_COLUMNS {
            return Err(HarnessError::Parse("unexpected per-run header".into()));
        }
        let mut per_run = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let opt_situation = |s: &str| -> Res<Option<BitSituation>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    parse_field(s, "guess").map(Some)
                }
            };
            per_run.push(RunSummary {
                run: parse_field(&rec[0], "run")?,
                truth: parse_field(&rec[1], "truth")?,
                guess: opt_situation(&rec[2])?,
                correct: parse_field(&rec[3], "correct")?,
                decision_step: if rec[4].is_empty() {
                    None
                } else {
                    Some(parse_field(&rec[4], "decision_step")?)
                },
            });
        }
        Ok(Self {
            attack,
            scheme,
            points,
            per_run,
        })
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Res<T> {
    s.parse()
        .map_err(|_| HarnessError::Parse(format!("bad {what} value {s:?}")))
}

const RUN_COLUMNS: [&str; 5] = ["run", "truth", "guess", "correct", "decision_step"];

/// Main table: `attack,scheme,<params...>,runs,p,sigma`, one row per point.
pub fn main_csv(report: &MonteCarloReport) -> Res<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let names: Vec<&str> = report
        .points
        .first()
        .map_or(Vec::new(), |p| p.params.iter().map(|(k, _)| k.as_str()).collect());
    let mut header = vec!["attack", "scheme"];
    header.extend(&names);
    header.extend(["runs", "p", "sigma"]);
    w.write_record(&header)?;
    for pt in &report.points {
        if pt.params.iter().map(|(k, _)| k.as_str()).ne(names.iter().copied()) {
            return Err(HarnessError::Parse(
                "sweep points carry different parameter sets".into(),
            ));
        }
        let mut row = vec![report.attack.as_str().to_string(), report.scheme.as_str().to_string()];
        row.extend(pt.params.iter().map(|(_, v)| v.to_string()));
        row.extend([pt.runs.to_string(), pt.p.to_string(), pt.sigma.to_string()]);
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

/// Per-run table: `run,truth,guess,correct,decision_step`.
pub fn runs_csv(report: &MonteCarloReport) -> Res<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RUN_COLUMNS)?;
    for r in &report.per_run {
        w.write_record([
            r.run.to_string(),
            r.truth.to_string(),
            r.guess.map_or(String::new(), |g| g.to_string()),
            r.correct.to_string(),
            r.decision_step.map_or(String::new(), |s| s.to_string()),
        ])?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

/// Serialized report: the main CSV table, or the full JSON document.
pub fn emit_report(report: &MonteCarloReport, format: OutputFormat) -> Res<Vec<u8>> {
    match format {
        OutputFormat::Csv => main_csv(report),
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// `<name>.runs.csv` next to `<name>.csv`.
pub fn runs_path(path: &Path) -> PathBuf {
    let stem = if path.extension().is_some_and(|e| e == "csv") {
        path.with_extension("")
    } else {
        path.to_path_buf()
    };
    let mut name = stem.into_os_string();
    name.push(".runs.csv");
    PathBuf::from(name)
}

/// Writes the report; CSV also writes the per-run sibling file.
pub fn write_report(report: &MonteCarloReport, path: &Path, format: OutputFormat) -> Res<()> {
    fs::write(path, emit_report(report, format)?)?;
    if format == OutputFormat::Csv {
        fs::write(runs_path(path), runs_csv(report)?)?;
    }
    Ok(())
}

/// Reads back a CSV report written by [`write_report`].
pub fn read_csv_report(path: &Path) -> Res<ReportTable> {
    ReportTable::from_csv(&fs::read_to_string(path)?, &fs::read_to_string(runs_path(path))?)
}

pub fn read_json_report(path: &Path) -> Res<MonteCarloReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
