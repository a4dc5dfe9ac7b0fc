//! Judgment outputs and their CSV / JSON encodings.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const OUTPUT_FORMAT_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 8] = [
    "scenario_id",
    "judgment_step",
    "model",
    "prior",
    "kind",
    "target_id",
    "probability",
    "flags",
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {message}")]
    Schema { context: String, message: String },
    #[error("unsupported output format_version {0}")]
    Version(u32),
}

pub type Result<T> = std::result::Result<T, OutputError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Goal,
    Statement,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Goal => "goal",
            TargetKind::Statement => "statement",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "goal" => Ok(TargetKind::Goal),
            "statement" => Ok(TargetKind::Statement),
            other => Err(format!("unknown kind '{other}' (expected goal or statement)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetProbability {
    pub target_id: String,
    pub probability: f64,
    #[serde(default)]
    pub flags: Vec<String>,
}

/// Everything one model says at one judgment point of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentOutput {
    pub scenario_id: String,
    pub judgment_step: usize,
    pub model: String,
    pub prior: String,
    pub goals: Vec<TargetProbability>,
    pub statements: Vec<TargetProbability>,
}

/// One line of the long-format CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRow {
    pub scenario_id: String,
    pub judgment_step: usize,
    pub model: String,
    pub prior: String,
    pub kind: TargetKind,
    pub target_id: String,
    pub probability: f64,
    pub flags: String,
}

/// Flattens outputs into rows ordered by (scenario, step, kind, target).
/// The sort is stable, so rows that tie keep their input order.
pub fn to_rows(outputs: &[JudgmentOutput]) -> Vec<OutputRow> {
    let mut rows = Vec::new();
    for o in outputs {
        let groups = [
            (TargetKind::Goal, &o.goals),
            (TargetKind::Statement, &o.statements),
        ];
        for (kind, targets) in groups {
            for t in targets {
                rows.push(OutputRow {
                    scenario_id: o.scenario_id.clone(),
                    judgment_step: o.judgment_step,
                    model: o.model.clone(),
                    prior: o.prior.clone(),
                    kind,
                    target_id: t.target_id.clone(),
                    probability: t.probability,
                    flags: t.flags.join(";"),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.scenario_id, a.judgment_step, a.kind, &a.target_id).cmp(&(
            &b.scenario_id,
            b.judgment_step,
            b.kind,
            &b.target_id,
        ))
    });
    rows
}

pub fn csv_string(outputs: &[JudgmentOutput]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in to_rows(outputs) {
        w.write_record([
            r.scenario_id.as_str(),
            &r.judgment_step.to_string(),
            &r.model,
            &r.prior,
            r.kind.as_str(),
            &r.target_id,
            &r.probability.to_string(),
            &r.flags,
        ])?;
    }
    let bytes = w.into_inner().expect("in-memory flush");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    format_version: u32,
    outputs: Vec<JudgmentOutput>,
}

pub fn json_string(outputs: &[JudgmentOutput]) -> Result<String> {
    let doc = JsonDocument {
        format_version: OUTPUT_FORMAT_VERSION,
        outputs: outputs.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<Vec<JudgmentOutput>> {
    let doc: JsonDocument = serde_json::from_str(text)?;
    if doc.format_version != OUTPUT_FORMAT_VERSION {
        return Err(OutputError::Version(doc.format_version));
    }
    Ok(doc.outputs)
}

pub fn write_outputs(
    outputs: &[JudgmentOutput],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => csv_string(outputs)?,
        OutputFormat::Json => json_string(outputs)?,
    };
    write_text(path.as_ref(), &text)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_outputs_json(path: impl AsRef<Path>) -> Result<Vec<JudgmentOutput>> {
    let path = path.as_ref();
    parse_json(&read_text(path)?)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads the long-format CSV written by [`write_outputs`].
pub fn read_output_rows(path: impl AsRef<Path>) -> Result<Vec<OutputRow>> {
    let path = path.as_ref();
    parse_output_csv(&read_text(path)?, &path.display().to_string())
}

pub fn parse_output_csv(text: &str, context: &str) -> Result<Vec<OutputRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(OutputError::Schema {
            context: context.to_string(),
            message: format!("expected header {}, got {}", CSV_HEADER.join(","), header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = format!("{context}: row {}", i + 2);
        let schema = |message: String| OutputError::Schema {
            context: line.clone(),
            message,
        };
        let judgment_step = rec[1]
            .parse()
            .map_err(|_| schema(format!("bad judgment_step '{}'", &rec[1])))?;
        let kind = rec[4].parse().map_err(schema)?;
        let probability: f64 = rec[6]
            .parse()
            .map_err(|_| schema(format!("bad probability '{}'", &rec[6])))?;
        if !(0.0..=1.0).contains(&probability) {
            return Err(schema(format!("probability {probability} outside [0, 1]")));
        }
        rows.push(OutputRow {
            scenario_id: rec[0].to_string(),
            judgment_step,
            model: rec[2].to_string(),
            prior: rec[3].to_string(),
            kind,
            target_id: rec[5].to_string(),
            probability,
            flags: rec[7].to_string(),
        });
    }
    Ok(rows)
}
