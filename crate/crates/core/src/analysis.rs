//! Human-rating ingestion and model/human correlation with bootstrap
//! confidence intervals.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::output::{OutputRow, TargetKind};

pub const DEFAULT_BOOTSTRAP: usize = 10_000;
pub const DEFAULT_SEED: u64 = 17;
pub const HUMAN_HEADER: [&str; 6] = [
    "scenario_id",
    "judgment_step",
    "kind",
    "target_id",
    "participant_id",
    "rating",
];

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {message}")]
    Schema { context: String, message: String },
    #[error("no human ratings for cell {0}")]
    EmptyCell(String),
    #[error("need at least 3 aligned pairs, have {0}")]
    InsufficientPairs(usize),
    #[error("{0} series has zero variance")]
    ZeroVariance(&'static str),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// One participant's rating of one cell.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HumanRating {
    pub scenario_id: String,
    pub judgment_step: usize,
    pub kind: TargetKind,
    pub target_id: String,
    pub participant_id: String,
    /// 1–7 Likert for statements; 0/1 selection indicator for goals.
    pub rating: f64,
}

/// (scenario, step, kind, target).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub scenario_id: String,
    pub judgment_step: usize,
    pub kind: TargetKind,
    pub target_id: String,
}

impl CellKey {
    pub fn of_rating(r: &HumanRating) -> Self {
        CellKey {
            scenario_id: r.scenario_id.clone(),
            judgment_step: r.judgment_step,
            kind: r.kind,
            target_id: r.target_id.clone(),
        }
    }

    pub fn of_output(r: &OutputRow) -> Self {
        CellKey {
            scenario_id: r.scenario_id.clone(),
            judgment_step: r.judgment_step,
            kind: r.kind,
            target_id: r.target_id.clone(),
        }
    }
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.scenario_id, self.judgment_step, self.kind, self.target_id
        )
    }
}

pub fn read_human_ratings(path: impl AsRef<Path>) -> Result<Vec<HumanRating>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_human_ratings(&text, &path.display().to_string())
}

pub fn parse_human_ratings(text: &str, context: &str) -> Result<Vec<HumanRating>> {
    let schema = |message: String| AnalysisError::Schema {
        context: context.to_string(),
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| schema(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != HUMAN_HEADER {
        return Err(schema(format!(
            "expected header {}, got {}",
            HUMAN_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<HumanRating>().enumerate() {
        let row_schema = |message: String| AnalysisError::Schema {
            context: format!("{context}: row {}", i + 2),
            message,
        };
        let r = rec.map_err(|e| row_schema(e.to_string()))?;
        let ok = match r.kind {
            TargetKind::Statement => r.rating.fract() == 0.0 && (1.0..=7.0).contains(&r.rating),
            TargetKind::Goal => r.rating == 0.0 || r.rating == 1.0,
        };
        if !ok {
            return Err(row_schema(format!(
                "rating {} out of range for a {} row",
                r.rating, r.kind
            )));
        }
        out.push(r);
    }
    Ok(out)
}

/// Mean rating per cell on [0, 1]: Likert `r` maps to `(r - 1) / 6`, goal
/// indicators are averaged as selection proportions.
pub fn normalize_ratings(ratings: &[HumanRating]) -> BTreeMap<CellKey, f64> {
    let mut acc: BTreeMap<CellKey, (f64, usize)> = BTreeMap::new();
    for r in ratings {
        let v = match r.kind {
            TargetKind::Statement => (r.rating - 1.0) / 6.0,
            TargetKind::Goal => r.rating,
        };
        let e = acc.entry(CellKey::of_rating(r)).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect()
}

/// Looks up every required cell, failing on the first one nobody rated.
pub fn require_cells(normalized: &BTreeMap<CellKey, f64>, cells: &[CellKey]) -> Result<Vec<f64>> {
    cells
        .iter()
        .map(|c| {
            normalized
                .get(c)
                .copied()
                .ok_or_else(|| AnalysisError::EmptyCell(c.to_string()))
        })
        .collect()
}

/// Pearson correlation. Errors on fewer than 3 pairs or a constant series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(AnalysisError::InsufficientPairs(x.len()));
    }
    match pearson_raw(x, y) {
        Pearson::Value(r) => Ok(r),
        Pearson::ConstantX => Err(AnalysisError::ZeroVariance("model")),
        Pearson::ConstantY => Err(AnalysisError::ZeroVariance("human")),
    }
}

enum Pearson {
    Value(f64),
    ConstantX,
    ConstantY,
}

fn pearson_raw(x: &[f64], y: &[f64]) -> Pearson {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Pearson::ConstantX;
    }
    if syy == 0.0 {
        return Pearson::ConstantY;
    }
    // One square root of the product keeps r(x, x) at exactly 1.
    Pearson::Value((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationStats {
    pub r: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    /// Bootstrap resamples that produced a defined correlation.
    pub resamples: usize,
}

/// Pearson r with a 95% percentile bootstrap interval, resampling aligned
/// cells with replacement.
pub fn correlate(model: &[f64], human: &[f64], n_boot: usize, seed: u64) -> Result<CorrelationStats> {
    let r = pearson(model, human)?;
    let n = model.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rs = Vec::with_capacity(n_boot);
    let (mut xs, mut ys) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..n_boot {
        for i in 0..n {
            let j = rng.random_range(0..n);
            xs[i] = model[j];
            ys[i] = human[j];
        }
        // Resamples that happen to be constant have no correlation; skip them.
        if let Pearson::Value(v) = pearson_raw(&xs, &ys) {
            rs.push(v);
        }
    }
    let (lo, hi) = if rs.is_empty() {
        (r, r)
    } else {
        rs.sort_by(f64::total_cmp);
        (quantile(&rs, 0.025), quantile(&rs, 0.975))
    };
    Ok(CorrelationStats {
        r,
        lo,
        hi,
        n,
        resamples: rs.len(),
    })
}

/// Linear interpolation between order statistics of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(next) if frac > 0.0 => sorted[i] + frac * (next - sorted[i]),
        _ => sorted[i],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindSelection {
    Goal,
    Statement,
    Both,
}

impl KindSelection {
    pub fn kinds(self) -> &'static [TargetKind] {
        match self {
            KindSelection::Goal => &[TargetKind::Goal],
            KindSelection::Statement => &[TargetKind::Statement],
            KindSelection::Both => &[TargetKind::Goal, TargetKind::Statement],
        }
    }
}

impl std::str::FromStr for KindSelection {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "goal" => Ok(KindSelection::Goal),
            "statement" => Ok(KindSelection::Statement),
            "both" => Ok(KindSelection::Both),
            other => Err(format!("unknown kind '{other}'")),
        }
    }
}

/// One line of a correlation table; `stats` is `None` when r is undefined
/// (for example a model that rates everything 0), with the reason in `note`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub model: String,
    pub prior: String,
    pub kind: TargetKind,
    pub n: usize,
    pub stats: Option<CorrelationStats>,
    pub note: Option<String>,
}

/// Correlates every (model, prior) group found in `model_rows` with the
/// human ratings, per selected kind. Only scenarios the humans rated are
/// considered; within those, every model cell must have human ratings.
pub fn correlation_report(
    model_rows: &[OutputRow],
    human: &[HumanRating],
    kinds: KindSelection,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<CorrelationReport>> {
    let normalized = normalize_ratings(human);
    let rated: BTreeSet<(&str, TargetKind)> = human
        .iter()
        .map(|h| (h.scenario_id.as_str(), h.kind))
        .collect();
    let mut groups: BTreeMap<(&str, &str, TargetKind), Vec<&OutputRow>> = BTreeMap::new();
    for r in model_rows {
        if kinds.kinds().contains(&r.kind) {
            groups
                .entry((r.model.as_str(), r.prior.as_str(), r.kind))
                .or_default()
                .push(r);
        }
    }
    let mut out = Vec::new();
    for ((model, prior, kind), rows) in groups {
        let mut cells: BTreeMap<CellKey, f64> = BTreeMap::new();
        for r in rows {
            if rated.contains(&(r.scenario_id.as_str(), kind)) {
                cells.insert(CellKey::of_output(r), r.probability);
            }
        }
        let keys: Vec<CellKey> = cells.keys().cloned().collect();
        let x: Vec<f64> = cells.values().copied().collect();
        let y = require_cells(&normalized, &keys)?;
        let (stats, note) = match correlate(&x, &y, n_boot, seed) {
            Ok(s) => (Some(s), None),
            Err(e @ (AnalysisError::InsufficientPairs(_) | AnalysisError::ZeroVariance(_))) => {
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e),
        };
        out.push(CorrelationReport {
            model: model.to_string(),
            prior: prior.to_string(),
            kind,
            n: x.len(),
            stats,
            note,
        });
    }
    Ok(out)
}

/// Fixed-width text table of a report.
pub fn format_report(rows: &[CorrelationReport]) -> String {
    let mut s = format!(
        "{:<12} {:<10} {:<9} {:>5}  {:>7}  {:<18}\n",
        "model", "prior", "kind", "n", "r", "95% CI"
    );
    for r in rows {
        match &r.stats {
            Some(st) => s.push_str(&format!(
                "{:<12} {:<10} {:<9} {:>5}  {:>7.4}  [{:.4}, {:.4}]\n",
                r.model, r.prior, r.kind, r.n, st.r, st.lo, st.hi
            )),
            None => s.push_str(&format!(
                "{:<12} {:<10} {:<9} {:>5}  {:>7}  ({})\n",
                r.model,
                r.prior,
                r.kind,
                r.n,
                "-",
                r.note.as_deref().unwrap_or("undefined")
            )),
        }
    }
    s
}
