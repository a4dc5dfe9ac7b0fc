//! Scenario files: loading, validation, saving and hypothesis expansion.
//!
//! A scenario is one TOML document. The maze is an ASCII block in which `#`
//! is a wall, `.` is floor, `@` is the agent's start and every other
//! character is a marker declared in the `objects` table:
//!
//! ```toml
//! format_version = 1
//! id = "corridor"
//! colors = ["red", "blue"]
//! grid = """
//! #######
//! #@.1.c#
//! #######
//! """
//! objects = [
//!   { marker = "1", kind = "box", id = "box1" },
//!   { marker = "c", kind = "gem", id = "circle" },
//! ]
//! trajectory = ["right", "open(box1)"]
//! judgment_points = [0, 2]
//!
//! [hypotheses]
//! box_options = { box1 = ["empty", "red", "blue"] }
//!
//! [ground_truth]
//! box1 = "red"
//!
//! [[statements]]
//! id = "s1"
//! formula = "(believes player (exists (?k - key) (and (iscolor ?k red) (inside ?k box1))))"
//! gloss = "The player believes that there is a red key in box 1."
//! ```
//!
//! Goal and state priors default to uniform; explicit priors are weight
//! lists in gem order and in state-expansion order respectively.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{HypothesisSpace, InferenceError};
use crate::logic::{self, EpistemicStatement, ModelSignature};
use crate::world::{self, Action, ColorId, ContentSpace, GemId, GridMap, Pos, WorldState};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_AGENT: &str = "player";
const EMPTY_OPTION: &str = "empty";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario ({field}): {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Door,
    Key,
    Box,
    Gem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub marker: String,
    pub kind: ObjectKind,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorSpec {
    /// Only `"uniform"` is accepted.
    Named(String),
    Weights(Vec<f64>),
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec::Named("uniform".into())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSpec {
    #[serde(default)]
    pub box_options: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub goal_prior: PriorSpec,
    #[serde(default)]
    pub state_prior: PriorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatementEntry {
    pub id: String,
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

/// On-disk layout, field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default = "default_agent")]
    pub agent: String,
    #[serde(default)]
    pub colors: Vec<String>,
    pub grid: String,
    #[serde(default)]
    pub objects: Vec<ObjectEntry>,
    #[serde(default)]
    pub trajectory: Vec<String>,
    #[serde(default)]
    pub judgment_points: Vec<usize>,
    #[serde(default)]
    pub hypotheses: HypothesisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub statements: Vec<StatementEntry>,
}

fn default_agent() -> String {
    DEFAULT_AGENT.to_string()
}

#[derive(Debug, Clone)]
pub struct Statement {
    pub id: String,
    pub text: String,
    pub gloss: Option<String>,
    pub statement: EpistemicStatement,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub agent: String,
    pub map: GridMap,
    pub start: Pos,
    pub signature: ModelSignature,
    /// Per box (map order): the possible contents, `None` = empty.
    pub box_options: Vec<Vec<Option<ColorId>>>,
    pub goal_prior: Vec<f64>,
    /// `None` means uniform over expanded states.
    pub state_prior: Option<Vec<f64>>,
    pub ground_truth: Option<Vec<Option<ColorId>>>,
    pub trajectory: Vec<Action>,
    pub judgment_points: Vec<usize>,
    pub statements: Vec<Statement>,
    source: ScenarioFile,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_toml_str(&text).map_err(|e| match e {
        ScenarioError::Parse(m) => ScenarioError::Parse(format!("{}: {m}", path.display())),
        ScenarioError::Validation { field, message } => ScenarioError::Validation {
            field: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })
}

/// All `*.toml` scenario paths under `dir`, sorted by file name; a file path
/// is returned as-is.
pub fn scenario_paths(path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let io = |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.extension().is_some_and(|e| e == "toml") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario.to_toml_string()?).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string().trim().into()))?;
        Scenario::from_file(file)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&self.source).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn source(&self) -> &ScenarioFile {
        &self.source
    }

    pub fn from_file(file: ScenarioFile) -> Result<Scenario> {
        if file.format_version != FORMAT_VERSION {
            return Err(invalid(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", file.format_version),
            ));
        }
        if file.id.trim().is_empty() {
            return Err(invalid("id", "must not be empty"));
        }
        let agent = file.agent.to_ascii_lowercase();

        let mut seen_colors = HashSet::new();
        for c in &file.colors {
            if c == EMPTY_OPTION || !seen_colors.insert(c.as_str()) {
                return Err(invalid("colors", format!("color '{c}' is reserved or repeated")));
            }
        }

        let (map, start) = build_map(&file)?;
        if !(1..=4).contains(&map.gems().len()) {
            return Err(invalid(
                "objects",
                format!("a scenario needs 1 to 4 gems, found {}", map.gems().len()),
            ));
        }

        let (map, box_options) = attach_box_options(map, &file)?;
        let signature = ModelSignature::from_map(&map, &[agent.as_str()]);

        let goal_prior = match &file.hypotheses.goal_prior {
            PriorSpec::Named(n) if n == "uniform" => {
                vec![1.0 / map.gems().len() as f64; map.gems().len()]
            }
            PriorSpec::Named(n) => {
                return Err(invalid("hypotheses.goal_prior", format!("unknown prior '{n}'")))
            }
            PriorSpec::Weights(w) => {
                check_weights("hypotheses.goal_prior", w, map.gems().len())?;
                w.clone()
            }
        };
        let n_states = box_options
            .iter()
            .try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
        let state_prior = match &file.hypotheses.state_prior {
            PriorSpec::Named(n) if n == "uniform" => None,
            PriorSpec::Named(n) => {
                return Err(invalid("hypotheses.state_prior", format!("unknown prior '{n}'")))
            }
            PriorSpec::Weights(w) => {
                let n = n_states
                    .ok_or_else(|| invalid("hypotheses.box_options", "too many combinations"))?;
                check_weights("hypotheses.state_prior", w, n)?;
                Some(w.clone())
            }
        };

        let ground_truth = match &file.ground_truth {
            None => None,
            Some(gt) => Some(parse_ground_truth(gt, &map, &box_options)?),
        };

        let trajectory = file
            .trajectory
            .iter()
            .enumerate()
            .map(|(i, tok)| {
                map.parse_action(tok)
                    .map_err(|e| invalid(format!("trajectory[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(gt) = &ground_truth {
            let s0 = WorldState::initial(&map, start, gt)
                .map_err(|e| invalid("ground_truth", e.to_string()))?;
            world::replay(&s0, &trajectory, &map).map_err(|(i, e)| {
                invalid(
                    "trajectory",
                    format!("trajectory illegal at step {}: {} ({e})", i + 1, file.trajectory[i]),
                )
            })?;
        }

        let mut prev = None;
        for &j in &file.judgment_points {
            if j > trajectory.len() {
                return Err(invalid(
                    "judgment_points",
                    format!("step {j} exceeds trajectory length {}", trajectory.len()),
                ));
            }
            if prev.is_some_and(|p| j <= p) {
                return Err(invalid("judgment_points", "steps must be strictly increasing"));
            }
            prev = Some(j);
        }

        let mut ids = HashSet::new();
        let mut statements = Vec::new();
        for (i, entry) in file.statements.iter().enumerate() {
            if !ids.insert(entry.id.as_str()) {
                return Err(invalid(
                    format!("statements[{i}].id"),
                    format!("duplicate statement id '{}'", entry.id),
                ));
            }
            let statement = logic::parse_statement(&entry.formula, &signature)
                .map_err(|e| invalid(format!("statements[{i}].formula"), e.to_string()))?;
            statements.push(Statement {
                id: entry.id.clone(),
                text: entry.formula.clone(),
                gloss: entry.gloss.clone(),
                statement,
            });
        }

        Ok(Scenario {
            id: file.id.clone(),
            agent,
            map,
            start,
            signature,
            box_options,
            goal_prior,
            state_prior,
            ground_truth,
            trajectory,
            judgment_points: file.judgment_points.clone(),
            statements,
            source: file,
        })
    }

    pub fn content_space(&self) -> ContentSpace {
        ContentSpace::new(self.start, self.box_options.clone())
    }

    /// The true initial state, if the scenario declares ground truth.
    pub fn true_initial_state(&self) -> Option<WorldState> {
        self.ground_truth
            .as_ref()
            .map(|gt| WorldState::initial(&self.map, self.start, gt).expect("validated on load"))
    }

    pub fn gem_ids(&self) -> impl Iterator<Item = &str> {
        self.map.gems().iter().map(|g| g.id.as_str())
    }
}

fn check_weights(field: &str, w: &[f64], expected: usize) -> Result<()> {
    if w.len() != expected {
        return Err(invalid(field, format!("expected {expected} weights, got {}", w.len())));
    }
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(invalid(field, "weights must be non-negative numbers"));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(invalid(field, format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

fn build_map(file: &ScenarioFile) -> Result<(GridMap, Pos)> {
    let rows: Vec<&str> = file
        .grid
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty())
        .collect();
    if rows.is_empty() {
        return Err(invalid("grid", "grid is empty"));
    }
    let (mut map, markers) = GridMap::from_ascii(&rows, file.colors.clone());

    let mut start = None;
    let mut placed: BTreeMap<char, Pos> = BTreeMap::new();
    for (ch, pos) in markers {
        if ch == '@' {
            if start.replace(pos).is_some() {
                return Err(invalid("grid", "more than one agent start '@'"));
            }
        } else if placed.insert(ch, pos).is_some() {
            return Err(invalid("grid", format!("marker '{ch}' appears more than once")));
        }
    }
    let start = start.ok_or_else(|| invalid("grid", "no agent start '@'"))?;

    let mut declared = HashSet::new();
    for (i, obj) in file.objects.iter().enumerate() {
        let field = format!("objects[{i}]");
        let mut chars = obj.marker.chars();
        let ch = match (chars.next(), chars.next()) {
            (Some(c), None) if !matches!(c, '#' | '.' | '@' | ' ') => c,
            _ => {
                return Err(invalid(
                    field,
                    format!("marker '{}' must be a single non-reserved character", obj.marker),
                ))
            }
        };
        if !declared.insert(ch) {
            return Err(invalid(field, format!("marker '{ch}' declared twice")));
        }
        let pos = *placed
            .get(&ch)
            .ok_or_else(|| invalid(&field, format!("marker '{ch}' does not appear in the grid")))?;
        let id = obj.id.to_ascii_lowercase();
        let need_color = || {
            obj.color
                .as_deref()
                .ok_or_else(|| invalid(&field, format!("{:?} '{id}' needs a color", obj.kind)))
        };
        let res = match obj.kind {
            ObjectKind::Door => map.add_door(&id, pos, need_color()?).map(|_| ()),
            ObjectKind::Key => map.add_floor_key(&id, pos, need_color()?).map(|_| ()),
            ObjectKind::Box => map.add_box(&id, pos).map(|_| ()),
            ObjectKind::Gem => {
                let shape = obj.shape.clone().unwrap_or_else(|| id.clone());
                map.add_gem(&id, &shape, pos).map(|_| ())
            }
        };
        res.map_err(|e| invalid(&field, e.to_string()))?;
    }
    if let Some(ch) = placed.keys().find(|c| !declared.contains(c)) {
        return Err(invalid("grid", format!("marker '{ch}' is not declared in objects")));
    }
    Ok((map, start))
}

fn attach_box_options(
    mut map: GridMap,
    file: &ScenarioFile,
) -> Result<(GridMap, Vec<Vec<Option<ColorId>>>)> {
    let opts = &file.hypotheses.box_options;
    if let Some(unknown) = opts.keys().find(|b| map.box_by_id(&b.to_ascii_lowercase()).is_none()) {
        return Err(invalid(
            "hypotheses.box_options",
            format!("'{unknown}' is not a box"),
        ));
    }
    let box_ids: Vec<String> = map.boxes().iter().map(|b| b.id.clone()).collect();
    let mut all = Vec::new();
    for (bi, box_id) in box_ids.iter().enumerate() {
        let field = format!("hypotheses.box_options.{box_id}");
        let listed = opts
            .iter()
            .find(|(k, _)| k.to_ascii_lowercase() == *box_id)
            .map(|(_, v)| v)
            .ok_or_else(|| invalid(&field, "missing content options for this box"))?;
        if listed.is_empty() {
            return Err(invalid(&field, "at least one option is required"));
        }
        let mut seen = HashSet::new();
        let mut options = Vec::new();
        for o in listed {
            if !seen.insert(o.as_str()) {
                return Err(invalid(&field, format!("option '{o}' repeated")));
            }
            if o == EMPTY_OPTION {
                options.push(None);
            } else {
                let c = map
                    .color(o)
                    .map_err(|_| invalid(&field, format!("option '{o}' is neither 'empty' nor a color")))?;
                map.add_box_key(world::BoxId(bi), o)
                    .map_err(|e| invalid(&field, e.to_string()))?;
                options.push(Some(c));
            }
        }
        all.push(options);
    }
    Ok((map, all))
}

fn parse_ground_truth(
    gt: &BTreeMap<String, String>,
    map: &GridMap,
    options: &[Vec<Option<ColorId>>],
) -> Result<Vec<Option<ColorId>>> {
    if let Some(unknown) = gt.keys().find(|b| map.box_by_id(&b.to_ascii_lowercase()).is_none()) {
        return Err(invalid("ground_truth", format!("'{unknown}' is not a box")));
    }
    map.boxes()
        .iter()
        .enumerate()
        .map(|(bi, b)| {
            let field = format!("ground_truth.{}", b.id);
            let v = gt
                .iter()
                .find(|(k, _)| k.to_ascii_lowercase() == b.id)
                .map(|(_, v)| v)
                .ok_or_else(|| invalid(&field, "missing"))?;
            let content = if v == EMPTY_OPTION {
                None
            } else {
                Some(map.color(v).map_err(|e| invalid(&field, e.to_string()))?)
            };
            if !options[bi].contains(&content) {
                return Err(invalid(
                    &field,
                    format!("'{v}' is not one of the hypothesis options for this box"),
                ));
            }
            Ok(content)
        })
        .collect()
}

/// Cartesian product of per-box options, goals in file order, with the
/// scenario's priors attached.
pub fn expand_hypothesis_space(
    scenario: &Scenario,
    beta: f64,
    cap: usize,
) -> Result<HypothesisSpace> {
    let space = scenario.content_space();
    let n_goals = scenario.map.gems().len();
    let size = space.len().and_then(|n| n.checked_mul(n_goals));
    match size {
        Some(n) if n <= cap => {}
        other => {
            return Err(InferenceError::HypothesisSpaceTooLarge {
                size: other.map_or("overflow".into(), |n| n.to_string()),
                cap,
            }
            .into())
        }
    }
    let states = space
        .states(&scenario.map)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| invalid("hypotheses.box_options", e.to_string()))?;
    let n = states.len();
    let state_prior = scenario
        .state_prior
        .clone()
        .unwrap_or_else(|| vec![1.0 / n as f64; n]);
    let goals = (0..n_goals)
        .map(|g| (GemId(g), scenario.goal_prior[g]))
        .collect();
    Ok(HypothesisSpace::new(
        goals,
        states.into_iter().zip(state_prior).collect(),
        beta,
    )?)
}
