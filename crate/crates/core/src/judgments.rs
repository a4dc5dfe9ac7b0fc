//! Runs an observer model over a scenario's trajectory and collects goal
//! and statement ratings.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::baselines::{self, BaselineError, HeuristicMentalizer};
use crate::inference::{
    self, ActionModel, BeliefPrior, BoltzmannPlanner, EvalAt, FilterState, HypothesisSpace,
    InferenceError, DEFAULT_BETA, DEFAULT_HYPOTHESIS_CAP,
};
use crate::logic::LogicError;
use crate::output::{JudgmentOutput, TargetProbability};
use crate::planner::{Planner, PlannerMode};
use crate::scenario::{expand_hypothesis_space, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum JudgmentError {
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("judgment step {step} exceeds trajectory length {len}")]
    StepOutOfRange { step: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, JudgmentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Full inverse planning.
    Btom,
    Heuristic,
    Nonmental,
    Omniscient,
    Ignorant,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Btom,
        ModelKind::Heuristic,
        ModelKind::Nonmental,
        ModelKind::Omniscient,
        ModelKind::Ignorant,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Btom => "btom",
            ModelKind::Heuristic => "heuristic",
            ModelKind::Nonmental => "nonmental",
            ModelKind::Omniscient => "omniscient",
            ModelKind::Ignorant => "ignorant",
        }
    }

    /// Whether the model infers goals (and so emits goal rows).
    pub fn infers_goals(self) -> bool {
        matches!(self, ModelKind::Btom | ModelKind::Heuristic)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| format!("unknown model '{s}'"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub model: ModelKind,
    pub prior: BeliefPrior,
    pub beta: f64,
    /// Rationality of the heuristic observer; defaults to `beta`.
    pub heuristic_beta: Option<f64>,
    pub eval_at: EvalAt,
    pub planner_mode: PlannerMode,
    pub cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelKind::Btom,
            prior: BeliefPrior::UniformStatement,
            beta: DEFAULT_BETA,
            heuristic_beta: None,
            eval_at: EvalAt::Initial,
            planner_mode: PlannerMode::Exact,
            cap: DEFAULT_HYPOTHESIS_CAP,
        }
    }
}

impl RunConfig {
    pub fn with_model(self, model: ModelKind) -> Self {
        RunConfig { model, ..self }
    }

    pub fn with_prior(self, prior: BeliefPrior) -> Self {
        RunConfig { prior, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        RunConfig { beta, ..self }
    }

    /// Prior label written to outputs. Models that ignore the statement
    /// prior report the one they actually use.
    pub fn prior_id(&self) -> &'static str {
        match self.model {
            ModelKind::Btom | ModelKind::Heuristic => self.prior.id(),
            ModelKind::Nonmental => BeliefPrior::UniformStates.id(),
            ModelKind::Omniscient | ModelKind::Ignorant => "none",
        }
    }
}

/// Ratings at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRatings {
    pub step: usize,
    /// Empty for models that do not infer goals.
    pub goals: Vec<TargetProbability>,
    pub statements: Vec<TargetProbability>,
}

/// Ratings at each of `steps` (ascending, each ≤ trajectory length).
pub fn ratings_at(
    scenario: &Scenario,
    space: &HypothesisSpace,
    config: &RunConfig,
    steps: &[usize],
) -> Result<Vec<StepRatings>> {
    let len = scenario.trajectory.len();
    if let Some(&step) = steps.iter().find(|&&s| s > len) {
        return Err(JudgmentError::StepOutOfRange { step, len });
    }
    match config.model {
        ModelKind::Btom => {
            let mut model = BoltzmannPlanner::new(
                Planner::with_mode(&scenario.map, config.planner_mode),
                space.beta(),
            );
            filter_ratings(scenario, space, config, steps, &mut model)
        }
        ModelKind::Heuristic => {
            let beta = config.heuristic_beta.unwrap_or(space.beta());
            let mut model = HeuristicMentalizer::new(&scenario.map, beta);
            filter_ratings(scenario, space, config, steps, &mut model)
        }
        ModelKind::Nonmental => {
            let scores = scenario
                .statements
                .iter()
                .map(|s| {
                    let p = baselines::nonmentalizing_score(space, &s.statement, &scenario.signature)?;
                    Ok(target(&s.id, p, None))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(constant(steps, scores))
        }
        ModelKind::Omniscient => {
            let scores = scenario
                .statements
                .iter()
                .map(|s| Ok(target(&s.id, baselines::omniscient_score(scenario, &s.statement)?, None)))
                .collect::<Result<Vec<_>>>()?;
            Ok(constant(steps, scores))
        }
        ModelKind::Ignorant => {
            let scores = scenario
                .statements
                .iter()
                .map(|s| target(&s.id, baselines::ignorant_score(&s.statement), None))
                .collect();
            Ok(constant(steps, scores))
        }
    }
}

fn constant(steps: &[usize], statements: Vec<TargetProbability>) -> Vec<StepRatings> {
    steps
        .iter()
        .map(|&step| StepRatings {
            step,
            goals: Vec::new(),
            statements: statements.clone(),
        })
        .collect()
}

fn target(id: &str, probability: f64, flag: Option<inference::ScoreFlag>) -> TargetProbability {
    TargetProbability {
        target_id: id.to_string(),
        probability,
        flags: flag.map(|f| f.to_string()).into_iter().collect(),
    }
}

fn filter_ratings<M: ActionModel>(
    scenario: &Scenario,
    space: &HypothesisSpace,
    config: &RunConfig,
    steps: &[usize],
    model: &mut M,
) -> Result<Vec<StepRatings>> {
    let mut fs = inference::init_filter(space, config.cap)?;
    let mut out = Vec::with_capacity(steps.len());
    let mut pending = steps.iter().copied().peekable();
    for t in 0..=scenario.trajectory.len() {
        if t > 0 {
            fs.step(&scenario.trajectory[t - 1], model, &scenario.map)?;
        }
        while pending.next_if_eq(&t).is_some() {
            out.push(snapshot(scenario, &fs, config, t)?);
        }
        if pending.peek().is_none() {
            break;
        }
    }
    Ok(out)
}

fn snapshot(
    scenario: &Scenario,
    fs: &FilterState,
    config: &RunConfig,
    step: usize,
) -> Result<StepRatings> {
    let goals = inference::goal_posterior(fs)?
        .into_iter()
        .map(|(g, p)| target(&scenario.map.gems()[g.0].id, p, None))
        .collect();
    let statements = scenario
        .statements
        .iter()
        .map(|s| {
            let score = inference::score_statement(
                fs,
                &s.statement,
                &scenario.signature,
                config.prior,
                config.eval_at,
            )?;
            Ok(target(&s.id, score.probability, score.flag))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StepRatings {
        step,
        goals,
        statements,
    })
}

/// Ratings at every judgment point of the scenario.
pub fn run_judgments(
    scenario: &Scenario,
    space: &HypothesisSpace,
    config: &RunConfig,
) -> Result<Vec<JudgmentOutput>> {
    let ratings = ratings_at(scenario, space, config, &scenario.judgment_points)?;
    Ok(ratings
        .into_iter()
        .map(|r| JudgmentOutput {
            scenario_id: scenario.id.clone(),
            judgment_step: r.step,
            model: config.model.id().to_string(),
            prior: config.prior_id().to_string(),
            goals: r.goals,
            statements: r.statements,
        })
        .collect())
}

/// Expands the scenario's hypothesis space at `config.beta` and runs it.
pub fn run_scenario(scenario: &Scenario, config: &RunConfig) -> Result<Vec<JudgmentOutput>> {
    let space = expand_hypothesis_space(scenario, config.beta, config.cap)?;
    run_judgments(scenario, &space, config)
}

/// Ratings after every prefix of the trajectory, `0..=len`.
pub fn run_series(scenario: &Scenario, config: &RunConfig) -> Result<Vec<StepRatings>> {
    let space = expand_hypothesis_space(scenario, config.beta, config.cap)?;
    let steps: Vec<usize> = (0..=scenario.trajectory.len()).collect();
    ratings_at(scenario, &space, config, &steps)
}

/// Wide CSV for plotting: one row per step, one column per gem and
/// statement.
pub fn series_csv(scenario: &Scenario, config: &RunConfig, series: &[StepRatings]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "scenario_id".to_string(),
        "step".into(),
        "action".into(),
        "model".into(),
        "prior".into(),
    ];
    if config.model.infers_goals() {
        header.extend(scenario.gem_ids().map(|g| format!("goal:{g}")));
    }
    header.extend(scenario.statements.iter().map(|s| format!("statement:{}", s.id)));
    w.write_record(&header).expect("in-memory write");
    for r in series {
        let action = match r.step {
            0 => String::new(),
            t => scenario.map.action_token(&scenario.trajectory[t - 1]),
        };
        let mut rec = vec![
            scenario.id.clone(),
            r.step.to_string(),
            action,
            config.model.id().to_string(),
            config.prior_id().to_string(),
        ];
        rec.extend(r.goals.iter().map(|t| t.probability.to_string()));
        rec.extend(r.statements.iter().map(|t| t.probability.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
