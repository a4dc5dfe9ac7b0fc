//! Exact Bayesian filtering over joint (goal, initial state) hypotheses.
//!
//! Every hypothesis starts with log-weight `log P(g) + log P(s0)` and
//! accumulates `log P(a_t | s_{t-1}, g)` for each observed action while its
//! simulated state is advanced deterministically. Because transitions are
//! deterministic and the hypothesis set is enumerated, normalized weights are
//! the exact posterior; there is no resampling.

use std::fmt;

use thiserror::Error;

use crate::logic::{evaluate_closed, EpistemicStatement, LogicError, ModelSignature};
use crate::planner::{Cost, Planner};
use crate::world::{self, Action, GemId, GridMap, WorldState};

/// Default rationality. Not a fitted value; tests pin β explicitly.
pub const DEFAULT_BETA: f64 = 2.5;

/// Default cap on |goals| × |initial states|.
pub const DEFAULT_HYPOTHESIS_CAP: usize = 1_000_000;

const PRIOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("{what} prior is invalid: {reason}")]
    InvalidPrior { what: &'static str, reason: String },
    #[error("rationality beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("hypothesis space has {size} hypotheses, above the cap of {cap}")]
    HypothesisSpaceTooLarge { size: String, cap: usize },
    #[error("all hypotheses eliminated at step {step}: the trajectory is inconsistent with the hypothesis space")]
    AllHypothesesEliminated { step: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

pub type Result<T> = std::result::Result<T, InferenceError>;

/// Enumerated goal and initial-state priors plus the rationality parameter.
#[derive(Debug, Clone)]
pub struct HypothesisSpace {
    goals: Vec<(GemId, f64)>,
    states: Vec<(WorldState, f64)>,
    beta: f64,
}

fn check_prior(what: &'static str, weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    let mut n = 0;
    for w in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(InferenceError::InvalidPrior {
                what,
                reason: format!("weight {w} is not a non-negative number"),
            });
        }
        sum += w;
        n += 1;
    }
    if n == 0 {
        return Err(InferenceError::InvalidPrior {
            what,
            reason: "no support".into(),
        });
    }
    if (sum - 1.0).abs() > PRIOR_TOLERANCE {
        return Err(InferenceError::InvalidPrior {
            what,
            reason: format!("weights sum to {sum}"),
        });
    }
    Ok(())
}

impl HypothesisSpace {
    pub fn new(
        goals: Vec<(GemId, f64)>,
        states: Vec<(WorldState, f64)>,
        beta: f64,
    ) -> Result<Self> {
        check_prior("goal", goals.iter().map(|g| g.1))?;
        check_prior("state", states.iter().map(|s| s.1))?;
        if !(beta.is_finite() && beta > 0.0) {
            return Err(InferenceError::InvalidBeta(beta));
        }
        Ok(HypothesisSpace {
            goals,
            states,
            beta,
        })
    }

    /// Uniform priors over the given goals and states.
    pub fn uniform(goals: Vec<GemId>, states: Vec<WorldState>, beta: f64) -> Result<Self> {
        let pg = 1.0 / goals.len().max(1) as f64;
        let ps = 1.0 / states.len().max(1) as f64;
        Self::new(
            goals.into_iter().map(|g| (g, pg)).collect(),
            states.into_iter().map(|s| (s, ps)).collect(),
            beta,
        )
    }

    pub fn goals(&self) -> &[(GemId, f64)] {
        &self.goals
    }

    pub fn states(&self) -> &[(WorldState, f64)] {
        &self.states
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(InferenceError::InvalidBeta(beta));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.goals.len() * self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Log-probability of `chosen` under a Boltzmann distribution over action
/// costs `values`. Infinite-cost actions get probability zero unless every
/// action is infinite, in which case the choice is uniform.
pub fn boltzmann_log_prob(values: &[Cost], chosen: usize, beta: f64) -> f64 {
    let finite: Vec<f64> = values
        .iter()
        .filter_map(|c| c.finite().map(|q| -beta * f64::from(q)))
        .collect();
    if finite.is_empty() {
        return -(values.len() as f64).ln();
    }
    let Some(q) = values[chosen].finite() else {
        return f64::NEG_INFINITY;
    };
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Summing in sorted order makes the normalizer independent of action
    // order, so mirror-image situations get bit-identical probabilities.
    let mut terms: Vec<f64> = finite.iter().map(|l| (l - max).exp()).collect();
    terms.sort_by(f64::total_cmp);
    let log_z = terms.iter().sum::<f64>().ln();
    (-beta * f64::from(q) - max) - log_z
}

/// The full Boltzmann distribution over `values`.
pub fn boltzmann_distribution(values: &[Cost], beta: f64) -> Vec<f64> {
    (0..values.len())
        .map(|i| boltzmann_log_prob(values, i, beta).exp())
        .collect()
}

/// An observer's model of how the agent picks actions.
pub trait ActionModel {
    /// `log P(action | state, goal)`; negative infinity when `action` is
    /// illegal in `state`.
    fn log_likelihood(&mut self, state: &WorldState, action: &Action, goal: GemId) -> f64;
}

/// Boltzmann-rational agent acting on optimal plan costs.
pub struct BoltzmannPlanner<'m> {
    planner: Planner<'m>,
    beta: f64,
}

impl<'m> BoltzmannPlanner<'m> {
    pub fn new(planner: Planner<'m>, beta: f64) -> Self {
        BoltzmannPlanner { planner, beta }
    }

    pub fn planner(&self) -> &Planner<'m> {
        &self.planner
    }
}

impl ActionModel for BoltzmannPlanner<'_> {
    fn log_likelihood(&mut self, state: &WorldState, action: &Action, goal: GemId) -> f64 {
        log_action_likelihood(&mut self.planner, state, action, goal, self.beta)
    }
}

fn log_action_likelihood(
    planner: &mut Planner<'_>,
    state: &WorldState,
    action: &Action,
    goal: GemId,
    beta: f64,
) -> f64 {
    let legal = world::legal_actions(state, planner.map());
    let Some(chosen) = legal.iter().position(|a| a == action) else {
        return f64::NEG_INFINITY;
    };
    let values: Vec<Cost> = legal
        .iter()
        .map(|a| planner.q_value(state, a, goal).expect("legal action"))
        .collect();
    boltzmann_log_prob(&values, chosen, beta)
}

/// `P(action | state, goal)` under the Boltzmann-rational planning model.
/// `beta = 0` is accepted here as a limiting case.
pub fn action_likelihood(
    planner: &mut Planner<'_>,
    state: &WorldState,
    action: &Action,
    goal: GemId,
    beta: f64,
) -> f64 {
    log_action_likelihood(planner, state, action, goal, beta).exp()
}

/// One weighted (goal, initial state) pair.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub goal: GemId,
    pub s0: WorldState,
    pub current: WorldState,
    pub prior: f64,
    pub log_prior: f64,
    /// Accumulated log-likelihood of the observed actions.
    pub log_likelihood: f64,
}

impl Hypothesis {
    pub fn log_weight(&self) -> f64 {
        self.log_prior + self.log_likelihood
    }

    pub fn eliminated(&self) -> bool {
        self.log_weight() == f64::NEG_INFINITY
    }
}

#[derive(Debug, Clone)]
pub struct FilterState {
    hypotheses: Vec<Hypothesis>,
    goals: Vec<GemId>,
    step: usize,
    goal_trace: Vec<Vec<f64>>,
}

/// One hypothesis per (goal, initial state) pair, goal-major.
pub fn init_filter(space: &HypothesisSpace, cap: usize) -> Result<FilterState> {
    let size = space.goals.len().checked_mul(space.states.len());
    match size {
        Some(n) if n <= cap => {}
        other => {
            return Err(InferenceError::HypothesisSpaceTooLarge {
                size: other.map_or("overflow".into(), |n| n.to_string()),
                cap,
            })
        }
    }
    let mut hypotheses = Vec::with_capacity(space.len());
    for &(goal, pg) in &space.goals {
        for (s0, ps) in &space.states {
            let prior = pg * ps;
            hypotheses.push(Hypothesis {
                goal,
                s0: s0.clone(),
                current: s0.clone(),
                prior,
                log_prior: prior.ln(),
                log_likelihood: 0.0,
            });
        }
    }
    let mut fs = FilterState {
        hypotheses,
        goals: space.goals.iter().map(|g| g.0).collect(),
        step: 0,
        goal_trace: Vec::new(),
    };
    let marginal = fs.goal_marginal_vec()?;
    fs.goal_trace.push(marginal);
    Ok(fs)
}

/// Advances every hypothesis by one observed action.
pub fn step_filter<M: ActionModel + ?Sized>(
    mut fs: FilterState,
    observed: &Action,
    model: &mut M,
    map: &GridMap,
) -> Result<FilterState> {
    fs.step(observed, model, map)?;
    Ok(fs)
}

impl FilterState {
    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    /// Number of actions absorbed so far.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn goals(&self) -> &[GemId] {
        &self.goals
    }

    /// Goal marginals after each step, in `goals()` order.
    pub fn goal_trace(&self) -> &[Vec<f64>] {
        &self.goal_trace
    }

    pub fn step<M: ActionModel + ?Sized>(
        &mut self,
        observed: &Action,
        model: &mut M,
        map: &GridMap,
    ) -> Result<()> {
        self.step += 1;
        for h in &mut self.hypotheses {
            if h.eliminated() {
                continue;
            }
            if !world::is_legal(&h.current, observed, map) {
                h.log_likelihood = f64::NEG_INFINITY;
                continue;
            }
            h.log_likelihood += model.log_likelihood(&h.current, observed, h.goal);
            h.current = world::transition(&h.current, observed, map).expect("checked legal");
        }
        let marginal = self.goal_marginal_vec()?;
        self.goal_trace.push(marginal);
        Ok(())
    }

    fn max_log_weight(&self) -> Result<f64> {
        let m = self
            .hypotheses
            .iter()
            .map(Hypothesis::log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            Err(InferenceError::AllHypothesesEliminated { step: self.step })
        } else {
            Ok(m)
        }
    }

    /// Normalized posterior weight of every hypothesis.
    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let m = self.max_log_weight()?;
        let raw: Vec<f64> = self
            .hypotheses
            .iter()
            .map(|h| (h.log_weight() - m).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|w| w / total).collect())
    }

    fn goal_marginal_vec(&self) -> Result<Vec<f64>> {
        let weights = self.normalized_weights()?;
        let mut out = vec![0.0; self.goals.len()];
        for (h, w) in self.hypotheses.iter().zip(weights) {
            let gi = self
                .goals
                .iter()
                .position(|g| *g == h.goal)
                .expect("hypothesis goal is in the space");
            out[gi] += w;
        }
        // Rounding can push a near-certain marginal a hair past 1.
        Ok(out.into_iter().map(|p| p.min(1.0)).collect())
    }
}

/// Posterior marginal over goals.
pub fn goal_posterior(fs: &FilterState) -> Result<Vec<(GemId, f64)>> {
    let m = fs.goal_marginal_vec()?;
    Ok(fs.goals.iter().copied().zip(m).collect())
}

/// Prior over belief states used to turn the posterior into a statement
/// rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeliefPrior {
    /// Uniform over initial states: the posterior expectation of the body.
    UniformStates,
    /// Prior reweighted so the statement is a priori 50/50: a normalized
    /// likelihood comparing evidence for the body and for its negation.
    UniformStatement,
}

impl BeliefPrior {
    pub fn id(self) -> &'static str {
        match self {
            BeliefPrior::UniformStates => "states",
            BeliefPrior::UniformStatement => "statements",
        }
    }
}

/// Which state of each hypothesis a statement is evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalAt {
    /// The hypothesized initial state (original box contents).
    #[default]
    Initial,
    /// The simulated state at the current step.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreFlag {
    /// The body has the same truth value in every hypothesis.
    DegeneratePartition,
}

impl fmt::Display for ScoreFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreFlag::DegeneratePartition => f.write_str("degenerate_partition"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub probability: f64,
    pub flag: Option<ScoreFlag>,
}

/// Rates `(believes agent φ)` against the current posterior.
pub fn score_statement(
    fs: &FilterState,
    statement: &EpistemicStatement,
    sig: &ModelSignature,
    prior: BeliefPrior,
    eval_at: EvalAt,
) -> Result<Score> {
    let truth = fs
        .hypotheses
        .iter()
        .map(|h| {
            let s = match eval_at {
                EvalAt::Initial => &h.s0,
                EvalAt::Current => &h.current,
            };
            evaluate_closed(&statement.body, s, sig)
        })
        .collect::<std::result::Result<Vec<bool>, _>>()?;
    score_partition(fs, &truth, prior)
}

/// Rates a statement given its truth value in each hypothesis.
pub fn score_partition(fs: &FilterState, truth: &[bool], prior: BeliefPrior) -> Result<Score> {
    assert_eq!(truth.len(), fs.hypotheses.len());
    fs.max_log_weight()?;
    let n_true = truth.iter().filter(|t| **t).count();
    if n_true == 0 || n_true == truth.len() {
        return Ok(Score {
            probability: if n_true == 0 { 0.0 } else { 1.0 },
            flag: Some(ScoreFlag::DegeneratePartition),
        });
    }
    let probability = match prior {
        BeliefPrior::UniformStates => {
            let m = fs.max_log_weight()?;
            let (mut num, mut den) = (0.0, 0.0);
            for (h, t) in fs.hypotheses.iter().zip(truth) {
                let w = (h.log_weight() - m).exp();
                den += w;
                if *t {
                    num += w;
                }
            }
            num / den
        }
        BeliefPrior::UniformStatement => {
            // Reweight the prior to P'(h) = P(h) / (2 P(side of h)); the
            // posterior of the true side is then the normalized likelihood.
            let m = fs
                .hypotheses
                .iter()
                .filter(|h| h.prior > 0.0)
                .map(|h| h.log_likelihood)
                .fold(f64::NEG_INFINITY, f64::max);
            let mut mass = [0.0f64; 2];
            let mut evidence = [0.0f64; 2];
            for (h, t) in fs.hypotheses.iter().zip(truth) {
                if h.prior > 0.0 {
                    let side = usize::from(*t);
                    mass[side] += h.prior;
                    evidence[side] += h.prior * (h.log_likelihood - m).exp();
                }
            }
            if mass[0] == 0.0 || mass[1] == 0.0 {
                return Ok(Score {
                    probability: if mass[1] > 0.0 { 1.0 } else { 0.0 },
                    flag: Some(ScoreFlag::DegeneratePartition),
                });
            }
            let support_true = evidence[1] / mass[1];
            let support_false = evidence[0] / mass[0];
            support_true / (support_true + support_false)
        }
    };
    Ok(Score {
        probability,
        flag: None,
    })
}
