//! Alternative observer models used for comparison with full inverse
//! planning.

use thiserror::Error;

use crate::inference::{boltzmann_log_prob, ActionModel, HypothesisSpace};
use crate::logic::{evaluate_closed, EpistemicStatement, LogicError, ModelSignature};
use crate::planner::{Cost, Planner};
use crate::scenario::Scenario;
use crate::world::{self, Action, GemId, GridMap, WorldState};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("scenario '{0}' declares no ground truth")]
    MissingGroundTruth(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Knows the true box contents and reports them.
pub fn omniscient_score(
    scenario: &Scenario,
    statement: &EpistemicStatement,
) -> Result<f64, BaselineError> {
    let truth = scenario
        .true_initial_state()
        .ok_or_else(|| BaselineError::MissingGroundTruth(scenario.id.clone()))?;
    let holds = evaluate_closed(&statement.body, &truth, &scenario.signature)?;
    Ok(if holds { 1.0 } else { 0.0 })
}

/// Negation as failure: nothing about hidden contents can be derived, so
/// every statement is rated false.
pub fn ignorant_score(_statement: &EpistemicStatement) -> f64 {
    0.0
}

/// Prior probability of the body over initial states, ignoring the agent.
pub fn nonmentalizing_score(
    space: &HypothesisSpace,
    statement: &EpistemicStatement,
    sig: &ModelSignature,
) -> Result<f64, LogicError> {
    let mut p = 0.0;
    let mut total = 0.0;
    for (s, w) in space.states() {
        total += w;
        if evaluate_closed(&statement.body, s, sig)? {
            p += w;
        }
    }
    Ok(if total > 0.0 { p / total } else { 0.0 })
}

/// Observer that assumes the agent always heads straight for its goal:
/// actions are scored by the maze distance (doors open, keys ignored) that
/// remains after taking them.
pub struct HeuristicMentalizer<'m> {
    planner: Planner<'m>,
    beta: f64,
}

impl<'m> HeuristicMentalizer<'m> {
    pub fn new(map: &'m GridMap, beta: f64) -> Self {
        HeuristicMentalizer {
            planner: Planner::new(map),
            beta,
        }
    }

    /// Remaining relaxed distance after each legal action.
    pub fn action_values(&self, state: &WorldState, goal: GemId) -> Vec<(Action, Cost)> {
        let map = self.planner.map();
        world::legal_actions(state, map)
            .into_iter()
            .map(|a| {
                let next = world::transition(state, &a, map).expect("legal action");
                let d = self.planner.relaxed_distance(&next, goal);
                (a, d)
            })
            .collect()
    }

    pub fn likelihood(&self, state: &WorldState, action: &Action, goal: GemId) -> f64 {
        self.log_prob(state, action, goal).exp()
    }

    fn log_prob(&self, state: &WorldState, action: &Action, goal: GemId) -> f64 {
        let values = self.action_values(state, goal);
        let Some(chosen) = values.iter().position(|(a, _)| a == action) else {
            return f64::NEG_INFINITY;
        };
        let costs: Vec<Cost> = values.into_iter().map(|(_, c)| c).collect();
        boltzmann_log_prob(&costs, chosen, self.beta)
    }
}

impl ActionModel for HeuristicMentalizer<'_> {
    fn log_likelihood(&mut self, state: &WorldState, action: &Action, goal: GemId) -> f64 {
        self.log_prob(state, action, goal)
    }
}
