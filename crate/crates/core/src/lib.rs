//! Bayesian theory-of-mind over Doors, Keys & Gems.
//!
//! An observer watches an agent act in a gridworld whose boxes may hide keys,
//! jointly infers the agent's goal and the box contents the agent knows about
//! by exact Bayesian inverse planning, and scores first-order statements of
//! the form `(believes player φ)` against the inferred mental states.

pub mod analysis;
pub mod baselines;
pub mod inference;
pub mod judgments;
pub mod logic;
pub mod output;
pub mod planner;
pub mod scenario;
pub mod world;
