//! Online learning of numeric planning action models.
//!
//! The crate bundles a PDDL 2.1 front end, a grounded simulator with a
//! fixed-size vector interface, a safe action-model learner (convex-hull
//! numeric preconditions, exactly solved linear effects), a forward-search
//! planner, a masked PPO agent, and the loop that ties them together:
//! plan with the learned model when possible, otherwise act with the policy,
//! and relearn from every trajectory.

pub mod pddl;
pub mod grounding;
pub mod env;
pub mod learning;
pub mod planner;
pub mod agent;
pub mod benchmarks;
pub mod orchestrator;
pub mod evaluation;
