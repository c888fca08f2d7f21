//! Comparison planners sharing the same skill library and world model as the
//! main planner, so performance differences isolate search strategy: skill
//! chaining over start-conditioned skills, receding-horizon cross-entropy
//! optimization, and two roadmap variants.

use crate::planner::{FailureReport, Plan, PlanResult};
use crate::se2::Pose2;
use crate::world::{Grip, Scenario, WorldState};
use std::time::Instant;

mod cem;
mod options;
mod roadmap;

pub use cem::{cem_plan, CemConfig};
pub use options::{skills_as_options_plan, OptionsConfig};
pub use roadmap::{incremental_roadmap_plan, roadmap_plan, RoadmapConfig};

/// Canonical goal state for planners that need a concrete goal vertex: the
/// target object centered in the goal region with its start heading, gripper
/// parked over the region, everything else at its start pose.
pub(crate) fn canonical_goal_state(scenario: &Scenario) -> WorldState {
    let (cx, cy) = scenario.goal.region.center();
    let target = scenario.goal.target;
    let mut state = scenario.start.clone();
    state.grip = Grip::Open;
    let theta = state.object_poses[target.0].theta;
    state.object_poses[target.0] = Pose2::new(cx, cy, theta);
    state.gripper = Pose2::new(cx, cy, 0.0);
    state
}

pub(crate) fn failure(
    iterations: u64,
    t0: &Instant,
    snapshot: Option<String>,
    reason: &str,
) -> Box<FailureReport> {
    Box::new(FailureReport {
        iterations,
        wall_time: t0.elapsed(),
        snapshot,
        stats: String::new(),
        reason: reason.into(),
    })
}

pub(crate) fn finish_plan(
    steps: Vec<crate::planner::PlanStep>,
    iterations: u64,
    t0: &Instant,
    snapshot: Option<String>,
) -> PlanResult {
    let total_cost = steps.iter().map(|s| s.cost).sum();
    Ok(Plan {
        steps,
        total_cost,
        iterations,
        wall_time: t0.elapsed(),
        snapshot,
    })
}
