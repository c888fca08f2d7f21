//! The skill library: Push, Pick, Transport, and Rearrange over the planar
//! world model.
//!
//! Skills come in two families. *Generators* produce trajectories from
//! self-proposed context states (no prescribed start), which is what lets the
//! search grow multi-directionally. *Connectors* solve boundary value
//! problems between an equality start condition and an equality or goal
//! condition. Every invocation rolls out a batch of `K` seeded variants and
//! reports a validity mask; the fraction of invalid rollouts feeds the
//! confidence-weighted cost.

use crate::se2::Pose2;
use crate::world::{ObjectId, Scenario, Trajectory, WorldState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod motion;

pub use motion::grasp_score;

#[derive(Debug, Error)]
pub enum SkillError {
    #[error("skill {skill} cannot act as a {role}")]
    Capability { skill: &'static str, role: &'static str },
    #[error("bad skill input: {0}")]
    Input(String),
    #[error("outcome has no valid trajectory; cost is undefined")]
    NoValidTrajectory,
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
}

/// The four library skills. Ordering is lexicographic by name, which doubles
/// as the deterministic tie-break order in the oracle.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum SkillId {
    Pick,
    Push,
    Rearrange,
    Transport,
}

impl SkillId {
    pub const ALL: [SkillId; 4] = [
        SkillId::Pick,
        SkillId::Push,
        SkillId::Rearrange,
        SkillId::Transport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SkillId::Pick => "pick",
            SkillId::Push => "push",
            SkillId::Rearrange => "rearrange",
            SkillId::Transport => "transport",
        }
    }

    pub fn parse(s: &str) -> Option<SkillId> {
        match s {
            "pick" => Some(SkillId::Pick),
            "push" => Some(SkillId::Push),
            "rearrange" => Some(SkillId::Rearrange),
            "transport" => Some(SkillId::Transport),
            _ => None,
        }
    }

    /// Capability matrix: push generates and connects, pick only generates,
    /// transport and rearrange only connect.
    pub fn can_generate(&self) -> bool {
        matches!(self, SkillId::Push | SkillId::Pick)
    }

    pub fn can_connect(&self) -> bool {
        matches!(self, SkillId::Push | SkillId::Transport | SkillId::Rearrange)
    }
}

/// Tunables of the skill library, overridable via the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkillConfig {
    /// Batch size K: rollouts per invocation, seeded `seed + 0..K`.
    pub batch_size: usize,
    /// Weight of the invalid fraction in the confidence cost.
    pub lambda: f64,
    /// Rollouts with a grasp quality below this are invalid.
    pub min_grasp_score: f64,
    /// Pre-grasp / pre-push standoff distance.
    pub approach_offset: f64,
    /// How far the gripper retracts after grasping.
    pub retract_dist: f64,
    /// Half-width of the boundary band sampled by the grasp score.
    pub pad_halfwidth: f64,
    /// Number of boundary samples for the grasp score.
    pub grasp_samples: usize,
    /// Skills available to the planner.
    pub library: Vec<SkillId>,
}

impl Default for SkillConfig {
    fn default() -> Self {
        SkillConfig {
            batch_size: 8,
            lambda: 1.0,
            min_grasp_score: 0.5,
            approach_offset: 0.05,
            retract_dist: 0.05,
            pad_halfwidth: 2e-4,
            grasp_samples: 32,
            library: vec![SkillId::Push, SkillId::Pick, SkillId::Transport],
        }
    }
}

impl SkillConfig {
    pub fn generators(&self) -> Vec<SkillId> {
        let mut v: Vec<SkillId> = self
            .library
            .iter()
            .copied()
            .filter(SkillId::can_generate)
            .collect();
        v.sort();
        v
    }

    pub fn connectors(&self) -> Vec<SkillId> {
        let mut v: Vec<SkillId> = self
            .library
            .iter()
            .copied()
            .filter(SkillId::can_connect)
            .collect();
        v.sort();
        v
    }

    pub fn sorted_library(&self) -> Vec<SkillId> {
        let mut v = self.library.clone();
        v.sort();
        v.dedup();
        v
    }
}

/// Parameters of one skill invocation. The seed both varies the batch and
/// drives any stochastic parts of the rollout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillParams {
    pub seed: u64,
    pub detail: ParamDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamDetail {
    Push {
        object: ObjectId,
        direction: (f64, f64),
        distance: f64,
        /// Context pose override for the generator (sampled when absent).
        at: Option<Pose2>,
        /// Target object pose, filled in connector mode.
        target: Option<Pose2>,
    },
    Pick {
        object: ObjectId,
        grasp_angle: f64,
        at: Option<Pose2>,
    },
    Transport {
        object: Option<ObjectId>,
    },
    Rearrange,
}

impl SkillParams {
    pub fn skill_of(&self) -> SkillId {
        match self.detail {
            ParamDetail::Push { .. } => SkillId::Push,
            ParamDetail::Pick { .. } => SkillId::Pick,
            ParamDetail::Transport { .. } => SkillId::Transport,
            ParamDetail::Rearrange => SkillId::Rearrange,
        }
    }
}

/// A boundary condition for connector skills.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Equality to a state within the scenario's matching tolerances.
    State(WorldState),
    /// The goal predicate itself.
    Goal(crate::world::GoalSpec),
}

/// A batch of candidate trajectories with a validity mask.
#[derive(Debug, Clone)]
pub struct SkillOutcome {
    pub trajectories: Vec<Trajectory>,
    pub valid: Vec<bool>,
    /// Index of the representative trajectory: shortest valid one.
    pub selected: Option<usize>,
}

impl SkillOutcome {
    pub fn from_rollouts(rollouts: Vec<(Trajectory, bool)>, w_theta: f64) -> SkillOutcome {
        assert!(!rollouts.is_empty(), "batch size must be at least 1");
        let mut best: Option<(usize, f64)> = None;
        for (i, (traj, ok)) in rollouts.iter().enumerate() {
            if *ok {
                let len = traj.path_length(w_theta);
                if best.map_or(true, |(_, l)| len < l) {
                    best = Some((i, len));
                }
            }
        }
        let (trajectories, valid) = rollouts.into_iter().unzip();
        SkillOutcome {
            trajectories,
            valid,
            selected: best.map(|(i, _)| i),
        }
    }

    pub fn batch_size(&self) -> usize {
        self.trajectories.len()
    }

    pub fn any_valid(&self) -> bool {
        self.selected.is_some()
    }

    pub fn representative(&self) -> Option<&Trajectory> {
        self.selected.map(|i| &self.trajectories[i])
    }

    pub fn invalid_fraction(&self) -> f64 {
        let invalid = self.valid.iter().filter(|v| !**v).count();
        invalid as f64 / self.valid.len() as f64
    }
}

/// Confidence-weighted cost: mean valid path length inflated by the invalid
/// fraction, `L * (1 + lambda * f_inv)`.
pub fn outcome_cost(
    outcome: &SkillOutcome,
    lambda: f64,
    w_theta: f64,
) -> Result<f64, SkillError> {
    if !outcome.any_valid() {
        return Err(SkillError::NoValidTrajectory);
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (traj, ok) in outcome.trajectories.iter().zip(&outcome.valid) {
        if *ok {
            sum += traj.path_length(w_theta);
            n += 1;
        }
    }
    let mean_len = sum / n as f64;
    Ok(mean_len * (1.0 + lambda * outcome.invalid_fraction()))
}

/// Invoke a generator skill: `K` seeded rollouts from self-proposed context
/// states. The outcome depends only on the scenario and the parameters.
pub fn invoke_generator(
    skill: SkillId,
    scenario: &Scenario,
    cfg: &SkillConfig,
    params: &SkillParams,
    k: usize,
) -> Result<SkillOutcome, SkillError> {
    if !skill.can_generate() {
        return Err(SkillError::Capability {
            skill: skill.name(),
            role: "generator",
        });
    }
    if k == 0 {
        return Err(SkillError::Input("batch size must be at least 1".into()));
    }
    let mut rollouts = Vec::with_capacity(k);
    for i in 0..k {
        let seed = params.seed.wrapping_add(i as u64);
        rollouts.push(motion::generator_rollout(
            skill, scenario, cfg, params, None, seed,
        )?);
    }
    Ok(SkillOutcome::from_rollouts(
        rollouts,
        scenario.params.w_theta,
    ))
}

/// Start-conditioned generator variant: every rollout begins exactly at
/// `state` (an initial value problem). Used by the sequential baselines.
pub fn invoke_generator_from(
    skill: SkillId,
    scenario: &Scenario,
    cfg: &SkillConfig,
    state: &WorldState,
    params: &SkillParams,
    k: usize,
) -> Result<SkillOutcome, SkillError> {
    if !skill.can_generate() {
        return Err(SkillError::Capability {
            skill: skill.name(),
            role: "generator",
        });
    }
    if k == 0 {
        return Err(SkillError::Input("batch size must be at least 1".into()));
    }
    let mut rollouts = Vec::with_capacity(k);
    for i in 0..k {
        let seed = params.seed.wrapping_add(i as u64);
        rollouts.push(motion::generator_rollout(
            skill,
            scenario,
            cfg,
            params,
            Some(state),
            seed,
        )?);
    }
    Ok(SkillOutcome::from_rollouts(
        rollouts,
        scenario.params.w_theta,
    ))
}

/// Invoke a connector skill between a start equality condition and a target
/// condition. Every rollout starts exactly at the `from` state; a rollout is
/// valid only if its terminal state satisfies `to`.
pub fn invoke_connector(
    skill: SkillId,
    scenario: &Scenario,
    cfg: &SkillConfig,
    from: &Condition,
    to: &Condition,
    params: &SkillParams,
    k: usize,
) -> Result<SkillOutcome, SkillError> {
    if !skill.can_connect() {
        return Err(SkillError::Capability {
            skill: skill.name(),
            role: "connector",
        });
    }
    let from_state = match from {
        Condition::State(s) => s,
        Condition::Goal(_) => {
            return Err(SkillError::Input(
                "connector start condition must be an equality condition".into(),
            ))
        }
    };
    if k == 0 {
        return Err(SkillError::Input("batch size must be at least 1".into()));
    }
    let mut rollouts = Vec::with_capacity(k);
    for i in 0..k {
        let seed = params.seed.wrapping_add(i as u64);
        rollouts.push(motion::connector_rollout(
            skill, scenario, cfg, from_state, to, params, seed,
        )?);
    }
    Ok(SkillOutcome::from_rollouts(
        rollouts,
        scenario.params.w_theta,
    ))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geom::{Rect, Shape};
    use crate::world::{GoalSpec, Grip, MassClass, ObjectSpec, WorldParams};

    pub(crate) fn test_scenario(noise: bool) -> Scenario {
        let sigma = if noise { (0.01, 0.05) } else { (0.0, 0.0) };
        Scenario {
            table: Rect::new(0.0, 0.0, 1.2, 0.8),
            bin: Rect::new(1.3, 0.25, 1.6, 0.55),
            static_obstacles: vec![],
            objects: vec![ObjectSpec {
                name: "plate".into(),
                shape: Shape::Disc { radius: 0.1 },
                graspable: true,
                top_graspable: false,
                mass_class: MassClass::Light,
            }],
            start: WorldState {
                gripper: Pose2::new(0.8, 0.7, 0.0),
                grip: Grip::Open,
                object_poses: vec![Pose2::new(0.5, 0.4, 0.0)],
            },
            goal: GoalSpec {
                target: ObjectId(0),
                region: Rect::new(1.3, 0.25, 1.6, 0.55),
            },
            params: WorldParams {
                sigma_pos: sigma.0,
                sigma_rot: sigma.1,
                r_max: 2.0,
                ..WorldParams::default()
            },
        }
    }

    #[test]
    fn capability_matrix_is_enforced() {
        let s = test_scenario(false);
        let cfg = SkillConfig::default();
        let params = SkillParams {
            seed: 1,
            detail: ParamDetail::Transport { object: None },
        };
        let err = invoke_generator(SkillId::Transport, &s, &cfg, &params, 1);
        assert!(matches!(err, Err(SkillError::Capability { .. })));

        let pick = SkillParams {
            seed: 1,
            detail: ParamDetail::Pick {
                object: ObjectId(0),
                grasp_angle: 0.0,
                at: None,
            },
        };
        let from = Condition::State(s.start.clone());
        let to = Condition::Goal(s.goal.clone());
        let err = invoke_connector(SkillId::Pick, &s, &cfg, &from, &to, &pick, 1);
        assert!(matches!(err, Err(SkillError::Capability { .. })));
    }

    #[test]
    fn connector_rejects_goal_start_condition() {
        let s = test_scenario(false);
        let cfg = SkillConfig::default();
        let params = SkillParams {
            seed: 1,
            detail: ParamDetail::Transport { object: None },
        };
        let goal = Condition::Goal(s.goal.clone());
        let err = invoke_connector(SkillId::Transport, &s, &cfg, &goal, &goal, &params, 1);
        assert!(matches!(err, Err(SkillError::Input(_))));
    }

    #[test]
    fn cost_formula() {
        let s = test_scenario(false);
        // Build a synthetic outcome: path length 1.0 trajectories, 3 of 10 invalid.
        let mut a = s.start.clone();
        a.gripper.x -= 1.0;
        let traj = Trajectory::from_states(vec![s.start.clone(), a], s.params.w_theta);
        let rollouts: Vec<(Trajectory, bool)> =
            (0..10).map(|i| (traj.clone(), i >= 3)).collect();
        let outcome = SkillOutcome::from_rollouts(rollouts, s.params.w_theta);
        let cost = outcome_cost(&outcome, 1.0, s.params.w_theta).unwrap();
        assert!((cost - 1.3).abs() < 1e-9, "cost {cost}");
        // lambda = 0 disables the confidence weighting.
        let cost0 = outcome_cost(&outcome, 0.0, s.params.w_theta).unwrap();
        assert!((cost0 - 1.0).abs() < 1e-9);

        let all_invalid =
            SkillOutcome::from_rollouts(vec![(traj, false)], s.params.w_theta);
        assert!(matches!(
            outcome_cost(&all_invalid, 1.0, s.params.w_theta),
            Err(SkillError::NoValidTrajectory)
        ));
    }

    #[test]
    fn cost_monotone_in_invalid_fraction() {
        let s = test_scenario(false);
        let mut a = s.start.clone();
        a.gripper.x -= 1.0;
        let traj = Trajectory::from_states(vec![s.start.clone(), a], s.params.w_theta);
        let mut prev = 0.0;
        for invalid in 0..8 {
            let rollouts: Vec<(Trajectory, bool)> =
                (0..8).map(|i| (traj.clone(), i >= invalid)).collect();
            let outcome = SkillOutcome::from_rollouts(rollouts, s.params.w_theta);
            let cost = outcome_cost(&outcome, 0.7, s.params.w_theta).unwrap();
            assert!(cost >= prev);
            prev = cost;
        }
    }
}
