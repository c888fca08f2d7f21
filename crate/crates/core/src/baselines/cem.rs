//! Cross-entropy method planner: receding-horizon optimization over
//! length-H sequences of start-conditioned skill applications. Each outer
//! iteration samples a population of sequences, scores them by goal
//! progress, refits the sampling distribution to the elite set, and commits
//! the first skill of the best sequence.

use super::{failure, finish_plan};
use crate::planner::{PlanBudget, PlanResult, PlanStep, StepConditioning};
use crate::se2::normalize_angle;
use crate::skills::{
    invoke_connector, invoke_generator_from, outcome_cost, Condition, ParamDetail, SkillConfig,
    SkillId, SkillParams,
};
use crate::world::{goal_satisfied, push::gauss, ObjectId, Scenario, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CemConfig {
    pub population: usize,
    pub elite_fraction: f64,
    /// Skills per sampled sequence.
    pub horizon: usize,
    pub max_outer_iters: usize,
    /// Initial standard deviations of the continuous parameters.
    pub init_angle_sigma: f64,
    pub init_dist_sigma: f64,
    /// Weight kept on the old distribution when refitting.
    pub smoothing: f64,
    pub seed: u64,
}

impl Default for CemConfig {
    fn default() -> Self {
        CemConfig {
            population: 32,
            elite_fraction: 0.25,
            horizon: 4,
            max_outer_iters: 400,
            init_angle_sigma: std::f64::consts::PI,
            init_dist_sigma: 0.08,
            smoothing: 0.7,
            seed: 0,
        }
    }
}

/// One discrete action choice: a start-conditioned generator applied to a
/// specific object, or the goal-conditioned transport.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Action {
    Push(ObjectId),
    Pick(ObjectId),
    TransportGoal,
}

#[derive(Debug, Clone)]
struct ActionDist {
    weight: f64,
    angle_mu: f64,
    angle_sigma: f64,
    dist_mu: f64,
    dist_sigma: f64,
}

fn action_space(scenario: &Scenario, skill_cfg: &SkillConfig) -> Vec<Action> {
    let mut actions = Vec::new();
    if skill_cfg.library.contains(&SkillId::Push) {
        for o in scenario.pushable_objects() {
            actions.push(Action::Push(o));
        }
    }
    if skill_cfg.library.contains(&SkillId::Pick) {
        for o in scenario.graspable_objects() {
            actions.push(Action::Pick(o));
        }
    }
    if skill_cfg.library.contains(&SkillId::Transport) {
        actions.push(Action::TransportGoal);
    }
    actions
}

struct SampledStep {
    action_idx: usize,
    angle: f64,
    dist: f64,
    seed: u64,
}

pub fn cem_plan(
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    cfg: &CemConfig,
    budget: &PlanBudget,
) -> PlanResult {
    assert!(cfg.population > 0 && cfg.horizon > 0);
    assert!(cfg.elite_fraction > 0.0 && cfg.elite_fraction < 1.0);
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut invocations: u64 = 0;
    let actions = action_space(scenario, skill_cfg);
    if actions.is_empty() {
        return Err(failure(0, &t0, None, "empty action space"));
    }
    let (gx, gy) = scenario.goal.region.center();
    let w = scenario.params.w_theta;

    // Per-horizon-step, per-action sampling distribution.
    let fresh = |cfg: &CemConfig, n: usize| ActionDist {
        weight: 1.0 / n as f64,
        angle_mu: 0.0,
        angle_sigma: cfg.init_angle_sigma,
        dist_mu: crate::world::MAX_PUSH_DISTANCE / 2.0,
        dist_sigma: cfg.init_dist_sigma,
    };
    let mut dist: Vec<Vec<ActionDist>> = (0..cfg.horizon)
        .map(|_| (0..actions.len()).map(|_| fresh(cfg, actions.len())).collect())
        .collect();

    let mut committed: Vec<PlanStep> = Vec::new();
    let mut current = scenario.start.clone();
    if goal_satisfied(&scenario.goal, &current).unwrap_or(false) {
        return finish_plan(committed, invocations, &t0, None);
    }

    for _outer in 0..cfg.max_outer_iters {
        // Sample and score the population.
        let mut scored: Vec<(f64, Vec<SampledStep>, Option<(PlanStep, WorldState)>)> =
            Vec::with_capacity(cfg.population);
        for _ in 0..cfg.population {
            if invocations >= budget.max_iters || t0.elapsed() >= budget.wall_clock {
                return Err(failure(invocations, &t0, None, "budget exhausted"));
            }
            let mut seq = Vec::with_capacity(cfg.horizon);
            for h in 0..cfg.horizon {
                let idx = sample_categorical(&mut rng, &dist[h]);
                let d = &dist[h][idx];
                seq.push(SampledStep {
                    action_idx: idx,
                    angle: normalize_angle(d.angle_mu + d.angle_sigma * gauss(&mut rng)),
                    dist: (d.dist_mu + d.dist_sigma * gauss(&mut rng))
                        .clamp(1e-3, crate::world::MAX_PUSH_DISTANCE),
                    seed: rng.gen_range(0..(1u64 << 32)),
                });
            }
            let (score, first, used) =
                score_sequence(scenario, skill_cfg, &actions, &current, &seq, (gx, gy), w);
            invocations += used;
            scored.push((score, seq, first));
        }

        // Elite refit with smoothing.
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let elite_n = ((cfg.population as f64 * cfg.elite_fraction).ceil() as usize).max(1);
        refit(&mut dist, &scored[..elite_n], &actions, cfg);

        // Commit the first skill of the best sequence, when it was valid.
        if let (_, _, Some((step, next))) = &scored[0] {
            committed.push(step.clone());
            current = next.clone();
            if goal_satisfied(&scenario.goal, &current).unwrap_or(false) {
                return finish_plan(committed, invocations, &t0, None);
            }
        }
        if invocations >= budget.max_iters || t0.elapsed() >= budget.wall_clock {
            return Err(failure(invocations, &t0, None, "budget exhausted"));
        }
    }
    Err(failure(invocations, &t0, None, "outer iteration limit reached"))
}

/// Roll a sampled sequence forward from `state`; invalid steps truncate the
/// rollout. Returns the progress score, the first step as a plan step (when
/// valid), and the number of skill invocations consumed.
fn score_sequence(
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    actions: &[Action],
    state: &WorldState,
    seq: &[SampledStep],
    goal_center: (f64, f64),
    w: f64,
) -> (f64, Option<(PlanStep, WorldState)>, u64) {
    let mut current = state.clone();
    let mut first: Option<(PlanStep, WorldState)> = None;
    let mut used = 0u64;
    let mut reached_goal = false;
    for (h, s) in seq.iter().enumerate() {
        let action = actions[s.action_idx];
        used += 1;
        let (skill, params, conditioning, outcome) = match action {
            Action::Push(o) => {
                let params = SkillParams {
                    seed: s.seed,
                    detail: ParamDetail::Push {
                        object: o,
                        direction: (s.angle.cos(), s.angle.sin()),
                        distance: s.dist,
                        at: None,
                        target: None,
                    },
                };
                let out =
                    invoke_generator_from(SkillId::Push, scenario, skill_cfg, &current, &params, 1);
                (SkillId::Push, params, StepConditioning::FromState, out)
            }
            Action::Pick(o) => {
                let params = SkillParams {
                    seed: s.seed,
                    detail: ParamDetail::Pick {
                        object: o,
                        grasp_angle: s.angle,
                        at: None,
                    },
                };
                let out =
                    invoke_generator_from(SkillId::Pick, scenario, skill_cfg, &current, &params, 1);
                (SkillId::Pick, params, StepConditioning::FromState, out)
            }
            Action::TransportGoal => {
                let params = SkillParams {
                    seed: s.seed,
                    detail: ParamDetail::Transport { object: None },
                };
                let cond = Condition::Goal(scenario.goal.clone());
                let out = invoke_connector(
                    SkillId::Transport,
                    scenario,
                    skill_cfg,
                    &Condition::State(current.clone()),
                    &cond,
                    &params,
                    1,
                );
                (
                    SkillId::Transport,
                    params,
                    StepConditioning::Connector(cond),
                    out,
                )
            }
        };
        let outcome = match outcome {
            Ok(o) if o.any_valid() => o,
            _ => break,
        };
        let trajectory = outcome.representative().unwrap().clone();
        let terminal = trajectory.last().clone();
        if h == 0 {
            let cost = outcome_cost(&outcome, skill_cfg.lambda, w).unwrap();
            first = Some((
                PlanStep {
                    skill,
                    params,
                    conditioning,
                    trajectory: trajectory.clone(),
                    cost,
                },
                terminal.clone(),
            ));
        }
        current = terminal;
        if goal_satisfied(&scenario.goal, &current).unwrap_or(false) {
            reached_goal = true;
            break;
        }
    }
    let target = current.object_poses[scenario.goal.target.0];
    let dx = target.x - goal_center.0;
    let dy = target.y - goal_center.1;
    let mut score = -(dx * dx + dy * dy).sqrt();
    if reached_goal {
        score += 100.0;
    }
    (score, first, used)
}

fn sample_categorical(rng: &mut ChaCha8Rng, dists: &[ActionDist]) -> usize {
    let total: f64 = dists.iter().map(|d| d.weight).sum();
    let mut r = rng.gen::<f64>() * total;
    for (i, d) in dists.iter().enumerate() {
        r -= d.weight;
        if r <= 0.0 {
            return i;
        }
    }
    dists.len() - 1
}

type Scored = (f64, Vec<SampledStep>, Option<(PlanStep, WorldState)>);

fn refit(dist: &mut [Vec<ActionDist>], elites: &[Scored], actions: &[Action], cfg: &CemConfig) {
    let keep = cfg.smoothing;
    for h in 0..dist.len() {
        // Gather elite samples for this horizon step.
        let mut counts = vec![0usize; actions.len()];
        let mut angles: Vec<Vec<f64>> = vec![Vec::new(); actions.len()];
        let mut dists: Vec<Vec<f64>> = vec![Vec::new(); actions.len()];
        let mut total = 0usize;
        for (_, seq, _) in elites {
            if let Some(s) = seq.get(h) {
                counts[s.action_idx] += 1;
                angles[s.action_idx].push(s.angle);
                dists[s.action_idx].push(s.dist);
                total += 1;
            }
        }
        if total == 0 {
            continue;
        }
        for (i, d) in dist[h].iter_mut().enumerate() {
            let freq = counts[i] as f64 / total as f64;
            d.weight = keep * d.weight + (1.0 - keep) * freq;
            if counts[i] >= 2 {
                let (mu_a, sd_a) = mean_std(&angles[i]);
                let (mu_d, sd_d) = mean_std(&dists[i]);
                d.angle_mu = keep * d.angle_mu + (1.0 - keep) * mu_a;
                d.angle_sigma = (keep * d.angle_sigma + (1.0 - keep) * sd_a).max(0.05);
                d.dist_mu = keep * d.dist_mu + (1.0 - keep) * mu_d;
                d.dist_sigma = (keep * d.dist_sigma + (1.0 - keep) * sd_d).max(0.005);
            }
        }
        // Keep every action reachable.
        for d in dist[h].iter_mut() {
            d.weight = d.weight.max(1e-3);
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
