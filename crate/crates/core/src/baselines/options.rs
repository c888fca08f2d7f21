//! Skills-as-options: breadth-first search over world states using
//! start-conditioned generator skills, mimicking sequential skill chaining.
//! Successors of a state are the terminal states of valid rollouts from it;
//! a goal-conditioned transport may connect any expanded state to the goal.

use super::{failure, finish_plan};
use crate::oracle::sample_skill_parameters;
use crate::planner::{PlanBudget, PlanResult, PlanStep, StepConditioning};
use crate::skills::{
    invoke_connector, invoke_generator_from, outcome_cost, Condition, SkillConfig, SkillId,
};
use crate::world::{goal_satisfied, states_match, Scenario, WorldState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionsConfig {
    /// Sampled successors per (state, skill) expansion.
    pub successor_cap: usize,
    pub seed: u64,
}

impl Default for OptionsConfig {
    fn default() -> Self {
        OptionsConfig {
            successor_cap: 16,
            seed: 0,
        }
    }
}

struct BfsNode {
    state: WorldState,
    parent: usize,
    step: Option<PlanStep>,
}

pub fn skills_as_options_plan(
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    cfg: &OptionsConfig,
    budget: &PlanBudget,
) -> PlanResult {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut invocations: u64 = 0;
    let generators = skill_cfg.generators();
    let has_transport = skill_cfg.library.contains(&SkillId::Transport);
    let w = scenario.params.w_theta;

    if goal_satisfied(&scenario.goal, &scenario.start).unwrap_or(false) {
        return finish_plan(Vec::new(), 0, &t0, None);
    }

    let mut nodes = vec![BfsNode {
        state: scenario.start.clone(),
        parent: 0,
        step: None,
    }];
    let mut queue = VecDeque::from([0usize]);

    let reconstruct = |nodes: &[BfsNode], mut idx: usize, extra: Option<PlanStep>| {
        let mut steps = Vec::new();
        if let Some(s) = extra {
            steps.push(s);
        }
        while idx != 0 {
            steps.push(nodes[idx].step.clone().expect("non-root has a step"));
            idx = nodes[idx].parent;
        }
        steps.reverse();
        steps
    };

    // Goal-conditioned transport attempt, tried on every newly discovered
    // holding state so the search recognizes success as soon as a grasp
    // appears.
    let try_transport_to_goal =
        |state: &WorldState, rng: &mut ChaCha8Rng, invocations: &mut u64| -> Option<PlanStep> {
            if !has_transport || state.grip == crate::world::Grip::Open {
                return None;
            }
            let params = sample_skill_parameters(rng, SkillId::Transport, scenario);
            *invocations += 1;
            let outcome = invoke_connector(
                SkillId::Transport,
                scenario,
                skill_cfg,
                &Condition::State(state.clone()),
                &Condition::Goal(scenario.goal.clone()),
                &params,
                1,
            )
            .ok()?;
            if !outcome.any_valid() {
                return None;
            }
            let cost = outcome_cost(&outcome, skill_cfg.lambda, w).unwrap();
            Some(PlanStep {
                skill: SkillId::Transport,
                params,
                conditioning: StepConditioning::Connector(Condition::Goal(scenario.goal.clone())),
                trajectory: outcome.representative().unwrap().clone(),
                cost,
            })
        };

    if let Some(step) = try_transport_to_goal(&scenario.start, &mut rng, &mut invocations) {
        return finish_plan(vec![step], invocations, &t0, None);
    }

    while let Some(idx) = queue.pop_front() {
        let state = nodes[idx].state.clone();

        for &skill in &generators {
            for _ in 0..cfg.successor_cap {
                if invocations >= budget.max_iters || t0.elapsed() >= budget.wall_clock {
                    return Err(failure(invocations, &t0, None, "budget exhausted"));
                }
                let params = sample_skill_parameters(&mut rng, skill, scenario);
                invocations += 1;
                let outcome = match invoke_generator_from(
                    skill, scenario, skill_cfg, &state, &params, 1,
                ) {
                    Ok(o) if o.any_valid() => o,
                    _ => continue,
                };
                let terminal = outcome.representative().unwrap().last().clone();
                // Prune near-duplicate states.
                if nodes
                    .iter()
                    .any(|n| states_match(scenario, &n.state, &terminal))
                {
                    continue;
                }
                let cost = outcome_cost(&outcome, skill_cfg.lambda, w).unwrap();
                let step = PlanStep {
                    skill,
                    params,
                    conditioning: StepConditioning::FromState,
                    trajectory: outcome.representative().unwrap().clone(),
                    cost,
                };
                let child = BfsNode {
                    state: terminal.clone(),
                    parent: idx,
                    step: Some(step),
                };
                nodes.push(child);
                let child_idx = nodes.len() - 1;
                if goal_satisfied(&scenario.goal, &terminal).unwrap_or(false) {
                    let steps = reconstruct(&nodes, child_idx, None);
                    return finish_plan(steps, invocations, &t0, None);
                }
                if let Some(step) = try_transport_to_goal(&terminal, &mut rng, &mut invocations)
                {
                    let steps = reconstruct(&nodes, child_idx, Some(step));
                    return finish_plan(steps, invocations, &t0, None);
                }
                queue.push_back(child_idx);
            }
        }
    }
    Err(failure(invocations, &t0, None, "state space exhausted"))
}
