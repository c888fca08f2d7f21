//! The main planning loop: generator initialization, oracle-driven graph
//! expansion until a start-to-goal path exists, least-cost path extraction,
//! and plan validation by re-simulation.

use crate::graph::{EdgeId, MosaicGraph, NodeId};
use crate::oracle::{ConnectTarget, Oracle, OracleConfig, SkillTypeGate};
use crate::skills::{
    invoke_connector, invoke_generator, invoke_generator_from, outcome_cost, Condition,
    SkillConfig, SkillId, SkillOutcome, SkillParams,
};
use crate::world::{goal_satisfied, states_match, Scenario, Trajectory, WorldState};
use std::time::{Duration, Instant};

/// Termination guard on the otherwise unbounded search loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanBudget {
    /// Maximum number of skill invocations (one batched invocation per
    /// iteration, across all planners for comparability).
    pub max_iters: u64,
    pub wall_clock: Duration,
}

impl PlanBudget {
    pub fn new(max_iters: u64, wall_clock: Duration) -> PlanBudget {
        assert!(max_iters > 0 && wall_clock > Duration::ZERO);
        PlanBudget {
            max_iters,
            wall_clock,
        }
    }
}

/// How a plan step's trajectory is reproduced during validation.
#[derive(Debug, Clone, PartialEq)]
pub enum StepConditioning {
    /// Generator rollout from a self-proposed context (mosaic graph nodes).
    SelfProposed,
    /// Generator rollout forced to start at the incoming state (sequential
    /// baselines).
    FromState,
    /// Connector rollout toward the stored target condition.
    Connector(Condition),
}

#[derive(Debug, Clone)]
pub struct PlanStep {
    pub skill: SkillId,
    pub params: SkillParams,
    pub conditioning: StepConditioning,
    pub trajectory: Trajectory,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub total_cost: f64,
    pub iterations: u64,
    pub wall_time: Duration,
    /// Graph snapshot at solve time, when the planner builds a graph.
    pub snapshot: Option<String>,
}

impl Plan {
    /// Plan length in the reported metrics: number of skill steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Line-oriented text form of the plan for the plotting tool, in the
    /// same family as the graph snapshot format.
    pub fn snapshot_text(&self, scenario: &Scenario) -> String {
        let mut out = String::from("mosaic-plan v1\n");
        crate::graph::write_scene(&mut out, scenario);
        for (i, step) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "step {} skill={} cost={:.6} {}\n",
                i,
                step.skill.name(),
                step.cost,
                crate::graph::trajectory_record(&step.trajectory, scenario),
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FailureReport {
    pub iterations: u64,
    pub wall_time: Duration,
    pub snapshot: Option<String>,
    pub stats: String,
    pub reason: String,
}

pub type PlanResult = Result<Plan, Box<FailureReport>>;

/// Run the oracle-guided multigraph search.
///
/// Invokes every generator until the graph holds at least one node, inserts
/// the start state as a zero-cost node, then alternates oracle-chosen
/// generator and connector invocations until a start-to-goal path exists or
/// the budget runs out. Valid outcomes become nodes/edges with
/// confidence-weighted costs; failures feed the statistics and pair
/// penalties.
pub fn plan(
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    oracle_cfg: &OracleConfig,
    budget: &PlanBudget,
) -> PlanResult {
    let t0 = Instant::now();
    let mut oracle = Oracle::new(*oracle_cfg);
    let mut graph = MosaicGraph::new();
    let k = skill_cfg.batch_size;
    let generators = skill_cfg.generators();
    let connectors = skill_cfg.connectors();
    let library = skill_cfg.sorted_library();
    let mut iterations: u64 = 0;

    let exhausted = |iterations: u64, t0: &Instant| {
        iterations >= budget.max_iters || t0.elapsed() >= budget.wall_clock
    };
    let fail = |graph: &MosaicGraph, oracle: &Oracle, iterations, t0: &Instant, reason: &str| {
        Box::new(FailureReport {
            iterations,
            wall_time: t0.elapsed(),
            snapshot: Some(graph.snapshot(scenario)),
            stats: oracle.stats.summary(),
            reason: reason.into(),
        })
    };

    // Seed the graph with islands of competence.
    while graph.node_count() == 0 {
        for &skill in &generators {
            if exhausted(iterations, &t0) {
                return Err(fail(&graph, &oracle, iterations, &t0, "budget exhausted before any generator succeeded"));
            }
            let params = oracle.sample_parameters(skill, scenario);
            iterations += 1;
            match invoke_generator(skill, scenario, skill_cfg, &params, k) {
                Ok(outcome) => {
                    let ok = outcome.any_valid();
                    oracle.record_result(skill, ok);
                    if ok {
                        insert_node(&mut graph, scenario, skill_cfg, skill, params, &outcome);
                    }
                }
                Err(_) => oracle.record_result(skill, false),
            }
        }
        if generators.is_empty() {
            return Err(fail(&graph, &oracle, iterations, &t0, "skill library has no generators"));
        }
    }

    graph
        .add_start_node(scenario.start.clone())
        .expect("fresh graph has no start node");

    while !graph.has_path(&scenario.goal) {
        if exhausted(iterations, &t0) {
            return Err(fail(&graph, &oracle, iterations, &t0, "budget exhausted"));
        }
        let gate = oracle
            .choose_skill_type(graph.node_count(), graph.edge_count())
            .expect("graph is nonempty");
        let candidates = match gate {
            SkillTypeGate::ConnectorsOnly if !connectors.is_empty() => &connectors,
            _ => &library,
        };
        let skill = oracle.choose_skill(candidates).expect("library is nonempty");
        let params = oracle.sample_parameters(skill, scenario);

        // The skill space holds generator and connector instances separately,
        // so a dual-capability skill chosen outside the connectors-only gate
        // plays either role with equal probability.
        let as_connector = match gate {
            SkillTypeGate::ConnectorsOnly => skill.can_connect(),
            SkillTypeGate::AllSkills => {
                skill.can_connect() && (!skill.can_generate() || oracle.coin())
            }
        };

        if as_connector {
            match oracle.choose_conds_to_connect(&graph, scenario, &scenario.goal) {
                Some(req) => {
                    iterations += 1;
                    let (to_cond, to_node) = match &req.to {
                        ConnectTarget::Node(id, cond) => (cond.clone(), Some(*id)),
                        ConnectTarget::Goal(cond) => (cond.clone(), None),
                    };
                    match invoke_connector(
                        skill, scenario, skill_cfg, &req.from, &to_cond, &params, k,
                    ) {
                        Ok(outcome) => {
                            let ok = outcome.any_valid();
                            oracle.record_result(skill, ok);
                            if ok {
                                insert_edge(
                                    &mut graph, scenario, skill_cfg, skill, params, &req.from,
                                    to_cond, req.from_node, to_node, &outcome,
                                );
                            } else if let Some(to) = to_node {
                                oracle.record_pair_failure(req.from_node, to);
                            }
                        }
                        Err(_) => oracle.record_result(skill, false),
                    }
                    continue;
                }
                None => {
                    // No eligible pair: fall through to a generator step.
                }
            }
        }

        // Generator invocation (chosen directly, or connector fallback).
        let (skill, params) = if skill.can_generate() {
            (skill, params)
        } else {
            let g = oracle.choose_skill(&generators).expect("generators exist");
            let p = oracle.sample_parameters(g, scenario);
            (g, p)
        };
        iterations += 1;
        match invoke_generator(skill, scenario, skill_cfg, &params, k) {
            Ok(outcome) => {
                let ok = outcome.any_valid();
                oracle.record_result(skill, ok);
                if ok {
                    insert_node(&mut graph, scenario, skill_cfg, skill, params, &outcome);
                }
            }
            Err(_) => oracle.record_result(skill, false),
        }
    }

    let path = graph
        .shortest_path(&scenario.goal)
        .expect("has_path implies a shortest path");
    let total_cost = graph.path_cost(&path);
    let steps = flatten_path(&graph, &path);
    Ok(Plan {
        steps,
        total_cost,
        iterations,
        wall_time: t0.elapsed(),
        snapshot: Some(graph.snapshot(scenario)),
    })
}

/// Insert a generator outcome as a node. The stored seed is rebased to the
/// selected rollout so a single-rollout replay reproduces the representative
/// trajectory bit-exactly.
pub(crate) fn insert_node(
    graph: &mut MosaicGraph,
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    skill: SkillId,
    params: SkillParams,
    outcome: &SkillOutcome,
) -> NodeId {
    let selected = outcome.selected.expect("caller checked validity");
    let cost = outcome_cost(outcome, skill_cfg.lambda, scenario.params.w_theta)
        .expect("valid outcome has a cost");
    let mut stored = params;
    stored.seed = stored.seed.wrapping_add(selected as u64);
    graph
        .add_node(
            skill,
            stored,
            outcome.representative().unwrap().clone(),
            cost,
        )
        .expect("node insertion cannot violate graph invariants")
}

/// Insert a connector outcome as an edge; a direct-to-goal connection grows a
/// zero-cost anchor node at the terminal state first.
#[allow(clippy::too_many_arguments)]
pub(crate) fn insert_edge(
    graph: &mut MosaicGraph,
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    skill: SkillId,
    params: SkillParams,
    from: &Condition,
    to_cond: Condition,
    from_node: NodeId,
    to_node: Option<NodeId>,
    outcome: &SkillOutcome,
) -> Option<EdgeId> {
    let selected = outcome.selected.expect("caller checked validity");
    let cost = outcome_cost(outcome, skill_cfg.lambda, scenario.params.w_theta)
        .expect("valid outcome has a cost");
    let trajectory = outcome.representative().unwrap().clone();
    let to_node = match to_node {
        Some(id) => id,
        None => graph
            .add_anchor_node(trajectory.last().clone())
            .expect("anchor insertion succeeds"),
    };
    let mut stored = params;
    stored.seed = stored.seed.wrapping_add(selected as u64);
    graph
        .add_edge(
            scenario,
            from_node,
            to_node,
            skill,
            stored,
            from.clone(),
            to_cond,
            trajectory,
            cost,
        )
        .ok()
}

/// Flatten a graph path into a skill-step sequence. Node and edge
/// trajectories both become steps, in traversal order; the start node and
/// goal anchors carry no skill and contribute nothing executable.
pub(crate) fn flatten_path(
    graph: &MosaicGraph,
    path: &[(NodeId, Option<EdgeId>)],
) -> Vec<PlanStep> {
    let mut steps = Vec::new();
    for (node_id, edge_id) in path {
        if let Some(eid) = edge_id {
            let edge = graph.edge(*eid);
            steps.push(PlanStep {
                skill: edge.skill,
                params: edge.params.clone(),
                conditioning: StepConditioning::Connector(edge.cond1.clone()),
                trajectory: edge.trajectory.clone(),
                cost: edge.cost,
            });
        }
        let node = graph.node(*node_id).unwrap();
        if let (Some(skill), Some(params)) = (node.skill, node.params.clone()) {
            steps.push(PlanStep {
                skill,
                params,
                conditioning: StepConditioning::SelfProposed,
                trajectory: node.trajectory.clone(),
                cost: node.cost,
            });
        }
    }
    steps
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub ok: bool,
    pub first_violation: Option<String>,
}

/// Re-simulate a plan step by step and check the three plan conditions: the
/// first trajectory starts exactly at the scenario start, adjacent
/// trajectories connect within the matching tolerance, and the final state
/// satisfies the goal.
pub fn validate_plan(scenario: &Scenario, skill_cfg: &SkillConfig, plan: &Plan) -> ValidationReport {
    let fail = |msg: String| ValidationReport {
        ok: false,
        first_violation: Some(msg),
    };
    if plan.steps.is_empty() {
        return match goal_satisfied(&scenario.goal, &scenario.start) {
            Ok(true) => ValidationReport {
                ok: true,
                first_violation: None,
            },
            _ => fail("empty plan but the start state does not satisfy the goal".into()),
        };
    }

    // Start condition: the first skill trajectory begins at the start state.
    if plan.steps[0].trajectory.first() != &scenario.start {
        return fail("first trajectory does not start at the start state".into());
    }

    let mut current: WorldState = scenario.start.clone();
    for (i, step) in plan.steps.iter().enumerate() {
        // Boundary continuity against the stored trajectory.
        if !states_match(scenario, step.trajectory.first(), &current) {
            return fail(format!(
                "step {i} ({}) does not connect to the previous terminal state",
                step.skill.name()
            ));
        }
        // Re-simulate with the stored seed.
        let replay = match &step.conditioning {
            StepConditioning::SelfProposed => {
                invoke_generator(step.skill, scenario, skill_cfg, &step.params, 1)
            }
            StepConditioning::FromState => invoke_generator_from(
                step.skill, scenario, skill_cfg, &current, &step.params, 1,
            ),
            StepConditioning::Connector(to) => invoke_connector(
                step.skill,
                scenario,
                skill_cfg,
                &Condition::State(current.clone()),
                to,
                &step.params,
                1,
            ),
        };
        let replay = match replay {
            Ok(outcome) if outcome.any_valid() => outcome,
            Ok(_) => {
                return fail(format!(
                    "step {i} ({}) re-simulates as invalid",
                    step.skill.name()
                ))
            }
            Err(e) => return fail(format!("step {i} ({}) replay error: {e}", step.skill.name())),
        };
        let replayed = replay.representative().unwrap();
        if !states_match(scenario, replayed.last(), step.trajectory.last()) {
            return fail(format!(
                "step {i} ({}) replay terminal diverges from the stored trajectory",
                step.skill.name()
            ));
        }
        current = replayed.last().clone();
    }

    match goal_satisfied(&scenario.goal, &current) {
        Ok(true) => ValidationReport {
            ok: true,
            first_violation: None,
        },
        _ => fail("final state does not satisfy the goal condition".into()),
    }
}
