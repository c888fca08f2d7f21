//! Roadmap planners: free generation of skill trajectories connected to
//! their k nearest roadmap neighbors with every connector skill, then a
//! least-cost search between start and goal vertices. The incremental
//! variant keeps growing the roadmap while the endpoints stay disconnected.

use super::{canonical_goal_state, failure, finish_plan};
use crate::graph::{MosaicGraph, NeighborSide, NodeId, PairPenaltyTable};
use crate::oracle::sample_skill_parameters;
use crate::planner::{flatten_path, insert_edge, insert_node, PlanBudget, PlanResult};
use crate::skills::{invoke_connector, invoke_generator, Condition, SkillConfig};
use crate::world::Scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadmapConfig {
    /// Generator invocations in the initial construction phase.
    pub roadmap_size: usize,
    pub k_neighbors: usize,
    /// Additional generator invocations per incremental round.
    pub increment: usize,
    pub seed: u64,
}

impl Default for RoadmapConfig {
    fn default() -> Self {
        RoadmapConfig {
            roadmap_size: 100,
            k_neighbors: 3,
            increment: 25,
            seed: 0,
        }
    }
}

pub fn roadmap_plan(
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    cfg: &RoadmapConfig,
    budget: &PlanBudget,
) -> PlanResult {
    run(scenario, skill_cfg, cfg, budget, false)
}

pub fn incremental_roadmap_plan(
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    cfg: &RoadmapConfig,
    budget: &PlanBudget,
) -> PlanResult {
    run(scenario, skill_cfg, cfg, budget, true)
}

struct Builder<'a> {
    scenario: &'a Scenario,
    skill_cfg: &'a SkillConfig,
    graph: MosaicGraph,
    penalties: PairPenaltyTable,
    rng: ChaCha8Rng,
    invocations: u64,
    budget: &'a PlanBudget,
    t0: Instant,
    k: usize,
}

impl<'a> Builder<'a> {
    fn exhausted(&self) -> bool {
        self.invocations >= self.budget.max_iters || self.t0.elapsed() >= self.budget.wall_clock
    }

    /// One generator invocation plus neighbor connections for the new node.
    fn grow(&mut self, round: usize) -> Result<(), ()> {
        let generators = self.skill_cfg.generators();
        if generators.is_empty() {
            return Err(());
        }
        let skill = generators[round % generators.len()];
        if self.exhausted() {
            return Err(());
        }
        let params = sample_skill_parameters(&mut self.rng, skill, self.scenario);
        self.invocations += 1;
        let k = self.skill_cfg.batch_size;
        if let Ok(outcome) = invoke_generator(skill, self.scenario, self.skill_cfg, &params, k) {
            if outcome.any_valid() {
                let id = insert_node(
                    &mut self.graph,
                    self.scenario,
                    self.skill_cfg,
                    skill,
                    params,
                    &outcome,
                );
                self.connect(id)?;
            }
        }
        Ok(())
    }

    /// Try every connector between the node and its k nearest neighbors, in
    /// both directions.
    fn connect(&mut self, id: NodeId) -> Result<(), ()> {
        let w = self.scenario.params.w_theta;
        let connectors = self.skill_cfg.connectors();
        for side in [NeighborSide::Outgoing, NeighborSide::Incoming] {
            let neighbors = self
                .graph
                .nearest_neighbors(id, self.k, &self.penalties, w, side);
            for nb in neighbors {
                let (from, to) = match side {
                    NeighborSide::Outgoing => (id, nb),
                    NeighborSide::Incoming => (nb, id),
                };
                let from_state = self.graph.node(from).unwrap().trajectory.last().clone();
                let to_state = self.graph.node(to).unwrap().trajectory.first().clone();
                let from_cond = Condition::State(from_state);
                let to_cond = Condition::State(to_state);
                let mut connected = false;
                for &skill in &connectors {
                    if self.exhausted() {
                        return Err(());
                    }
                    let params = sample_skill_parameters(&mut self.rng, skill, self.scenario);
                    self.invocations += 1;
                    if let Ok(outcome) = invoke_connector(
                        skill,
                        self.scenario,
                        self.skill_cfg,
                        &from_cond,
                        &to_cond,
                        &params,
                        self.skill_cfg.batch_size,
                    ) {
                        if outcome.any_valid() {
                            insert_edge(
                                &mut self.graph,
                                self.scenario,
                                self.skill_cfg,
                                skill,
                                params,
                                &from_cond,
                                to_cond.clone(),
                                from,
                                Some(to),
                                &outcome,
                            );
                            connected = true;
                        }
                    }
                }
                // Penalize pairs no connector could join, steering future
                // neighbor queries toward fresh candidates.
                if !connected {
                    self.penalties.record_failure(from, to);
                }
            }
        }
        Ok(())
    }
}

fn run(
    scenario: &Scenario,
    skill_cfg: &SkillConfig,
    cfg: &RoadmapConfig,
    budget: &PlanBudget,
    incremental: bool,
) -> PlanResult {
    let t0 = Instant::now();
    let mut b = Builder {
        scenario,
        skill_cfg,
        graph: MosaicGraph::new(),
        penalties: PairPenaltyTable::new(0.5),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        invocations: 0,
        budget,
        t0,
        k: cfg.k_neighbors,
    };

    // Phase 1: free skill generation and local connection.
    let mut round = 0usize;
    for _ in 0..cfg.roadmap_size {
        if b.grow(round).is_err() {
            return Err(failure(
                b.invocations,
                &t0,
                Some(b.graph.snapshot(scenario)),
                "budget exhausted during roadmap construction",
            ));
        }
        round += 1;
    }

    // Phase 2: insert start and goal singleton vertices and connect them.
    let start_id = b
        .graph
        .add_start_node(scenario.start.clone())
        .expect("fresh roadmap graph");
    let goal_state = canonical_goal_state(scenario);
    let goal_id = b.graph.add_anchor_node(goal_state).expect("anchor");
    if b.connect(start_id).is_err() || b.connect(goal_id).is_err() {
        return Err(failure(
            b.invocations,
            &t0,
            Some(b.graph.snapshot(scenario)),
            "budget exhausted while connecting endpoints",
        ));
    }

    loop {
        if b.graph.has_path(&scenario.goal) {
            let path = b.graph.shortest_path(&scenario.goal).expect("path exists");
            let steps = flatten_path(&b.graph, &path);
            let mut plan = finish_plan(steps, b.invocations, &t0, Some(b.graph.snapshot(scenario)))?;
            plan.total_cost = b.graph.path_cost(&path);
            return Ok(plan);
        }
        if !incremental {
            return Err(failure(
                b.invocations,
                &t0,
                Some(b.graph.snapshot(scenario)),
                "start and goal are in disconnected components",
            ));
        }
        // Incremental: grow the roadmap further and retry.
        for _ in 0..cfg.increment {
            if b.grow(round).is_err() {
                return Err(failure(
                    b.invocations,
                    &t0,
                    Some(b.graph.snapshot(scenario)),
                    "budget exhausted",
                ));
            }
            round += 1;
        }
        // Refresh the endpoint connections toward newly added nodes.
        if b.connect(start_id).is_err() || b.connect(goal_id).is_err() {
            return Err(failure(
                b.invocations,
                &t0,
                Some(b.graph.snapshot(scenario)),
                "budget exhausted",
            ));
        }
    }
}
