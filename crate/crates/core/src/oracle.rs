//! The domain-independent statistical oracle.
//!
//! Decisions made per iteration: whether to restrict the library to
//! connectors (driven by the edge/node ratio), which skill to invoke (a
//! bandit score balancing success rate with an exploration bonus), how to
//! parameterize it, and which node pair (or node-to-goal) a connector should
//! try to join (four randomization modes with pair penalties).

use crate::graph::{MosaicGraph, NeighborSide, NodeId, PairPenaltyTable};
use crate::skills::{Condition, ParamDetail, SkillId, SkillParams};
use crate::world::{GoalSpec, ObjectId, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("skill type selection needs at least one node in the graph")]
    EmptyGraph,
    #[error("empty skill candidate list")]
    NoCandidates,
    #[error("invalid oracle config: {0}")]
    BadConfig(String),
}

/// Per-skill success statistics. The success rate is always recomputed from
/// the counters.
#[derive(Debug, Clone, Default)]
pub struct SkillStats {
    counts: BTreeMap<SkillId, (u64, u64)>, // (successes, invocations)
}

impl SkillStats {
    pub fn new() -> SkillStats {
        SkillStats::default()
    }

    pub fn record(&mut self, skill: SkillId, success: bool) {
        let entry = self.counts.entry(skill).or_insert((0, 0));
        entry.1 += 1;
        if success {
            entry.0 += 1;
        }
    }

    pub fn invocations(&self, skill: SkillId) -> u64 {
        self.counts.get(&skill).map_or(0, |c| c.1)
    }

    pub fn successes(&self, skill: SkillId) -> u64 {
        self.counts.get(&skill).map_or(0, |c| c.0)
    }

    pub fn success_rate(&self, skill: SkillId) -> f64 {
        let (s, t) = self.counts.get(&skill).copied().unwrap_or((0, 0));
        s as f64 / (t.max(1)) as f64
    }

    /// Compact text form for failure reports.
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        for (skill, (s, t)) in &self.counts {
            parts.push(format!("{}:{}/{}", skill.name(), s, t));
        }
        parts.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Weight between exploitation (success rate) and the exploration bonus.
    pub alpha: f64,
    /// Clamp bounds on the edge/node ratio used for skill-type gating.
    pub p_lb: f64,
    pub p_ub: f64,
    /// Cumulative cutoffs of the pair-selection modes.
    pub p_s: f64,
    pub p_g: f64,
    pub p_sg: f64,
    /// Probability that a connector targets the goal condition directly.
    pub p_direct_goal: f64,
    /// Pair-penalty distance inflation per failed attempt.
    pub gamma: f64,
    /// Gaussian noise on the skill score (kept on for completeness).
    pub noise: bool,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            alpha: 0.5,
            p_lb: 0.1,
            p_ub: 0.9,
            p_s: 0.2,
            p_g: 0.4,
            p_sg: 0.5,
            p_direct_goal: 0.2,
            gamma: 0.5,
            noise: true,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn check(&self) -> Result<(), OracleError> {
        let in01 = |v: f64| (0.0..=1.0).contains(&v);
        if !(in01(self.alpha) && in01(self.p_lb) && in01(self.p_ub) && self.p_lb <= self.p_ub) {
            return Err(OracleError::BadConfig(
                "need 0 <= p_lb <= p_ub <= 1 and alpha in [0,1]".into(),
            ));
        }
        if !(in01(self.p_s) && in01(self.p_g) && in01(self.p_sg)
            && self.p_s <= self.p_g
            && self.p_g <= self.p_sg)
        {
            return Err(OracleError::BadConfig(
                "mode cutoffs must satisfy p_s <= p_g <= p_sg in [0,1]".into(),
            ));
        }
        if !in01(self.p_direct_goal) || self.gamma < 0.0 {
            return Err(OracleError::BadConfig(
                "p_direct_goal in [0,1], gamma >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkillTypeGate {
    ConnectorsOnly,
    AllSkills,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    Start,
    Goal,
    StartGoal,
    Random,
}

/// What a connector should try to join.
#[derive(Debug, Clone)]
pub struct ConnectRequest {
    pub from_node: NodeId,
    pub from: Condition,
    pub to: ConnectTarget,
}

#[derive(Debug, Clone)]
pub enum ConnectTarget {
    Node(NodeId, Condition),
    Goal(Condition),
}

/// Exploration-weighted skill score. `sum_t1` is the sum of `t + 1` over the
/// candidate set.
pub fn u_score(alpha: f64, success_rate: f64, invocations: u64, sum_t1: u64) -> f64 {
    let ratio = sum_t1 as f64 / (invocations + 1) as f64;
    alpha * success_rate + (1.0 - alpha) * ratio.ln().sqrt()
}

#[derive(Debug)]
pub struct Oracle {
    pub config: OracleConfig,
    pub stats: SkillStats,
    pub penalties: PairPenaltyTable,
    rng: ChaCha8Rng,
}

impl Oracle {
    pub fn new(config: OracleConfig) -> Oracle {
        Oracle {
            stats: SkillStats::new(),
            penalties: PairPenaltyTable::new(config.gamma),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
        }
    }

    /// Restrict to connectors with probability `1 - clamp(E/N, p_lb, p_ub)`:
    /// a sparse graph (few edges per node) favors connecting what exists.
    pub fn choose_skill_type(
        &mut self,
        nodes: usize,
        edges: usize,
    ) -> Result<SkillTypeGate, OracleError> {
        if nodes == 0 {
            return Err(OracleError::EmptyGraph);
        }
        let ratio = edges as f64 / nodes as f64;
        let threshold = ratio.clamp(self.config.p_lb, self.config.p_ub);
        let t: f64 = self.rng.gen();
        Ok(if t > threshold {
            SkillTypeGate::ConnectorsOnly
        } else {
            SkillTypeGate::AllSkills
        })
    }

    /// Argmax of the exploration-weighted score over the candidates, with
    /// optional unit Gaussian noise per candidate. Candidates are scored in
    /// name order, so exact ties go to the lexicographically first skill.
    pub fn choose_skill(&mut self, candidates: &[SkillId]) -> Result<SkillId, OracleError> {
        if candidates.is_empty() {
            return Err(OracleError::NoCandidates);
        }
        let mut sorted: Vec<SkillId> = candidates.to_vec();
        sorted.sort();
        sorted.dedup();
        let sum_t1: u64 = sorted
            .iter()
            .map(|s| self.stats.invocations(*s) + 1)
            .sum();
        let mut best: Option<(SkillId, f64)> = None;
        for &skill in &sorted {
            let mut u = u_score(
                self.config.alpha,
                self.stats.success_rate(skill),
                self.stats.invocations(skill),
                sum_t1,
            );
            if self.config.noise {
                u += crate::world::push::gauss(&mut self.rng);
            }
            if best.map_or(true, |(_, b)| u > b) {
                best = Some((skill, u));
            }
        }
        Ok(best.unwrap().0)
    }

    /// Sample skill parameters uniformly over their declared ranges; every
    /// value in range has positive density, which the completeness argument
    /// relies on.
    pub fn sample_parameters(&mut self, skill: SkillId, scenario: &Scenario) -> SkillParams {
        sample_skill_parameters(&mut self.rng, skill, scenario)
    }

    /// Fair seeded coin, used to pick the role of dual-capability skills.
    pub fn coin(&mut self) -> bool {
        self.rng.gen::<f64>() < 0.5
    }

    /// Draw a pair-selection mode from the cumulative cutoffs.
    pub fn draw_mode(&mut self) -> SelectionMode {
        let r: f64 = self.rng.gen();
        let c = &self.config;
        if r < c.p_s {
            SelectionMode::Start
        } else if r < c.p_g {
            SelectionMode::Goal
        } else if r < c.p_sg {
            SelectionMode::StartGoal
        } else {
            SelectionMode::Random
        }
    }

    /// Choose boundary conditions for a connector: a node pair via one of the
    /// four modes, or (with probability `p_direct_goal`) a start-reachable
    /// node paired with the goal condition itself. Returns `None` when no
    /// eligible pair exists; the planner then falls back to a generator.
    pub fn choose_conds_to_connect(
        &mut self,
        graph: &MosaicGraph,
        scenario: &Scenario,
        goal: &GoalSpec,
    ) -> Option<ConnectRequest> {
        let w_theta = scenario.params.w_theta;
        let (forward, backward) = graph.reachable_sets(goal);
        let all: Vec<NodeId> = graph.nodes().map(|n| n.id).collect();
        if all.is_empty() {
            return None;
        }

        if self.rng.gen::<f64>() < self.config.p_direct_goal {
            // Connect a node to the goal condition directly. A success from
            // an unreachable node still seeds the backward (goal-side)
            // component, so the pool is every node in the graph.
            let from = *pick_uniform(&mut self.rng, &all)?;
            return Some(self.request_to_goal(graph, from, goal));
        }

        let mode = self.draw_mode();
        match mode {
            SelectionMode::Start => self
                .pair_from_pool(graph, &forward, w_theta)
                .map(|(f, t)| self.request_between(graph, f, t)),
            SelectionMode::Goal => {
                if backward.is_empty() {
                    // Declared fallback: random mode.
                    self.pair_from_pool(graph, &all, w_theta)
                        .map(|(f, t)| self.request_between(graph, f, t))
                } else {
                    self.pair_into_pool(graph, &backward, w_theta)
                        .map(|(f, t)| self.request_between(graph, f, t))
                }
            }
            SelectionMode::StartGoal => {
                if !forward.is_empty() && !backward.is_empty() {
                    // Try a few sampled cross pairs before falling back.
                    for _ in 0..8 {
                        let f = *pick_uniform(&mut self.rng, &forward)?;
                        let t = *pick_uniform(&mut self.rng, &backward)?;
                        if f != t && !graph.connected(f, t) {
                            return Some(self.request_between(graph, f, t));
                        }
                    }
                }
                self.pair_from_pool(graph, &all, w_theta)
                    .map(|(f, t)| self.request_between(graph, f, t))
            }
            SelectionMode::Random => self
                .pair_from_pool(graph, &all, w_theta)
                .map(|(f, t)| self.request_between(graph, f, t)),
        }
    }

    /// Sample a from-node from the pool (seeded order) and pair it with its
    /// nearest outgoing neighbor.
    fn pair_from_pool(
        &mut self,
        graph: &MosaicGraph,
        pool: &[NodeId],
        w_theta: f64,
    ) -> Option<(NodeId, NodeId)> {
        for &from in shuffled(&mut self.rng, pool).iter() {
            if let Some(&to) = graph
                .nearest_neighbors(from, 1, &self.penalties, w_theta, NeighborSide::Outgoing)
                .first()
            {
                return Some((from, to));
            }
        }
        None
    }

    /// Sample a to-node from the pool and pair it with its nearest incoming
    /// neighbor (extends goal-reaching components backward).
    fn pair_into_pool(
        &mut self,
        graph: &MosaicGraph,
        pool: &[NodeId],
        w_theta: f64,
    ) -> Option<(NodeId, NodeId)> {
        for &to in shuffled(&mut self.rng, pool).iter() {
            if let Some(&from) = graph
                .nearest_neighbors(to, 1, &self.penalties, w_theta, NeighborSide::Incoming)
                .first()
            {
                return Some((from, to));
            }
        }
        None
    }

    fn request_between(
        &self,
        graph: &MosaicGraph,
        from: NodeId,
        to: NodeId,
    ) -> ConnectRequest {
        let from_state = graph.node(from).unwrap().trajectory.last().clone();
        let to_state = graph.node(to).unwrap().trajectory.first().clone();
        ConnectRequest {
            from_node: from,
            from: Condition::State(from_state),
            to: ConnectTarget::Node(to, Condition::State(to_state)),
        }
    }

    fn request_to_goal(&self, graph: &MosaicGraph, from: NodeId, goal: &GoalSpec) -> ConnectRequest {
        let from_state = graph.node(from).unwrap().trajectory.last().clone();
        ConnectRequest {
            from_node: from,
            from: Condition::State(from_state),
            to: ConnectTarget::Goal(Condition::Goal(goal.clone())),
        }
    }

    /// Bookkeeping after an invocation: success means the outcome had at
    /// least one valid trajectory.
    pub fn record_result(&mut self, skill: SkillId, success: bool) {
        self.stats.record(skill, success);
    }

    pub fn record_pair_failure(&mut self, from: NodeId, to: NodeId) {
        self.penalties.record_failure(from, to);
    }
}

/// Uniform parameter sampling shared by the oracle and the baseline
/// planners, so every planner draws from the identical distributions.
pub fn sample_skill_parameters(
    rng: &mut ChaCha8Rng,
    skill: SkillId,
    scenario: &Scenario,
) -> SkillParams {
    let seed = rng.gen_range(0..(1u64 << 32));
    let detail = match skill {
        SkillId::Push => {
            let objects = scenario.pushable_objects();
            let object = *pick_uniform(rng, &objects).unwrap_or(&ObjectId(0));
            let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            // Distance uniform over (0, max]: map [0,1) to (0,1].
            let u: f64 = rng.gen();
            let distance = crate::world::MAX_PUSH_DISTANCE * (1.0 - u);
            ParamDetail::Push {
                object,
                direction: (angle.cos(), angle.sin()),
                distance,
                at: None,
                target: None,
            }
        }
        SkillId::Pick => {
            let objects = scenario.graspable_objects();
            let object = *pick_uniform(rng, &objects).unwrap_or(&ObjectId(0));
            let grasp_angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            ParamDetail::Pick {
                object,
                grasp_angle,
                at: None,
            }
        }
        SkillId::Transport => ParamDetail::Transport { object: None },
        SkillId::Rearrange => ParamDetail::Rearrange,
    };
    SkillParams { seed, detail }
}

fn pick_uniform<'a, T>(rng: &mut ChaCha8Rng, pool: &'a [T]) -> Option<&'a T> {
    if pool.is_empty() {
        None
    } else {
        Some(&pool[rng.gen_range(0..pool.len())])
    }
}

fn shuffled<T: Copy>(rng: &mut ChaCha8Rng, pool: &[T]) -> Vec<T> {
    let mut v = pool.to_vec();
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_score_hand_example() {
        // Candidates A (s=1.0, t=3) and B (s=0.0, t=0), alpha = 0.5:
        // sum(t+1) = 5, U_A = 0.5 + 0.5*sqrt(ln(5/4)), U_B = 0.5*sqrt(ln 5).
        let ua = u_score(0.5, 1.0, 3, 5);
        let ub = u_score(0.5, 0.0, 0, 5);
        assert!((ua - (0.5 + 0.5 * (5.0f64 / 4.0).ln().sqrt())).abs() < 1e-15);
        assert!((ub - 0.5 * 5.0f64.ln().sqrt()).abs() < 1e-15);
        assert!((ua - 0.736).abs() < 1e-3 && (ub - 0.634).abs() < 1e-3);
        assert!(ua > ub);
    }

    #[test]
    fn choose_skill_reduces_to_success_argmax_at_alpha_one() {
        let mut o = Oracle::new(OracleConfig {
            alpha: 1.0,
            noise: false,
            ..OracleConfig::default()
        });
        o.stats.record(SkillId::Push, true);
        o.stats.record(SkillId::Push, true);
        o.stats.record(SkillId::Pick, false);
        let got = o
            .choose_skill(&[SkillId::Pick, SkillId::Push, SkillId::Transport])
            .unwrap();
        assert_eq!(got, SkillId::Push);
    }

    #[test]
    fn tie_break_is_name_order() {
        let mut o = Oracle::new(OracleConfig {
            noise: false,
            ..OracleConfig::default()
        });
        // No stats at all: all scores equal; pick < push < transport.
        let got = o
            .choose_skill(&[SkillId::Transport, SkillId::Push, SkillId::Pick])
            .unwrap();
        assert_eq!(got, SkillId::Pick);
    }

    #[test]
    fn empty_candidates_is_an_error() {
        let mut o = Oracle::new(OracleConfig::default());
        assert!(matches!(
            o.choose_skill(&[]),
            Err(OracleError::NoCandidates)
        ));
        assert!(matches!(
            o.choose_skill_type(0, 0),
            Err(OracleError::EmptyGraph)
        ));
    }

    #[test]
    fn degenerate_clamp_gives_exact_half() {
        let mut o = Oracle::new(OracleConfig {
            p_lb: 0.5,
            p_ub: 0.5,
            seed: 9,
            ..OracleConfig::default()
        });
        let n = 100_000;
        let mut connectors = 0;
        for _ in 0..n {
            if o.choose_skill_type(3, 1).unwrap() == SkillTypeGate::ConnectorsOnly {
                connectors += 1;
            }
        }
        let freq = connectors as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "connector frequency {freq}");
    }

    #[test]
    fn stats_recompute_success_rate() {
        let mut st = SkillStats::new();
        for i in 0..5 {
            st.record(SkillId::Push, i < 3);
        }
        assert!((st.success_rate(SkillId::Push) - 0.6).abs() < 1e-15);
        assert_eq!(st.invocations(SkillId::Push), 5);
        assert_eq!(st.success_rate(SkillId::Pick), 0.0);
        assert_eq!(st.invocations(SkillId::Pick), 0);
    }
}
