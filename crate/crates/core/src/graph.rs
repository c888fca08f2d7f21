//! The mosaic directed multigraph.
//!
//! Nodes hold (skill, parameters, trajectory, cost); edges hold (skill,
//! boundary conditions, parameters, trajectory, cost). Edge trajectories must
//! start at the from-node's terminal state and end at the to-node's initial
//! state within the matching tolerance, which restates the plan continuity
//! requirement at graph level. Parallel edges between the same node pair are
//! allowed.

use crate::geom::Shape;
use crate::se2::Pose2;
use crate::skills::{Condition, SkillId, SkillParams};
use crate::world::{goal_satisfied, state_distance, states_match, GoalSpec, Scenario, Trajectory};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown node id {0:?}")]
    UnknownNode(NodeId),
    #[error("graph already has a start node")]
    DuplicateStart,
    #[error("graph has no start node")]
    MissingStart,
    #[error("cost must be finite and nonnegative, got {0}")]
    BadCost(f64),
    #[error("edge trajectory does not meet its endpoints: {0}")]
    Continuity(&'static str),
    #[error("no path from start to a goal-satisfying node")]
    NoPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u64);

#[derive(Debug, Clone)]
pub struct MosaicNode {
    pub id: NodeId,
    /// `None` for the start node and goal anchor nodes.
    pub skill: Option<SkillId>,
    pub params: Option<SkillParams>,
    pub trajectory: Trajectory,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct MosaicEdge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub skill: SkillId,
    pub params: SkillParams,
    pub cond0: Condition,
    pub cond1: Condition,
    pub trajectory: Trajectory,
    pub cost: f64,
}

/// Failure counts for node pairs, inflating their effective distance in
/// nearest-neighbor queries by `1 + gamma * failures`.
#[derive(Debug, Clone)]
pub struct PairPenaltyTable {
    pub gamma: f64,
    counts: HashMap<(NodeId, NodeId), u32>,
}

impl PairPenaltyTable {
    pub fn new(gamma: f64) -> PairPenaltyTable {
        PairPenaltyTable {
            gamma,
            counts: HashMap::new(),
        }
    }

    pub fn record_failure(&mut self, from: NodeId, to: NodeId) {
        *self.counts.entry((from, to)).or_insert(0) += 1;
    }

    pub fn failures(&self, from: NodeId, to: NodeId) -> u32 {
        self.counts.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn inflation(&self, from: NodeId, to: NodeId) -> f64 {
        1.0 + self.gamma * self.failures(from, to) as f64
    }
}

/// Which end of the query node a neighbor search matches against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborSide {
    /// Candidates ranked by distance from the query's terminal state to the
    /// candidate's initial state (edges out of the query).
    Outgoing,
    /// Candidates ranked by distance from the candidate's terminal state to
    /// the query's initial state (edges into the query).
    Incoming,
}

#[derive(Debug, Default)]
pub struct MosaicGraph {
    nodes: Vec<MosaicNode>,
    edges: Vec<MosaicEdge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    start: Option<NodeId>,
}

impl MosaicGraph {
    pub fn new() -> MosaicGraph {
        MosaicGraph::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &MosaicNode> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = &MosaicEdge> {
        self.edges.iter()
    }

    pub fn node(&self, id: NodeId) -> Result<&MosaicNode, GraphError> {
        self.nodes
            .get(id.0 as usize)
            .ok_or(GraphError::UnknownNode(id))
    }

    pub fn edge(&self, id: EdgeId) -> &MosaicEdge {
        &self.edges[id.0 as usize]
    }

    pub fn start_node(&self) -> Result<NodeId, GraphError> {
        self.start.ok_or(GraphError::MissingStart)
    }

    /// Insert the unique start node: a zero-cost singleton trajectory.
    pub fn add_start_node(&mut self, state: crate::world::WorldState) -> Result<NodeId, GraphError> {
        if self.start.is_some() {
            return Err(GraphError::DuplicateStart);
        }
        let id = self.push_node(None, None, Trajectory::singleton(state), 0.0)?;
        self.start = Some(id);
        Ok(id)
    }

    /// Insert a skill node.
    pub fn add_node(
        &mut self,
        skill: SkillId,
        params: SkillParams,
        trajectory: Trajectory,
        cost: f64,
    ) -> Result<NodeId, GraphError> {
        self.push_node(Some(skill), Some(params), trajectory, cost)
    }

    /// Insert an anchor node: a zero-cost singleton with no skill (used for
    /// direct-to-goal connections and roadmap endpoints).
    pub fn add_anchor_node(&mut self, state: crate::world::WorldState) -> Result<NodeId, GraphError> {
        self.push_node(None, None, Trajectory::singleton(state), 0.0)
    }

    fn push_node(
        &mut self,
        skill: Option<SkillId>,
        params: Option<SkillParams>,
        trajectory: Trajectory,
        cost: f64,
    ) -> Result<NodeId, GraphError> {
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(GraphError::BadCost(cost));
        }
        let id = NodeId(self.nodes.len() as u64);
        self.nodes.push(MosaicNode {
            id,
            skill,
            params,
            trajectory,
            cost,
        });
        self.out_edges.push(Vec::new());
        self.in_edges.push(Vec::new());
        Ok(id)
    }

    /// Insert an edge after validating the continuity invariant against the
    /// scenario's matching tolerances.
    #[allow(clippy::too_many_arguments)]
    pub fn add_edge(
        &mut self,
        scenario: &Scenario,
        from: NodeId,
        to: NodeId,
        skill: SkillId,
        params: SkillParams,
        cond0: Condition,
        cond1: Condition,
        trajectory: Trajectory,
        cost: f64,
    ) -> Result<EdgeId, GraphError> {
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(GraphError::BadCost(cost));
        }
        let from_node = self.node(from)?;
        let to_node = self.node(to)?;
        if !states_match(scenario, trajectory.first(), from_node.trajectory.last()) {
            return Err(GraphError::Continuity(
                "edge start does not match from-node terminal state",
            ));
        }
        if !states_match(scenario, trajectory.last(), to_node.trajectory.first()) {
            return Err(GraphError::Continuity(
                "edge end does not match to-node initial state",
            ));
        }
        let id = EdgeId(self.edges.len() as u64);
        self.edges.push(MosaicEdge {
            id,
            from,
            to,
            skill,
            params,
            cond0,
            cond1,
            trajectory,
            cost,
        });
        self.out_edges[from.0 as usize].push(id.0 as usize);
        self.in_edges[to.0 as usize].push(id.0 as usize);
        Ok(id)
    }

    pub fn connected(&self, from: NodeId, to: NodeId) -> bool {
        self.out_edges[from.0 as usize]
            .iter()
            .any(|&e| self.edges[e].to == to)
    }

    /// Whether a node's trajectory terminates in a goal-satisfying state.
    pub fn is_goal_node(&self, goal: &GoalSpec, id: NodeId) -> bool {
        goal_satisfied(goal, self.nodes[id.0 as usize].trajectory.last()).unwrap_or(false)
    }

    fn goal_nodes(&self, goal: &GoalSpec) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| self.is_goal_node(goal, n.id))
            .map(|n| n.id)
            .collect()
    }

    /// True iff a directed path connects the start node to any node whose
    /// terminal state satisfies the goal.
    pub fn has_path(&self, goal: &GoalSpec) -> bool {
        let start = match self.start {
            Some(s) => s,
            None => return false,
        };
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[start.0 as usize] = true;
        queue.push_back(start);
        while let Some(n) = queue.pop_front() {
            if self.is_goal_node(goal, n) {
                return true;
            }
            for &e in &self.out_edges[n.0 as usize] {
                let to = self.edges[e].to;
                if !seen[to.0 as usize] {
                    seen[to.0 as usize] = true;
                    queue.push_back(to);
                }
            }
        }
        false
    }

    /// Forward-reachable set from the start node and backward-reachable set
    /// from goal-satisfying nodes, both sorted by node id.
    pub fn reachable_sets(&self, goal: &GoalSpec) -> (Vec<NodeId>, Vec<NodeId>) {
        let forward = match self.start {
            Some(start) => self.flood(&[start], false),
            None => Vec::new(),
        };
        let backward = self.flood(&self.goal_nodes(goal), true);
        (forward, backward)
    }

    fn flood(&self, seeds: &[NodeId], reverse: bool) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: std::collections::VecDeque<NodeId> = seeds.iter().copied().collect();
        for s in seeds {
            seen[s.0 as usize] = true;
        }
        while let Some(n) = queue.pop_front() {
            let adj = if reverse {
                &self.in_edges[n.0 as usize]
            } else {
                &self.out_edges[n.0 as usize]
            };
            for &e in adj {
                let next = if reverse {
                    self.edges[e].from
                } else {
                    self.edges[e].to
                };
                if !seen[next.0 as usize] {
                    seen[next.0 as usize] = true;
                    queue.push_back(next);
                }
            }
        }
        (0..self.nodes.len())
            .filter(|&i| seen[i])
            .map(|i| NodeId(i as u64))
            .collect()
    }

    /// Least-cost path from the start node to the cheapest goal-satisfying
    /// node. Path cost sums node costs and edge costs along the path; ties
    /// break toward smaller node ids. Returns `(node, incoming edge)` pairs.
    pub fn shortest_path(
        &self,
        goal: &GoalSpec,
    ) -> Result<Vec<(NodeId, Option<EdgeId>)>, GraphError> {
        let start = self.start_node()?;
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = std::collections::BinaryHeap::new();
        dist[start.0 as usize] = self.nodes[start.0 as usize].cost;
        heap.push(HeapItem {
            cost: dist[start.0 as usize],
            node: start,
        });
        while let Some(HeapItem { cost, node }) = heap.pop() {
            let ni = node.0 as usize;
            if done[ni] || cost > dist[ni] {
                continue;
            }
            done[ni] = true;
            for &e in &self.out_edges[ni] {
                let edge = &self.edges[e];
                let ti = edge.to.0 as usize;
                let cand = dist[ni] + edge.cost + self.nodes[ti].cost;
                if cand < dist[ti] {
                    dist[ti] = cand;
                    pred[ti] = Some((node, edge.id));
                    heap.push(HeapItem {
                        cost: cand,
                        node: edge.to,
                    });
                }
            }
        }
        // Cheapest goal node; ties go to the smallest id.
        let mut best: Option<NodeId> = None;
        for g in self.goal_nodes(goal) {
            if dist[g.0 as usize].is_finite()
                && best.map_or(true, |b| dist[g.0 as usize] < dist[b.0 as usize])
            {
                best = Some(g);
            }
        }
        let goal_node = best.ok_or(GraphError::NoPath)?;
        let mut path = vec![];
        let mut cur = goal_node;
        loop {
            match pred[cur.0 as usize] {
                Some((p, e)) => {
                    path.push((cur, Some(e)));
                    cur = p;
                }
                None => {
                    path.push((cur, None));
                    break;
                }
            }
        }
        path.reverse();
        Ok(path)
    }

    /// Total cost of a path produced by [`MosaicGraph::shortest_path`].
    pub fn path_cost(&self, path: &[(NodeId, Option<EdgeId>)]) -> f64 {
        path.iter()
            .map(|(n, e)| {
                self.nodes[n.0 as usize].cost
                    + e.map_or(0.0, |e| self.edges[e.0 as usize].cost)
            })
            .sum()
    }

    /// Rank candidate neighbors of `node` by penalty-inflated boundary state
    /// distance, excluding the node itself and already-connected pairs.
    pub fn nearest_neighbors(
        &self,
        node: NodeId,
        k: usize,
        penalties: &PairPenaltyTable,
        w_theta: f64,
        side: NeighborSide,
    ) -> Vec<NodeId> {
        let query = match self.node(node) {
            Ok(n) => n,
            Err(_) => return Vec::new(),
        };
        let mut scored: Vec<(f64, NodeId)> = Vec::new();
        for cand in &self.nodes {
            if cand.id == node {
                continue;
            }
            let (pair, d) = match side {
                NeighborSide::Outgoing => {
                    if self.connected(node, cand.id) {
                        continue;
                    }
                    let d = state_distance(
                        query.trajectory.last(),
                        cand.trajectory.first(),
                        w_theta,
                    );
                    ((node, cand.id), d)
                }
                NeighborSide::Incoming => {
                    if self.connected(cand.id, node) {
                        continue;
                    }
                    let d = state_distance(
                        cand.trajectory.last(),
                        query.trajectory.first(),
                        w_theta,
                    );
                    ((cand.id, node), d)
                }
            };
            let d = match d {
                Ok(d) => d,
                Err(_) => continue,
            };
            scored.push((d * penalties.inflation(pair.0, pair.1), cand.id));
        }
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        scored.truncate(k);
        scored.into_iter().map(|(_, id)| id).collect()
    }

    /// Line-oriented text snapshot consumed by the plotting tool: scene
    /// geometry followed by one record per node and edge with trajectory
    /// polylines for the gripper and the moved object.
    pub fn snapshot(&self, scenario: &Scenario) -> String {
        let mut out = String::new();
        out.push_str("mosaic-graph v1\n");
        write_scene(&mut out, scenario);
        for node in &self.nodes {
            let goal_flag = if self.is_goal_node(&scenario.goal, node.id) {
                1
            } else {
                0
            };
            out.push_str(&format!(
                "node {} skill={} cost={:.6} goal={} {}\n",
                node.id.0,
                node.skill.map_or("-", |s| s.name()),
                node.cost,
                goal_flag,
                trajectory_record(&node.trajectory, scenario),
            ));
        }
        for edge in &self.edges {
            out.push_str(&format!(
                "edge {} from={} to={} skill={} cost={:.6} {}\n",
                edge.id.0,
                edge.from.0,
                edge.to.0,
                edge.skill.name(),
                edge.cost,
                trajectory_record(&edge.trajectory, scenario),
            ));
        }
        out
    }
}

pub fn write_scene(out: &mut String, scenario: &Scenario) {
    let t = &scenario.table;
    out.push_str(&format!(
        "scene table {:.6} {:.6} {:.6} {:.6}\n",
        t.min_x, t.min_y, t.max_x, t.max_y
    ));
    let b = &scenario.bin;
    out.push_str(&format!(
        "scene bin {:.6} {:.6} {:.6} {:.6}\n",
        b.min_x, b.min_y, b.max_x, b.max_y
    ));
    for obs in &scenario.static_obstacles {
        out.push_str("scene obstacle");
        for (x, y) in obs {
            out.push_str(&format!(" {x:.6} {y:.6}"));
        }
        out.push('\n');
    }
    for (i, spec) in scenario.objects.iter().enumerate() {
        let pose = &scenario.start.object_poses[i];
        match &spec.shape {
            Shape::Disc { radius } => out.push_str(&format!(
                "scene object {} disc {:.6} at {:.6} {:.6} {:.6}\n",
                spec.name, radius, pose.x, pose.y, pose.theta
            )),
            Shape::Polygon { vertices } => {
                out.push_str(&format!("scene object {} poly", spec.name));
                for (x, y) in vertices {
                    out.push_str(&format!(" {x:.6} {y:.6}"));
                }
                out.push_str(&format!(" at {:.6} {:.6} {:.6}\n", pose.x, pose.y, pose.theta));
            }
        }
    }
}

/// Gripper polyline plus the moved object's polyline (if any object moves
/// over the trajectory), with the terminal gripper pose.
pub fn trajectory_record(traj: &Trajectory, scenario: &Scenario) -> String {
    let samples = traj.samples();
    let first = traj.first();
    let last = traj.last();
    let moved = (0..scenario.objects.len()).find(|&i| {
        let a = &first.object_poses[i];
        let b = &last.object_poses[i];
        a.position_dist(b) > 1e-9
    });
    let mut rec = String::from("grip=");
    push_polyline(&mut rec, samples.iter().map(|(_, s)| &s.gripper));
    match moved {
        Some(i) => {
            rec.push_str(&format!(" obj={} opath=", scenario.objects[i].name));
            push_polyline(&mut rec, samples.iter().map(|(_, s)| &s.object_poses[i]));
        }
        None => rec.push_str(" obj=- opath="),
    }
    rec.push_str(&format!(
        " end={:.6},{:.6},{:.6}",
        last.gripper.x, last.gripper.y, last.gripper.theta
    ));
    rec
}

fn push_polyline<'a>(out: &mut String, poses: impl Iterator<Item = &'a Pose2>) {
    let mut first = true;
    for p in poses {
        if !first {
            out.push(';');
        }
        out.push_str(&format!("{:.6},{:.6}", p.x, p.y));
        first = false;
    }
}

struct HeapItem {
    cost: f64,
    node: NodeId,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.node == other.node
    }
}
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap on (cost, node id).
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then(other.node.cmp(&self.node))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
