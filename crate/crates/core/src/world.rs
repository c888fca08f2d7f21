//! The deterministic planar tabletop world: scenario description, world
//! states, validity checks, the inter-state distance metric, goal predicates,
//! and quasi-static push dynamics (in [`crate::world::push`]).
//!
//! A state is the pose of a free-flying gripper plus the poses of all movable
//! objects. Objects rest on a rectangular table (or fully inside a bin);
//! static obstacles are convex polygons. The gripper is reach-limited to a
//! disc of radius `r_max` around a fixed base point, standing in for arm
//! kinematics.

use crate::geom::{
    penetration_depth, shape_inside_rect, shape_rect_overlap_area, Rect, Shape,
};
use crate::se2::{angle_diff, Pose2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod push;

pub use push::{simulate_push, PushRollout, MAX_PUSH_DISTANCE};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("unknown object id {0}")]
    UnknownObject(usize),
    #[error("state does not match scenario objects: expected {expected}, got {got}")]
    StateMismatch { expected: usize, got: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Index of an object within `Scenario::objects`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassClass {
    Light,
    Heavy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub shape: Shape,
    pub graspable: bool,
    /// Graspable anywhere on the table (tall profile). Flat objects such as
    /// plates can only be grasped from the side once they overhang an edge.
    #[serde(default)]
    pub top_graspable: bool,
    pub mass_class: MassClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grip {
    Open,
    Holding(ObjectId),
}

impl Grip {
    pub fn held(&self) -> Option<ObjectId> {
        match self {
            Grip::Open => None,
            Grip::Holding(id) => Some(*id),
        }
    }
}

/// Joint configuration of the gripper and every movable object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub gripper: Pose2,
    pub grip: Grip,
    /// Indexed by `ObjectId`, aligned with `Scenario::objects`.
    pub object_poses: Vec<Pose2>,
}

impl WorldState {
    pub fn object_pose(&self, id: ObjectId) -> &Pose2 {
        &self.object_poses[id.0]
    }

    /// Relative transform of the held object in the gripper frame.
    pub fn held_transform(&self) -> Option<Pose2> {
        self.grip
            .held()
            .map(|id| self.gripper.inverse().compose(self.object_pose(id)))
    }
}

/// An entity of the world state, used to scope incremental validity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Gripper,
    Object(ObjectId),
}

/// Tolerances and noise parameters, overridable per scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldParams {
    /// Allowed interpenetration before a state counts as colliding.
    pub eps_pen: f64,
    /// Minimum fraction of an object's footprint that must rest on the table.
    pub f_sup: f64,
    /// Standard deviation of the post-push position noise (meters).
    pub sigma_pos: f64,
    /// Standard deviation of the post-push rotation noise (radians).
    pub sigma_rot: f64,
    /// Weight of squared angle differences in the state distance metric.
    pub w_theta: f64,
    /// Positional tolerance when matching boundary states.
    pub eps_match_pos: f64,
    /// Angular tolerance when matching boundary states.
    pub eps_match_rot: f64,
    /// Fixed base point of the arm; the gripper must stay within `r_max`.
    pub base: (f64, f64),
    pub r_max: f64,
    /// Collision footprint of the free-flying gripper.
    pub gripper_radius: f64,
    /// Finger engagement depth: minimum overhang for a side grasp.
    pub finger_depth: f64,
    /// Arc-length discretization of trajectories.
    pub arc_step: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams {
            eps_pen: 1e-6,
            f_sup: 0.5,
            sigma_pos: 0.01,
            sigma_rot: 0.05,
            w_theta: 0.1,
            eps_match_pos: 0.01,
            eps_match_rot: 0.05,
            base: (0.8, 0.4),
            r_max: 1.2,
            gripper_radius: 0.02,
            finger_depth: 0.02,
            arc_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub target: ObjectId,
    pub region: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub table: Rect,
    pub bin: Rect,
    /// Convex polygons in the world frame.
    pub static_obstacles: Vec<Vec<(f64, f64)>>,
    pub objects: Vec<ObjectSpec>,
    pub start: WorldState,
    pub goal: GoalSpec,
    pub params: WorldParams,
}

impl Scenario {
    pub fn object(&self, id: ObjectId) -> &ObjectSpec {
        &self.objects[id.0]
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn is_pushable(&self, id: ObjectId) -> bool {
        self.objects[id.0].mass_class == MassClass::Light
    }

    /// Ids of objects a push skill may act on.
    pub fn pushable_objects(&self) -> Vec<ObjectId> {
        (0..self.objects.len())
            .filter(|&i| self.is_pushable(ObjectId(i)))
            .map(ObjectId)
            .collect()
    }

    pub fn graspable_objects(&self) -> Vec<ObjectId> {
        (0..self.objects.len())
            .filter(|&i| self.objects[i].graspable)
            .map(ObjectId)
            .collect()
    }

    fn check_state_shape(&self, state: &WorldState) -> Result<(), WorldError> {
        if state.object_poses.len() != self.objects.len() {
            return Err(WorldError::StateMismatch {
                expected: self.objects.len(),
                got: state.object_poses.len(),
            });
        }
        if let Some(ObjectId(i)) = state.grip.held() {
            if i >= self.objects.len() {
                return Err(WorldError::UnknownObject(i));
            }
        }
        Ok(())
    }

    /// Structural validation of the scenario itself (shapes, start state,
    /// table/bin disjointness). Used when loading scenario files.
    pub fn check(&self) -> Result<(), WorldError> {
        if self.table.is_empty() || self.bin.is_empty() {
            return Err(WorldError::BadParameter("degenerate table or bin".into()));
        }
        if self.table.intersects(&self.bin) {
            return Err(WorldError::BadParameter("bin overlaps the table".into()));
        }
        if self.goal.region.is_empty() {
            return Err(WorldError::BadParameter("goal region has no area".into()));
        }
        if self.goal.target.0 >= self.objects.len() {
            return Err(WorldError::UnknownObject(self.goal.target.0));
        }
        for spec in &self.objects {
            spec.shape
                .check()
                .map_err(|e| WorldError::BadParameter(format!("object {}: {e}", spec.name)))?;
        }
        for (i, obs) in self.static_obstacles.iter().enumerate() {
            let shape = Shape::Polygon {
                vertices: obs.clone(),
            };
            shape
                .check()
                .map_err(|e| WorldError::BadParameter(format!("obstacle {i}: {e}")))?;
        }
        self.check_state_shape(&self.start)?;
        if !is_valid_state(self, &self.start)? {
            return Err(WorldError::BadParameter("start state is invalid".into()));
        }
        Ok(())
    }
}

/// Footprint support: enough of the shape rests on the table, or the shape is
/// entirely inside the bin.
fn object_supported(scenario: &Scenario, shape: &Shape, pose: &Pose2) -> bool {
    let overlap = shape_rect_overlap_area(shape, pose, &scenario.table);
    // Tiny slack so the exact-threshold case counts as supported.
    if overlap >= scenario.params.f_sup * shape.area() - 1e-12 {
        return true;
    }
    shape_inside_rect(shape, pose, &scenario.bin)
}

fn entity_ok(scenario: &Scenario, state: &WorldState, entity: Entity) -> bool {
    let p = &scenario.params;
    let held = state.grip.held();
    match entity {
        Entity::Gripper => {
            // Reach limit.
            let dx = state.gripper.x - p.base.0;
            let dy = state.gripper.y - p.base.1;
            if dx * dx + dy * dy > p.r_max * p.r_max {
                return false;
            }
            let g_shape = Shape::Disc {
                radius: p.gripper_radius,
            };
            for obs in &scenario.static_obstacles {
                let obs_shape = Shape::Polygon {
                    vertices: obs.clone(),
                };
                if penetration_depth(&g_shape, &state.gripper, &obs_shape, &Pose2::identity())
                    > p.eps_pen
                {
                    return false;
                }
            }
            true
        }
        Entity::Object(id) => {
            // Held objects are lifted above the tabletop: no collision or
            // support constraints apply while grasped.
            if held == Some(id) {
                return true;
            }
            let spec = &scenario.objects[id.0];
            let pose = state.object_pose(id);
            if !object_supported(scenario, &spec.shape, pose) {
                return false;
            }
            for obs in &scenario.static_obstacles {
                let obs_shape = Shape::Polygon {
                    vertices: obs.clone(),
                };
                if penetration_depth(&spec.shape, pose, &obs_shape, &Pose2::identity()) > p.eps_pen
                {
                    return false;
                }
            }
            for (j, other) in scenario.objects.iter().enumerate() {
                if j == id.0 || held == Some(ObjectId(j)) {
                    continue;
                }
                if penetration_depth(&spec.shape, pose, &other.shape, &state.object_poses[j])
                    > p.eps_pen
                {
                    return false;
                }
            }
            true
        }
    }
}

/// Full validity: no penetration beyond `eps_pen` between object pairs,
/// objects and obstacles, or gripper and obstacles; every non-held object
/// supported; gripper within reach.
pub fn is_valid_state(scenario: &Scenario, state: &WorldState) -> Result<bool, WorldError> {
    scenario.check_state_shape(state)?;
    if !entity_ok(scenario, state, Entity::Gripper) {
        return Ok(false);
    }
    for i in 0..scenario.objects.len() {
        if !entity_ok(scenario, state, Entity::Object(ObjectId(i))) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Incremental validity check for states derived from a known-valid state by
/// moving only `moved` entities. Object pairs are symmetric, so checking the
/// moved entities covers every constraint that can have changed.
pub fn is_valid_state_moved(scenario: &Scenario, state: &WorldState, moved: &[Entity]) -> bool {
    moved.iter().all(|&e| entity_ok(scenario, state, e))
}

/// Closed-region goal test on the target object's center.
pub fn goal_satisfied(goal: &GoalSpec, state: &WorldState) -> Result<bool, WorldError> {
    let pose = state
        .object_poses
        .get(goal.target.0)
        .ok_or(WorldError::UnknownObject(goal.target.0))?;
    Ok(goal.region.contains(pose.x, pose.y))
}

/// Pseudometric over world states: root of summed squared pose differences of
/// the gripper and every object, with angle differences weighted by
/// `w_theta`.
pub fn state_distance(a: &WorldState, b: &WorldState, w_theta: f64) -> Result<f64, WorldError> {
    if a.object_poses.len() != b.object_poses.len() {
        return Err(WorldError::StateMismatch {
            expected: a.object_poses.len(),
            got: b.object_poses.len(),
        });
    }
    let mut acc = pose_diff_sq(&a.gripper, &b.gripper, w_theta);
    for (pa, pb) in a.object_poses.iter().zip(&b.object_poses) {
        acc += pose_diff_sq(pa, pb, w_theta);
    }
    Ok(acc.sqrt())
}

fn pose_diff_sq(a: &Pose2, b: &Pose2, w_theta: f64) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dt = angle_diff(a.theta, b.theta);
    dx * dx + dy * dy + w_theta * dt * dt
}

/// Per-entity equality within the matching tolerances. Disc-shaped objects
/// are rotationally symmetric, so their heading is ignored.
pub fn states_match(scenario: &Scenario, a: &WorldState, b: &WorldState) -> bool {
    if a.object_poses.len() != b.object_poses.len() || a.grip != b.grip {
        return false;
    }
    let p = &scenario.params;
    if !pose_match(&a.gripper, &b.gripper, p.eps_match_pos, p.eps_match_rot) {
        return false;
    }
    for (i, (pa, pb)) in a.object_poses.iter().zip(&b.object_poses).enumerate() {
        let symmetric = matches!(scenario.objects[i].shape, Shape::Disc { .. });
        let eps_rot = if symmetric {
            f64::INFINITY
        } else {
            p.eps_match_rot
        };
        if !pose_match(pa, pb, p.eps_match_pos, eps_rot) {
            return false;
        }
    }
    true
}

fn pose_match(a: &Pose2, b: &Pose2, eps_pos: f64, eps_rot: f64) -> bool {
    (a.x - b.x).abs() <= eps_pos
        && (a.y - b.y).abs() <= eps_pos
        && angle_diff(a.theta, b.theta).abs() <= eps_rot
}

/// A normalized-time sequence of world states. Time is proportional to arc
/// length (in the state metric), so collision checking cost scales with
/// motion length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    samples: Vec<(f64, WorldState)>,
}

impl Trajectory {
    pub fn singleton(state: WorldState) -> Trajectory {
        Trajectory {
            samples: vec![(0.0, state)],
        }
    }

    /// Build from an ordered state sequence; `t` values follow cumulative
    /// inter-state distance (with a floor so `t` stays strictly increasing
    /// across zero-motion events such as grasping).
    pub fn from_states(states: Vec<WorldState>, w_theta: f64) -> Trajectory {
        assert!(!states.is_empty(), "trajectory needs at least one state");
        if states.len() == 1 {
            return Trajectory::singleton(states.into_iter().next().unwrap());
        }
        let mut cumulative = vec![0.0];
        let mut total = 0.0;
        for w in states.windows(2) {
            let d = state_distance(&w[0], &w[1], w_theta)
                .expect("trajectory states share one object set")
                .max(1e-9);
            total += d;
            cumulative.push(total);
        }
        let samples = states
            .into_iter()
            .zip(cumulative)
            .map(|(s, c)| (c / total, s))
            .collect();
        Trajectory { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one sample by construction
    }

    pub fn samples(&self) -> &[(f64, WorldState)] {
        &self.samples
    }

    pub fn first(&self) -> &WorldState {
        &self.samples[0].1
    }

    pub fn last(&self) -> &WorldState {
        &self.samples[self.samples.len() - 1].1
    }

    /// Summed inter-sample state distance.
    pub fn path_length(&self, w_theta: f64) -> f64 {
        self.samples
            .windows(2)
            .map(|w| state_distance(&w[0].1, &w[1].1, w_theta).unwrap_or(0.0))
            .sum()
    }

    /// Structural invariant: strictly increasing `t`, starting at 0 and
    /// ending at 1 (single samples sit at t = 0).
    pub fn check_times(&self) -> bool {
        if self.samples[0].0 != 0.0 {
            return false;
        }
        if self.samples.len() > 1 && (self.samples[self.samples.len() - 1].0 - 1.0).abs() > 1e-12 {
            return false;
        }
        self.samples.windows(2).all(|w| w[0].0 < w[1].0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disc_object(name: &str, r: f64) -> ObjectSpec {
        ObjectSpec {
            name: name.into(),
            shape: Shape::Disc { radius: r },
            graspable: true,
            top_graspable: false,
            mass_class: MassClass::Light,
        }
    }

    fn simple_scenario() -> Scenario {
        let start = WorldState {
            gripper: Pose2::new(0.8, 0.4, 0.0),
            grip: Grip::Open,
            object_poses: vec![Pose2::new(0.5, 0.4, 0.0)],
        };
        Scenario {
            table: Rect::new(0.0, 0.0, 1.2, 0.8),
            bin: Rect::new(1.3, 0.25, 1.6, 0.55),
            static_obstacles: vec![],
            objects: vec![disc_object("plate", 0.1)],
            start,
            goal: GoalSpec {
                target: ObjectId(0),
                region: Rect::new(1.3, 0.25, 1.6, 0.55),
            },
            params: WorldParams {
                r_max: 2.0,
                ..WorldParams::default()
            },
        }
    }

    #[test]
    fn start_state_is_valid() {
        let s = simple_scenario();
        assert!(is_valid_state(&s, &s.start).unwrap());
        s.check().unwrap();
    }

    #[test]
    fn obstacle_penetration_invalidates() {
        let mut s = simple_scenario();
        s.static_obstacles
            .push(vec![(0.55, 0.3), (0.7, 0.3), (0.7, 0.5), (0.55, 0.5)]);
        // Plate at (0.5, 0.4) with radius 0.1 penetrates x >= 0.55 by 0.05.
        assert!(!is_valid_state(&s, &s.start).unwrap());
    }

    #[test]
    fn support_fraction_boundary() {
        let s = simple_scenario();
        // Disc centered exactly on the table edge: half the footprint rests
        // on the table, which meets f_sup = 0.5.
        let mut st = s.start.clone();
        st.object_poses[0] = Pose2::new(0.0, 0.4, 0.0);
        assert!(is_valid_state(&s, &st).unwrap());
        // 1 mm further off: below half.
        st.object_poses[0] = Pose2::new(-0.001, 0.4, 0.0);
        assert!(!is_valid_state(&s, &st).unwrap());
    }

    #[test]
    fn held_object_needs_no_support() {
        let s = simple_scenario();
        let mut st = s.start.clone();
        st.grip = Grip::Holding(ObjectId(0));
        st.object_poses[0] = Pose2::new(1.25, 0.4, 0.0); // between table and bin
        assert!(is_valid_state(&s, &st).unwrap());
    }

    #[test]
    fn goal_test_is_closed() {
        let s = simple_scenario();
        let mut st = s.start.clone();
        st.object_poses[0] = Pose2::new(1.45, 0.4, 0.0);
        assert!(goal_satisfied(&s.goal, &st).unwrap());
        st.object_poses[0] = Pose2::new(1.3, 0.25, 0.0); // exactly on the corner
        assert!(goal_satisfied(&s.goal, &st).unwrap());
        st.object_poses[0] = Pose2::new(0.5, 0.4, 0.0);
        assert!(!goal_satisfied(&s.goal, &st).unwrap());
    }

    #[test]
    fn distance_examples() {
        let s = simple_scenario();
        let a = s.start.clone();
        assert_eq!(state_distance(&a, &a, 0.1).unwrap(), 0.0);

        let mut b = a.clone();
        b.object_poses[0] = Pose2::new(a.object_poses[0].x + 3.0, a.object_poses[0].y + 4.0, 0.0);
        assert!((state_distance(&a, &b, 0.1).unwrap() - 5.0).abs() < 1e-12);

        let mut c = a.clone();
        c.object_poses[0].theta = PI;
        let d = state_distance(&a, &c, 0.25).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_sets_error() {
        let s = simple_scenario();
        let mut b = s.start.clone();
        b.object_poses.push(Pose2::identity());
        assert!(state_distance(&s.start, &b, 0.1).is_err());
        assert!(is_valid_state(&s, &b).is_err());
    }

    #[test]
    fn trajectory_times() {
        let s = simple_scenario();
        let mut mid = s.start.clone();
        mid.gripper.x += 0.1;
        let mut end = mid.clone();
        end.gripper.x += 0.1;
        let traj = Trajectory::from_states(vec![s.start.clone(), mid, end], 0.1);
        assert!(traj.check_times());
        assert_eq!(traj.len(), 3);
        assert!((traj.path_length(0.1) - 0.2).abs() < 1e-9);

        let single = Trajectory::singleton(s.start.clone());
        assert!(single.check_times());
    }
}
