//! Rollout construction for the skill library: grasp geometry and scoring,
//! screw-motion legs, and the per-skill generator/connector behaviors.

use super::{Condition, ParamDetail, SkillConfig, SkillError, SkillId, SkillParams};
use crate::geom::{support_point, Shape};
use crate::se2::{interpolate_screw, normalize_angle, Pose2};
use crate::world::{
    goal_satisfied, is_valid_state, is_valid_state_moved, simulate_push, states_match, Entity,
    Grip, ObjectId, ObjectSpec, Scenario, Trajectory, WorldState, MAX_PUSH_DISTANCE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Decorrelates the push-noise stream from the proposal stream.
const PUSH_NOISE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Antipodal grasp quality: sample boundary points within the finger pad band
/// on each side of the grasp line and average `|n . d_g|` over their outward
/// normals, where `d_g` is the finger-closing direction.
pub fn grasp_score(
    object: &ObjectSpec,
    pose: &Pose2,
    grasp_angle: f64,
    cfg: &SkillConfig,
) -> Result<f64, SkillError> {
    if !object.graspable {
        return Err(SkillError::Capability {
            skill: "pick",
            role: "grasp of a non-graspable object",
        });
    }
    let dg = (grasp_angle.cos(), grasp_angle.sin());
    let perp = (-dg.1, dg.0);
    let half = (cfg.grasp_samples / 2).max(1);
    let mut total = 0.0;
    let mut count = 0usize;
    for side in [1.0f64, -1.0] {
        for i in 0..half {
            // Offsets symmetric in (-pad, pad), never exactly on the line.
            let u = cfg.pad_halfwidth * (2.0 * (i as f64 + 0.5) / half as f64 - 1.0);
            if let Some(normal) = boundary_normal_at_offset(object, pose, dg, perp, u, side) {
                total += (normal.0 * dg.0 + normal.1 * dg.1).abs();
                count += 1;
            }
        }
    }
    if count == 0 {
        return Ok(0.0);
    }
    Ok(total / count as f64)
}

/// Outward normal of the boundary point at perpendicular offset `u` from the
/// grasp line, on the given side along `d_g`.
fn boundary_normal_at_offset(
    object: &ObjectSpec,
    pose: &Pose2,
    dg: (f64, f64),
    perp: (f64, f64),
    u: f64,
    side: f64,
) -> Option<(f64, f64)> {
    match &object.shape {
        Shape::Disc { radius } => {
            if u.abs() >= *radius {
                return None;
            }
            let t = side * (radius * radius - u * u).sqrt();
            // Boundary point relative to the center; the normal is radial.
            let bx = u * perp.0 + t * dg.0;
            let by = u * perp.1 + t * dg.1;
            Some((bx / radius, by / radius))
        }
        Shape::Polygon { .. } => {
            let verts = object.shape.world_vertices(pose);
            let c = (pose.x, pose.y);
            let n = verts.len();
            let mut best: Option<(f64, (f64, f64))> = None;
            for i in 0..n {
                let a = verts[i];
                let b = verts[(i + 1) % n];
                let d = (b.0 - a.0, b.1 - a.1);
                let denom = d.0 * perp.0 + d.1 * perp.1;
                if denom.abs() < 1e-15 {
                    continue;
                }
                let alpha = (u - ((a.0 - c.0) * perp.0 + (a.1 - c.1) * perp.1)) / denom;
                if !(0.0..=1.0).contains(&alpha) {
                    continue;
                }
                let p = (a.0 + alpha * d.0, a.1 + alpha * d.1);
                let t = side * ((p.0 - c.0) * dg.0 + (p.1 - c.1) * dg.1);
                if best.map_or(true, |(bt, _)| t > bt) {
                    let len = (d.0 * d.0 + d.1 * d.1).sqrt();
                    best = Some((t, (d.1 / len, -d.0 / len)));
                }
            }
            best.map(|(_, normal)| normal)
        }
    }
}

/// Geometry of a planned grasp: where the gripper stages, touches, and which
/// way it retreats.
struct GraspGeom {
    outward: (f64, f64),
    pre: Pose2,
    grasp: Pose2,
    score: f64,
}

fn grasp_pose_along(
    scenario: &Scenario,
    cfg: &SkillConfig,
    object: &ObjectSpec,
    pose: &Pose2,
    outward: (f64, f64),
) -> Result<GraspGeom, SkillError> {
    let p = &scenario.params;
    let contact = support_point(&object.shape, pose, outward);
    let facing = normalize_angle((-outward.1).atan2(-outward.0));
    let grasp = Pose2::new(
        contact.0 + p.gripper_radius * outward.0,
        contact.1 + p.gripper_radius * outward.1,
        facing,
    );
    let pre = Pose2::new(
        grasp.x + cfg.approach_offset * outward.0,
        grasp.y + cfg.approach_offset * outward.1,
        facing,
    );
    let score = grasp_score(object, pose, outward.1.atan2(outward.0), cfg)?;
    Ok(GraspGeom {
        outward,
        pre,
        grasp,
        score,
    })
}

/// Side grasps need the object to overhang a table edge by at least the
/// finger depth; the grasp direction is the outward normal of the edge with
/// the largest overhang. Top-graspable objects grasp along the sampled angle
/// anywhere.
fn grasp_geometry(
    scenario: &Scenario,
    cfg: &SkillConfig,
    object: ObjectId,
    pose: &Pose2,
    grasp_angle: f64,
) -> Result<Option<GraspGeom>, SkillError> {
    let spec = scenario.object(object);
    if !spec.graspable {
        return Ok(None);
    }
    if spec.top_graspable {
        let geom = grasp_pose_along(
            scenario,
            cfg,
            spec,
            pose,
            (grasp_angle.cos(), grasp_angle.sin()),
        )?;
        return Ok(Some(geom));
    }
    let table = &scenario.table;
    let edges: [((f64, f64), f64); 4] = [
        ((-1.0, 0.0), table.min_x),
        ((1.0, 0.0), table.max_x),
        ((0.0, -1.0), table.min_y),
        ((0.0, 1.0), table.max_y),
    ];
    let mut best: Option<((f64, f64), f64)> = None;
    for (outward, bound) in edges {
        let sp = support_point(&spec.shape, pose, outward);
        let reach = sp.0 * outward.0 + sp.1 * outward.1;
        let overhang = reach - bound * (outward.0 + outward.1); // signed extent past the edge
        if overhang > best.map_or(f64::NEG_INFINITY, |(_, o)| o) {
            best = Some((outward, overhang));
        }
    }
    match best {
        Some((outward, overhang)) if overhang >= scenario.params.finger_depth => {
            Ok(Some(grasp_pose_along(scenario, cfg, spec, pose, outward)?))
        }
        _ => Ok(None),
    }
}

/// Accumulates rollout states and tracks validity.
struct RolloutBuilder<'a> {
    scenario: &'a Scenario,
    states: Vec<WorldState>,
    valid: bool,
}

impl<'a> RolloutBuilder<'a> {
    fn new(scenario: &'a Scenario, ctx: WorldState) -> Result<Self, SkillError> {
        let valid = is_valid_state(scenario, &ctx)?;
        Ok(RolloutBuilder {
            scenario,
            states: vec![ctx],
            valid,
        })
    }

    fn current(&self) -> &WorldState {
        self.states.last().unwrap()
    }

    fn leg_steps(&self, from: &Pose2, to: &Pose2) -> usize {
        let len = from.position_dist(to)
            + 0.1 * crate::se2::angle_diff(to.theta, from.theta).abs();
        ((len / self.scenario.params.arc_step).ceil() as usize).max(1)
    }

    /// Screw the gripper alone to `target`.
    fn move_gripper(&mut self, target: Pose2) {
        let from = self.current().gripper;
        if from == target {
            return;
        }
        let steps = self.leg_steps(&from, &target);
        for i in 1..=steps {
            let mut next = self.current().clone();
            next.gripper = interpolate_screw(&from, &target, i as f64 / steps as f64);
            if self.valid
                && !is_valid_state_moved(self.scenario, &next, &[Entity::Gripper])
            {
                self.valid = false;
            }
            self.states.push(next);
        }
    }

    /// Screw the gripper to `target` with the held object attached via `rel`.
    fn move_gripper_holding(&mut self, target: Pose2, object: ObjectId, rel: &Pose2) {
        let from = self.current().gripper;
        if from == target {
            return;
        }
        let steps = self.leg_steps(&from, &target);
        let moved = [Entity::Gripper, Entity::Object(object)];
        for i in 1..=steps {
            let mut next = self.current().clone();
            next.gripper = interpolate_screw(&from, &target, i as f64 / steps as f64);
            next.object_poses[object.0] = next.gripper.compose(rel);
            if self.valid && !is_valid_state_moved(self.scenario, &next, &moved) {
                self.valid = false;
            }
            self.states.push(next);
        }
    }

    /// Grip change event (zero-motion sample). A release re-checks the object
    /// since support and collision constraints apply again.
    fn set_grip(&mut self, grip: Grip) {
        let released = self.current().grip.held().filter(|_| grip == Grip::Open);
        let mut next = self.current().clone();
        next.grip = grip;
        if let Some(o) = released {
            if self.valid
                && !is_valid_state_moved(self.scenario, &next, &[Entity::Object(o)])
            {
                self.valid = false;
            }
        }
        self.states.push(next);
    }

    /// Splice a push rollout starting from the current state.
    fn push(
        &mut self,
        object: ObjectId,
        direction: (f64, f64),
        distance: f64,
        seed: u64,
    ) -> Result<(), SkillError> {
        let roll = simulate_push(
            self.scenario,
            self.current(),
            object,
            direction,
            distance,
            seed,
        )?;
        if !roll.valid {
            self.valid = false;
        }
        for (_, s) in roll.trajectory.samples().iter().skip(1) {
            self.states.push(s.clone());
        }
        Ok(())
    }

    fn mark_invalid(&mut self) {
        self.valid = false;
    }

    fn finish(self) -> (Trajectory, bool) {
        (
            Trajectory::from_states(self.states, self.scenario.params.w_theta),
            self.valid,
        )
    }
}

fn invalid_singleton(state: WorldState) -> (Trajectory, bool) {
    (Trajectory::singleton(state), false)
}

/// One generator rollout. `forced` pins the full context state (the
/// start-conditioned variant); otherwise the context is self-proposed from
/// the seed (with a per-object pose override from the parameters, when set).
pub(super) fn generator_rollout(
    skill: SkillId,
    scenario: &Scenario,
    cfg: &SkillConfig,
    params: &SkillParams,
    forced: Option<&WorldState>,
    seed: u64,
) -> Result<(Trajectory, bool), SkillError> {
    match (&params.detail, skill) {
        (
            ParamDetail::Push {
                object,
                direction,
                distance,
                at,
                ..
            },
            SkillId::Push,
        ) => push_generator(scenario, *object, *direction, *distance, *at, forced, seed),
        (
            ParamDetail::Pick {
                object,
                grasp_angle,
                at,
            },
            SkillId::Pick,
        ) => pick_generator(scenario, cfg, *object, *grasp_angle, *at, forced, seed),
        _ => Err(SkillError::Input(format!(
            "parameters do not match skill {}",
            skill.name()
        ))),
    }
}

fn push_generator(
    scenario: &Scenario,
    object: ObjectId,
    direction: (f64, f64),
    distance: f64,
    at: Option<Pose2>,
    forced: Option<&WorldState>,
    seed: u64,
) -> Result<(Trajectory, bool), SkillError> {
    let ctx = match forced {
        Some(state) => state.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let obj_pose = at.unwrap_or_else(|| sample_object_pose(scenario, object, &mut rng));
            push_context(scenario, object, obj_pose, direction)
        }
    };
    if ctx.grip != Grip::Open || !scenario.is_pushable(object) {
        return Ok(invalid_singleton(ctx));
    }
    let roll = simulate_push(
        scenario,
        &ctx,
        object,
        direction,
        distance,
        seed ^ PUSH_NOISE_SALT,
    )?;
    Ok((roll.trajectory, roll.valid))
}

/// Context for a proposed push: target object at `obj_pose`, every other
/// object at its scenario start pose, gripper staged just behind the contact
/// point.
fn push_context(
    scenario: &Scenario,
    object: ObjectId,
    obj_pose: Pose2,
    direction: (f64, f64),
) -> WorldState {
    let norm = (direction.0 * direction.0 + direction.1 * direction.1)
        .sqrt()
        .max(1e-12);
    let dir = (direction.0 / norm, direction.1 / norm);
    let mut state = scenario.start.clone();
    state.grip = Grip::Open;
    state.object_poses[object.0] = obj_pose;
    let spec = scenario.object(object);
    let boundary = support_point(&spec.shape, &obj_pose, (-dir.0, -dir.1));
    let p = &scenario.params;
    state.gripper = Pose2::new(
        boundary.0 - (p.gripper_radius + 0.02) * dir.0,
        boundary.1 - (p.gripper_radius + 0.02) * dir.1,
        dir.1.atan2(dir.0),
    );
    state
}

fn sample_object_pose(scenario: &Scenario, object: ObjectId, rng: &mut ChaCha8Rng) -> Pose2 {
    let t = &scenario.table;
    let x = rng.gen_range(t.min_x..t.max_x);
    let y = rng.gen_range(t.min_y..t.max_y);
    let theta = match scenario.object(object).shape {
        Shape::Disc { .. } => 0.0,
        Shape::Polygon { .. } => rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    };
    Pose2::new(x, y, theta)
}

fn pick_generator(
    scenario: &Scenario,
    cfg: &SkillConfig,
    object: ObjectId,
    grasp_angle: f64,
    at: Option<Pose2>,
    forced: Option<&WorldState>,
    seed: u64,
) -> Result<(Trajectory, bool), SkillError> {
    let spec = scenario.object(object);
    if !spec.graspable {
        return Err(SkillError::Capability {
            skill: "pick",
            role: "grasp of a non-graspable object",
        });
    }
    // Resolve the context and the grasp geometry.
    let (ctx, geom) = match forced {
        Some(state) => {
            let pose = *state.object_pose(object);
            let geom = grasp_geometry(scenario, cfg, object, &pose, grasp_angle)?;
            (state.clone(), geom)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pose = match at {
                Some(p) => p,
                None => sample_edge_pose(scenario, object, &mut rng),
            };
            let geom = grasp_geometry(scenario, cfg, object, &pose, grasp_angle)?;
            let mut state = scenario.start.clone();
            state.grip = Grip::Open;
            state.object_poses[object.0] = pose;
            // Stage the gripper at the pre-grasp pose so the node's
            // trajectory is entirely the skill's own motion.
            if let Some(g) = &geom {
                state.gripper = g.pre;
            }
            (state, geom)
        }
    };
    if ctx.grip != Grip::Open {
        return Ok(invalid_singleton(ctx));
    }
    let geom = match geom {
        Some(g) if g.score >= cfg.min_grasp_score => g,
        _ => return Ok(invalid_singleton(ctx)),
    };

    let mut b = RolloutBuilder::new(scenario, ctx)?;
    b.move_gripper(geom.pre);
    b.move_gripper(geom.grasp);
    b.set_grip(Grip::Holding(object));
    let rel = b.current().held_transform().unwrap();
    let retract = Pose2::new(
        geom.grasp.x + cfg.retract_dist * geom.outward.0,
        geom.grasp.y + cfg.retract_dist * geom.outward.1,
        geom.grasp.theta,
    );
    b.move_gripper_holding(retract, object, &rel);
    Ok(b.finish())
}

/// Sample an object pose overhanging a random table edge far enough for a
/// side grasp while keeping enough footprint supported.
fn sample_edge_pose(scenario: &Scenario, object: ObjectId, rng: &mut ChaCha8Rng) -> Pose2 {
    let t = &scenario.table;
    let spec = scenario.object(object);
    let theta = match spec.shape {
        Shape::Disc { .. } => 0.0,
        Shape::Polygon { .. } => rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    };
    let edge = rng.gen_range(0..4u32);
    let (outward, along_min, along_max): ((f64, f64), f64, f64) = match edge {
        0 => ((-1.0, 0.0), t.min_y, t.max_y),
        1 => ((1.0, 0.0), t.min_y, t.max_y),
        2 => ((0.0, -1.0), t.min_x, t.max_x),
        _ => ((0.0, 1.0), t.min_x, t.max_x),
    };
    let span = along_max - along_min;
    let along = rng.gen_range(along_min + 0.1 * span..along_max - 0.1 * span);
    let fd = scenario.params.finger_depth;
    let overhang = rng.gen_range(fd + 0.005..fd + 0.06);
    // Boundary extent of the shape along the outward normal at this heading.
    let probe = Pose2::new(0.0, 0.0, theta);
    let sp = support_point(&spec.shape, &probe, outward);
    let extent = sp.0 * outward.0 + sp.1 * outward.1;
    let bound = match edge {
        0 => t.min_x,
        1 => t.max_x,
        2 => t.min_y,
        _ => t.max_y,
    };
    let center_along_normal = bound + (overhang - extent) * (outward.0 + outward.1);
    match edge {
        0 | 1 => Pose2::new(center_along_normal, along, theta),
        _ => Pose2::new(along, center_along_normal, theta),
    }
}

/// One connector rollout from `from` toward `to`.
pub(super) fn connector_rollout(
    skill: SkillId,
    scenario: &Scenario,
    cfg: &SkillConfig,
    from: &WorldState,
    to: &Condition,
    params: &SkillParams,
    seed: u64,
) -> Result<(Trajectory, bool), SkillError> {
    match skill {
        SkillId::Push => push_connector(scenario, cfg, from, to, seed),
        SkillId::Transport => transport_connector(scenario, cfg, from, to, seed),
        SkillId::Rearrange => rearrange_connector(scenario, cfg, from, to, params, seed),
        SkillId::Pick => unreachable!("pick has no connector capability"),
    }
}

/// Objects whose pose differs beyond the matching tolerance between two
/// states (heading ignored for rotationally symmetric shapes).
fn differing_objects(scenario: &Scenario, a: &WorldState, b: &WorldState) -> Vec<ObjectId> {
    let p = &scenario.params;
    let mut out = Vec::new();
    for i in 0..scenario.objects.len() {
        let pa = &a.object_poses[i];
        let pb = &b.object_poses[i];
        let pos_differs =
            (pa.x - pb.x).abs() > p.eps_match_pos || (pa.y - pb.y).abs() > p.eps_match_pos;
        let symmetric = matches!(scenario.objects[i].shape, Shape::Disc { .. });
        let rot_differs = !symmetric
            && crate::se2::angle_diff(pa.theta, pb.theta).abs() > p.eps_match_rot;
        if pos_differs || rot_differs {
            out.push(ObjectId(i));
        }
    }
    out
}

fn pushable_gap(scenario: &Scenario, object: ObjectId, from: &Pose2, to: &Pose2) -> Option<((f64, f64), f64)> {
    if !scenario.is_pushable(object) {
        return None;
    }
    let symmetric = matches!(scenario.object(object).shape, Shape::Disc { .. });
    if !symmetric
        && crate::se2::angle_diff(from.theta, to.theta).abs() > scenario.params.eps_match_rot
    {
        return None; // pushes cannot control heading
    }
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let dist = (dx * dx + dy * dy).sqrt();
    if dist > MAX_PUSH_DISTANCE {
        return None;
    }
    if dist < 1e-12 {
        return Some(((1.0, 0.0), 0.0));
    }
    Some(((dx / dist, dy / dist), dist))
}

fn push_connector(
    scenario: &Scenario,
    cfg: &SkillConfig,
    from: &WorldState,
    to: &Condition,
    seed: u64,
) -> Result<(Trajectory, bool), SkillError> {
    let _ = cfg;
    if from.grip != Grip::Open {
        return Ok(invalid_singleton(from.clone()));
    }
    let mut b = RolloutBuilder::new(scenario, from.clone())?;
    match to {
        Condition::State(ts) => {
            if ts.object_poses.len() != from.object_poses.len() || ts.grip != Grip::Open {
                b.mark_invalid();
                return Ok(b.finish());
            }
            let diff = differing_objects(scenario, from, ts);
            match diff.as_slice() {
                [] => {}
                [o] => {
                    let cur = *from.object_pose(*o);
                    match pushable_gap(scenario, *o, &cur, ts.object_pose(*o)) {
                        Some((dir, dist)) if dist > 1e-12 => {
                            b.push(*o, dir, dist, seed ^ PUSH_NOISE_SALT)?;
                        }
                        Some(_) => {}
                        None => {
                            b.mark_invalid();
                            return Ok(b.finish());
                        }
                    }
                }
                _ => {
                    // A single push moves a single object.
                    b.mark_invalid();
                    return Ok(b.finish());
                }
            }
            b.move_gripper(ts.gripper);
            if !states_match(scenario, b.current(), ts) {
                b.mark_invalid();
            }
        }
        Condition::Goal(goal) => {
            let o = goal.target;
            let cur = *from.object_pose(o);
            let (cx, cy) = goal.region.center();
            let target = Pose2::new(cx, cy, cur.theta);
            match pushable_gap(scenario, o, &cur, &target) {
                Some((dir, dist)) if dist > 1e-12 => {
                    b.push(o, dir, dist, seed ^ PUSH_NOISE_SALT)?;
                }
                Some(_) => {}
                None => {
                    b.mark_invalid();
                    return Ok(b.finish());
                }
            }
            if !goal_satisfied(goal, b.current())? {
                b.mark_invalid();
            }
        }
    }
    Ok(b.finish())
}

fn transport_connector(
    scenario: &Scenario,
    cfg: &SkillConfig,
    from: &WorldState,
    to: &Condition,
    seed: u64,
) -> Result<(Trajectory, bool), SkillError> {
    let _ = cfg;
    let held = match from.grip.held() {
        Some(o) => o,
        None => return Ok(invalid_singleton(from.clone())), // fails if not grasped
    };
    let rel = from.held_transform().unwrap();
    let mut b = RolloutBuilder::new(scenario, from.clone())?;
    match to {
        Condition::State(ts) => {
            if ts.object_poses.len() != from.object_poses.len() {
                b.mark_invalid();
                return Ok(b.finish());
            }
            match ts.grip {
                Grip::Open => {
                    let target_obj = *ts.object_pose(held);
                    let hover = target_obj.compose(&rel.inverse());
                    b.move_gripper_holding(hover, held, &rel);
                    b.set_grip(Grip::Open);
                    b.move_gripper(ts.gripper);
                }
                Grip::Holding(o) if o == held => {
                    b.move_gripper_holding(ts.gripper, held, &rel);
                }
                Grip::Holding(_) => {
                    b.mark_invalid();
                    return Ok(b.finish());
                }
            }
            if !states_match(scenario, b.current(), ts) {
                b.mark_invalid();
            }
        }
        Condition::Goal(goal) => {
            if goal.target != held {
                b.mark_invalid();
                return Ok(b.finish());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let margin = scenario.object(held).shape.bounding_radius() + 0.005;
            let inner = goal.region.shrunk(margin);
            let (tx, ty) = if inner.is_empty() {
                goal.region.center()
            } else {
                (
                    rng.gen_range(inner.min_x..inner.max_x),
                    rng.gen_range(inner.min_y..inner.max_y),
                )
            };
            let cur_obj = *from.object_pose(held);
            let target_obj = Pose2::new(tx, ty, cur_obj.theta);
            let hover = target_obj.compose(&rel.inverse());
            b.move_gripper_holding(hover, held, &rel);
            b.set_grip(Grip::Open);
            if !goal_satisfied(goal, b.current())? {
                b.mark_invalid();
            }
        }
    }
    Ok(b.finish())
}

/// Rearrange: bring every differing object to its target pose, pushing when
/// the gap is push-reachable and falling back to pick-and-place otherwise.
/// The object order is seeded, so batch rollouts explore different orders.
fn rearrange_connector(
    scenario: &Scenario,
    cfg: &SkillConfig,
    from: &WorldState,
    to: &Condition,
    params: &SkillParams,
    seed: u64,
) -> Result<(Trajectory, bool), SkillError> {
    let _ = params;
    if from.grip != Grip::Open {
        return Ok(invalid_singleton(from.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = RolloutBuilder::new(scenario, from.clone())?;
    let (mut tasks, final_check): (Vec<(ObjectId, Pose2)>, Option<&WorldState>) = match to {
        Condition::State(ts) => {
            if ts.object_poses.len() != from.object_poses.len() || ts.grip != Grip::Open {
                b.mark_invalid();
                return Ok(b.finish());
            }
            (
                differing_objects(scenario, from, ts)
                    .into_iter()
                    .map(|o| (o, *ts.object_pose(o)))
                    .collect(),
                Some(ts),
            )
        }
        Condition::Goal(goal) => {
            let (cx, cy) = goal.region.center();
            let cur = from.object_pose(goal.target);
            (vec![(goal.target, Pose2::new(cx, cy, cur.theta))], None)
        }
    };
    // Seeded order exploration.
    for i in (1..tasks.len()).rev() {
        let j = rng.gen_range(0..=i);
        tasks.swap(i, j);
    }
    for (idx, (o, target)) in tasks.iter().enumerate() {
        let cur = *b.current().object_pose(*o);
        let sub_seed = seed
            .wrapping_add(1_000_003u64.wrapping_mul(idx as u64 + 1))
            ^ PUSH_NOISE_SALT;
        if let Some((dir, dist)) = pushable_gap(scenario, *o, &cur, target) {
            if dist > 1e-12 {
                b.push(*o, dir, dist, sub_seed)?;
            }
            continue;
        }
        // Pick-and-place fallback.
        let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let geom = match grasp_geometry(scenario, cfg, *o, &cur, angle)? {
            Some(g) if g.score >= cfg.min_grasp_score => g,
            _ => {
                b.mark_invalid();
                return Ok(b.finish());
            }
        };
        b.move_gripper(geom.pre);
        b.move_gripper(geom.grasp);
        b.set_grip(Grip::Holding(*o));
        let rel = b.current().held_transform().unwrap();
        let hover = target.compose(&rel.inverse());
        b.move_gripper_holding(hover, *o, &rel);
        b.set_grip(Grip::Open);
    }
    match to {
        Condition::State(_) => {
            let ts = final_check.unwrap();
            b.move_gripper(ts.gripper);
            if !states_match(scenario, b.current(), ts) {
                b.mark_invalid();
            }
        }
        Condition::Goal(goal) => {
            if !goal_satisfied(goal, b.current())? {
                b.mark_invalid();
            }
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::MassClass;
    use std::f64::consts::PI;

    fn square_spec(half: f64) -> ObjectSpec {
        ObjectSpec {
            name: "block".into(),
            shape: Shape::Polygon {
                vertices: vec![(-half, -half), (half, -half), (half, half), (-half, half)],
            },
            graspable: true,
            top_graspable: true,
            mass_class: MassClass::Light,
        }
    }

    fn disc_spec(r: f64) -> ObjectSpec {
        ObjectSpec {
            name: "plate".into(),
            shape: Shape::Disc { radius: r },
            graspable: true,
            top_graspable: false,
            mass_class: MassClass::Light,
        }
    }

    #[test]
    fn grasp_score_disc_is_one() {
        let cfg = SkillConfig::default();
        let spec = disc_spec(0.1);
        for k in 0..8 {
            let angle = -PI + 2.0 * PI * (k as f64 + 0.3) / 8.0;
            let s = grasp_score(&spec, &Pose2::new(0.3, 0.2, 0.0), angle, &cfg).unwrap();
            assert!((s - 1.0).abs() < 1e-4, "angle {angle}: score {s}");
        }
    }

    #[test]
    fn grasp_score_square_faces_and_corner() {
        let cfg = SkillConfig::default();
        let spec = square_spec(0.05);
        let pose = Pose2::new(0.5, 0.5, 0.0);
        // Across two parallel faces, closing direction perpendicular to them.
        let s_face = grasp_score(&spec, &pose, 0.0, &cfg).unwrap();
        assert!((s_face - 1.0).abs() < 1e-12, "face grasp score {s_face}");
        // Across a corner at 45 degrees: both contact faces at 45 degrees to
        // the closing line.
        let s_corner = grasp_score(&spec, &pose, PI / 4.0, &cfg).unwrap();
        let expected = (2.0f64).sqrt() / 2.0;
        assert!(
            (s_corner - expected).abs() < 1e-12,
            "corner grasp score {s_corner} vs {expected}"
        );
    }

    #[test]
    fn grasp_score_brute_force_oracle_square_corner() {
        // Independent oracle: densely sample the square boundary inside the
        // pad band around both support points and average |n . d_g| directly
        // from the face normals.
        let cfg = SkillConfig::default();
        let spec = square_spec(0.05);
        let pose = Pose2::new(0.0, 0.0, 0.0);
        let angle = PI / 4.0;
        let dg = (angle.cos(), angle.sin());
        // Walk the whole boundary at high resolution.
        let verts = spec.shape.world_vertices(&pose);
        let mut samples = Vec::new();
        for i in 0..verts.len() {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            let d = (b.0 - a.0, b.1 - a.1);
            let len = (d.0 * d.0 + d.1 * d.1).sqrt();
            let n = (d.1 / len, -d.0 / len);
            let steps = 20_000;
            for k in 0..steps {
                let t = (k as f64 + 0.5) / steps as f64;
                let p = (a.0 + t * d.0, a.1 + t * d.1);
                samples.push((p, n));
            }
        }
        let perp = (-dg.1, dg.0);
        // Keep boundary points within the pad band around each support point.
        let mut total = 0.0;
        let mut count = 0;
        for side in [1.0f64, -1.0] {
            let mut extremal = f64::NEG_INFINITY;
            for (p, _) in &samples {
                extremal = extremal.max(side * (p.0 * dg.0 + p.1 * dg.1));
            }
            for (p, n) in &samples {
                let along = side * (p.0 * dg.0 + p.1 * dg.1);
                let off = (p.0 * perp.0 + p.1 * perp.1).abs();
                if off <= cfg.pad_halfwidth && (extremal - along) < 2.0 * cfg.pad_halfwidth {
                    total += (n.0 * dg.0 + n.1 * dg.1).abs();
                    count += 1;
                }
            }
        }
        let oracle = total / count as f64;
        let implemented = grasp_score(&spec, &pose, angle, &cfg).unwrap();
        assert!(
            (oracle - implemented).abs() < 1e-9,
            "oracle {oracle} vs implemented {implemented}"
        );
    }

    #[test]
    fn non_graspable_is_capability_error() {
        let cfg = SkillConfig::default();
        let mut spec = disc_spec(0.1);
        spec.graspable = false;
        assert!(matches!(
            grasp_score(&spec, &Pose2::identity(), 0.0, &cfg),
            Err(SkillError::Capability { .. })
        ));
    }

    #[test]
    fn differing_objects_respects_disc_symmetry() {
        let scenario = crate::skills::tests::test_scenario(false);
        let a = scenario.start.clone();
        let mut b = a.clone();
        b.object_poses[0].theta = 1.0; // plate is a disc: heading is ignored
        assert!(differing_objects(&scenario, &a, &b).is_empty());
        b.object_poses[0].x += 0.05;
        assert_eq!(differing_objects(&scenario, &a, &b), vec![ObjectId(0)]);
    }
}
