//! Quasi-static push dynamics.
//!
//! The gripper approaches the object in a straight line to the boundary
//! point opposite the push direction, then gripper and object translate
//! together. The object stops instantly when the gripper stops (no inertia),
//! and the final object pose receives seeded Gaussian noise. Any intermediate
//! state that fails validity marks the whole rollout invalid.

use super::{
    is_valid_state, is_valid_state_moved, Entity, ObjectId, Scenario, Trajectory, WorldError,
    WorldState,
};
use crate::geom::support_point;
use crate::se2::{interpolate_screw, normalize_angle, Pose2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pushes are limited to 25 cm per invocation.
pub const MAX_PUSH_DISTANCE: f64 = 0.25;

/// One simulated push: the sampled trajectory plus whether every state along
/// it passed validity.
#[derive(Debug, Clone)]
pub struct PushRollout {
    pub trajectory: Trajectory,
    pub valid: bool,
}

/// Standard normal draw via Box-Muller; deterministic for a given rng state.
pub(crate) fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Simulate pushing `object` along the unit vector `direction` by `distance`
/// meters from `state`, with noise drawn from `seed`.
pub fn simulate_push(
    scenario: &Scenario,
    state: &WorldState,
    object: ObjectId,
    direction: (f64, f64),
    distance: f64,
    seed: u64,
) -> Result<PushRollout, WorldError> {
    if !(distance > 0.0 && distance <= MAX_PUSH_DISTANCE) {
        return Err(WorldError::BadParameter(format!(
            "push distance {distance} outside (0, {MAX_PUSH_DISTANCE}]"
        )));
    }
    let norm = (direction.0 * direction.0 + direction.1 * direction.1).sqrt();
    if norm < 1e-12 {
        return Err(WorldError::BadParameter("zero push direction".into()));
    }
    let dir = (direction.0 / norm, direction.1 / norm);
    if object.0 >= scenario.objects.len() {
        return Err(WorldError::UnknownObject(object.0));
    }
    if state.grip != super::Grip::Open {
        return Err(WorldError::Precondition(
            "push requires an open gripper".into(),
        ));
    }
    if !scenario.is_pushable(object) {
        return Err(WorldError::Precondition(format!(
            "object {} is too heavy to push",
            scenario.object(object).name
        )));
    }

    let p = &scenario.params;
    let spec = scenario.object(object);
    let obj_pose = *state.object_pose(object);

    // Gripper contact center: just touching the boundary point opposite the
    // push direction.
    let boundary = support_point(&spec.shape, &obj_pose, (-dir.0, -dir.1));
    let contact = Pose2::new(
        boundary.0 - p.gripper_radius * dir.0,
        boundary.1 - p.gripper_radius * dir.1,
        dir.1.atan2(dir.0),
    );

    let mut states = vec![state.clone()];
    let mut valid = is_valid_state(scenario, state)?;

    // Approach: gripper alone, straight screw motion to the contact pose.
    let approach_len = state.gripper.position_dist(&contact);
    let approach_steps = ((approach_len / p.arc_step).ceil() as usize).max(1);
    for i in 1..=approach_steps {
        let s = i as f64 / approach_steps as f64;
        let mut next = states.last().unwrap().clone();
        next.gripper = interpolate_screw(&state.gripper, &contact, s);
        if valid && !is_valid_state_moved(scenario, &next, &[Entity::Gripper]) {
            valid = false;
        }
        states.push(next);
    }

    // Push: gripper and object translate together.
    let push_steps = ((distance / p.arc_step).ceil() as usize).max(1);
    let moved = [Entity::Gripper, Entity::Object(object)];
    for i in 1..=push_steps {
        let s = distance * i as f64 / push_steps as f64;
        let mut next = states.last().unwrap().clone();
        next.gripper = Pose2::new(contact.x + s * dir.0, contact.y + s * dir.1, contact.theta);
        next.object_poses[object.0] = Pose2::new(
            obj_pose.x + s * dir.0,
            obj_pose.y + s * dir.1,
            obj_pose.theta,
        );
        if valid && !is_valid_state_moved(scenario, &next, &moved) {
            valid = false;
        }
        states.push(next);
    }

    // Fold the final-pose noise into the last sample.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dx = p.sigma_pos * gauss(&mut rng);
    let dy = p.sigma_pos * gauss(&mut rng);
    let dt = p.sigma_rot * gauss(&mut rng);
    {
        let last = states.last_mut().unwrap();
        let pose = last.object_poses[object.0];
        last.object_poses[object.0] = Pose2::new(
            pose.x + dx,
            pose.y + dy,
            normalize_angle(pose.theta + dt),
        );
    }
    if valid && !is_valid_state_moved(scenario, states.last().unwrap(), &[Entity::Object(object)])
    {
        valid = false;
    }

    Ok(PushRollout {
        trajectory: Trajectory::from_states(states, p.w_theta),
        valid,
    })
}
