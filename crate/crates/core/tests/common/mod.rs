//! Shared fixtures for the integration tests: a tabletop scenario family
//! mirroring the benchmark layouts.

use mosaic_core::geom::{Rect, Shape};
use mosaic_core::se2::Pose2;
use mosaic_core::world::{
    GoalSpec, Grip, MassClass, ObjectId, ObjectSpec, Scenario, WorldParams, WorldState,
};

pub fn plate(r: f64) -> ObjectSpec {
    ObjectSpec {
        name: "plate".into(),
        shape: Shape::Disc { radius: r },
        graspable: true,
        top_graspable: false,
        mass_class: MassClass::Light,
    }
}

/// Plate deep on the table: no feasible side grasp until it is pushed to an
/// edge.
pub fn transport_scenario(noise: bool) -> Scenario {
    let sigma = if noise { (0.01, 0.05) } else { (0.0, 0.0) };
    Scenario {
        table: Rect::new(0.0, 0.0, 1.2, 0.8),
        bin: Rect::new(1.3, 0.25, 1.6, 0.55),
        static_obstacles: vec![],
        objects: vec![plate(0.1)],
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
            base: (0.8, 0.4),
            r_max: 1.2,
            ..WorldParams::default()
        },
    }
}
