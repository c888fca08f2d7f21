//! Behavioral checks of the skill library over the world model.

mod common;

use common::transport_scenario;
use mosaic_core::se2::Pose2;
use mosaic_core::skills::{
    invoke_connector, invoke_generator, Condition, ParamDetail, SkillConfig, SkillId, SkillParams,
};
use mosaic_core::world::{states_match, Grip, ObjectId};

fn pick_params(seed: u64, at: Option<Pose2>) -> SkillParams {
    SkillParams {
        seed,
        detail: ParamDetail::Pick {
            object: ObjectId(0),
            grasp_angle: 0.0,
            at,
        },
    }
}

fn push_params(seed: u64, direction: (f64, f64), distance: f64) -> SkillParams {
    SkillParams {
        seed,
        detail: ParamDetail::Push {
            object: ObjectId(0),
            direction,
            distance,
            at: None,
            target: None,
        },
    }
}

#[test]
fn pick_succeeds_at_edge_and_fails_mid_table() {
    let scenario = transport_scenario(false);
    let cfg = SkillConfig::default();
    // Plate overhanging the left table edge by 0.05 (>= finger depth 0.02).
    let edge_pose = Pose2::new(0.05, 0.4, 0.0);
    let out = invoke_generator(
        SkillId::Pick,
        &scenario,
        &cfg,
        &pick_params(1, Some(edge_pose)),
        4,
    )
    .unwrap();
    assert!(out.any_valid(), "edge grasp should be feasible");
    let terminal = out.representative().unwrap().last();
    assert_eq!(terminal.grip, Grip::Holding(ObjectId(0)));

    // Plate at the table center: the side grasp is blocked by the tabletop.
    let center_pose = Pose2::new(0.5, 0.4, 0.0);
    let out = invoke_generator(
        SkillId::Pick,
        &scenario,
        &cfg,
        &pick_params(1, Some(center_pose)),
        4,
    )
    .unwrap();
    assert!(!out.any_valid(), "mid-table side grasp must be infeasible");
}

#[test]
fn generators_are_deterministic_and_condition_free() {
    let scenario = transport_scenario(true);
    let cfg = SkillConfig::default();
    let params = push_params(77, (1.0, 0.0), 0.15);
    let a = invoke_generator(SkillId::Push, &scenario, &cfg, &params, 10).unwrap();
    let b = invoke_generator(SkillId::Push, &scenario, &cfg, &params, 10).unwrap();
    assert_eq!(a.valid, b.valid);
    assert_eq!(a.selected, b.selected);
    for (ta, tb) in a.trajectories.iter().zip(&b.trajectories) {
        assert_eq!(ta, tb);
    }
}

#[test]
fn transport_fails_when_not_grasping() {
    let scenario = transport_scenario(false);
    let cfg = SkillConfig::default();
    let params = SkillParams {
        seed: 5,
        detail: ParamDetail::Transport { object: None },
    };
    let out = invoke_connector(
        SkillId::Transport,
        &scenario,
        &cfg,
        &Condition::State(scenario.start.clone()),
        &Condition::Goal(scenario.goal.clone()),
        &params,
        8,
    )
    .unwrap();
    assert!(!out.any_valid(), "transport with an open gripper must fail");
}

#[test]
fn transport_from_grasp_reaches_goal() {
    let scenario = transport_scenario(false);
    let cfg = SkillConfig::default();
    // Grasp the plate at the edge first.
    let edge_pose = Pose2::new(0.05, 0.4, 0.0);
    let pick_out = invoke_generator(
        SkillId::Pick,
        &scenario,
        &cfg,
        &pick_params(1, Some(edge_pose)),
        4,
    )
    .unwrap();
    let holding = pick_out.representative().unwrap().last().clone();
    let params = SkillParams {
        seed: 5,
        detail: ParamDetail::Transport { object: None },
    };
    let out = invoke_connector(
        SkillId::Transport,
        &scenario,
        &cfg,
        &Condition::State(holding.clone()),
        &Condition::Goal(scenario.goal.clone()),
        &params,
        8,
    )
    .unwrap();
    assert!(out.any_valid());
    let traj = out.representative().unwrap();
    // Connector outcomes start exactly at the from state.
    assert_eq!(traj.first(), &holding);
    let end = traj.last();
    assert!(scenario.goal.region.contains(
        end.object_poses[0].x,
        end.object_poses[0].y
    ));
    assert_eq!(end.grip, Grip::Open);
}

#[test]
fn push_connector_respects_reach_limit() {
    let scenario = transport_scenario(false);
    let cfg = SkillConfig::default();
    let params = push_params(3, (1.0, 0.0), 0.1);

    // Target 0.1 m away along a clear corridor: valid.
    let mut near = scenario.start.clone();
    near.object_poses[0].x += 0.1;
    // Park the gripper consistently with the pushed plate.
    let out = invoke_connector(
        SkillId::Push,
        &scenario,
        &cfg,
        &Condition::State(scenario.start.clone()),
        &Condition::State(near.clone()),
        &params,
        8,
    )
    .unwrap();
    assert!(out.any_valid(), "0.1 m push along a clear corridor");
    let traj = out.representative().unwrap();
    assert_eq!(traj.first(), &scenario.start);
    assert!(states_match(&scenario, traj.last(), &near));

    // Target 0.4 m away: beyond the per-push limit, every rollout invalid.
    let mut far = scenario.start.clone();
    far.object_poses[0].x += 0.4;
    let out = invoke_connector(
        SkillId::Push,
        &scenario,
        &cfg,
        &Condition::State(scenario.start.clone()),
        &Condition::State(far),
        &params,
        8,
    )
    .unwrap();
    assert!(!out.any_valid(), "0.4 m exceeds the push limit");
}

#[test]
fn rearrange_moves_two_objects() {
    let mut scenario = transport_scenario(false);
    let mut can = common::plate(0.04);
    can.name = "can".into();
    can.top_graspable = true;
    scenario.objects.push(can);
    scenario.start.object_poses.push(Pose2::new(0.9, 0.6, 0.0));
    scenario.params.sigma_pos = 0.0;
    scenario.params.sigma_rot = 0.0;

    let mut target = scenario.start.clone();
    target.object_poses[0].x += 0.12; // plate: push-reachable
    target.object_poses[1].y -= 0.2; // can: push-reachable
    target.gripper = Pose2::new(0.6, 0.6, 0.0);

    let params = SkillParams {
        seed: 21,
        detail: ParamDetail::Rearrange,
    };
    let out = invoke_connector(
        SkillId::Rearrange,
        &scenario,
        &cfg_default(),
        &Condition::State(scenario.start.clone()),
        &Condition::State(target.clone()),
        &params,
        8,
    )
    .unwrap();
    assert!(out.any_valid(), "two-object rearrange should succeed");
    let traj = out.representative().unwrap();
    assert!(states_match(&scenario, traj.last(), &target));
}

fn cfg_default() -> SkillConfig {
    SkillConfig {
        library: vec![
            SkillId::Push,
            SkillId::Pick,
            SkillId::Transport,
            SkillId::Rearrange,
        ],
        ..SkillConfig::default()
    }
}
