//! Skill-centric long-horizon planning over a planar tabletop world.
//!
//! The crate is organized around a directed multigraph of skill trajectories:
//! *generator* skills propose local trajectories from self-chosen context
//! states ("islands of competence"), *connector* skills solve boundary value
//! problems between them, and a statistical oracle decides what to try next.
//! A deterministic quasi-static world model stands in for physics.
//!
//! Modules:
//! - [`se2`]: planar poses and screw-motion interpolation
//! - [`geom`]: shapes, overlap areas, penetration tests
//! - [`world`]: scenarios, world states, validity, distance, push dynamics
//! - [`skills`]: the Push/Pick/Transport/Rearrange skill library
//! - [`graph`]: the mosaic multigraph with search and neighbor queries
//! - [`oracle`]: skill-type gating, bandit skill selection, pair selection
//! - [`planner`]: the main planning loop and plan validation
//! - [`baselines`]: comparison planners sharing the same skills and world

pub mod baselines;
pub mod geom;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod planner;
pub mod se2;
pub mod skills;
pub mod world;

pub use se2::Pose2;
pub use world::{GoalSpec, ObjectId, ObjectSpec, Scenario, Trajectory, WorldState};
