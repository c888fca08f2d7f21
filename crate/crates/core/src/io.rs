//! Scenario file format: a JSON document mirroring the scenario structure
//! field for field (lengths in meters, angles in radians), with optional
//! `params`, `skills`, and `oracle` sections that fall back to defaults.
//! Objects are referenced by string id in the file and resolved to indices
//! on load.

use crate::geom::{Rect, Shape};
use crate::oracle::OracleConfig;
use crate::se2::Pose2;
use crate::skills::SkillConfig;
use crate::world::{
    GoalSpec, Grip, MassClass, ObjectId, ObjectSpec, Scenario, WorldParams, WorldState,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    File(#[from] std::io::Error),
    #[error("scenario: {0}")]
    Semantic(String),
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub table: Rect,
    pub bin: Rect,
    #[serde(default)]
    pub static_obstacles: Vec<Vec<(f64, f64)>>,
    pub objects: Vec<ObjectEntry>,
    pub start: StateEntry,
    pub goal: GoalEntry,
    #[serde(default)]
    pub params: WorldParams,
    #[serde(default)]
    pub skills: SkillConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub id: String,
    pub shape: Shape,
    pub graspable: bool,
    #[serde(default)]
    pub top_graspable: bool,
    pub mass_class: MassClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateEntry {
    pub gripper: Pose2,
    pub grip: GripEntry,
    pub object_poses: BTreeMap<String, Pose2>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripEntry {
    Open,
    Holding(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalEntry {
    pub target: String,
    pub region: Rect,
}

/// A loaded scenario with its embedded skill and oracle configuration.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub skills: SkillConfig,
    pub oracle: OracleConfig,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<ScenarioFile, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<ScenarioFile, IoError> {
        ScenarioFile::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }

    /// Resolve object names and validate the scenario.
    pub fn build(&self) -> Result<LoadedScenario, IoError> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, o) in self.objects.iter().enumerate() {
            if index.insert(o.id.as_str(), i).is_some() {
                return Err(IoError::Semantic(format!("duplicate object id {}", o.id)));
            }
        }
        let resolve = |name: &str| -> Result<ObjectId, IoError> {
            index
                .get(name)
                .map(|&i| ObjectId(i))
                .ok_or_else(|| IoError::Semantic(format!("unknown object id {name}")))
        };

        let mut poses = vec![None; self.objects.len()];
        for (name, pose) in &self.start.object_poses {
            poses[resolve(name)?.0] = Some(*pose);
        }
        let object_poses: Vec<Pose2> = poses
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                p.ok_or_else(|| {
                    IoError::Semantic(format!("missing start pose for {}", self.objects[i].id))
                })
            })
            .collect::<Result<_, _>>()?;

        let grip = match &self.start.grip {
            GripEntry::Open => Grip::Open,
            GripEntry::Holding(name) => Grip::Holding(resolve(name)?),
        };

        let scenario = Scenario {
            table: self.table,
            bin: self.bin,
            static_obstacles: self.static_obstacles.clone(),
            objects: self
                .objects
                .iter()
                .map(|o| ObjectSpec {
                    name: o.id.clone(),
                    shape: o.shape.clone(),
                    graspable: o.graspable,
                    top_graspable: o.top_graspable,
                    mass_class: o.mass_class,
                })
                .collect(),
            start: WorldState {
                gripper: self.start.gripper,
                grip,
                object_poses,
            },
            goal: GoalSpec {
                target: resolve(&self.goal.target)?,
                region: self.goal.region,
            },
            params: self.params,
        };
        scenario.check()?;
        self.oracle
            .check()
            .map_err(|e| IoError::Semantic(e.to_string()))?;
        Ok(LoadedScenario {
            scenario,
            skills: self.skills.clone(),
            oracle: self.oracle,
        })
    }

    /// Inverse of `build`, for writing generated scenarios to disk.
    pub fn from_parts(
        scenario: &Scenario,
        skills: &SkillConfig,
        oracle: &OracleConfig,
    ) -> ScenarioFile {
        let name_of = |id: ObjectId| scenario.objects[id.0].name.clone();
        ScenarioFile {
            table: scenario.table,
            bin: scenario.bin,
            static_obstacles: scenario.static_obstacles.clone(),
            objects: scenario
                .objects
                .iter()
                .map(|o| ObjectEntry {
                    id: o.name.clone(),
                    shape: o.shape.clone(),
                    graspable: o.graspable,
                    top_graspable: o.top_graspable,
                    mass_class: o.mass_class,
                })
                .collect(),
            start: StateEntry {
                gripper: scenario.start.gripper,
                grip: match scenario.start.grip {
                    Grip::Open => GripEntry::Open,
                    Grip::Holding(id) => GripEntry::Holding(name_of(id)),
                },
                object_poses: scenario
                    .objects
                    .iter()
                    .enumerate()
                    .map(|(i, o)| (o.name.clone(), scenario.start.object_poses[i]))
                    .collect(),
            },
            goal: GoalEntry {
                target: name_of(scenario.goal.target),
                region: scenario.goal.region,
            },
            params: scenario.params,
            skills: skills.clone(),
            oracle: *oracle,
        }
    }
}
