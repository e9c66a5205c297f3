//! Mission files: JSON documents declaring the world, the goals and a run
//! configuration.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::contracts::{Contract, Goal, Spec};
use crate::ltl::{parse, AtomKind, Formula, ParseError};
use crate::patterns::{PatternError, PatternInstance, PatternKind};
use crate::world::{build_typeset, BaseType, MutexMode, TypeDecl, TypeKind, World, WorldError};

/// The running example shipped with the crate.
pub const RUNNING_EXAMPLE: &str = include_str!("../missions/running_example.json");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MissionError {
    #[error("io error reading {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("schema error at line {line}, column {column}: {msg}")]
    Schema { line: usize, column: usize, msg: String },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("mission requires at least one goal")]
    NoGoals,
    #[error("duplicate goal `{0}`")]
    DuplicateGoal(String),
    #[error("goal {goal}: unknown identifier `{name}`")]
    UnknownIdentifier { goal: String, name: String },
    #[error("goal {goal}: {err}")]
    Parse { goal: String, err: ParseError },
    #[error("goal {goal}: {err}")]
    Pattern { goal: String, err: PatternError },
    #[error("goal {goal}: context must be a propositional formula over context atoms")]
    BadContext { goal: String },
    #[error("script refers to unknown {what} `{name}`")]
    Script { what: &'static str, name: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntry {
    pub name: String,
    pub kind: TypeKind,
    #[serde(default)]
    pub mutex_groups: Vec<String>,
    #[serde(default)]
    pub extends: Vec<String>,
    #[serde(default)]
    pub adjacent: Vec<String>,
    /// Inclusive integer range for bounded types.
    #[serde(default)]
    pub range: Option<(i64, i64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSection {
    pub types: Vec<TypeEntry>,
    pub contexts: Vec<String>,
    pub t_context: u32,
    #[serde(default)]
    pub mutex_modes: BTreeMap<String, MutexMode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalEntry {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_context")]
    pub context: String,
    #[serde(default)]
    pub assumptions: Vec<String>,
    #[serde(default)]
    pub guarantees: Vec<String>,
}

fn default_context() -> String {
    "true".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    #[default]
    Script,
    RandomFair,
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "script" => Ok(SchedulerKind::Script),
            "random-fair" => Ok(SchedulerKind::RandomFair),
            _ => Err(format!("unknown scheduler `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextEntry {
    pub tick: usize,
    pub context: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorEntry {
    pub tick: usize,
    #[serde(rename = "true")]
    pub true_sensors: Vec<String>,
}

/// A scripted environment: the requested context holds from its tick until
/// the next entry; sensors are true only at the listed ticks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(default)]
    pub contexts: Vec<ContextEntry>,
    #[serde(default)]
    pub sensors: Vec<SensorEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub scheduler: SchedulerKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub script: Script,
}

fn default_horizon() -> usize {
    100
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { scheduler: SchedulerKind::Script, seed: 0, horizon: default_horizon(), script: Script::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionFile {
    #[serde(default)]
    pub name: String,
    pub world: WorldSection,
    pub goals: Vec<GoalEntry>,
    #[serde(default)]
    pub run: RunSection,
}

/// A validated mission.
#[derive(Debug, Clone)]
pub struct Mission {
    pub name: String,
    pub world: Arc<World>,
    pub goals: Vec<Goal>,
    pub run: RunSection,
}

fn build_world(w: &WorldSection) -> Result<World, MissionError> {
    let decls: Vec<TypeDecl> = w
        .types
        .iter()
        .map(|t| TypeDecl {
            name: t.name.clone(),
            kind: t.kind,
            base: match t.range {
                Some((lo, hi)) => BaseType::Bounded { lo, hi },
                None => BaseType::Boolean,
            },
            mutex_groups: t.mutex_groups.iter().cloned().collect(),
            adjacency: t.adjacent.iter().cloned().collect(),
            parents: t.extends.iter().cloned().collect(),
        })
        .collect();
    let ts = build_typeset(&decls)?;
    let contexts: Vec<&str> = w.contexts.iter().map(String::as_str).collect();
    Ok(World::new(ts, &contexts, w.t_context, w.mutex_modes.clone())?)
}

/// Splits `Name(a, b)` into its parts when `Name` is a catalog pattern.
fn pattern_call(text: &str) -> Option<(PatternKind, Vec<&str>)> {
    let text = text.trim();
    let open = text.find('(')?;
    let inner = text.strip_suffix(')')?.get(open + 1..)?;
    let kind = PatternKind::from_str(text[..open].trim()).ok()?;
    Some((kind, inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()))
}

fn parse_spec(goal: &str, text: &str, world: &World) -> Result<Spec, MissionError> {
    if let Some((kind, args)) = pattern_call(text) {
        let atoms = args
            .iter()
            .map(|a| {
                world.typeset.atom(a).cloned().ok_or_else(|| MissionError::UnknownIdentifier {
                    goal: goal.to_string(),
                    name: a.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let p = PatternInstance::new(kind, atoms)
            .map_err(|err| MissionError::Pattern { goal: goal.to_string(), err })?;
        return Ok(Spec::Pattern(p));
    }
    parse_formula(goal, text, world).map(Spec::Raw)
}

fn parse_formula(goal: &str, text: &str, world: &World) -> Result<Formula, MissionError> {
    parse(text, &world.typeset).map_err(|e| match e {
        crate::ltl::LtlError::UnknownAtom(name) => MissionError::UnknownIdentifier { goal: goal.to_string(), name },
        crate::ltl::LtlError::Parse(err) => MissionError::Parse { goal: goal.to_string(), err },
        other => MissionError::Parse { goal: goal.to_string(), err: ParseError { pos: 0, msg: other.to_string() } },
    })
}

impl Mission {
    pub fn from_json(text: &str) -> Result<Mission, MissionError> {
        let file: MissionFile = serde_json::from_str(text).map_err(|e| MissionError::Schema {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        Mission::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Mission, MissionError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MissionError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Mission::from_json(&text)
    }

    pub fn running_example() -> Mission {
        Mission::from_json(RUNNING_EXAMPLE).expect("bundled mission is valid")
    }

    pub fn from_file(file: MissionFile) -> Result<Mission, MissionError> {
        let world = Arc::new(build_world(&file.world)?);
        if file.goals.is_empty() {
            return Err(MissionError::NoGoals);
        }
        let mut goals: Vec<Goal> = Vec::new();
        for g in &file.goals {
            if goals.iter().any(|x| x.name == g.name) {
                return Err(MissionError::DuplicateGoal(g.name.clone()));
            }
            let context = parse_formula(&g.name, &g.context, &world)?;
            if !context.is_propositional() || context.atoms().iter().any(|a| a.kind() != AtomKind::Context) {
                return Err(MissionError::BadContext { goal: g.name.clone() });
            }
            let assumptions =
                g.assumptions.iter().map(|s| parse_spec(&g.name, s, &world)).collect::<Result<Vec<_>, _>>()?;
            let guarantees =
                g.guarantees.iter().map(|s| parse_spec(&g.name, s, &world)).collect::<Result<Vec<_>, _>>()?;
            goals.push(Goal {
                name: g.name.clone(),
                description: g.description.clone(),
                context,
                contract: Contract::from_specs(assumptions, guarantees),
                controller: None,
                world: Arc::clone(&world),
            });
        }
        for c in &file.run.script.contexts {
            if !world.contexts.iter().any(|x| x.name() == c.context) {
                return Err(MissionError::Script { what: "context", name: c.context.clone() });
            }
        }
        for s in &file.run.script.sensors {
            for n in &s.true_sensors {
                if world.typeset.atom(n).is_none_or(|a| a.kind() != AtomKind::Sensor) {
                    return Err(MissionError::Script { what: "sensor", name: n.clone() });
                }
            }
        }
        Ok(Mission { name: file.name, world, goals, run: file.run })
    }
}
