//! Shortest-path controllers that move the robot between regions while the
//! active scenario changes.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph;
use crate::ltl::Atom;
use crate::synth::mealy::MealyMachine;
use crate::synth::SynthError;
use crate::world::World;

/// Which (source, destination) pairs get a controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Every region of one scenario to every region of another, for each
    /// ordered pair of distinct scenarios.
    #[default]
    CrossScenario,
    /// Every ordered pair over the union of scenario regions, including a
    /// region with itself.
    AllOrdered,
}

#[derive(Debug, Clone)]
pub struct TransitionControllerSet {
    pub machines: Vec<MealyMachine>,
    /// Region sequence of each machine, starting at the region it leaves.
    /// Shared machines list the first source they were built for.
    pub paths: Vec<Vec<Atom>>,
    pub pairs: BTreeMap<(Atom, Atom), usize>,
    pub t_trans: u32,
    /// Set when the hub reduction applied.
    pub hub: Option<Atom>,
}

impl TransitionControllerSet {
    pub fn lookup(&self, from: &Atom, to: &Atom) -> Option<&MealyMachine> {
        self.pairs.get(&(from.clone(), to.clone())).map(|&i| &self.machines[i])
    }

    pub fn len(&self) -> usize {
        self.machines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty()
    }

    /// Name of the activation atom for a machine.
    pub fn activation_name(&self, index: usize) -> String {
        format!("a_{}", self.machines[index].name)
    }
}

/// Output valuation placing the robot in `loc`, with its abstract regions.
pub fn location_valuation(world: &World, outputs: &[Atom], loc: &Atom) -> u64 {
    let anc = world.typeset.ancestors(loc);
    outputs
        .iter()
        .enumerate()
        .filter(|(_, a)| *a == loc || anc.contains(a))
        .fold(0, |v, (i, _)| v | 1 << i)
}

/// A machine with no inputs that emits `steps` in order and then idles in
/// its terminal state at the last location. `from` is the region it starts in.
fn path_machine(world: &World, name: String, from: &Atom, steps: &[Atom]) -> MealyMachine {
    let outputs = world.locations();
    let len = steps.len();
    let mut table = Vec::with_capacity(len + 1);
    for (k, step) in steps.iter().enumerate() {
        table.push(vec![(location_valuation(world, &outputs, step), k + 1)]);
    }
    let last = steps.last().unwrap_or(from);
    table.push(vec![(location_valuation(world, &outputs, last), len)]);
    let regions = std::iter::once(from).chain(steps).map(|a| Some(a.clone())).collect();
    MealyMachine { name, inputs: Vec::new(), outputs, initial: 0, terminal: Some(len), table, regions }
}

/// A location adjacent to every other leaf location.
fn find_hub(adj: &BTreeMap<Atom, BTreeSet<Atom>>) -> Option<Atom> {
    adj.iter().find(|(h, n)| adj.keys().all(|l| l == *h || n.contains(l))).map(|(h, _)| h.clone())
}

/// Builds BFS-shortest-path controllers for the pairs required by
/// `region_sets` (one set per scenario). With `optimize`, and when some
/// location is adjacent to all others, every pair is served by controllers
/// that only reach that hub; the incoming scenario controller can take any
/// first step from there.
pub fn synth_transition_controllers(
    world: &World,
    region_sets: &[BTreeSet<Atom>],
    mode: PairMode,
    optimize: bool,
) -> Result<TransitionControllerSet, SynthError> {
    let adj = world.typeset.adjacency_graph();
    let index: BTreeMap<&Atom, usize> = adj.keys().enumerate().map(|(i, a)| (a, i)).collect();
    let nodes: Vec<&Atom> = adj.keys().collect();
    let succ: Vec<Vec<usize>> =
        adj.values().map(|n| n.iter().filter_map(|b| index.get(b).copied()).collect()).collect();
    let mut pairs_needed: BTreeSet<(Atom, Atom)> = BTreeSet::new();
    match mode {
        PairMode::CrossScenario => {
            for (i, a) in region_sets.iter().enumerate() {
                for (j, b) in region_sets.iter().enumerate() {
                    if i != j {
                        for s in a {
                            for d in b {
                                pairs_needed.insert((s.clone(), d.clone()));
                            }
                        }
                    }
                }
            }
        }
        PairMode::AllOrdered => {
            let all: BTreeSet<&Atom> = region_sets.iter().flatten().collect();
            for s in &all {
                for d in &all {
                    pairs_needed.insert(((*s).clone(), (*d).clone()));
                }
            }
        }
    }
    let hub = if optimize { find_hub(&adj) } else { None };
    let shortest = |from: &Atom, to: &Atom| -> Result<Vec<Atom>, SynthError> {
        let unreachable = || SynthError::Unreachable { from: from.name().to_string(), to: to.name().to_string() };
        let (&s, &d) = (index.get(from).ok_or_else(unreachable)?, index.get(to).ok_or_else(unreachable)?);
        let path = graph::bfs_path(&succ, s, false, |v| v == d, |_| true).ok_or_else(unreachable)?;
        Ok(path.into_iter().map(|i| nodes[i].clone()).collect())
    };
    let mut set = TransitionControllerSet {
        machines: Vec::new(),
        paths: Vec::new(),
        pairs: BTreeMap::new(),
        t_trans: 0,
        hub: hub.clone(),
    };
    let mut by_steps: BTreeMap<Vec<Atom>, usize> = BTreeMap::new();
    for (s, d) in pairs_needed {
        let target = hub.as_ref().unwrap_or(&d);
        let path = shortest(&s, target)?;
        // Hub controllers are shared by every source that emits the same
        // steps; otherwise each pair keeps its own controller.
        let key = if hub.is_some() && path.len() > 1 { path[1..].to_vec() } else { vec![s.clone(), d.clone()] };
        let ix = match by_steps.get(&key) {
            Some(&ix) => ix,
            None => {
                let name = if hub.is_some() && path.len() > 1 {
                    let steps: Vec<&str> = path[1..].iter().map(|a| a.name()).collect();
                    format!("k_{}", steps.join("_"))
                } else {
                    format!("k_{}_{}", s.name(), target.name())
                };
                set.machines.push(path_machine(world, name, &s, &path[1..]));
                set.t_trans = set.t_trans.max(path.len() as u32 - 1);
                set.paths.push(path);
                by_steps.insert(key, set.machines.len() - 1);
                set.machines.len() - 1
            }
        };
        set.pairs.insert((s, d), ix);
    }
    Ok(set)
}
