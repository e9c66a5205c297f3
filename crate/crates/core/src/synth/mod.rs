//! Controller synthesis: scenario specifications become explicit GR(1)
//! games over deterministic pattern automata and world rules; winning
//! strategies become minimized Mealy machines.

mod automaton;
mod game;
mod gr1;
mod mealy;
mod monolithic;
mod transition;
mod verify;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

pub use automaton::DetAutomaton;
pub use game::{GameStructure, Role};
pub use gr1::{cpre, extract_mealy, solve, Gr1Solution};
pub use mealy::{MachineFormatError, MealyMachine};
pub use monolithic::{build_monolithic, synthesize_monolithic, ACTIVE_ATOM};
pub use transition::{location_valuation, synth_transition_controllers, PairMode, TransitionControllerSet};
pub use verify::realizes;

use crate::cgg::MissionScenario;
use crate::contracts::Spec;
use crate::ltl::{Atom, AtomKind, Formula, Invariant, LtlError};
use crate::patterns::{Liveness, PatternKind};
use crate::world::World;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error("specification outside the synthesis fragment: {0}")]
    OutOfFragment(String),
    #[error("scenario {scenario} is unrealizable{}", input.as_ref().map(|i| format!("; environment wins by playing {i}")).unwrap_or_default())]
    Unrealizable { scenario: String, input: Option<String> },
    #[error("no path from {from} to {to}")]
    Unreachable { from: String, to: String },
    #[error("region annotation failed: {0}")]
    Region(String),
}

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub max_arena_states: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { max_arena_states: 2_000_000 }
    }
}

/// Whether `f` is syntactically safe: its negation normal form uses no
/// strong until.
pub fn is_safety(f: &Formula) -> bool {
    fn go(f: &Formula, pos: bool) -> bool {
        use Formula::*;
        match f {
            True | False | Atom(_) => true,
            Not(a) => go(a, !pos),
            And(a, b) | Or(a, b) => go(a, pos) && go(b, pos),
            Implies(a, b) => go(a, !pos) && go(b, pos),
            Iff(a, b) => go(a, pos) && go(a, !pos) && go(b, pos) && go(b, !pos),
            Next(a) => go(a, pos),
            Until(a, b) => !pos && go(a, pos) && go(b, pos),
            WeakUntil(a, b) => pos && go(a, pos) && go(b, pos),
            Globally(a) => pos && go(a, pos),
            Eventually(a) => !pos && go(a, pos),
        }
    }
    go(f, true)
}

/// Classifies a formula as a liveness item over propositional arguments.
fn as_liveness(f: &Formula) -> Option<Liveness> {
    use Formula::*;
    match f {
        Globally(a) => match &**a {
            Eventually(p) if p.is_propositional() => Some(Liveness::Recurrence((**p).clone())),
            Implies(t, r) if t.is_propositional() => match &**r {
                Eventually(r) if r.is_propositional() => Some(Liveness::Response((**t).clone(), (**r).clone())),
                _ => None,
            },
            _ => None,
        },
        Eventually(p) if p.is_propositional() => Some(Liveness::Eventually((**p).clone())),
        _ => None,
    }
}

/// Safety formula and liveness items of one specification item.
pub fn decompose(spec: &Spec) -> Result<(Formula, Vec<Liveness>), SynthError> {
    match spec {
        Spec::Pattern(p) => {
            let t = p.template();
            Ok((t.safety, t.liveness))
        }
        Spec::Raw(f) => {
            let mut safety = Vec::new();
            let mut live = Vec::new();
            for c in f.conjuncts() {
                if is_safety(&c) {
                    safety.push(c);
                } else if let Some(l) = as_liveness(&c) {
                    live.push(l);
                } else {
                    return Err(SynthError::OutOfFragment(c.to_string()));
                }
            }
            Ok((Formula::conj_simp(safety), live))
        }
    }
}

/// The recurrence atom set of an assumption list, if every assumption is
/// of the form `G F p` with `p` propositional.
fn recurrence_assumptions(specs: &[Spec]) -> Option<Vec<Formula>> {
    specs
        .iter()
        .map(|s| match s {
            Spec::Pattern(p) if p.kind == PatternKind::AlwaysEventually => {
                Some(Formula::atom(&p.args[0]))
            }
            Spec::Raw(f) => match as_liveness(f)? {
                Liveness::Recurrence(p) => Some(p),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

/// Input atoms (sensors mentioned by the scenario, declaration order) and
/// output atoms (all locations and actions of the world, then any internal
/// atoms of the scenario).
fn interface(world: &World, mentioned: &BTreeSet<Atom>) -> Result<(Vec<Atom>, Vec<Atom>), SynthError> {
    if let Some(c) = mentioned.iter().find(|a| a.kind() == AtomKind::Context) {
        return Err(SynthError::OutOfFragment(format!("context atom {c} inside a scenario specification")));
    }
    let inputs: Vec<Atom> = world.typeset.atoms().iter().filter(|a| a.kind().is_input() && mentioned.contains(a)).cloned().collect();
    let outputs: Vec<Atom> = world
        .typeset
        .atoms()
        .iter()
        .filter(|a| matches!(a.kind(), AtomKind::Location | AtomKind::Action))
        .cloned()
        .chain(mentioned.iter().filter(|a| a.kind() == AtomKind::Internal).cloned())
        .collect();
    Ok((inputs, outputs))
}

/// Rule automata and letter filter for the given arena atoms.
fn world_constraints(world: &World, atoms: &BTreeSet<Atom>) -> Result<(Invariant, Vec<DetAutomaton>), SynthError> {
    let rules = world.rules().restricted_to(atoms);
    let all: Vec<Formula> = rules.all().cloned().collect();
    let (inv, rest) = Invariant::split(&all)?;
    let mut automata = Vec::new();
    if !rest.is_empty() {
        let f = Formula::conj_simp(rest);
        if !is_safety(&f) {
            return Err(SynthError::OutOfFragment(format!("world rule {f}")));
        }
        // The arena already filters letters by the invariant, so the rule
        // automaton may assume the part of it over its own atoms.
        let own = f.atoms();
        let local: Vec<Formula> = all
            .iter()
            .filter_map(|r| match r {
                Formula::Globally(b) if b.is_propositional() && b.atoms().is_subset(&own) => Some((**b).clone()),
                _ => None,
            })
            .collect();
        automata.push(DetAutomaton::safety_within("rules", &f, &Invariant::new(&local)?)?);
    }
    Ok((inv, automata))
}

/// Builds the game for one scenario. Every safety part is enforced
/// unconditionally. The environment justice comes from recurrence
/// assumptions and is only relied upon when every liveness guarantee is
/// owed under the same nonempty assumption set.
pub fn compile_spec(scenario: &MissionScenario, world: &World, cfg: &SynthConfig) -> Result<GameStructure, SynthError> {
    let mut automata: Vec<(DetAutomaton, Role)> = Vec::new();
    let mut mentioned: BTreeSet<Atom> = BTreeSet::new();
    let mut sys_live: Vec<Liveness> = Vec::new();
    let mut env_live: Vec<Formula> = Vec::new();
    let mut conditional: Option<bool> = None;
    let mut common: Option<Vec<Formula>> = None;
    for (k, ob) in scenario.obligations.iter().enumerate() {
        let assumed = recurrence_assumptions(&ob.assumptions);
        for a in assumed.iter().flatten() {
            mentioned.extend(a.atoms());
            if !env_live.contains(a) {
                env_live.push(a.clone());
            }
        }
        for (g, spec) in ob.guarantees.iter().enumerate() {
            let (safety, live) = decompose(spec)?;
            mentioned.extend(safety.atoms());
            if safety != Formula::True {
                automata.push((DetAutomaton::safety(format!("{}.{k}.{g}", scenario.name), &safety)?, Role::SysSafety));
            }
            if !live.is_empty() {
                let this = match &assumed {
                    Some(a) if !a.is_empty() => common.get_or_insert_with(|| a.clone()) == a,
                    _ => false,
                };
                conditional = Some(conditional.unwrap_or(true) && this);
            }
            for l in live {
                if !sys_live.contains(&l) {
                    sys_live.push(l);
                }
            }
        }
    }
    for l in &sys_live {
        mentioned.extend(l.to_formula().atoms());
    }
    let use_assumptions = conditional.unwrap_or(false) && common.as_ref().is_some_and(|c| c.len() == env_live.len());
    let (inputs, outputs) = interface(world, &mentioned)?;
    let arena_atoms: BTreeSet<Atom> = inputs.iter().chain(&outputs).cloned().collect();
    let (inv, rule_automata) = world_constraints(world, &arena_atoms)?;
    automata.extend(rule_automata.into_iter().map(|d| (d, Role::SysSafety)));
    for (i, l) in sys_live.iter().enumerate() {
        automata.push((DetAutomaton::liveness(format!("live{i}"), l)?, Role::SysJustice));
    }
    for (i, p) in env_live.iter().enumerate() {
        automata.push((DetAutomaton::liveness(format!("assume{i}"), &Liveness::Recurrence(p.clone()))?, Role::EnvJustice));
    }
    Ok(GameStructure::build(inputs, outputs, &inv, automata, use_assumptions, cfg.max_arena_states)?)
}

/// A synthesized scenario controller with size and timing figures.
#[derive(Debug, Clone)]
pub struct ScenarioController {
    pub scenario: String,
    pub context: Atom,
    pub machine: MealyMachine,
    pub unminimized_states: usize,
    pub arena_states: usize,
    pub arena_edges: usize,
    pub time: Duration,
}

/// Compiles, solves and extracts a minimized controller for `scenario`.
pub fn synthesize(scenario: &MissionScenario, world: &World, cfg: &SynthConfig) -> Result<ScenarioController, SynthError> {
    let start = Instant::now();
    let game = compile_spec(scenario, world, cfg)?;
    let sol = solve(&game);
    if !sol.is_winning(game.initial) {
        let input = sol.losing_input(&game).map(|v| {
            let names: Vec<String> = game
                .inputs
                .iter()
                .enumerate()
                .map(|(i, a)| if v >> i & 1 == 1 { a.to_string() } else { format!("!{a}") })
                .collect();
            if names.is_empty() { "-".to_string() } else { names.join(" ") }
        });
        return Err(SynthError::Unrealizable { scenario: scenario.name.clone(), input });
    }
    let machine = extract_mealy(&game, &sol, &format!("lambda_{}", scenario.context), &world.typeset.adjacency_graph())?;
    let minimized = machine.minimize();
    Ok(ScenarioController {
        scenario: scenario.name.clone(),
        context: scenario.context.clone(),
        unminimized_states: machine.num_states(),
        machine: minimized,
        arena_states: game.num_states(),
        arena_edges: game.num_edges(),
        time: start.elapsed(),
    })
}

/// Full soundness check of a scenario controller: the machine satisfies the
/// scenario's specification and every world rule over its atoms.
pub fn check_controller(m: &MealyMachine, scenario: &MissionScenario, world: &World) -> Result<bool, LtlError> {
    if !realizes(m, &scenario.gamma)? {
        return Ok(false);
    }
    let atoms: BTreeSet<Atom> = m.inputs.iter().chain(&m.outputs).cloned().collect();
    for r in world.rules().restricted_to(&atoms).all() {
        if !realizes(m, r)? {
            return Ok(false);
        }
    }
    Ok(true)
}
