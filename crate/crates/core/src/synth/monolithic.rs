//! A single game for the whole mission, with the context, the active signal
//! and every scenario's obligations in one arena. Used to compare against
//! modular synthesis.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::cgg::MissionScenario;
use crate::ltl::{Atom, AtomKind, Formula};
use crate::patterns::Liveness;
use crate::synth::automaton::DetAutomaton;
use crate::synth::game::{GameStructure, Role};
use crate::synth::gr1::{extract_mealy, solve};
use crate::synth::{decompose, interface, world_constraints, ScenarioController, SynthConfig, SynthError};
use crate::world::World;

/// Output the robot raises while a scenario controller is in charge.
pub const ACTIVE_ATOM: &str = "active";

fn gate_liveness(l: &Liveness, c: &Formula) -> Liveness {
    let g = |p: &Formula| Formula::and(p.clone(), c.clone());
    match l {
        Liveness::Recurrence(p) => Liveness::Recurrence(g(p)),
        Liveness::Eventually(p) => Liveness::Eventually(g(p)),
        Liveness::Response(t, r) => Liveness::Response(g(t), g(r)),
    }
}

/// Index of the single true context in a valuation over `n` context bits.
fn which(v: u64, n: usize) -> Option<usize> {
    ((v & ((1 << n) - 1)).count_ones() == 1).then(|| v.trailing_zeros() as usize)
}

/// Builds the monolithic game. Each scenario's automata advance only on
/// steps where its context holds and the robot is active, which is the
/// projection semantics the modular approach is checked against. The
/// environment keeps each context for at least `t_context` steps and visits
/// every context infinitely often; the robot may stay inactive for at most
/// `t_trans` steps after a switch.
pub fn build_monolithic(
    scenarios: &[MissionScenario],
    world: &World,
    t_trans: u32,
    cfg: &SynthConfig,
) -> Result<GameStructure, SynthError> {
    if scenarios.is_empty() {
        return Ok(GameStructure::build(
            Vec::new(),
            Vec::new(),
            &crate::ltl::Invariant::trivial(),
            Vec::new(),
            false,
            1,
        )?);
    }
    let active = Atom::new(ACTIVE_ATOM, AtomKind::Internal);
    let contexts = world.contexts.clone();
    let nc = contexts.len();
    let mut automata: Vec<(DetAutomaton, Role)> = Vec::new();
    let mut mentioned: BTreeSet<Atom> = BTreeSet::from([active.clone()]);
    for sc in scenarios {
        let c = Formula::and(Formula::atom(&sc.context), Formula::atom(&active));
        let mut live: Vec<Liveness> = Vec::new();
        for (k, ob) in sc.obligations.iter().enumerate() {
            for (g, spec) in ob.guarantees.iter().enumerate() {
                let (safety, l) = decompose(spec)?;
                mentioned.extend(safety.atoms());
                if safety != Formula::True {
                    let d = DetAutomaton::safety(format!("{}.{k}.{g}", sc.name), &safety)?;
                    automata.push((d.gated(&c)?, Role::SysSafety));
                }
                for item in l {
                    if !live.contains(&item) {
                        live.push(item);
                    }
                }
            }
        }
        for (i, l) in live.iter().enumerate() {
            let gated = gate_liveness(l, &c);
            mentioned.extend(gated.to_formula().atoms());
            automata.push((DetAutomaton::liveness(format!("{}.live{i}", sc.name), &gated)?, Role::SysJustice));
        }
    }
    // `interface` rejects context atoms; they are inputs here.
    let scenario_atoms: BTreeSet<Atom> = mentioned.iter().filter(|a| a.kind() != AtomKind::Context).cloned().collect();
    let (sensors, outputs) = interface(world, &scenario_atoms)?;
    let inputs: Vec<Atom> = contexts.iter().cloned().chain(sensors).collect();
    let arena_atoms: BTreeSet<Atom> = inputs.iter().chain(&outputs).cloned().collect();
    let (inv, rules) = world_constraints(world, &arena_atoms)?;
    automata.extend(rules.into_iter().map(|d| (d, Role::SysSafety)));

    // Minimum dwell: state (current context, steps spent in it, capped).
    let t_context = world.t_context.max(1);
    let dwell = DetAutomaton::explore(
        "dwell",
        contexts.clone(),
        (usize::MAX, 0u32),
        |&(cur, n), v| {
            let c = which(v, nc)?;
            if cur == usize::MAX || c != cur && n >= t_context {
                Some((c, 1))
            } else if c == cur {
                Some((c, (n + 1).min(t_context)))
            } else {
                None
            }
        },
        None,
    )?;
    automata.push((dwell, Role::EnvSafety));
    for x in &contexts {
        let m = DetAutomaton::liveness(format!("fair_{x}"), &Liveness::Recurrence(Formula::atom(x)))?;
        automata.push((m, Role::EnvJustice));
    }

    // Active signal: after a switch it may stay low for at most t_trans
    // steps; once raised it stays up until the next switch.
    let mut sig_atoms = contexts.clone();
    sig_atoms.push(active.clone());
    let act_bit = 1u64 << nc;
    let signal = DetAutomaton::explore(
        "active_signal",
        sig_atoms,
        (usize::MAX, 0u32, false),
        |&(cur, n, up), v| {
            let c = which(v, nc)?;
            let a = v & act_bit != 0;
            let (n, up) = if c != cur { (1, false) } else { ((n + 1).min(t_trans + 1), up) };
            if up && !a || !a && n > t_trans {
                return None;
            }
            Some((c, n, up || a))
        },
        None,
    )?;
    automata.push((signal, Role::SysSafety));
    Ok(GameStructure::build(inputs, outputs, &inv, automata, true, cfg.max_arena_states)?)
}

/// Builds, solves and extracts a single controller for the whole mission.
pub fn synthesize_monolithic(
    scenarios: &[MissionScenario],
    world: &World,
    t_trans: u32,
    cfg: &SynthConfig,
) -> Result<ScenarioController, SynthError> {
    let start = Instant::now();
    let game = build_monolithic(scenarios, world, t_trans, cfg)?;
    let sol = solve(&game);
    if !sol.is_winning(game.initial) {
        return Err(SynthError::Unrealizable { scenario: "monolithic".into(), input: None });
    }
    let machine = extract_mealy(&game, &sol, "lambda_mono", &world.typeset.adjacency_graph())?;
    let minimized = machine.minimize();
    Ok(ScenarioController {
        scenario: "monolithic".into(),
        context: crate::ltl::Atom::new(ACTIVE_ATOM, AtomKind::Internal),
        unminimized_states: machine.num_states(),
        machine: minimized,
        arena_states: game.num_states(),
        arena_edges: game.num_edges(),
        time: start.elapsed(),
    })
}
