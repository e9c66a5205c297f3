//! Tick-by-tick execution of the orchestration network driving the
//! composed controllers.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ltl::{Atom, AtomKind};
use crate::mission::Script;
use crate::orchestrator::augment::{activation_atom, augment, compose_side_by_side, Composition};
use crate::orchestrator::network::{NetAction, NetEvent, NetState, Network};
use crate::orchestrator::OrchestratorError;
use crate::synth::{MealyMachine, TransitionControllerSet};
use crate::world::World;

/// Task controllers, transition controllers and the network that switches
/// between them.
#[derive(Debug, Clone)]
pub struct Orchestration {
    pub contexts: Vec<Atom>,
    /// Robot inputs shared by the controllers.
    pub sensors: Vec<Atom>,
    pub network: Network,
    pub composition: Composition,
    pub transitions: TransitionControllerSet,
    /// Composition member of each context's task controller.
    task_member: Vec<usize>,
    /// Composition member of each transition controller.
    transition_member: Vec<usize>,
    leaves: BTreeSet<Atom>,
}

/// Wires one task controller per context, in context declaration order,
/// with the transition controllers.
pub fn build_orchestration(
    world: &World,
    tasks: &[(Atom, MealyMachine)],
    transitions: TransitionControllerSet,
) -> Result<Orchestration, OrchestratorError> {
    let network = Network::new(world.contexts.len(), world.t_context, transitions.t_trans)?;
    let mut members = Vec::new();
    for x in &world.contexts {
        let (_, m) = tasks
            .iter()
            .find(|(c, _)| c == x)
            .ok_or_else(|| OrchestratorError::MissingController(x.to_string()))?;
        members.push(augment(m.clone(), activation_atom(x.name()), false)?);
    }
    for m in &transitions.machines {
        members.push(augment(m.clone(), activation_atom(&m.name), true)?);
    }
    let n = world.contexts.len();
    let composition = compose_side_by_side(members)?;
    let sensors = composition.inputs[..composition.inputs.len() - composition.members.len()].to_vec();
    Ok(Orchestration {
        contexts: world.contexts.clone(),
        sensors,
        network,
        composition,
        task_member: (0..n).collect(),
        transition_member: (n..n + transitions.machines.len()).collect(),
        transitions,
        leaves: world.typeset.adjacency_graph().into_keys().collect(),
    })
}

/// Full simulation state; equal states evolve identically under equal
/// inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimState {
    pub net: NetState,
    pub machines: Vec<usize>,
    /// Activation inputs, as composition input bits.
    pub activation: u64,
    /// Leaf location the robot was last sent to.
    pub region: Option<Atom>,
    /// Composition member of the running transition controller.
    pub transit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickRecord {
    pub tick: usize,
    /// Active contexts.
    pub contexts: Vec<Atom>,
    /// Whether a task controller is in charge.
    pub active: bool,
    pub activations: Vec<Atom>,
    pub inputs: Vec<Atom>,
    pub outputs: Vec<Atom>,
    pub events: Vec<String>,
}

impl TickRecord {
    pub fn holds(&self, a: &Atom) -> bool {
        self.inputs.contains(a) || self.outputs.contains(a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub records: Vec<TickRecord>,
    /// For lassos: the records from this tick on repeat forever.
    pub loop_start: Option<usize>,
}

/// What the environment does on a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Directive {
    /// Context to switch to.
    pub command: Option<usize>,
    /// Sensor valuation over [`Orchestration::sensors`].
    pub sensors: u64,
}

pub struct SchedView<'a> {
    pub tick: usize,
    pub net: &'a NetState,
    /// Contexts that may become active now.
    pub eligible: Vec<usize>,
}

pub trait Scheduler {
    fn next(&mut self, view: &SchedView) -> Directive;

    /// Internal state, for schedulers whose future depends only on it.
    fn key(&self) -> Option<Vec<usize>> {
        None
    }
}

/// Replays a mission script.
#[derive(Debug, Clone)]
pub struct ScriptScheduler {
    commands: HashMap<usize, usize>,
    sensors: HashMap<usize, u64>,
}

impl ScriptScheduler {
    pub fn new(script: &Script, orch: &Orchestration) -> Result<Self, OrchestratorError> {
        let mut commands = HashMap::new();
        for c in &script.contexts {
            let i = orch
                .contexts
                .iter()
                .position(|x| x.name() == c.context)
                .ok_or_else(|| OrchestratorError::UnknownName(c.context.clone()))?;
            commands.insert(c.tick, i);
        }
        let mut sensors: HashMap<usize, u64> = HashMap::new();
        for s in &script.sensors {
            for n in &s.true_sensors {
                // Sensors no controller reads do not affect the run.
                if let Some(k) = orch.sensors.iter().position(|x| x.name() == n) {
                    *sensors.entry(s.tick).or_default() |= 1 << k;
                }
            }
        }
        Ok(ScriptScheduler { commands, sensors })
    }
}

impl Scheduler for ScriptScheduler {
    fn next(&mut self, view: &SchedView) -> Directive {
        Directive {
            command: self.commands.get(&view.tick).copied(),
            sensors: self.sensors.get(&view.tick).copied().unwrap_or(0),
        }
    }
}

/// Seeded random environment. Switches to a uniformly chosen eligible
/// context with probability `switch_prob` per tick, and always once a
/// context has been requested for `max_dwell` ticks, so every context is
/// visited infinitely often.
#[derive(Debug, Clone)]
pub struct RandomFair {
    rng: ChaCha8Rng,
    n_sensors: usize,
    pub switch_prob: f64,
    pub sensor_prob: f64,
    pub max_dwell: usize,
    since: usize,
}

impl RandomFair {
    pub fn new(seed: u64, orch: &Orchestration) -> Self {
        RandomFair {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n_sensors: orch.sensors.len(),
            switch_prob: 0.25,
            sensor_prob: 0.3,
            max_dwell: 3 * orch.network.t_context as usize,
            since: 0,
        }
    }
}

impl Scheduler for RandomFair {
    fn next(&mut self, view: &SchedView) -> Directive {
        let mut command = None;
        self.since += 1;
        if !view.eligible.is_empty()
            && (view.net.cur.is_none() || self.since >= self.max_dwell || self.rng.gen_bool(self.switch_prob))
        {
            command = Some(view.eligible[self.rng.gen_range(0..view.eligible.len())]);
            self.since = 0;
        }
        let sensors = (0..self.n_sensors).fold(0u64, |v, k| v | (self.rng.gen_bool(self.sensor_prob) as u64) << k);
        Directive { command, sensors }
    }
}

/// Visits the contexts round robin, requesting the next one once the
/// current has been in place for `dwell` ticks, and cycles through a fixed
/// sensor pattern. Its future depends only on [`Scheduler::key`].
#[derive(Debug, Clone)]
pub struct Periodic {
    pub order: Vec<usize>,
    pub dwell: usize,
    pub sensors: Vec<u64>,
    phase: usize,
    since: usize,
    next: usize,
}

impl Periodic {
    pub fn new(order: Vec<usize>, dwell: usize, sensors: Vec<u64>) -> Self {
        let sensors = if sensors.is_empty() { vec![0] } else { sensors };
        Periodic { order, dwell, sensors, phase: 0, since: 0, next: 0 }
    }

    /// A periodic environment with a random sensor pattern.
    pub fn random(orch: &Orchestration, seed: u64, dwell: usize, period: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pattern =
            (0..period.max(1)).map(|_| (0..orch.sensors.len()).fold(0u64, |v, k| v | (rng.gen_bool(0.3) as u64) << k)).collect();
        Periodic::new((0..orch.contexts.len()).collect(), dwell, pattern)
    }
}

impl Scheduler for Periodic {
    fn next(&mut self, view: &SchedView) -> Directive {
        if view.net.cur == Some(self.order[self.next]) {
            self.next = (self.next + 1) % self.order.len();
            self.since = 0;
        }
        let sensors = self.sensors[self.phase];
        self.phase = (self.phase + 1) % self.sensors.len();
        self.since = (self.since + 1).min(self.dwell);
        let mut command = None;
        let want = self.order[self.next];
        if (view.net.cur.is_none() || self.since >= self.dwell) && view.eligible.contains(&want) {
            command = Some(want);
        }
        Directive { command, sensors }
    }

    fn key(&self) -> Option<Vec<usize>> {
        Some(vec![self.phase, self.since, self.next])
    }
}

impl Orchestration {
    pub fn initial_state(&self) -> SimState {
        SimState {
            net: self.network.initial(),
            machines: self.composition.initial_states(),
            activation: 0,
            region: None,
            transit: None,
        }
    }

    pub fn eligible(&self, st: &SimState) -> Vec<usize> {
        (0..self.contexts.len()).filter(|&i| self.network.can_activate(&st.net, i)).collect()
    }

    fn set_member(&self, st: &mut SimState, member: usize, on: bool) {
        let bit = self.composition.activation_bit(member);
        if on {
            st.activation |= bit;
        } else {
            st.activation &= !bit;
        }
    }

    fn member_name(&self, member: usize) -> &str {
        &self.composition.members[member].base.name
    }

    fn handle(&self, st: &mut SimState, events: &[NetEvent], log: &mut Vec<String>) -> Result<(), OrchestratorError> {
        for ev in events {
            match *ev {
                NetEvent::ContextActive(i) => log.push(format!("context_active({})", self.contexts[i])),
                NetEvent::ContextIdle(i) => log.push(format!("context_idle({})", self.contexts[i])),
                NetEvent::Go(i) => {
                    self.set_member(st, self.task_member[i], true);
                    log.push(format!("activate({})", self.contexts[i]));
                }
                NetEvent::Stop(i) => {
                    self.set_member(st, self.task_member[i], false);
                    log.push(format!("deactivate({})", self.contexts[i]));
                }
                NetEvent::Transit(i, j) => {
                    let from = st.region.clone().ok_or_else(|| OrchestratorError::NoTransition {
                        from: "-".into(),
                        to: self.contexts[j].to_string(),
                    })?;
                    let incoming = &self.composition.members[self.task_member[j]].base;
                    let to = incoming.regions[st.machines[self.task_member[j]]].clone().ok_or_else(|| {
                        OrchestratorError::NoTransition { from: from.to_string(), to: self.contexts[j].to_string() }
                    })?;
                    let k = *self.transitions.pairs.get(&(from.clone(), to.clone())).ok_or_else(|| {
                        OrchestratorError::NoTransition { from: from.to_string(), to: to.to_string() }
                    })?;
                    let m = self.transition_member[k];
                    self.set_member(st, m, true);
                    st.transit = Some(m);
                    log.push(format!(
                        "trans_start({}->{}: {})",
                        self.contexts[i],
                        self.contexts[j],
                        self.member_name(m)
                    ));
                }
                NetEvent::Done(..) => {
                    if let Some(m) = st.transit.take() {
                        self.set_member(st, m, false);
                        log.push(format!("trans_end({})", self.member_name(m)));
                    }
                }
            }
        }
        Ok(())
    }

    /// One tick: the environment's command, the committed steps it causes,
    /// the controllers' reaction, then the passage of time.
    pub fn step(&self, st: &mut SimState, tick: usize, d: Directive) -> Result<TickRecord, OrchestratorError> {
        let mut log = Vec::new();
        if let Some(i) = d.command {
            match self.network.apply(&st.net, NetAction::Activate(i)) {
                Some((net, ev)) => {
                    st.net = net;
                    self.handle(st, &ev, &mut log)?;
                }
                None => log.push(format!("reject({})", self.contexts[i])),
            }
        }
        if let Some(m) = st.transit {
            if self.composition.members[m].base.terminal == Some(st.machines[m]) {
                let (i, j) = st.net.active_transition(self.network.n).expect("transition automaton active");
                let (net, ev) = self.network.apply(&st.net, NetAction::TransDone(i, j)).expect("enabled");
                st.net = net;
                self.handle(st, &ev, &mut log)?;
            }
        }
        let input = d.sensors | st.activation;
        let out = self.composition.react(&mut st.machines, input, tick)?;
        let outputs: Vec<Atom> =
            self.composition.outputs.iter().enumerate().filter(|(i, _)| out >> i & 1 == 1).map(|(_, a)| a.clone()).collect();
        let mut here = outputs.iter().filter(|a| self.leaves.contains(*a));
        if let (Some(r), None) = (here.next(), here.next()) {
            st.region = Some(r.clone());
        }
        let record = TickRecord {
            tick,
            contexts: (0..self.contexts.len()).filter(|&i| st.net.ctx_active[i]).map(|i| self.contexts[i].clone()).collect(),
            active: st.net.s_active.iter().any(|&b| b),
            activations: self
                .composition
                .members
                .iter()
                .enumerate()
                .filter(|(k, _)| st.activation & self.composition.activation_bit(*k) != 0)
                .map(|(_, m)| m.activation.clone())
                .collect(),
            inputs: self.sensors.iter().enumerate().filter(|(k, _)| d.sensors >> k & 1 == 1).map(|(_, a)| a.clone()).collect(),
            outputs,
            events: log,
        };
        st.net = self.network.apply(&st.net, NetAction::Tick).ok_or(OrchestratorError::Deadline(tick))?.0;
        Ok(record)
    }

    fn view<'a>(&self, st: &'a SimState, tick: usize) -> SchedView<'a> {
        SchedView { tick, net: &st.net, eligible: self.eligible(st) }
    }

    pub fn simulate(&self, sched: &mut dyn Scheduler, horizon: usize) -> Result<ExecutionTrace, OrchestratorError> {
        let mut st = self.initial_state();
        let mut records = Vec::with_capacity(horizon);
        for tick in 0..horizon {
            let d = sched.next(&self.view(&st, tick));
            records.push(self.step(&mut st, tick, d)?);
        }
        Ok(ExecutionTrace { records, loop_start: None })
    }

    /// Runs `prefix` for `prefix_ticks` ticks, then `cycle` until the joint
    /// state repeats, giving an ultimately periodic trace.
    pub fn simulate_lasso(
        &self,
        prefix: &mut dyn Scheduler,
        prefix_ticks: usize,
        cycle: &mut Periodic,
        max_ticks: usize,
    ) -> Result<ExecutionTrace, OrchestratorError> {
        let mut st = self.initial_state();
        let mut records = Vec::new();
        for tick in 0..prefix_ticks {
            let d = prefix.next(&self.view(&st, tick));
            records.push(self.step(&mut st, tick, d)?);
        }
        let mut seen: HashMap<(SimState, Vec<usize>), usize> = HashMap::new();
        for tick in prefix_ticks..max_ticks {
            let key = (st.clone(), cycle.key().unwrap_or_default());
            if let Some(&start) = seen.get(&key) {
                return Ok(ExecutionTrace { records, loop_start: Some(start) });
            }
            seen.insert(key, tick);
            let d = cycle.next(&self.view(&st, tick));
            records.push(self.step(&mut st, tick, d)?);
        }
        Err(OrchestratorError::NoLasso(max_ticks))
    }
}

fn join(atoms: &[Atom]) -> String {
    if atoms.is_empty() {
        "-".into()
    } else {
        atoms.iter().map(Atom::name).collect::<Vec<_>>().join(",")
    }
}

fn split(field: &str) -> Vec<Atom> {
    if field == "-" {
        Vec::new()
    } else {
        field.split(',').map(|n| Atom::new(n, AtomKind::Internal)).collect()
    }
}

const HEADER: &str = "tick\tcontext\tactive\tactivations\tinputs\toutputs\tevents";

impl ExecutionTrace {
    /// Tab-separated listing, one line per tick. Lassos start with a
    /// `# loop N` line.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        if let Some(l) = self.loop_start {
            writeln!(s, "# loop {l}").unwrap();
        }
        s.push_str(HEADER);
        s.push('\n');
        for r in &self.records {
            let events = if r.events.is_empty() { "-".to_string() } else { r.events.join(";") };
            writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.tick,
                join(&r.contexts),
                r.active as u8,
                join(&r.activations),
                join(&r.inputs),
                join(&r.outputs),
                events
            )
            .unwrap();
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<ExecutionTrace, OrchestratorError> {
        let mut records = Vec::new();
        let mut loop_start = None;
        let bad = |line: usize, msg: &str| OrchestratorError::TraceFormat { line, msg: msg.to_string() };
        for (no, line) in text.lines().enumerate() {
            let no = no + 1;
            if let Some(rest) = line.strip_prefix("# loop ") {
                loop_start = Some(rest.trim().parse().map_err(|_| bad(no, "bad loop index"))?);
                continue;
            }
            if line.is_empty() || line.starts_with('#') || line == HEADER {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 7 {
                return Err(bad(no, "expected 7 tab-separated fields"));
            }
            records.push(TickRecord {
                tick: f[0].parse().map_err(|_| bad(no, "bad tick"))?,
                contexts: split(f[1]),
                active: match f[2] {
                    "1" => true,
                    "0" => false,
                    _ => return Err(bad(no, "active must be 0 or 1")),
                },
                activations: split(f[3]),
                inputs: split(f[4]),
                outputs: split(f[5]),
                events: if f[6] == "-" { Vec::new() } else { f[6].split(';').map(String::from).collect() },
            });
        }
        if loop_start.is_some_and(|l| l >= records.len()) {
            return Err(bad(0, "loop start beyond the last tick"));
        }
        Ok(ExecutionTrace { records, loop_start })
    }
}
