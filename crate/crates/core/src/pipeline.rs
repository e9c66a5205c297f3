//! End-to-end flow from a mission to an orchestrated set of controllers,
//! and the modular-versus-monolithic benchmark.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cgg::{build_cgg_with, extract_scenarios, Cgg, CggError, MissionScenario};
use crate::ltl::{Atom, Checker, LtlError};
use crate::mission::{Mission, MissionError};
use crate::monitor::{Monitor, MonitorError};
use crate::orchestrator::{build_orchestration, ModelCheckError, Orchestration, OrchestratorError};
use crate::synth::{
    synth_transition_controllers, synthesize, synthesize_monolithic, PairMode, ScenarioController, SynthConfig,
    SynthError, TransitionControllerSet,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error(transparent)]
    Cgg(#[from] CggError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    ModelCheck(#[from] ModelCheckError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

impl PipelineError {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Mission(MissionError::Schema { .. }) => "schema",
            PipelineError::Mission(MissionError::Io { .. }) => "io",
            PipelineError::Mission(_) => "mission",
            PipelineError::Cgg(CggError::Conflict { .. }) => "conflict",
            PipelineError::Orchestrator(OrchestratorError::Conflict { .. }) => "conflict",
            PipelineError::Synth(SynthError::Unrealizable { .. }) => "unrealizable",
            PipelineError::ModelCheck(ModelCheckError::StateLimit { .. }) => "resource_limit",
            e if e.is_resource_limit() => "resource_limit",
            _ => "error",
        }
    }

    fn is_resource_limit(&self) -> bool {
        let ltl = match self {
            PipelineError::Ltl(e) => Some(e),
            PipelineError::Cgg(CggError::Ltl(e)) => Some(e),
            PipelineError::Synth(SynthError::Ltl(e)) => Some(e),
            PipelineError::Monitor(MonitorError::Ltl(e)) => Some(e),
            _ => None,
        };
        matches!(ltl, Some(LtlError::ResourceLimit(_)))
    }

    /// Process exit status: 2 schema, 3 conflict, 4 unrealizable, 5
    /// resource limit, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            "schema" => 2,
            "conflict" => 3,
            "unrealizable" => 4,
            "resource_limit" => 5,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineOptions {
    pub pair_mode: PairMode,
    pub optimize_transitions: bool,
    pub synth: SynthConfig,
}

/// Goal graph, scenarios and controllers of a mission.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub cgg: Cgg,
    pub scenarios: Vec<MissionScenario>,
    pub controllers: Vec<ScenarioController>,
    pub transitions: TransitionControllerSet,
    pub cgg_time: Duration,
    pub transition_time: Duration,
}

pub fn build_graph(mission: &Mission) -> Result<(Cgg, Duration), PipelineError> {
    let start = Instant::now();
    let checker = Checker::new(&mission.world.rules())?;
    let cgg = build_cgg_with(mission.goals.clone(), &mission.world, &checker)?;
    Ok((cgg, start.elapsed()))
}

/// Regions each scenario may leave the robot in or expect it at: those its
/// patterns name and those its controller's states are annotated with.
pub fn scenario_regions(scenarios: &[MissionScenario], controllers: &[ScenarioController]) -> Vec<BTreeSet<Atom>> {
    scenarios
        .iter()
        .zip(controllers)
        .map(|(s, c)| s.regions.iter().cloned().chain(c.machine.regions.iter().flatten().cloned()).collect())
        .collect()
}

pub fn run_pipeline(mission: &Mission, opts: &PipelineOptions) -> Result<Pipeline, PipelineError> {
    let (cgg, cgg_time) = build_graph(mission)?;
    let scenarios = extract_scenarios(&cgg);
    let controllers =
        scenarios.iter().map(|s| synthesize(s, &mission.world, &opts.synth)).collect::<Result<Vec<_>, _>>()?;
    let start = Instant::now();
    let regions = scenario_regions(&scenarios, &controllers);
    let transitions =
        synth_transition_controllers(&mission.world, &regions, opts.pair_mode, opts.optimize_transitions)?;
    let transition_time = start.elapsed();
    Ok(Pipeline { cgg, scenarios, controllers, transitions, cgg_time, transition_time })
}

impl Pipeline {
    pub fn orchestration(&self, mission: &Mission) -> Result<Orchestration, PipelineError> {
        let tasks: Vec<(Atom, _)> = self.controllers.iter().map(|c| (c.context.clone(), c.machine.clone())).collect();
        Ok(build_orchestration(&mission.world, &tasks, self.transitions.clone())?)
    }

    /// One monitor per scenario, for its specification.
    pub fn monitors(&self) -> Result<Vec<(Atom, Monitor)>, PipelineError> {
        self.scenarios.iter().map(|s| Ok((s.context.clone(), Monitor::new(&s.gamma)?))).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthFigures {
    pub name: String,
    pub time_ms: f64,
    pub arena_states: usize,
    pub arena_edges: usize,
    pub machine_states: usize,
    pub machine_transitions: usize,
}

impl SynthFigures {
    fn of(c: &ScenarioController, time: Duration) -> Self {
        SynthFigures {
            name: c.scenario.clone(),
            time_ms: ms(time),
            arena_states: c.arena_states,
            arena_edges: c.arena_edges,
            machine_states: c.machine.num_states(),
            machine_transitions: c.machine.num_transitions(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub mission: String,
    pub repetitions: usize,
    pub cgg_time_ms: f64,
    pub satisfiability_checks: u64,
    pub validity_checks: u64,
    pub modular: Vec<SynthFigures>,
    /// Sums over the scenarios.
    pub modular_total: SynthFigures,
    pub monolithic: SynthFigures,
    pub transition_controllers: usize,
    pub transition_time_ms: f64,
    pub t_trans: u32,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Times modular and monolithic synthesis, reporting the median of
/// `repetitions` runs of each.
pub fn bench(mission: &Mission, opts: &PipelineOptions, repetitions: usize) -> Result<BenchReport, PipelineError> {
    let reps = repetitions.max(1);
    let start = Instant::now();
    let checker = Checker::new(&mission.world.rules())?;
    let cgg = build_cgg_with(mission.goals.clone(), &mission.world, &checker)?;
    let cgg_time = start.elapsed();
    let stats = cgg.stats;
    let scenarios = extract_scenarios(&cgg);

    let mut modular: Vec<(ScenarioController, Vec<Duration>)> = Vec::new();
    let mut mono: Option<(ScenarioController, Vec<Duration>)> = None;
    let mut transitions = None;
    let mut transition_times = Vec::new();
    for _ in 0..reps {
        for (k, s) in scenarios.iter().enumerate() {
            let t = Instant::now();
            let c = synthesize(s, &mission.world, &opts.synth)?;
            let d = t.elapsed();
            match modular.get_mut(k) {
                Some(entry) => entry.1.push(d),
                None => modular.push((c, vec![d])),
            }
        }
        let ctrl: Vec<ScenarioController> = modular.iter().map(|(c, _)| c.clone()).collect();
        let t = Instant::now();
        let set = synth_transition_controllers(
            &mission.world,
            &scenario_regions(&scenarios, &ctrl),
            opts.pair_mode,
            opts.optimize_transitions,
        )?;
        transition_times.push(t.elapsed());
        let t = Instant::now();
        let m = synthesize_monolithic(&scenarios, &mission.world, set.t_trans, &opts.synth)?;
        let d = t.elapsed();
        match &mut mono {
            Some(entry) => entry.1.push(d),
            None => mono = Some((m, vec![d])),
        }
        transitions = Some(set);
    }
    let transitions = transitions.expect("at least one repetition");
    let modular: Vec<SynthFigures> = modular.into_iter().map(|(c, ts)| SynthFigures::of(&c, median(ts))).collect();
    let modular_total = SynthFigures {
        name: "modular".into(),
        time_ms: modular.iter().map(|f| f.time_ms).sum(),
        arena_states: modular.iter().map(|f| f.arena_states).sum(),
        arena_edges: modular.iter().map(|f| f.arena_edges).sum(),
        machine_states: modular.iter().map(|f| f.machine_states).sum(),
        machine_transitions: modular.iter().map(|f| f.machine_transitions).sum(),
    };
    let (mc, mt) = mono.expect("at least one repetition");
    Ok(BenchReport {
        mission: mission.name.clone(),
        repetitions: reps,
        cgg_time_ms: ms(cgg_time),
        satisfiability_checks: stats.satisfiability,
        validity_checks: stats.validity,
        modular,
        modular_total,
        monolithic: SynthFigures { name: "monolithic".into(), ..SynthFigures::of(&mc, median(mt)) },
        transition_controllers: transitions.len(),
        transition_time_ms: ms(median(transition_times)),
        t_trans: transitions.t_trans,
    })
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mission {} (median of {} runs)", self.mission, self.repetitions).unwrap();
        writeln!(
            s,
            "cgg {:.3} ms, {} satisfiability checks, {} validity checks",
            self.cgg_time_ms, self.satisfiability_checks, self.validity_checks
        )
        .unwrap();
        writeln!(s, "approach\ttime_ms\tarena_states\tarena_edges\tmachine_states\tmachine_transitions").unwrap();
        for f in self.modular.iter().chain([&self.modular_total, &self.monolithic]) {
            writeln!(
                s,
                "{}\t{:.3}\t{}\t{}\t{}\t{}",
                f.name, f.time_ms, f.arena_states, f.arena_edges, f.machine_states, f.machine_transitions
            )
            .unwrap();
        }
        writeln!(
            s,
            "transition controllers {} (t_trans {}) in {:.3} ms",
            self.transition_controllers, self.t_trans, self.transition_time_ms
        )
        .unwrap();
        s
    }
}
