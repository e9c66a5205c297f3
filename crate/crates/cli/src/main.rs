use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mission_core::cgg::extract_scenarios;
use mission_core::mission::{Mission, MissionError, MissionFile, SchedulerKind, RUNNING_EXAMPLE};
use mission_core::monitor::{check_trace, report_text, Verdict};
use mission_core::orchestrator::{model_check, CheckConfig, ExecutionTrace, Network, RandomFair, ScriptScheduler};
use mission_core::pipeline::{bench, build_graph, run_pipeline, PipelineError, PipelineOptions};
use mission_core::synth::{check_controller, synthesize_monolithic};
use mission_core::world::MutexMode;

#[derive(Parser)]
#[command(name = "mission", version, about = "Contextual mission specification, synthesis and orchestration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Mission file, or `running_example` for the bundled mission.
    mission: String,
    /// Directory for the artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a mutex group's mode, as `group=exactly_one` or `group=at_most_one`.
    #[arg(long = "mutex-mode", value_name = "GROUP=MODE")]
    mutex_mode: Vec<String>,
    /// Use the minimum number of transition controllers.
    #[arg(long)]
    optimize_transitions: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a mission.
    Validate(Common),
    /// Build the goal graph and write it as DOT.
    Cgg(Common),
    /// Synthesize scenario and transition controllers.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Also synthesize a single controller for the whole mission.
        #[arg(long)]
        monolithic: bool,
    },
    /// Run the orchestrated controllers and check each scenario's projection.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
        /// `script` or `random-fair`.
        #[arg(long)]
        scheduler: Option<SchedulerKind>,
    },
    /// Model check the orchestration network, verify the controllers and,
    /// with `--trace`, monitor a recorded trace.
    Check {
        #[command(flatten)]
        common: Common,
        /// Number of contexts in the checked network; defaults to the mission's.
        #[arg(long)]
        scope: Option<usize>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare modular and monolithic synthesis.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot write {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("bad argument: {0}")]
    Argument(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Pipeline(e) => e.code(),
            CliError::Io { .. } => "io",
            CliError::Argument(_) => "argument",
            CliError::Failed(_) => "check_failed",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(e) => e.exit_code() as u8,
            _ => 1,
        }
    }
}

impl From<MissionError> for CliError {
    fn from(e: MissionError) -> Self {
        CliError::Pipeline(e.into())
    }
}

fn parse_mutex_mode(arg: &str) -> Result<(String, MutexMode), CliError> {
    let (group, mode) = arg.split_once('=').ok_or_else(|| CliError::Argument(format!("`{arg}` is not GROUP=MODE")))?;
    let mode = match mode {
        "exactly_one" => MutexMode::ExactlyOne,
        "at_most_one" => MutexMode::AtMostOne,
        other => return Err(CliError::Argument(format!("unknown mutex mode `{other}`"))),
    };
    Ok((group.to_string(), mode))
}

fn load(common: &Common) -> Result<Mission, CliError> {
    let text = if common.mission == "running_example" {
        RUNNING_EXAMPLE.to_string()
    } else {
        let path = Path::new(&common.mission);
        fs::read_to_string(path)
            .map_err(|e| MissionError::Io { path: path.display().to_string(), msg: e.to_string() })?
    };
    let mut file: MissionFile = serde_json::from_str(&text).map_err(|e| MissionError::Schema {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    for arg in &common.mutex_mode {
        let (group, mode) = parse_mutex_mode(arg)?;
        file.world.mutex_modes.insert(group, mode);
    }
    Ok(Mission::from_file(file)?)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error, p: &Path| CliError::Io { path: p.display().to_string(), msg: e.to_string() };
    fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io(e, &path))
}

fn options(common: &Common) -> PipelineOptions {
    PipelineOptions { optimize_transitions: common.optimize_transitions, ..PipelineOptions::default() }
}

fn validate(common: &Common) -> Result<String, CliError> {
    let m = load(common)?;
    let regions = m.world.typeset.adjacency_graph().len();
    Ok(format!(
        "mission {}: {} goals, {} contexts, {} regions, t_context {}\n",
        m.name,
        m.goals.len(),
        m.world.contexts.len(),
        regions,
        m.world.t_context
    ))
}

fn cgg(common: &Common) -> Result<String, CliError> {
    let m = load(common)?;
    let (g, time) = build_graph(&m)?;
    write(&common.out, "cgg.dot", &g.to_dot())?;
    let mut s = format!(
        "{} nodes, {} clusters, {} satisfiability checks, {} validity checks, {:.3} ms\n",
        g.nodes.len(),
        g.clusters.len(),
        g.stats.satisfiability,
        g.stats.validity,
        time.as_secs_f64() * 1e3
    );
    for sc in extract_scenarios(&g) {
        writeln!(s, "{}\t{}\t{}", sc.name, sc.context, sc.gamma).unwrap();
    }
    Ok(s)
}

fn synth(common: &Common, monolithic: bool) -> Result<String, CliError> {
    let m = load(common)?;
    let opts = options(common);
    let p = run_pipeline(&m, &opts)?;
    let dir = common.out.join("machines");
    let mut s = String::new();
    for c in &p.controllers {
        write(&dir, &format!("{}.txt", c.machine.name), &c.machine.to_text())?;
        write(&dir, &format!("{}.dot", c.machine.name), &c.machine.to_dot())?;
        writeln!(
            s,
            "{}\t{} states\t{} transitions\tarena {} states",
            c.scenario,
            c.machine.num_states(),
            c.machine.num_transitions(),
            c.arena_states
        )
        .unwrap();
    }
    for t in &p.transitions.machines {
        write(&dir, &format!("{}.txt", t.name), &t.to_text())?;
    }
    writeln!(s, "{} transition controllers, t_trans {}", p.transitions.len(), p.transitions.t_trans).unwrap();
    if monolithic {
        let c = synthesize_monolithic(&p.scenarios, &m.world, p.transitions.t_trans, &opts.synth).map_err(PipelineError::from)?;
        write(&dir, &format!("{}.txt", c.machine.name), &c.machine.to_text())?;
        writeln!(s, "monolithic\t{} states\tarena {} states", c.machine.num_states(), c.arena_states).unwrap();
    }
    Ok(s)
}

fn simulate(
    common: &Common,
    seed: Option<u64>,
    horizon: Option<usize>,
    scheduler: Option<SchedulerKind>,
) -> Result<String, CliError> {
    let m = load(common)?;
    let p = run_pipeline(&m, &options(common))?;
    let o = p.orchestration(&m)?;
    let horizon = horizon.unwrap_or(m.run.horizon);
    let trace = match scheduler.unwrap_or(m.run.scheduler) {
        SchedulerKind::Script => {
            let mut s = ScriptScheduler::new(&m.run.script, &o).map_err(PipelineError::from)?;
            o.simulate(&mut s, horizon)
        }
        SchedulerKind::RandomFair => o.simulate(&mut RandomFair::new(seed.unwrap_or(m.run.seed), &o), horizon),
    }
    .map_err(PipelineError::from)?;
    let verdicts = check_trace(&trace, &p.monitors()?).map_err(PipelineError::from)?;
    let report = report_text(&verdicts);
    write(&common.out, "trace.tsv", &trace.to_tsv())?;
    write(&common.out, "verdicts.txt", &report)?;
    Ok(report)
}

fn check(common: &Common, scope: Option<usize>, trace: Option<&Path>) -> Result<String, CliError> {
    let m = load(common)?;
    let p = run_pipeline(&m, &options(common))?;
    let n = scope.unwrap_or(m.world.contexts.len());
    let net = Network::new(n, m.world.t_context, p.transitions.t_trans).map_err(PipelineError::from)?;
    let report = model_check(&net, &CheckConfig::default()).map_err(PipelineError::from)?;
    let mut s = report.to_text();
    let mut ok = report.all_hold();
    for (sc, c) in p.scenarios.iter().zip(&p.controllers) {
        let sound = check_controller(&c.machine, sc, &m.world).map_err(PipelineError::from)?;
        ok &= sound;
        writeln!(s, "{} controller {}: {}", if sound { "PASS" } else { "FAIL" }, c.machine.name, sc.gamma).unwrap();
    }
    if let Some(path) = trace {
        let text = fs::read_to_string(path)
            .map_err(|e| MissionError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        let t = ExecutionTrace::from_tsv(&text).map_err(PipelineError::from)?;
        let verdicts = check_trace(&t, &p.monitors()?).map_err(PipelineError::from)?;
        ok &= verdicts.iter().all(|v| !matches!(v.verdict, Verdict::Violated(_)));
        s.push_str(&report_text(&verdicts));
    }
    write(&common.out, "check.txt", &s)?;
    if ok {
        Ok(s)
    } else {
        print!("{s}");
        Err(CliError::Failed("some properties do not hold".into()))
    }
}

fn run_bench(common: &Common, repetitions: usize) -> Result<String, CliError> {
    let m = load(common)?;
    let r = bench(&m, &options(common), repetitions)?;
    let text = r.to_text();
    write(&common.out, "bench.txt", &text)?;
    write(&common.out, "bench.json", &serde_json::to_string_pretty(&r).expect("report serializes"))?;
    Ok(text)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Validate(c) => validate(c),
        Command::Cgg(c) => cgg(c),
        Command::Synth { common, monolithic } => synth(common, *monolithic),
        Command::Simulate { common, seed, horizon, scheduler } => simulate(common, *seed, *horizon, *scheduler),
        Command::Check { common, scope, trace } => check(common, *scope, trace.as_deref()),
        Command::Bench { common, repetitions } => run_bench(common, *repetitions),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {detail}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}
