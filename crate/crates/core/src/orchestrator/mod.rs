//! Runtime orchestration: controllers extended with activation inputs,
//! their lock-step composition, the network that decides which controller
//! is in charge, simulation, and a checker for the network.

mod augment;
mod check;
mod network;
mod simulate;

pub use augment::{activation_atom, augment, compose_side_by_side, AugmentedMachine, Composition};
pub use check::{model_check, CheckConfig, CheckReport, ModelCheckError, PropertyResult};
pub use network::{NetAction, NetEvent, NetState, Network, Orch};
pub use simulate::{
    build_orchestration, Directive, ExecutionTrace, Orchestration, Periodic, RandomFair, SchedView, Scheduler,
    ScriptScheduler, SimState, TickRecord,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrchestratorError {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("atom `{atom}` already used by {machine}")]
    AtomCollision { machine: String, atom: String },
    #[error("conflicting outputs at tick {tick}: {first} and {second} disagree on {atom}")]
    Conflict { first: String, second: String, atom: String, tick: usize },
    #[error("no task controller for context {0}")]
    MissingController(String),
    #[error("no transition controller from {from} to {to}")]
    NoTransition { from: String, to: String },
    #[error("unknown context `{0}`")]
    UnknownName(String),
    #[error("time cannot advance at tick {0}")]
    Deadline(usize),
    #[error("no repeated state within {0} ticks")]
    NoLasso(usize),
    #[error("trace line {line}: {msg}")]
    TraceFormat { line: usize, msg: String },
}
