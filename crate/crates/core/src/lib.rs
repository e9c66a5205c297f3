//! Contextual robotic missions: temporal-logic specifications over a typed
//! world, assume-guarantee goals clustered by context, per-scenario
//! controller synthesis, and an orchestrator that switches controllers as
//! contexts change.

pub mod cgg;
pub mod contracts;
pub mod graph;
pub mod ltl;
pub mod mission;
pub mod monitor;
pub mod orchestrator;
pub mod patterns;
pub mod pipeline;
pub mod synth;
pub mod world;
