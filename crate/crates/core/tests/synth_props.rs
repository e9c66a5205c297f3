use std::collections::BTreeSet;

use mission_core::ltl::CompareOp;
use mission_core::mission::Mission;
use mission_core::monitor::{EvalMode, Monitor, ProjectedTrace, Verdict};
use mission_core::pipeline::{run_pipeline, Pipeline, PipelineOptions};
use mission_core::synth::{check_controller, compile_spec, extract_mealy, solve, synthesize, SynthConfig, SynthError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pipeline() -> (Mission, Pipeline) {
    let m = Mission::running_example();
    let p = run_pipeline(&m, &PipelineOptions::default()).unwrap();
    (m, p)
}

#[test]
fn controllers_pass_product_emptiness() {
    let (m, p) = pipeline();
    for (s, c) in p.scenarios.iter().zip(&p.controllers) {
        assert!(check_controller(&c.machine, s, &m.world).unwrap(), "{}", s.name);
    }
}

#[test]
fn random_schedules_never_violate_the_specification() {
    let (_, p) = pipeline();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (s, c) in p.scenarios.iter().zip(&p.controllers) {
        let mon = Monitor::new(&s.gamma).unwrap();
        let m = &c.machine;
        for _ in 0..500 {
            let inputs: Vec<u64> = (0..200).map(|_| rng.gen_range(0..1u64 << m.inputs.len())).collect();
            let outputs = m.run(&inputs);
            let entries: Vec<BTreeSet<_>> = inputs
                .iter()
                .zip(&outputs)
                .map(|(&i, &o)| {
                    let ins = m.inputs.iter().enumerate().filter(|(k, _)| i >> k & 1 == 1).map(|(_, a)| a.clone());
                    ins.chain(m.output_atoms(o)).collect()
                })
                .collect();
            let pt = ProjectedTrace { index: (0..200).collect(), entries, loop_start: None };
            assert_eq!(mon.evaluate(&pt, EvalMode::Prefix).unwrap(), Verdict::Pending, "{}", s.name);
        }
    }
}

#[test]
fn minimization_preserves_traces() {
    let (m, p) = pipeline();
    let adj = m.world.typeset.adjacency_graph();
    for s in &p.scenarios {
        let g = compile_spec(s, &m.world, &SynthConfig::default()).unwrap();
        let sol = solve(&g);
        let raw = extract_mealy(&g, &sol, &s.name, &adj).unwrap();
        let min = raw.minimize();
        assert!(min.num_states() <= raw.num_states());
        let letters = 1u64 << raw.inputs.len();
        let depth = 8;
        for code in 0..letters.pow(depth) {
            let word: Vec<u64> = (0..depth).map(|k| code / letters.pow(k) % letters).collect();
            assert_eq!(raw.run(&word), min.run(&word), "{} on {word:?}", s.name);
        }
    }
}

#[test]
fn controller_sizes() {
    let (_, p) = pipeline();
    let day = p.controllers.iter().find(|c| c.context.name() == "day").unwrap();
    let night = p.controllers.iter().find(|c| c.context.name() == "night").unwrap();
    assert!(day.machine.num_states() <= 10, "{}", day.machine.num_states());
    assert!(night.machine.num_states() <= 6, "{}", night.machine.num_states());
}

#[test]
fn scenario_specifications_refine_their_goals() {
    let (m, p) = pipeline();
    let checker = mission_core::ltl::Checker::new(&m.world.rules()).unwrap();
    for (x, cluster) in &p.cgg.clusters {
        let n = &p.cgg.nodes[*cluster];
        for &(from, to, _) in p.cgg.edges.iter().filter(|e| e.0 == *cluster) {
            assert_eq!(from, *cluster);
            let member = &p.cgg.nodes[to];
            assert!(
                checker.compare(n.contract.guarantees(), member.contract.guarantees(), CompareOp::Le).unwrap(),
                "{x}: {} does not strengthen {}",
                n.name,
                member.name
            );
        }
    }
}

const UNREALIZABLE: &str = r#"{
  "name": "psychic",
  "world": {
    "types": [
      { "name": "day", "kind": "context" },
      { "name": "person", "kind": "sensor" },
      { "name": "greet", "kind": "action" }
    ],
    "contexts": ["day"],
    "t_context": 3
  },
  "goals": [
    { "name": "foresee", "context": "day", "guarantees": ["G(greet <-> X person)"] }
  ]
}"#;

#[test]
fn predicting_inputs_is_unrealizable() {
    let m = Mission::from_json(UNREALIZABLE).unwrap();
    let cgg = mission_core::cgg::build_cgg(m.goals.clone(), &m.world).unwrap();
    let s = &mission_core::cgg::extract_scenarios(&cgg)[0];
    let err = synthesize(s, &m.world, &SynthConfig::default()).unwrap_err();
    assert!(matches!(err, SynthError::Unrealizable { .. }), "{err}");
}
