use std::collections::BTreeSet;

use mission_core::ltl::Atom;
use mission_core::mission::Mission;
use mission_core::orchestrator::{
    model_check, CheckConfig, ExecutionTrace, Network, Orchestration, Periodic, RandomFair, ScriptScheduler,
};
use mission_core::pipeline::{run_pipeline, Pipeline, PipelineOptions};

fn setup() -> (Mission, Pipeline, Orchestration) {
    let m = Mission::running_example();
    let p = run_pipeline(&m, &PipelineOptions::default()).unwrap();
    let o = p.orchestration(&m).unwrap();
    (m, p, o)
}

fn is_task(p: &Pipeline, a: &Atom) -> bool {
    p.controllers.iter().any(|c| a.name() == format!("a_{}", c.context.name()))
}

/// Lengths of the maximal runs of ticks satisfying `f`, and whether the
/// run reaches the end of the trace.
fn runs(trace: &ExecutionTrace, f: impl Fn(usize) -> Option<String>) -> Vec<(String, usize, bool)> {
    let mut out: Vec<(String, usize, bool)> = Vec::new();
    let mut prev: Option<String> = None;
    for t in 0..trace.records.len() {
        let cur = f(t);
        if let Some(k) = &cur {
            match out.last_mut() {
                Some(last) if prev.as_ref() == Some(k) => last.1 += 1,
                _ => out.push((k.clone(), 1, false)),
            }
        }
        prev = cur;
    }
    if let (Some(last), Some(_)) = (out.last_mut(), f(trace.records.len() - 1)) {
        last.2 = true;
    }
    out
}

#[test]
fn simulated_traces_respect_the_orchestration_lemmas() {
    let (m, p, o) = setup();
    let t_trans = p.transitions.t_trans as usize;
    let t_context = m.world.t_context as usize;
    for seed in 0..100 {
        let trace = o.simulate(&mut RandomFair::new(seed, &o), 300).unwrap();
        let first = trace.records.iter().position(|r| !r.activations.is_empty()).unwrap();
        for r in &trace.records[first..] {
            assert_eq!(r.activations.len(), 1, "seed {seed} tick {}", r.tick);
            assert_eq!(r.active, is_task(&p, &r.activations[0]), "seed {seed} tick {}", r.tick);
            assert!(r.contexts.len() <= 1);
        }
        let trans = runs(&trace, |t| {
            let r = &trace.records[t];
            r.activations.first().filter(|a| !is_task(&p, a)).map(|a| a.name().to_string())
        });
        for (k, len, _) in &trans {
            assert!(*len <= t_trans, "seed {seed}: {k} active for {len} ticks");
        }
        let ctx = runs(&trace, |t| trace.records[t].contexts.first().map(|a| a.name().to_string()));
        for (x, len, at_end) in &ctx {
            assert!(*at_end || *len >= t_context, "seed {seed}: {x} active for {len} ticks");
        }
    }
}

#[test]
fn active_controllers_behave_like_their_base_machines() {
    let (_, p, o) = setup();
    for seed in 0..30 {
        let trace = o.simulate(&mut RandomFair::new(seed, &o), 200).unwrap();
        for c in &p.controllers {
            let m = &c.machine;
            let name = format!("a_{}", c.context.name());
            let ticks: Vec<_> = trace.records.iter().filter(|r| r.activations.iter().any(|a| a.name() == name)).collect();
            let inputs: Vec<u64> = ticks.iter().map(|r| m.encode_inputs(|a| r.inputs.contains(a))).collect();
            for (r, o) in ticks.iter().zip(m.run(&inputs)) {
                let expected: BTreeSet<Atom> = m.output_atoms(o).into_iter().collect();
                let actual: BTreeSet<Atom> = r.outputs.iter().filter(|a| m.outputs.contains(a)).cloned().collect();
                assert_eq!(actual, expected, "seed {seed} tick {} {}", r.tick, m.name);
            }
        }
    }
}

#[test]
fn composition_is_well_defined_on_reachable_states() {
    let (_, _, o) = setup();
    let n = o.composition.members.len();
    let mut patterns: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
    patterns.push(Vec::new());
    let states = o.composition.check_well_defined(&patterns).unwrap();
    assert!(states > 1);
}

#[test]
fn bundled_script_timeline() {
    let (m, _, o) = setup();
    let mut s = ScriptScheduler::new(&m.run.script, &o).unwrap();
    let trace = o.simulate(&mut s, 16).unwrap();
    let holds = |t: usize, a: &str| trace.records[t].outputs.iter().any(|x| x.name() == a);
    let greet: Vec<usize> = (0..16).filter(|&t| holds(t, "greet")).collect();
    let register: Vec<usize> = (0..16).filter(|&t| holds(t, "register")).collect();
    assert_eq!(greet, vec![3]);
    assert_eq!(register, vec![11]);
    let first_day_active = (9..16).find(|&t| {
        let r = &trace.records[t];
        r.active && r.contexts.iter().any(|x| x.name() == "day")
    });
    assert_eq!(first_day_active, Some(11));
    let active: Vec<bool> = trace.records.iter().map(|r| r.active).collect();
    let expected: Vec<bool> = (0..16).map(|t| !matches!(t, 4 | 5 | 9 | 10)).collect();
    assert_eq!(active, expected);
    assert!(trace.records[4].events.iter().any(|e| e.starts_with("trans_start(day->night")));
}

#[test]
fn traces_round_trip_and_are_deterministic() {
    let (_, _, o) = setup();
    let a = o.simulate(&mut RandomFair::new(7, &o), 100).unwrap();
    let b = o.simulate(&mut RandomFair::new(7, &o), 100).unwrap();
    assert_eq!(a.to_tsv(), b.to_tsv());
    let back = ExecutionTrace::from_tsv(&a.to_tsv()).unwrap();
    assert_eq!(back.to_tsv(), a.to_tsv());
    let mut cycle = Periodic::random(&o, 1, 5, 3);
    let l = o.simulate_lasso(&mut RandomFair::new(2, &o), 20, &mut cycle, 2000).unwrap();
    assert!(l.loop_start.is_some());
    assert_eq!(ExecutionTrace::from_tsv(&l.to_tsv()).unwrap().to_tsv(), l.to_tsv());
}

#[test]
fn network_properties_hold_for_two_and_three_contexts() {
    for n in [1, 2, 3] {
        let r = model_check(&Network::new(n, 4, 2).unwrap(), &CheckConfig::default()).unwrap();
        assert!(r.all_hold(), "{}", r.to_text());
    }
}

#[test]
fn removing_the_switch_guard_is_detected() {
    let r = model_check(&Network::new(2, 4, 2).unwrap().without_cs_guard(), &CheckConfig::default()).unwrap();
    let p = r.property("one_context").unwrap();
    assert!(!p.holds);
    assert_eq!(p.counterexample.as_deref(), Some(&["activate C[0]".to_string(), "activate C[1]".to_string()][..]));
}

#[test]
fn checker_scope_is_bounded() {
    let net = Network::new(5, 4, 2).unwrap();
    assert!(model_check(&net, &CheckConfig::default()).is_err());
    let tiny = CheckConfig { max_contexts: 4, max_states: 10 };
    assert!(model_check(&Network::new(3, 4, 2).unwrap(), &tiny).is_err());
}
