use mission_core::ltl::{parse_free, Atom, AtomKind, Formula};
use mission_core::mission::Mission;
use mission_core::monitor::{check_trace, evaluate, indexing, project, EvalMode, ProjectedTrace, Verdict};
use mission_core::orchestrator::{ExecutionTrace, ScriptScheduler, TickRecord};
use mission_core::pipeline::{run_pipeline, PipelineOptions};
use proptest::prelude::*;

fn atom(n: &str) -> Atom {
    Atom::new(n, AtomKind::Internal)
}

/// Context `x2` for three ticks, `x1` for five with two transition ticks,
/// then `x2` again.
fn pictured_run() -> ExecutionTrace {
    let records = (0..11)
        .map(|t| TickRecord {
            tick: t,
            contexts: vec![atom(if (3..8).contains(&t) { "x1" } else { "x2" })],
            active: !(3..5).contains(&t),
            activations: vec![],
            inputs: vec![],
            outputs: vec![],
            events: vec![],
        })
        .collect();
    ExecutionTrace { records, loop_start: None }
}

#[test]
fn indexing_of_the_pictured_run() {
    let t = pictured_run();
    assert_eq!(indexing(&atom("x2"), &t), vec![0, 1, 2, 8, 9, 10]);
    assert_eq!(indexing(&atom("x1"), &t), vec![5, 6, 7]);
    let all: Vec<usize> = (0..11).collect();
    assert_eq!(project(&all, &t).len(), 11);
    let mut never = pictured_run();
    never.records.iter_mut().for_each(|r| r.active = false);
    assert!(indexing(&atom("x2"), &never).is_empty());
}

fn letter() -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), 2)
}

fn formula() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just("G(p -> q)"),
        Just("G(p -> X q)"),
        Just("p U q"),
        Just("G !p | F q"),
        Just("G(p -> X !p)"),
        Just("!q W p"),
        Just("X X !p"),
    ]
    .prop_map(|s| parse_free(s).unwrap())
}

fn entries(word: &[Vec<bool>]) -> ProjectedTrace {
    let names = ["p", "q"];
    ProjectedTrace {
        index: (0..word.len()).collect(),
        entries: word
            .iter()
            .map(|l| l.iter().zip(names).filter(|(b, _)| **b).map(|(_, n)| atom(n)).collect())
            .collect(),
        loop_start: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn violations_are_permanent(
        f in formula(),
        word in proptest::collection::vec(letter(), 0..12),
        ext in proptest::collection::vec(letter(), 0..8),
    ) {
        let v = evaluate(&f, &entries(&word), EvalMode::Prefix).unwrap();
        if let Verdict::Violated(k) = v {
            let longer: Vec<Vec<bool>> = word.iter().chain(&ext).cloned().collect();
            prop_assert_eq!(evaluate(&f, &entries(&longer), EvalMode::Prefix).unwrap(), Verdict::Violated(k));
        }
    }
}

/// A switch away from day right after a person is seen postpones the
/// register response to the next day tick. The projections are satisfied
/// while the raw trace breaks the formula read without contexts.
#[test]
fn delayed_response_across_a_switch() {
    let m = Mission::running_example();
    let p = run_pipeline(&m, &PipelineOptions::default()).unwrap();
    let o = p.orchestration(&m).unwrap();
    let trace = o.simulate(&mut ScriptScheduler::new(&m.run.script, &o).unwrap(), 16).unwrap();
    let verdicts = check_trace(&trace, &p.monitors().unwrap()).unwrap();
    for v in &verdicts {
        assert!(!matches!(v.verdict, Verdict::Violated(_)), "{}", v.context);
    }
    let raw = p.cgg.nodes[p.cgg.root].contract.gamma();
    let all: Vec<usize> = (0..trace.records.len()).collect();
    let unprojected = evaluate(&raw, &project(&all, &trace), EvalMode::Prefix).unwrap();
    println!("root specification on the unprojected trace: {unprojected:?}");
    let bd = parse_free("G(person -> X register)").unwrap();
    assert_eq!(evaluate(&bd, &project(&all, &trace), EvalMode::Prefix).unwrap(), Verdict::Violated(4));
}
