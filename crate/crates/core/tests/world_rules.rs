use mission_core::ltl::{Atom, Formula};
use mission_core::mission::Mission;
use mission_core::synth::{is_safety, DetAutomaton};
use mission_core::world::MutexMode;

fn body(rule: &Formula) -> &Formula {
    match rule {
        Formula::Globally(b) => b,
        other => panic!("rule {other} is not of the form G(...)"),
    }
}

fn holds(rules: &[Formula], is_true: &dyn Fn(&Atom) -> bool) -> bool {
    rules.iter().all(|r| body(r).eval_prop(is_true).expect("propositional body"))
}

#[test]
fn rules_are_safety_with_a_rejecting_sink() {
    let m = Mission::running_example();
    let rules = m.world.rules();
    for r in rules.all() {
        assert!(is_safety(r), "{r}");
        let d = DetAutomaton::safety("rule", r).unwrap();
        assert!(!d.is_universal(), "{r} never rejects");
        if !body(r).is_propositional() {
            continue;
        }
        // The first letter is rejected exactly when it violates the body.
        let atoms = d.atoms().to_vec();
        for v in 0..1u64 << atoms.len() {
            let val = |a: &Atom| atoms.iter().position(|b| b == a).is_some_and(|k| v >> k & 1 == 1);
            let ok = body(r).eval_prop(&val).unwrap();
            assert_eq!(d.step(0, v).is_some(), ok, "{r} on {v:b}");
            if let Some(s) = d.step(0, v) {
                // Accepting prefixes stay live.
                assert_eq!(d.step(s, v).is_some(), ok);
            }
        }
    }
}

#[test]
fn exactly_one_groups_have_one_member_true() {
    let m = Mission::running_example();
    let rules = m.world.rules();
    let mut checked = 0;
    for g in m.world.typeset.groups() {
        let mode = m.world.mutex_modes.get(&g.name).copied().unwrap_or(g.default_mode);
        if mode != MutexMode::ExactlyOne {
            continue;
        }
        let members = &g.members;
        for v in 0..1u64 << members.len() {
            let val = |a: &Atom| members.iter().position(|b| b == a).is_some_and(|k| v >> k & 1 == 1);
            let group_rules: Vec<Formula> = rules
                .mtx
                .iter()
                .filter(|r| r.atoms().iter().all(|a| members.contains(a)))
                .cloned()
                .collect();
            assert_eq!(holds(&group_rules, &val), v.count_ones() == 1, "group {} valuation {v:b}", g.name);
        }
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn child_without_parent_violates_refinement() {
    let m = Mission::running_example();
    let rules = m.world.rules();
    assert!(!m.world.typeset.refinement_rel.is_empty());
    for (child, parent) in &m.world.typeset.refinement_rel {
        let val = |a: &Atom| a == child;
        assert!(!holds(&rules.refinement, &val), "{child} without {parent}");
        let val = |a: &Atom| a == child || a == parent;
        let relevant: Vec<Formula> =
            rules.refinement.iter().filter(|r| r.atoms().contains(parent)).cloned().collect();
        assert!(holds(&relevant, &val));
    }
}

#[test]
fn rule_inference_is_deterministic() {
    let a = Mission::running_example().world.rules();
    let b = Mission::running_example().world.rules();
    assert_eq!(a.mtx, b.mtx);
    assert_eq!(a.refinement, b.refinement);
    assert_eq!(a.adj, b.adj);
}

#[test]
fn running_example_world() {
    let m = Mission::running_example();
    assert_eq!(m.goals.len(), 4);
    assert_eq!(m.world.contexts.len(), 2);
    assert_eq!(m.world.typeset.adjacency_graph().len(), 5);
}
