use std::collections::BTreeSet;

use mission_core::cgg::{build_cgg, check_disjoint_scenarios, extract_scenarios, CggError, LinkKind};
use mission_core::ltl::Checker;
use mission_core::mission::Mission;
use mission_core::pipeline::{bench, build_graph, PipelineOptions};

#[test]
fn every_input_goal_is_reachable_from_the_root() {
    let m = Mission::running_example();
    let (cgg, _) = build_graph(&m).unwrap();
    let mut seen = BTreeSet::new();
    let mut stack = vec![cgg.root];
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            stack.extend(cgg.children(n));
        }
    }
    assert_eq!(seen.len(), cgg.nodes.len());
    let leaves: BTreeSet<&str> = cgg.leaves().into_iter().map(|n| cgg.nodes[n].name.as_str()).collect();
    let inputs: BTreeSet<&str> = m.goals.iter().map(|g| g.name.as_str()).collect();
    assert_eq!(leaves, inputs);
    let shared = cgg.node("always_greet").unwrap();
    assert_eq!(cgg.parents(shared).len(), 2);
    assert!(cgg.edges.iter().all(|e| e.2 != LinkKind::Refinement));
}

#[test]
fn construction_is_deterministic() {
    let m = Mission::running_example();
    let (a, _) = build_graph(&m).unwrap();
    let (b, _) = build_graph(&m).unwrap();
    assert_eq!(a.to_dot(), b.to_dot());
    assert_eq!(a.stats, b.stats);
    let (sa, sb) = (extract_scenarios(&a), extract_scenarios(&b));
    for (x, y) in sa.iter().zip(&sb) {
        assert_eq!((&x.name, &x.gamma, &x.regions), (&y.name, &y.gamma, &y.regions));
    }
    assert!(check_disjoint_scenarios(&sa[..1]));
}

#[test]
fn bench_reports_the_graph_counters() {
    let m = Mission::running_example();
    let (cgg, _) = build_graph(&m).unwrap();
    assert!(cgg.stats.satisfiability > 0);
    let r = bench(&m, &PipelineOptions::default(), 1).unwrap();
    assert_eq!(r.satisfiability_checks, cgg.stats.satisfiability);
    assert_eq!(r.validity_checks, cgg.stats.validity);
}

#[test]
fn refinement_links_are_checked() {
    let m = Mission::running_example();
    let (mut cgg, _) = build_graph(&m).unwrap();
    let checker = Checker::new(&m.world.rules()).unwrap();
    let day = cgg.node("day_patrolling").unwrap();
    let night = cgg.node("night_patrolling").unwrap();
    let err = cgg.add_refinement(day, night, &checker).unwrap_err();
    assert!(matches!(err, CggError::NotARefinement { .. }), "{err}");
    let cluster = cgg.clusters[0].1;
    let before = cgg.edges.len();
    cgg.add_refinement(cgg.root, cluster, &checker).unwrap();
    assert_eq!(cgg.edges.len(), before + 1);
}

const CONFLICT: &str = r#"{
  "name": "contradiction",
  "world": {
    "types": [
      { "name": "day", "kind": "context" },
      { "name": "greet", "kind": "action" }
    ],
    "contexts": ["day"],
    "t_context": 3
  },
  "goals": [
    { "name": "always", "context": "day", "guarantees": ["G greet"] },
    { "name": "never", "context": "day", "guarantees": ["G !greet"] }
  ]
}"#;

#[test]
fn contradictory_goals_are_a_conflict() {
    let m = Mission::from_json(CONFLICT).unwrap();
    match build_cgg(m.goals.clone(), &m.world).unwrap_err() {
        CggError::Conflict { goals, .. } => {
            assert!(goals.contains(&"always".to_string()) && goals.contains(&"never".to_string()), "{goals:?}")
        }
        e => panic!("unexpected error {e}"),
    }
}
