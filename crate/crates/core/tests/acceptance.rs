//! The nine acceptance criteria, one pass/fail line each.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{algebra_laws, atom, brute_force_sat, build_game, contract, floyd_warshall, formula_corpus, naive_gr1, random_game};
use mission_core::cgg::{extract_scenarios, LinkKind};
use mission_core::ltl::{Atom, Checker};
use mission_core::mission::Mission;
use mission_core::monitor::{check_trace, Verdict};
use mission_core::orchestrator::{model_check, CheckConfig, Network, Periodic, RandomFair, ScriptScheduler};
use mission_core::pipeline::{bench, build_graph, run_pipeline, PipelineOptions};
use mission_core::synth::{check_controller, solve};
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let d = start.elapsed();
    ensure(d < limit, || format!("took {d:?}, limit {limit:?}"))?;
    Ok(d)
}

fn names(cgg: &mission_core::cgg::Cgg, node: usize) -> BTreeSet<String> {
    cgg.edges
        .iter()
        .filter(|e| e.0 == node && e.2 == LinkKind::Composition)
        .map(|e| cgg.nodes[e.1].name.clone())
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = Mission::running_example();
    let (cgg, _) = build_graph(&m).map_err(|e| e.to_string())?;
    let scenarios = extract_scenarios(&cgg);
    let d = within(start, Duration::from_secs(5))?;
    ensure(m.goals.len() == 4, || "expected 4 input goals".into())?;
    ensure(cgg.nodes.len() == 7, || format!("{} nodes", cgg.nodes.len()))?;
    ensure(cgg.clusters.len() == 2 && scenarios.len() == 2, || "expected two clusters and scenarios".into())?;
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let day = names(&cgg, cgg.clusters[0].1);
    let night = names(&cgg, cgg.clusters[1].1);
    ensure(cgg.clusters[0].0.name() == "day" && day == set(&["day_patrolling", "day_register", "always_greet"]), || {
        format!("day cluster {day:?}")
    })?;
    ensure(cgg.clusters[1].0.name() == "night" && night == set(&["night_patrolling", "always_greet"]), || {
        format!("night cluster {night:?}")
    })?;
    let roots: Vec<usize> = (0..cgg.nodes.len()).filter(|&n| cgg.parents(n).is_empty()).collect();
    ensure(roots == vec![cgg.root], || format!("roots {roots:?}"))?;
    let conj = cgg.edges.iter().filter(|e| e.0 == cgg.root && e.2 == LinkKind::Conjunction).count();
    ensure(conj == 2, || format!("{conj} conjunction edges"))?;
    Ok(format!("7 nodes, clusters day {day:?} night {night:?}, one root, {d:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let m = Mission::running_example();
    let p = run_pipeline(&m, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for (s, c) in p.scenarios.iter().zip(&p.controllers) {
        let limit = if c.context.name() == "day" { 10 } else { 6 };
        ensure(c.machine.num_states() <= limit, || format!("{} has {} states", s.name, c.machine.num_states()))?;
        let sound = check_controller(&c.machine, s, &m.world).map_err(|e| e.to_string())?;
        ensure(sound, || format!("{} fails the soundness check", s.name))?;
        sizes.push(format!("{} {}", c.context, c.machine.num_states()));
    }
    let d = within(start, Duration::from_secs(30))?;
    Ok(format!("realizable and sound, states: {}, {d:?}", sizes.join(", ")))
}

fn criterion_3() -> Outcome {
    let m = Mission::running_example();
    let r = bench(&m, &PipelineOptions::default(), 5).map_err(|e| e.to_string())?;
    let (ms, mt) = (r.modular_total.arena_states, r.modular_total.time_ms);
    let (ns, nt) = (r.monolithic.arena_states, r.monolithic.time_ms);
    ensure(ns >= 2 * ms, || format!("arena states monolithic {ns} vs modular {ms}"))?;
    ensure(nt >= 2.0 * mt, || format!("time monolithic {nt:.3} ms vs modular {mt:.3} ms"))?;
    Ok(format!("arena states {ns} vs {ms} ({:.1}x), time {nt:.3} ms vs {mt:.3} ms ({:.1}x)", ns as f64 / ms as f64, nt / mt))
}

fn criterion_4() -> Outcome {
    let m = Mission::running_example();
    let p = run_pipeline(&m, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    let t = &p.transitions;
    ensure(t.len() == 8, || format!("{} transition controllers", t.len()))?;
    let adj = m.world.typeset.adjacency_graph();
    let locs: Vec<Atom> = adj.keys().cloned().collect();
    let ix = |a: &Atom| locs.iter().position(|b| b == a).unwrap();
    let edges: Vec<(usize, usize)> = adj.iter().flat_map(|(a, bs)| bs.iter().map(move |b| (ix(a), ix(b)))).collect();
    let dist = floyd_warshall(locs.len(), &edges);
    let mut worst = 0;
    for ((from, to), &k) in &t.pairs {
        let path = &t.paths[k];
        ensure(path.windows(2).all(|w| adj[&w[0]].contains(&w[1])), || format!("{from}->{to} leaves the graph"))?;
        let d = dist[ix(from)][ix(to)].ok_or_else(|| format!("{from}->{to} unreachable"))?;
        ensure(path.len() - 1 == d, || format!("{from}->{to} has length {} not {d}", path.len() - 1))?;
        worst = worst.max(d);
    }
    ensure(t.t_trans as usize == worst && worst == 2, || format!("t_trans {} worst {worst}", t.t_trans))?;
    ensure(t.t_trans < m.world.t_context, || "t_trans must be below t_context".into())?;
    ensure(Network::new(2, 2, 2).is_err(), || "t_trans = t_context accepted".into())?;
    Ok(format!("8 controllers, BFS-optimal against all-pairs distances, t_trans {}", t.t_trans))
}

fn criterion_5() -> Outcome {
    let m = Mission::running_example();
    let p = run_pipeline(&m, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    let o = p.orchestration(&m).map_err(|e| e.to_string())?;
    let mut s = ScriptScheduler::new(&m.run.script, &o).map_err(|e| e.to_string())?;
    let trace = o.simulate(&mut s, m.run.horizon).map_err(|e| e.to_string())?;
    let ticks = |a: &str| -> Vec<usize> {
        trace.records.iter().filter(|r| r.outputs.iter().any(|x| x.name() == a)).map(|r| r.tick).collect()
    };
    let (greet, register) = (ticks("greet"), ticks("register"));
    let return_day = trace
        .records
        .iter()
        .find(|r| r.tick > 4 && r.active && r.contexts.iter().any(|x| x.name() == "day"))
        .map(|r| r.tick);
    ensure(greet == vec![3], || format!("greet at {greet:?}"))?;
    ensure(register == vec![11] && return_day == Some(11), || format!("register at {register:?}, day active at {return_day:?}"))?;
    Ok("greet at tick 3, register at tick 11".into())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut sizes = Vec::new();
    for n in [2, 3] {
        let r = model_check(&Network::new(n, 4, 2).unwrap(), &CheckConfig::default()).map_err(|e| e.to_string())?;
        ensure(r.all_hold(), || r.to_text())?;
        ensure(r.properties.len() == 9, || "expected nine properties".into())?;
        sizes.push(format!("N={n}: {} states", r.states));
    }
    let d = within(start, Duration::from_secs(60))?;
    let mutant = model_check(&Network::new(2, 4, 2).unwrap().without_cs_guard(), &CheckConfig::default())
        .map_err(|e| e.to_string())?;
    let killed = mutant.properties.iter().find(|p| !p.holds && p.counterexample.is_some());
    let killed = killed.ok_or("guard mutation not detected")?;
    Ok(format!("{}, all properties hold in {d:?}; mutation caught by {}", sizes.join(", "), killed.name))
}

fn criterion_7() -> Outcome {
    let m = Mission::running_example();
    let p = run_pipeline(&m, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    let o = p.orchestration(&m).map_err(|e| e.to_string())?;
    let monitors = p.monitors().map_err(|e| e.to_string())?;
    for seed in 0..1000 {
        let trace = o.simulate(&mut RandomFair::new(seed, &o), 300).map_err(|e| e.to_string())?;
        for v in check_trace(&trace, &monitors).map_err(|e| e.to_string())? {
            ensure(!matches!(v.verdict, Verdict::Violated(_)), || format!("seed {seed}: {} {:?}", v.context, v.verdict))?;
        }
    }
    let t_context = m.world.t_context as usize;
    for seed in 0..1000u64 {
        let mut cycle = Periodic::random(&o, seed, t_context + (seed as usize % 4), 1 + seed as usize % 5);
        let prefix = (seed as usize * 7) % 40;
        let trace = o
            .simulate_lasso(&mut RandomFair::new(seed, &o), prefix, &mut cycle, 100_000)
            .map_err(|e| e.to_string())?;
        for v in check_trace(&trace, &monitors).map_err(|e| e.to_string())? {
            ensure(v.verdict == Verdict::Satisfied, || format!("lasso {seed}: {} {:?}", v.context, v.verdict))?;
        }
    }
    Ok("1000 random schedules x 300 ticks never violated; 1000 lassos satisfied".into())
}

fn criterion_8() -> Outcome {
    let alphabet = [atom("p"), atom("q")];
    let corpus = formula_corpus(&alphabet, 5, 5000);
    let checker = Checker::without_rules();
    let mut agree = 0;
    for f in &corpus {
        let engine = checker.is_satisfiable(f).map_err(|e| e.to_string())?;
        ensure(engine == brute_force_sat(f, &alphabet, 2, 3), || format!("satisfiability of {f}"))?;
        agree += 1;
    }
    let mut winning = 0;
    for seed in 0..200 {
        let (moves, env, sys) = random_game(seed);
        let sol = solve(&build_game(&moves, &env, &sys));
        let oracle = naive_gr1(&moves, &env, &sys);
        ensure(sol.winning == oracle, || format!("winning region of arena {seed}"))?;
        winning += oracle.iter().filter(|&&w| w).count();
    }
    Ok(format!("{agree}/{} formulas agree; 200/200 arenas agree ({winning} winning states in total)", corpus.len()))
}

fn criterion_9() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&(contract(), contract(), contract()), |(a, b, c)| {
            algebra_laws(&a, &b, &c).map_err(proptest::test_runner::TestCaseError::fail)
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 cases, 0 failures".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("goal graph of the running example", criterion_1),
        ("scenario realizability and controller size", criterion_2),
        ("modular versus monolithic synthesis", criterion_3),
        ("transition controllers", criterion_4),
        ("scripted timeline", criterion_5),
        ("orchestration model checking", criterion_6),
        ("mission satisfaction on random and lasso runs", criterion_7),
        ("engine oracles", criterion_8),
        ("contract algebra laws", criterion_9),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", k + 1),
            Err(detail) => {
                println!("FAIL criterion {} ({name}): {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
