//! Exhaustive exploration of the orchestration network for a small number
//! of contexts.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::graph;
use crate::orchestrator::network::{NetAction, NetEvent, NetState, Network};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub description: &'static str,
    pub holds: bool,
    /// Actions from the initial state to the violation; a trailing `loop:`
    /// entry starts a cycle for leads-to violations.
    pub counterexample: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub contexts: usize,
    pub t_context: u32,
    pub t_trans: u32,
    pub cs_guard: bool,
    pub states: usize,
    pub transitions: usize,
    /// False when exploration stopped at the state limit.
    pub complete: bool,
    pub properties: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn all_hold(&self) -> bool {
        self.complete && self.properties.iter().all(|p| p.holds)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "contexts {} t_context {} t_trans {} cs_guard {}",
            self.contexts, self.t_context, self.t_trans, self.cs_guard
        )
        .unwrap();
        writeln!(s, "states {} transitions {} complete {}", self.states, self.transitions, self.complete).unwrap();
        for p in &self.properties {
            writeln!(s, "{} {}: {}", if p.holds { "PASS" } else { "FAIL" }, p.name, p.description).unwrap();
            if let Some(cx) = &p.counterexample {
                for step in cx {
                    writeln!(s, "    {step}").unwrap();
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelCheckError {
    #[error("state limit of {limit} reached after {} states", partial.states)]
    StateLimit { limit: usize, partial: Box<CheckReport> },
    #[error("{n} contexts exceed the checker's bound of {bound}")]
    Scope { n: usize, bound: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub max_contexts: usize,
    pub max_states: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { max_contexts: 4, max_states: 5_000_000 }
    }
}

struct Explored {
    states: Vec<NetState>,
    parent: Vec<Option<(usize, NetAction)>>,
    edges: Vec<Vec<(NetAction, usize, Vec<NetEvent>)>>,
    complete: bool,
}

fn explore(net: &Network, max_states: usize) -> Explored {
    let init = net.initial();
    let mut ids: HashMap<NetState, usize> = HashMap::from([(init.clone(), 0)]);
    let mut ex = Explored { states: vec![init], parent: vec![None], edges: Vec::new(), complete: true };
    let mut i = 0;
    while i < ex.states.len() {
        let s = ex.states[i].clone();
        let mut out = Vec::new();
        for a in net.enabled(&s) {
            let (t, ev) = net.apply(&s, a).expect("enabled action applies");
            let id = match ids.get(&t) {
                Some(&id) => id,
                None => {
                    if ex.states.len() >= max_states {
                        ex.complete = false;
                        continue;
                    }
                    let id = ex.states.len();
                    ids.insert(t.clone(), id);
                    ex.states.push(t);
                    ex.parent.push(Some((i, a)));
                    id
                }
            };
            out.push((a, id, ev));
        }
        ex.edges.push(out);
        i += 1;
    }
    ex
}

impl Explored {
    fn path_to(&self, mut s: usize) -> Vec<String> {
        let mut rev = Vec::new();
        while let Some((p, a)) = self.parent[s] {
            rev.push(a.to_string());
            s = p;
        }
        rev.reverse();
        rev
    }

    fn first_state(&self, bad: impl Fn(&NetState) -> bool) -> Option<usize> {
        // States are numbered in breadth-first order, so the first hit has
        // a shortest witness.
        self.states.iter().position(bad)
    }

    fn first_edge(&self, bad: impl Fn(&NetState, NetAction, &[NetEvent]) -> bool) -> Option<Vec<String>> {
        for (s, out) in self.edges.iter().enumerate() {
            for (a, _, ev) in out {
                if bad(&self.states[s], *a, ev) {
                    let mut p = self.path_to(s);
                    p.push(a.to_string());
                    return Some(p);
                }
            }
        }
        None
    }

    /// A time-divergent cycle avoiding `S[i]` reachable from a state where
    /// `C[i]` is active and `S[i]` is not.
    fn starving_cycle(&self, i: usize) -> Option<Vec<String>> {
        let n = self.states.len();
        let inside: Vec<bool> = self.states.iter().map(|s| !s.s_active[i]).collect();
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                if !inside[s] {
                    return Vec::new();
                }
                self.edges.get(s).map_or(Vec::new(), |e| e.iter().map(|x| x.1).filter(|&t| inside[t]).collect())
            })
            .collect();
        let mut comp = vec![usize::MAX; n];
        let sccs = graph::sccs(&succ);
        for (k, c) in sccs.iter().enumerate() {
            for &s in c {
                comp[s] = k;
            }
        }
        // Tick edges inside one component give time-divergent cycles.
        let mut target = vec![false; n];
        let mut tick_edge: HashMap<usize, (usize, usize)> = HashMap::new();
        for s in 0..n {
            if !inside[s] {
                continue;
            }
            for (a, t, _) in self.edges.get(s).into_iter().flatten() {
                if *a == NetAction::Tick && inside[*t] && comp[*t] == comp[s] {
                    target[s] = true;
                    tick_edge.insert(comp[s], (s, *t));
                }
            }
        }
        for k in 0..sccs.len() {
            if tick_edge.contains_key(&k) {
                for &s in &sccs[k] {
                    target[s] = true;
                }
            }
        }
        let can_reach = graph::reach_backward(&succ, &target);
        let start = (0..n).find(|&s| {
            let st = &self.states[s];
            st.ctx_active[i] && !st.s_active[i] && can_reach[s]
        })?;
        let mut cx = self.path_to(start);
        let to_cycle = graph::bfs_path(&succ, start, false, |v| target[v], |_| true)?;
        let label = |a: usize, b: usize| {
            self.edges[a].iter().find(|e| e.1 == b).map(|e| e.0.to_string()).unwrap_or_default()
        };
        for w in to_cycle.windows(2) {
            cx.push(label(w[0], w[1]));
        }
        let entry = *to_cycle.last().unwrap();
        let (ts, tt) = tick_edge[&comp[entry]];
        let same = |v: usize| comp[v] == comp[entry];
        cx.push("loop:".into());
        if let Some(p) = graph::bfs_path(&succ, entry, false, |v| v == ts, same) {
            for w in p.windows(2) {
                cx.push(label(w[0], w[1]));
            }
        }
        cx.push(NetAction::Tick.to_string());
        if let Some(p) = graph::bfs_path(&succ, tt, false, |v| v == entry, same) {
            for w in p.windows(2) {
                cx.push(label(w[0], w[1]));
            }
        }
        Some(cx)
    }
}

fn result(name: &'static str, description: &'static str, cx: Option<Vec<String>>) -> PropertyResult {
    PropertyResult { name, description, holds: cx.is_none(), counterexample: cx }
}

/// Checks the network's safety, leads-to and deadlock properties together
/// with the lemma-level invariants.
pub fn model_check(net: &Network, cfg: &CheckConfig) -> Result<CheckReport, ModelCheckError> {
    if net.n > cfg.max_contexts {
        return Err(ModelCheckError::Scope { n: net.n, bound: cfg.max_contexts });
    }
    let ex = explore(net, cfg.max_states);
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
    let invariant = |bad: &dyn Fn(&NetState) -> bool| ex.first_state(bad).map(|s| ex.path_to(s));
    let mut props = vec![
        result(
            "one_transition",
            "never more than one transition automaton active",
            invariant(&|s| count(&s.t_active) > 1),
        ),
        result("one_context", "at most one context active", invariant(&|s| count(&s.ctx_active) > 1)),
        result("one_task", "at most one task automaton active", invariant(&|s| count(&s.s_active) > 1)),
    ];
    let mut leads_to = None;
    for i in 0..net.n {
        if let Some(cx) = ex.starving_cycle(i) {
            leads_to = Some(cx);
            break;
        }
    }
    props.push(result("context_leads_to_task", "an active context's task automaton eventually becomes active", leads_to));
    props.push(result(
        "no_deadlock",
        "every reachable state has an enabled action",
        ex.edges.iter().position(|e| e.is_empty()).map(|s| ex.path_to(s)),
    ));
    props.push(result(
        "no_repeat_activation",
        "no context becomes active twice in a row",
        ex.first_edge(|s, a, _| matches!(a, NetAction::Activate(i) if s.cur == Some(i))),
    ));
    props.push(result(
        "task_xor_transition",
        "after the first activation exactly one task or transition automaton is active",
        invariant(&|s| s.cur.is_some() && count(&s.s_active) + count(&s.t_active) != 1),
    ));
    props.push(result(
        "transition_bound",
        "a transition automaton is active for at most t_trans time units",
        invariant(&|s| s.t_active.iter().zip(&s.tt).any(|(&a, &t)| a && t > net.t_trans)),
    ));
    props.push(result(
        "minimum_dwell",
        "a context stays active for at least t_context time units",
        ex.first_edge(|s, _, ev| ev.iter().any(|e| matches!(e, NetEvent::ContextIdle(j) if s.tx[*j] < net.t_context))),
    ));
    let report = CheckReport {
        contexts: net.n,
        t_context: net.t_context,
        t_trans: net.t_trans,
        cs_guard: net.cs_guard,
        states: ex.states.len(),
        transitions: ex.edges.iter().map(Vec::len).sum(),
        complete: ex.complete,
        properties: props,
    };
    if !ex.complete {
        return Err(ModelCheckError::StateLimit { limit: cfg.max_states, partial: Box::new(report) });
    }
    Ok(report)
}
