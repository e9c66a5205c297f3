//! Discrete-time model of the orchestration network: contexts, task
//! automata, transition automata and the orchestrator. Each action below
//! bundles a chain of committed locations, so it completes within a tick.

use std::fmt;

use crate::orchestrator::OrchestratorError;

/// Orchestrator location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orch {
    Init,
    Spec(usize),
    Transit(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetState {
    pub ctx_active: Vec<bool>,
    /// Context clocks, capped at `t_context`.
    pub tx: Vec<u32>,
    pub s_active: Vec<bool>,
    /// Transition automata, indexed `i * n + j`.
    pub t_active: Vec<bool>,
    pub tt: Vec<u32>,
    pub orch: Orch,
    pub cs_enabled: bool,
    /// Last context that became active.
    pub cur: Option<usize>,
}

impl NetState {
    pub fn active_transition(&self, n: usize) -> Option<(usize, usize)> {
        self.t_active.iter().position(|&b| b).map(|k| (k / n, k % n))
    }

    pub fn active_task(&self) -> Option<usize> {
        self.s_active.iter().position(|&b| b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetAction {
    /// Context `i` becomes active, with the orchestrator's reaction.
    Activate(usize),
    /// Transition automaton `(i, j)` finishes and `S[j]` starts.
    TransDone(usize, usize),
    /// One time unit elapses.
    Tick,
}

impl fmt::Display for NetAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetAction::Activate(i) => write!(f, "activate C[{i}]"),
            NetAction::TransDone(i, j) => write!(f, "done T[{i}][{j}]"),
            NetAction::Tick => write!(f, "tick"),
        }
    }
}

/// Side effects the controllers observe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetEvent {
    ContextActive(usize),
    ContextIdle(usize),
    /// `activate()` of a task automaton.
    Go(usize),
    /// `deactivate()` of a task automaton.
    Stop(usize),
    /// `trans_start()` of a transition automaton.
    Transit(usize, usize),
    /// `trans_end()` of a transition automaton.
    Done(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Network {
    pub n: usize,
    pub t_context: u32,
    pub t_trans: u32,
    /// Whether a context may only start while `cs_enabled` holds. Disabling
    /// it yields a faulty network used to test the checker.
    pub cs_guard: bool,
}

impl Network {
    pub fn new(n: usize, t_context: u32, t_trans: u32) -> Result<Network, OrchestratorError> {
        if t_trans >= t_context {
            return Err(OrchestratorError::Parameter(format!(
                "t_trans ({t_trans}) must be smaller than t_context ({t_context})"
            )));
        }
        if n == 0 {
            return Err(OrchestratorError::Parameter("at least one context is required".into()));
        }
        Ok(Network { n, t_context, t_trans, cs_guard: true })
    }

    pub fn without_cs_guard(mut self) -> Network {
        self.cs_guard = false;
        self
    }

    pub fn num_transition_automata(&self) -> usize {
        self.n * self.n - self.n
    }

    pub fn initial(&self) -> NetState {
        let n = self.n;
        NetState {
            ctx_active: vec![false; n],
            tx: vec![0; n],
            s_active: vec![false; n],
            t_active: vec![false; n * n],
            tt: vec![0; n * n],
            orch: Orch::Init,
            cs_enabled: true,
            cur: None,
        }
    }

    pub fn can_activate(&self, s: &NetState, i: usize) -> bool {
        !s.ctx_active[i]
            && s.cur != Some(i)
            && (!self.cs_guard || s.cs_enabled)
            && matches!(s.orch, Orch::Init | Orch::Spec(_))
    }

    pub fn can_tick(&self, s: &NetState) -> bool {
        s.t_active.iter().zip(&s.tt).all(|(&a, &t)| !a || t < self.t_trans)
    }

    /// Actions enabled in `s`. A transition automaton may finish at any
    /// point before its deadline.
    pub fn enabled(&self, s: &NetState) -> Vec<NetAction> {
        let mut out: Vec<NetAction> = (0..self.n).filter(|&i| self.can_activate(s, i)).map(NetAction::Activate).collect();
        if let Some((i, j)) = s.active_transition(self.n) {
            out.push(NetAction::TransDone(i, j));
        }
        if self.can_tick(s) {
            out.push(NetAction::Tick);
        }
        out
    }

    /// Applies `a`, or returns `None` when it is not enabled.
    pub fn apply(&self, s: &NetState, a: NetAction) -> Option<(NetState, Vec<NetEvent>)> {
        let n = self.n;
        let mut t = s.clone();
        let mut ev = Vec::new();
        match a {
            NetAction::Activate(i) => {
                if !self.can_activate(s, i) {
                    return None;
                }
                // Broadcast cs: contexts past their minimum time leave.
                for j in 0..n {
                    if t.ctx_active[j] && t.tx[j] >= self.t_context {
                        t.ctx_active[j] = false;
                        ev.push(NetEvent::ContextIdle(j));
                    }
                }
                t.ctx_active[i] = true;
                t.tx[i] = 0;
                t.cs_enabled = false;
                t.cur = Some(i);
                ev.push(NetEvent::ContextActive(i));
                match t.orch {
                    Orch::Init => {
                        t.s_active[i] = true;
                        t.orch = Orch::Spec(i);
                        ev.push(NetEvent::Go(i));
                    }
                    Orch::Spec(c) => {
                        t.s_active[c] = false;
                        ev.push(NetEvent::Stop(c));
                        t.t_active[c * n + i] = true;
                        t.tt[c * n + i] = 0;
                        t.orch = Orch::Transit(c, i);
                        ev.push(NetEvent::Transit(c, i));
                    }
                    Orch::Transit(..) => unreachable!("guarded by can_activate"),
                }
            }
            NetAction::TransDone(i, j) => {
                if !s.t_active[i * n + j] {
                    return None;
                }
                t.t_active[i * n + j] = false;
                t.tt[i * n + j] = 0;
                ev.push(NetEvent::Done(i, j));
                if t.orch == Orch::Transit(i, j) {
                    t.s_active[j] = true;
                    t.orch = Orch::Spec(j);
                    ev.push(NetEvent::Go(j));
                }
            }
            NetAction::Tick => {
                if !self.can_tick(s) {
                    return None;
                }
                for j in 0..n {
                    if t.ctx_active[j] {
                        t.tx[j] = (t.tx[j] + 1).min(self.t_context);
                    }
                }
                for k in 0..n * n {
                    if t.t_active[k] {
                        t.tt[k] += 1;
                    }
                }
                if let Some(c) = t.cur {
                    if t.ctx_active[c] && t.tx[c] >= self.t_context {
                        t.cs_enabled = true;
                    }
                }
            }
        }
        Some((t, ev))
    }
}
