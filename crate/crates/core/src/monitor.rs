//! Checking executions against scenario specifications: each scenario sees
//! only the ticks where its context holds and a task controller is in
//! charge, read as a contiguous trace.
//!
//! Because projected ticks are read back to back, `X` steps over the gaps
//! left by other contexts and by transitions: an obligation raised just
//! before a context switch is due at the scenario's next active tick.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::ltl::{to_buchi, Atom, BuchiAutomaton, Formula, LtlError};
use crate::orchestrator::ExecutionTrace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonitorError {
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error("loop start {start} is outside a trace of length {len}")]
    InvalidLoop { start: usize, len: usize },
}

/// Ticks where context `x` holds and a task controller is active.
pub fn indexing(x: &Atom, trace: &ExecutionTrace) -> Vec<usize> {
    trace.records.iter().filter(|r| r.active && r.contexts.contains(x)).map(|r| r.tick).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedTrace {
    /// Source ticks, ascending.
    pub index: Vec<usize>,
    /// True inputs and outputs at each selected tick.
    pub entries: Vec<BTreeSet<Atom>>,
    /// Position in `entries` where the repeated part starts, when the
    /// source is a lasso whose loop meets the index set.
    pub loop_start: Option<usize>,
}

impl ProjectedTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Restricts `trace` to the ticks in `h`.
pub fn project(h: &[usize], trace: &ExecutionTrace) -> ProjectedTrace {
    let ticks: BTreeSet<usize> = h.iter().copied().collect();
    let mut index = Vec::new();
    let mut entries = Vec::new();
    for r in trace.records.iter().filter(|r| ticks.contains(&r.tick)) {
        index.push(r.tick);
        entries.push(r.inputs.iter().chain(&r.outputs).cloned().collect());
    }
    let loop_start = trace.loop_start.and_then(|l| {
        let k = index.iter().filter(|&&t| t < trace.records[l].tick).count();
        (k < index.len()).then_some(k)
    });
    ProjectedTrace { index, entries, loop_start }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No continuation satisfies the formula from this position on. For a
    /// lasso rejected without a bad prefix, the position is the loop start.
    Violated(usize),
    /// The lasso's infinite word satisfies the formula.
    Satisfied,
    /// A finite prefix with some satisfying continuation.
    Pending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Prefix,
    Lasso { loop_start: usize },
}

/// A compiled formula, reusable across traces.
#[derive(Debug, Clone)]
pub struct Monitor {
    formula: Formula,
    ba: BuchiAutomaton,
    live: Vec<bool>,
}

impl Monitor {
    pub fn new(f: &Formula) -> Result<Monitor, LtlError> {
        let ba = to_buchi(f)?;
        let live = ba.live_states();
        Ok(Monitor { formula: f.clone(), ba, live })
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    fn encode(&self, entry: &BTreeSet<Atom>) -> u64 {
        self.ba.encode(|a| entry.contains(a))
    }

    fn start(&self) -> BTreeSet<usize> {
        if self.live[0] {
            BTreeSet::from([0])
        } else {
            BTreeSet::new()
        }
    }

    fn advance(&self, set: &BTreeSet<usize>, v: u64) -> BTreeSet<usize> {
        set.iter()
            .flat_map(|&s| self.ba.states()[s].succ.iter().copied())
            .filter(|&t| self.live[t] && self.ba.matches(t, v))
            .collect()
    }

    /// First position after which no continuation can satisfy the formula.
    fn first_violation(&self, word: impl Iterator<Item = u64>) -> Option<usize> {
        let mut set = self.start();
        if set.is_empty() {
            return Some(0);
        }
        for (k, v) in word.enumerate() {
            set = self.advance(&set, v);
            if set.is_empty() {
                return Some(k);
            }
        }
        None
    }

    pub fn evaluate(&self, pt: &ProjectedTrace, mode: EvalMode) -> Result<Verdict, MonitorError> {
        let word: Vec<u64> = pt.entries.iter().map(|e| self.encode(e)).collect();
        match mode {
            EvalMode::Prefix => {
                Ok(self.first_violation(word.iter().copied()).map_or(Verdict::Pending, Verdict::Violated))
            }
            EvalMode::Lasso { loop_start } => {
                if loop_start >= word.len() {
                    return Err(MonitorError::InvalidLoop { start: loop_start, len: word.len() });
                }
                let (stem, cycle) = word.split_at(loop_start);
                if self.ba.accepts_lasso(stem, cycle) {
                    return Ok(Verdict::Satisfied);
                }
                // Look for a bad prefix; the state set at the loop start
                // eventually repeats.
                let mut set = self.start();
                let mut pos = 0;
                for &v in stem {
                    set = self.advance(&set, v);
                    if set.is_empty() {
                        return Ok(Verdict::Violated(pos));
                    }
                    pos += 1;
                }
                let mut seen = HashSet::new();
                while seen.insert(set.clone()) {
                    for &v in cycle {
                        set = self.advance(&set, v);
                        if set.is_empty() {
                            return Ok(Verdict::Violated(pos));
                        }
                        pos += 1;
                    }
                }
                Ok(Verdict::Violated(loop_start))
            }
        }
    }
}

pub fn evaluate(f: &Formula, pt: &ProjectedTrace, mode: EvalMode) -> Result<Verdict, MonitorError> {
    Monitor::new(f)?.evaluate(pt, mode)
}

/// Verdict of one scenario on one trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioVerdict {
    pub context: Atom,
    pub index: Vec<usize>,
    pub verdict: Verdict,
}

/// Projects `trace` for each `(context, formula)` pair and evaluates it:
/// as a lasso when the trace is one and its loop meets the projection,
/// otherwise as a prefix.
pub fn check_trace(trace: &ExecutionTrace, monitors: &[(Atom, Monitor)]) -> Result<Vec<ScenarioVerdict>, MonitorError> {
    monitors
        .iter()
        .map(|(x, m)| {
            let index = indexing(x, trace);
            let pt = project(&index, trace);
            let mode = pt.loop_start.map_or(EvalMode::Prefix, |l| EvalMode::Lasso { loop_start: l });
            Ok(ScenarioVerdict { context: x.clone(), verdict: m.evaluate(&pt, mode)?, index })
        })
        .collect()
}

pub fn report_text(verdicts: &[ScenarioVerdict]) -> String {
    let mut s = String::new();
    for v in verdicts {
        let verdict = match v.verdict {
            Verdict::Violated(k) => format!("violated at position {k} (tick {})", v.index.get(k).map_or("-".into(), |t| t.to_string())),
            Verdict::Satisfied => "satisfied".into(),
            Verdict::Pending => "pending".into(),
        };
        let ticks: Vec<String> = v.index.iter().map(usize::to_string).collect();
        writeln!(s, "{}\tlength {}\t{}\tticks {}", v.context, v.index.len(), verdict, ticks.join(",")).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse_free, AtomKind};
    use crate::orchestrator::TickRecord;

    fn atom(n: &str) -> Atom {
        Atom::new(n, AtomKind::Internal)
    }

    fn trace(rows: &[(&[&str], bool, &[&str])]) -> ExecutionTrace {
        ExecutionTrace {
            records: rows
                .iter()
                .enumerate()
                .map(|(t, (ctx, active, out))| TickRecord {
                    tick: t,
                    contexts: ctx.iter().map(|c| atom(c)).collect(),
                    active: *active,
                    activations: vec![],
                    inputs: vec![],
                    outputs: out.iter().map(|c| atom(c)).collect(),
                    events: vec![],
                })
                .collect(),
            loop_start: None,
        }
    }

    #[test]
    fn indexing_needs_context_and_active() {
        let t = trace(&[(&["x"], true, &[]), (&["x"], false, &[]), (&["y"], true, &[]), (&["x"], true, &[])]);
        assert_eq!(indexing(&atom("x"), &t), vec![0, 3]);
        assert_eq!(indexing(&atom("y"), &t), vec![2]);
        assert!(project(&[], &t).is_empty());
    }

    #[test]
    fn prefix_violation_position() {
        let f = parse_free("G(p -> g)").unwrap();
        let rows: Vec<(&[&str], bool, &[&str])> = vec![
            (&["x"], true, &["g"]),
            (&["x"], true, &[]),
            (&["x"], true, &["p", "g"]),
            (&["x"], true, &[]),
            (&["x"], true, &["p"]),
            (&["x"], true, &[]),
        ];
        let t = trace(&rows);
        let pt = project(&indexing(&atom("x"), &t), &t);
        assert_eq!(evaluate(&f, &pt, EvalMode::Prefix).unwrap(), Verdict::Violated(4));
        let empty = project(&[], &t);
        assert_eq!(evaluate(&f, &empty, EvalMode::Prefix).unwrap(), Verdict::Pending);
    }

    #[test]
    fn lasso_mode_is_exact() {
        let f = parse_free("G F p").unwrap();
        let rows: Vec<(&[&str], bool, &[&str])> = vec![(&["x"], true, &[]), (&["x"], true, &["p"]), (&["x"], true, &[])];
        let t = trace(&rows);
        let pt = project(&[0, 1, 2], &t);
        assert_eq!(evaluate(&f, &pt, EvalMode::Lasso { loop_start: 1 }).unwrap(), Verdict::Satisfied);
        assert_eq!(evaluate(&f, &pt, EvalMode::Lasso { loop_start: 2 }).unwrap(), Verdict::Violated(2));
        assert!(evaluate(&f, &pt, EvalMode::Lasso { loop_start: 3 }).is_err());
        assert_eq!(evaluate(&f, &pt, EvalMode::Prefix).unwrap(), Verdict::Pending);
    }
}
