//! Robotic mission specification patterns: instantiation to LTL, the
//! context-gated variants, and the safety/liveness split used by synthesis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ltl::{Atom, AtomKind, Formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("{kind} expects {expected} argument(s), got {got}")]
    Arity { kind: PatternKind, expected: &'static str, got: usize },
    #[error("{kind}: argument `{atom}` is a {actual} atom, expected one of {allowed}")]
    ArgumentKind { kind: PatternKind, atom: String, actual: AtomKind, allowed: &'static str },
    #[error("{0} has no context-gated form")]
    NoContextForm(PatternKind),
    #[error("unknown pattern `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternKind {
    Visit,
    Patrolling,
    OrderedPatrolling,
    StrictOrderedPatrolling,
    InstantReaction,
    DelayedReaction,
    PromptReaction,
    BoundReaction,
    BoundDelay,
    Wait,
    AlwaysEventually,
}

impl PatternKind {
    pub const ALL: [PatternKind; 11] = [
        PatternKind::Visit,
        PatternKind::Patrolling,
        PatternKind::OrderedPatrolling,
        PatternKind::StrictOrderedPatrolling,
        PatternKind::InstantReaction,
        PatternKind::DelayedReaction,
        PatternKind::PromptReaction,
        PatternKind::BoundReaction,
        PatternKind::BoundDelay,
        PatternKind::Wait,
        PatternKind::AlwaysEventually,
    ];

    /// Short name used in mission files.
    pub fn short_name(self) -> &'static str {
        match self {
            PatternKind::Visit => "Visit",
            PatternKind::Patrolling => "Patrolling",
            PatternKind::OrderedPatrolling => "OP",
            PatternKind::StrictOrderedPatrolling => "SOP",
            PatternKind::InstantReaction => "IR",
            PatternKind::DelayedReaction => "DR",
            PatternKind::PromptReaction => "PR",
            PatternKind::BoundReaction => "BR",
            PatternKind::BoundDelay => "BD",
            PatternKind::Wait => "Wait",
            PatternKind::AlwaysEventually => "AE",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            PatternKind::Visit => "Visit",
            PatternKind::Patrolling => "Patrolling",
            PatternKind::OrderedPatrolling => "OrderedPatrolling",
            PatternKind::StrictOrderedPatrolling => "StrictOrderedPatrolling",
            PatternKind::InstantReaction => "InstantReaction",
            PatternKind::DelayedReaction => "DelayedReaction",
            PatternKind::PromptReaction => "PromptReaction",
            PatternKind::BoundReaction => "BoundReaction",
            PatternKind::BoundDelay => "BoundDelay",
            PatternKind::Wait => "Wait",
            PatternKind::AlwaysEventually => "AlwaysEventually",
        }
    }

    /// Core movement patterns constrain locations only.
    pub fn is_movement(self) -> bool {
        matches!(
            self,
            PatternKind::Visit
                | PatternKind::Patrolling
                | PatternKind::OrderedPatrolling
                | PatternKind::StrictOrderedPatrolling
        )
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for PatternKind {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternKind::ALL
            .into_iter()
            .find(|k| k.short_name() == s || k.long_name() == s)
            .or(match s {
                "StrictOP" => Some(PatternKind::StrictOrderedPatrolling),
                "InstantaneousReaction" => Some(PatternKind::InstantReaction),
                _ => None,
            })
            .ok_or_else(|| PatternError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternInstance {
    pub kind: PatternKind,
    pub args: Vec<Atom>,
}

const TRIGGER: &[AtomKind] = &[AtomKind::Sensor, AtomKind::Location, AtomKind::Action];
const RESPONSE: &[AtomKind] = &[AtomKind::Location, AtomKind::Action];
const LOCATION: &[AtomKind] = &[AtomKind::Location];

fn check_kind(kind: PatternKind, a: &Atom, allowed: &[AtomKind], label: &'static str) -> Result<(), PatternError> {
    // Internal atoms are plumbing and accepted anywhere.
    if a.kind() == AtomKind::Internal || allowed.contains(&a.kind()) {
        Ok(())
    } else {
        Err(PatternError::ArgumentKind { kind, atom: a.name().to_string(), actual: a.kind(), allowed: label })
    }
}

impl PatternInstance {
    /// Validates arity and argument kinds.
    pub fn new(kind: PatternKind, args: Vec<Atom>) -> Result<Self, PatternError> {
        let arity = |expected: &'static str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(PatternError::Arity { kind, expected, got: args.len() })
            }
        };
        match kind {
            PatternKind::Visit
            | PatternKind::Patrolling
            | PatternKind::OrderedPatrolling
            | PatternKind::StrictOrderedPatrolling => {
                arity("at least 1", !args.is_empty())?;
                for a in &args {
                    check_kind(kind, a, LOCATION, "location")?;
                }
            }
            PatternKind::AlwaysEventually => {
                arity("exactly 1", args.len() == 1)?;
                check_kind(kind, &args[0], TRIGGER, "sensor/location/action")?;
            }
            PatternKind::Wait => {
                arity("exactly 2", args.len() == 2)?;
                check_kind(kind, &args[0], LOCATION, "location")?;
                check_kind(kind, &args[1], TRIGGER, "sensor/location/action")?;
            }
            _ => {
                arity("exactly 2", args.len() == 2)?;
                check_kind(kind, &args[0], TRIGGER, "sensor/location/action")?;
                check_kind(kind, &args[1], RESPONSE, "location/action")?;
            }
        }
        Ok(PatternInstance { kind, args })
    }

    fn lit(&self, i: usize) -> Formula {
        Formula::atom(&self.args[i])
    }

    /// The catalog formula of the pattern.
    pub fn instantiate(&self) -> Formula {
        let n = self.args.len();
        match self.kind {
            PatternKind::Visit => Formula::conj((0..n).map(|i| Formula::eventually(self.lit(i)))),
            PatternKind::Patrolling => Formula::conj(
                (0..n).map(|i| Formula::globally(Formula::eventually(self.lit(i)))),
            ),
            PatternKind::OrderedPatrolling => Formula::conj(self.ordered_conjuncts(false)),
            PatternKind::StrictOrderedPatrolling => Formula::conj(self.ordered_conjuncts(true)),
            PatternKind::InstantReaction => Formula::globally(Formula::implies(self.lit(0), self.lit(1))),
            PatternKind::DelayedReaction => Formula::globally(Formula::implies(
                self.lit(0),
                Formula::eventually(self.lit(1)),
            )),
            PatternKind::PromptReaction => {
                Formula::globally(Formula::implies(self.lit(0), Formula::next(self.lit(1))))
            }
            PatternKind::BoundReaction => Formula::globally(Formula::iff(self.lit(0), self.lit(1))),
            PatternKind::BoundDelay => {
                Formula::globally(Formula::iff(self.lit(0), Formula::next(self.lit(1))))
            }
            PatternKind::Wait => Formula::until(self.lit(0), self.lit(1)),
            PatternKind::AlwaysEventually => Formula::globally(Formula::eventually(self.lit(0))),
        }
    }

    fn ordered_conjuncts(&self, strict: bool) -> Vec<Formula> {
        self.ordered_parts(strict, false)
    }

    /// The chain `GF(l1 & F(l2 & ... F ln))`, the ordering constraints, and
    /// for the strict variant the wrap-around constraint. `weak` swaps every
    /// U for W in the ordering constraints.
    fn ordered_parts(&self, strict: bool, weak: bool) -> Vec<Formula> {
        let n = self.args.len();
        let l = |i: usize| self.lit(i);
        let nl = |i: usize| Formula::not(self.lit(i));
        let until = |a: Formula, b: Formula| if weak { Formula::weak_until(a, b) } else { Formula::until(a, b) };
        let mut out = Vec::new();
        if !weak {
            let mut chain = l(n - 1);
            for i in (0..n - 1).rev() {
                chain = Formula::and(l(i), Formula::eventually(chain));
            }
            out.push(Formula::globally(Formula::eventually(chain)));
        }
        for i in 0..n - 1 {
            out.push(until(nl(i + 1), l(i)));
        }
        for i in 0..n - 1 {
            out.push(Formula::globally(Formula::implies(l(i + 1), Formula::next(until(nl(i + 1), l(i))))));
        }
        if strict && n > 2 {
            out.push(Formula::globally(Formula::implies(l(0), Formula::next(until(nl(0), l(n - 1))))));
        }
        for i in 0..n - 1 {
            out.push(Formula::globally(Formula::implies(l(i), Formula::next(until(nl(i), l(i + 1))))));
        }
        out
    }

    /// The gated variant for context activity `c`. Movement patterns are
    /// returned unmodified.
    pub fn contextualize(&self, c: &Formula) -> Result<Formula, PatternError> {
        if self.kind.is_movement() {
            return Ok(self.instantiate());
        }
        let gated = |i: usize| Formula::and(self.lit(i), c.clone());
        let nc = Formula::not(c.clone());
        Ok(match self.kind {
            PatternKind::InstantReaction => Formula::globally(Formula::implies(gated(0), gated(1))),
            PatternKind::DelayedReaction => {
                Formula::globally(Formula::implies(gated(0), Formula::eventually(gated(1))))
            }
            PatternKind::PromptReaction => Formula::globally(Formula::implies(
                gated(0),
                Formula::next(Formula::weak_until(nc, gated(1))),
            )),
            PatternKind::BoundReaction => Formula::globally(Formula::iff(gated(0), gated(1))),
            PatternKind::BoundDelay => Formula::globally(Formula::iff(
                gated(0),
                Formula::next(Formula::weak_until(nc, gated(1))),
            )),
            PatternKind::Wait => Formula::until(Formula::or(gated(0), nc), gated(1)),
            PatternKind::AlwaysEventually => return Err(PatternError::NoContextForm(self.kind)),
            _ => unreachable!("movement handled above"),
        })
    }

    /// Regions named by a movement pattern.
    pub fn regions(&self) -> Vec<Atom> {
        if self.kind.is_movement() {
            self.args.clone()
        } else {
            Vec::new()
        }
    }

    /// Splits the pattern into a safety formula free of U plus liveness
    /// items; their conjunction is equivalent to [`Self::instantiate`].
    pub fn template(&self) -> Template {
        let n = self.args.len();
        let l = |i: usize| self.lit(i);
        match self.kind {
            PatternKind::Visit => Template {
                safety: Formula::True,
                liveness: (0..n).map(|i| Liveness::Eventually(l(i))).collect(),
            },
            PatternKind::Patrolling | PatternKind::AlwaysEventually => Template {
                safety: Formula::True,
                liveness: (0..n).map(|i| Liveness::Recurrence(l(i))).collect(),
            },
            PatternKind::OrderedPatrolling | PatternKind::StrictOrderedPatrolling => Template {
                safety: Formula::conj(self.ordered_parts(self.kind == PatternKind::StrictOrderedPatrolling, true)),
                liveness: (0..n).map(|i| Liveness::Recurrence(l(i))).collect(),
            },
            PatternKind::DelayedReaction => Template {
                safety: Formula::True,
                liveness: vec![Liveness::Response(l(0), l(1))],
            },
            PatternKind::Wait => Template {
                safety: Formula::weak_until(l(0), l(1)),
                liveness: vec![Liveness::Eventually(l(1))],
            },
            PatternKind::InstantReaction
            | PatternKind::PromptReaction
            | PatternKind::BoundReaction
            | PatternKind::BoundDelay => Template { safety: self.instantiate(), liveness: Vec::new() },
        }
    }
}

impl fmt::Display for PatternInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<&str> = self.args.iter().map(|a| a.name()).collect();
        write!(f, "{}({})", self.kind, args.join(", "))
    }
}

/// A liveness obligation over propositional arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Liveness {
    /// `G F p`
    Recurrence(Formula),
    /// `F p`
    Eventually(Formula),
    /// `G(t -> F r)`
    Response(Formula, Formula),
}

impl Liveness {
    pub fn to_formula(&self) -> Formula {
        match self {
            Liveness::Recurrence(p) => Formula::globally(Formula::eventually(p.clone())),
            Liveness::Eventually(p) => Formula::eventually(p.clone()),
            Liveness::Response(t, r) => {
                Formula::globally(Formula::implies(t.clone(), Formula::eventually(r.clone())))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub safety: Formula,
    pub liveness: Vec<Liveness>,
}

impl Template {
    pub fn to_formula(&self) -> Formula {
        Formula::conj_simp(
            std::iter::once(self.safety.clone()).chain(self.liveness.iter().map(Liveness::to_formula)),
        )
    }
}

/// Convenience constructor for tests and examples; panics on invalid input.
pub fn pattern(kind: PatternKind, args: &[&Atom]) -> PatternInstance {
    PatternInstance::new(kind, args.iter().map(|a| (*a).clone()).collect()).expect("valid pattern")
}
