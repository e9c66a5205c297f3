//! Linear temporal logic: syntax, parsing, printing, normal forms, tableau
//! translation to generalized Büchi automata and the satisfiability-based
//! checks built on top of it.

mod check;
mod normal_form;
mod parse;
mod tableau;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use check::{compare, is_satisfiable, is_valid, CheckStats, Checker, CompareOp};
pub use normal_form::{normal_form, NormalForm, NormalLiteral};
pub use parse::{parse, parse_free, AtomTable, FreeAtoms, ParseError};
pub use tableau::{to_buchi, BuchiAutomaton, BuchiState, Invariant, Lasso, TableauConfig};

/// Default bound on the number of tableau states built for a single check.
pub const DEFAULT_STATE_BOUND: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtlError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown identifier `{0}`")]
    UnknownAtom(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

/// What an atomic proposition describes in the robot's world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Sensor,
    Location,
    Action,
    Context,
    /// Plumbing atoms such as the active signal or activation inputs.
    Internal,
}

impl AtomKind {
    /// Sensors and contexts are driven by the environment.
    pub fn is_input(self) -> bool {
        matches!(self, AtomKind::Sensor | AtomKind::Context)
    }
}

impl fmt::Display for AtomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AtomKind::Sensor => "sensor",
            AtomKind::Location => "location",
            AtomKind::Action => "action",
            AtomKind::Context => "context",
            AtomKind::Internal => "internal",
        };
        f.write_str(s)
    }
}

/// A typed atomic proposition. Identity is the name: names are unique
/// within a typeset, so the kind is carried along as metadata only.
#[derive(Debug, Clone)]
pub struct Atom {
    name: Arc<str>,
    kind: AtomKind,
}

impl Atom {
    pub fn new(name: impl AsRef<str>, kind: AtomKind) -> Self {
        Atom { name: Arc::from(name.as_ref()), kind }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Atom {}

impl std::hash::Hash for Atom {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name.hash(state)
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name.cmp(&other.name)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// LTL abstract syntax. `PartialEq` is syntactic equality; semantic
/// equivalence is [`Checker::compare`] with [`CompareOp::Eq`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Iff(Arc<Formula>, Arc<Formula>),
    Next(Arc<Formula>),
    Until(Arc<Formula>, Arc<Formula>),
    WeakUntil(Arc<Formula>, Arc<Formula>),
    Globally(Arc<Formula>),
    Eventually(Arc<Formula>),
}

impl Formula {
    pub fn atom(a: &Atom) -> Formula {
        Formula::Atom(a.clone())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Arc::new(a), Arc::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Arc::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Arc::new(a), Arc::new(b))
    }

    pub fn weak_until(a: Formula, b: Formula) -> Formula {
        Formula::WeakUntil(Arc::new(a), Arc::new(b))
    }

    pub fn globally(f: Formula) -> Formula {
        Formula::Globally(Arc::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Arc::new(f))
    }

    /// Left-folded conjunction; `true` for an empty iterator.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-folded disjunction; `false` for an empty iterator.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// `a & b` with constant folding.
    pub fn and_simp(a: Formula, b: Formula) -> Formula {
        match (&a, &b) {
            (Formula::False, _) | (_, Formula::False) => Formula::False,
            (Formula::True, _) => b,
            (_, Formula::True) => a,
            _ if a == b => a,
            _ => Formula::and(a, b),
        }
    }

    /// `a | b` with constant folding.
    pub fn or_simp(a: Formula, b: Formula) -> Formula {
        match (&a, &b) {
            (Formula::True, _) | (_, Formula::True) => Formula::True,
            (Formula::False, _) => b,
            (_, Formula::False) => a,
            _ if a == b => a,
            _ => Formula::or(a, b),
        }
    }

    /// `!a` with constant folding and double-negation removal.
    pub fn not_simp(a: Formula) -> Formula {
        match a {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => (*inner).clone(),
            other => Formula::not(other),
        }
    }

    /// `a -> b` with constant folding.
    pub fn implies_simp(a: Formula, b: Formula) -> Formula {
        match (&a, &b) {
            (Formula::True, _) => b,
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (_, Formula::False) => Formula::not_simp(a),
            _ => Formula::implies(a, b),
        }
    }

    pub fn conj_simp(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().fold(Formula::True, Formula::and_simp)
    }

    pub fn disj_simp(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().fold(Formula::False, Formula::or_simp)
    }

    /// Top-level conjuncts, flattening nested `&`.
    pub fn conjuncts(&self) -> Vec<Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            Formula::True => Vec::new(),
            other => vec![other.clone()],
        }
    }

    /// Syntactic equality (the derived `==`), named to keep it apart from
    /// the semantic comparison operators.
    pub fn equals_syntactic(&self, other: &Formula) -> bool {
        self == other
    }

    /// Every atom referenced by the formula.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::Globally(a)
            | Formula::Eventually(a) => a.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b)
            | Formula::Until(a, b)
            | Formula::WeakUntil(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// True when no temporal operator occurs.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(a) => a.is_propositional(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            _ => false,
        }
    }

    pub fn temporal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(a) => a.temporal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.temporal_depth().max(b.temporal_depth())
            }
            Formula::Next(a) | Formula::Globally(a) | Formula::Eventually(a) => 1 + a.temporal_depth(),
            Formula::Until(a, b) | Formula::WeakUntil(a, b) => {
                1 + a.temporal_depth().max(b.temporal_depth())
            }
        }
    }

    /// Number of temporal operator occurrences.
    pub fn temporal_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(a) => a.temporal_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.temporal_count() + b.temporal_count()
            }
            Formula::Next(a) | Formula::Globally(a) | Formula::Eventually(a) => 1 + a.temporal_count(),
            Formula::Until(a, b) | Formula::WeakUntil(a, b) => {
                1 + a.temporal_count() + b.temporal_count()
            }
        }
    }

    /// Evaluates a propositional formula under a valuation.
    /// Returns `None` if the formula has temporal operators.
    pub fn eval_prop(&self, val: &dyn Fn(&Atom) -> bool) -> Option<bool> {
        Some(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => val(a),
            Formula::Not(a) => !a.eval_prop(val)?,
            Formula::And(a, b) => a.eval_prop(val)? && b.eval_prop(val)?,
            Formula::Or(a, b) => a.eval_prop(val)? || b.eval_prop(val)?,
            Formula::Implies(a, b) => !a.eval_prop(val)? || b.eval_prop(val)?,
            Formula::Iff(a, b) => a.eval_prop(val)? == b.eval_prop(val)?,
            _ => return None,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Until(..) | Formula::WeakUntil(..) => 5,
            Formula::Not(_) | Formula::Next(_) | Formula::Globally(_) | Formula::Eventually(_) => 6,
            Formula::True | Formula::False | Formula::Atom(_) => 7,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

fn write_unary(f: &mut fmt::Formatter<'_>, op: &str, child: &Formula) -> fmt::Result {
    if child.precedence() < 6 {
        write!(f, "{op}({child})")
    } else if op == "!" {
        write!(f, "!{child}")
    } else {
        write!(f, "{op} {child}")
    }
}

/// Prints in the concrete grammar accepted by [`parse`], with the minimal
/// parentheses required by precedence and associativity.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write_unary(f, "!", a),
            Formula::Next(a) => write_unary(f, "X", a),
            Formula::Globally(a) => write_unary(f, "G", a),
            Formula::Eventually(a) => write_unary(f, "F", a),
            // left-associative
            Formula::And(a, b) => {
                write_child(f, a, 4)?;
                f.write_str(" & ")?;
                write_child(f, b, 5)
            }
            Formula::Or(a, b) => {
                write_child(f, a, 3)?;
                f.write_str(" | ")?;
                write_child(f, b, 4)
            }
            Formula::Iff(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" <-> ")?;
                write_child(f, b, 2)
            }
            // right-associative
            Formula::Implies(a, b) => {
                write_child(f, a, 3)?;
                f.write_str(" -> ")?;
                write_child(f, b, 2)
            }
            Formula::Until(a, b) => {
                write_child(f, a, 6)?;
                f.write_str(" U ")?;
                write_child(f, b, 5)
            }
            Formula::WeakUntil(a, b) => {
                write_child(f, a, 6)?;
                f.write_str(" W ")?;
                write_child(f, b, 5)
            }
        }
    }
}
