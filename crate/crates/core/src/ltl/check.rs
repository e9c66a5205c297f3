//! Satisfiability, validity and the specification comparison operators,
//! with world rules injected per check kind.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::tableau::{BuchiAutomaton, Invariant, TableauConfig};
use super::{Formula, LtlError};
use crate::world::RuleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

impl CompareOp {
    pub const ALL: [CompareOp; 6] =
        [CompareOp::Eq, CompareOp::Ne, CompareOp::Le, CompareOp::Ge, CompareOp::Lt, CompareOp::Gt];
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Le => "<=",
            CompareOp::Ge => ">=",
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
        })
    }
}

impl FromStr for CompareOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CompareOp::ALL
            .into_iter()
            .find(|op| op.to_string() == s)
            .ok_or_else(|| format!("unknown comparison operator `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CheckStats {
    pub satisfiability: u64,
    pub validity: u64,
}

/// Runs checks against a fixed rule set. Satisfiability sees the mutex
/// rules; validity sees mutex and refinement rules. Results are memoized and
/// every public check call is counted, cached or not.
#[derive(Debug)]
pub struct Checker {
    sat_inv: Invariant,
    sat_rest: Vec<Formula>,
    val_inv: Invariant,
    val_rest: Vec<Formula>,
    config: TableauConfig,
    sat_count: AtomicU64,
    val_count: AtomicU64,
    cache: Mutex<HashMap<(bool, Formula), bool>>,
}

impl Checker {
    pub fn new(rules: &RuleSet) -> Result<Self, LtlError> {
        let (sat_inv, sat_rest) = Invariant::split(&rules.mtx)?;
        let both: Vec<Formula> = rules.mtx.iter().chain(rules.refinement.iter()).cloned().collect();
        let (val_inv, val_rest) = Invariant::split(&both)?;
        Ok(Checker {
            sat_inv,
            sat_rest,
            val_inv,
            val_rest,
            config: TableauConfig::default(),
            sat_count: AtomicU64::new(0),
            val_count: AtomicU64::new(0),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn without_rules() -> Self {
        Checker::new(&RuleSet::default()).expect("empty rule set")
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.config.bound = bound;
        self
    }

    pub fn stats(&self) -> CheckStats {
        CheckStats {
            satisfiability: self.sat_count.load(Ordering::Relaxed),
            validity: self.val_count.load(Ordering::Relaxed),
        }
    }

    pub fn reset_stats(&self) {
        self.sat_count.store(0, Ordering::Relaxed);
        self.val_count.store(0, Ordering::Relaxed);
    }

    fn nonempty(&self, f: Formula, for_validity: bool) -> Result<bool, LtlError> {
        let key = (for_validity, f);
        if let Some(&r) = self.cache.lock().unwrap().get(&key) {
            return Ok(r);
        }
        let (inv, rest) = if for_validity {
            (&self.val_inv, &self.val_rest)
        } else {
            (&self.sat_inv, &self.sat_rest)
        };
        let mut r = false;
        for d in disjuncts(&key.1) {
            let full = Formula::conj(std::iter::once(d).chain(rest.iter().cloned()));
            if !BuchiAutomaton::build(&full, inv, self.config)?.is_empty() {
                r = true;
                break;
            }
        }
        self.cache.lock().unwrap().insert(key, r);
        Ok(r)
    }

    /// True iff `f` together with the mutex rules has a model.
    pub fn is_satisfiable(&self, f: &Formula) -> Result<bool, LtlError> {
        self.sat_count.fetch_add(1, Ordering::Relaxed);
        self.nonempty(f.clone(), false)
    }

    /// True iff `!f` is unsatisfiable together with mutex and refinement rules.
    pub fn is_valid(&self, f: &Formula) -> Result<bool, LtlError> {
        self.val_count.fetch_add(1, Ordering::Relaxed);
        Ok(!self.nonempty(Formula::not(f.clone()), true)?)
    }

    fn le(&self, a: &Formula, b: &Formula) -> Result<bool, LtlError> {
        self.is_valid(&Formula::implies(a.clone(), b.clone()))
    }

    /// `a op b` where `<=` means `a -> b` is valid.
    pub fn compare(&self, a: &Formula, b: &Formula, op: CompareOp) -> Result<bool, LtlError> {
        Ok(match op {
            CompareOp::Le => self.le(a, b)?,
            CompareOp::Ge => self.le(b, a)?,
            CompareOp::Eq => self.le(a, b)? && self.le(b, a)?,
            CompareOp::Ne => !(self.le(a, b)? && self.le(b, a)?),
            CompareOp::Lt => self.le(a, b)? && !self.le(b, a)?,
            CompareOp::Gt => self.le(b, a)? && !self.le(a, b)?,
        })
    }
}

const MAX_DISJUNCTS: usize = 64;

/// Top-level disjuncts of `f`, pushing negations through the boolean
/// connectives and distributing conjunctions while the count stays small.
/// `f` is satisfiable iff one of them is.
fn disjuncts(f: &Formula) -> Vec<Formula> {
    fn go(f: &Formula, pos: bool) -> Vec<Formula> {
        use Formula::*;
        // When the full product is too large, only the smaller side is split.
        let product = |a: Vec<Formula>, b: Vec<Formula>, whole: Formula| {
            let join = |v: &[Formula]| Formula::disj(v.iter().cloned());
            let (a, b) = if a.len() * b.len() <= MAX_DISJUNCTS {
                (a, b)
            } else if a.len() <= b.len() && a.len() <= MAX_DISJUNCTS {
                let jb = join(&b);
                (a, vec![jb])
            } else if b.len() <= MAX_DISJUNCTS {
                (vec![join(&a)], b)
            } else {
                return vec![whole];
            };
            a.iter().flat_map(|x| b.iter().map(move |y| Formula::and(x.clone(), y.clone()))).collect()
        };
        let whole = || if pos { f.clone() } else { Formula::not(f.clone()) };
        let cap = |mut v: Vec<Formula>| {
            if v.len() > MAX_DISJUNCTS {
                v = vec![whole()];
            }
            v
        };
        match (f, pos) {
            (Not(a), _) => go(a, !pos),
            (Or(a, b), true) | (And(a, b), false) => cap([go(a, pos), go(b, pos)].concat()),
            (Implies(a, b), true) => cap([go(a, false), go(b, true)].concat()),
            (And(a, b), true) | (Or(a, b), false) => product(go(a, pos), go(b, pos), whole()),
            (Implies(a, b), false) => product(go(a, true), go(b, false), whole()),
            _ => vec![whole()],
        }
    }
    go(f, true)
}

pub fn is_satisfiable(f: &Formula, rules: &RuleSet) -> Result<bool, LtlError> {
    Checker::new(rules)?.is_satisfiable(f)
}

pub fn is_valid(f: &Formula, rules: &RuleSet) -> Result<bool, LtlError> {
    Checker::new(rules)?.is_valid(f)
}

pub fn compare(a: &Formula, b: &Formula, op: CompareOp, rules: &RuleSet) -> Result<bool, LtlError> {
    Checker::new(rules)?.compare(a, b, op)
}
