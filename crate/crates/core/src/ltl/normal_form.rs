//! Conjunctive and disjunctive normal forms of the propositional skeleton.
//! Atoms and temporal subformulas are the indivisible literals.

use std::collections::BTreeSet;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalLiteral {
    pub formula: Formula,
    pub positive: bool,
}

impl NormalLiteral {
    pub fn to_formula(&self) -> Formula {
        if self.positive {
            self.formula.clone()
        } else {
            Formula::not(self.formula.clone())
        }
    }
}

type Clause = BTreeSet<NormalLiteral>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    /// Clauses; their conjunction is the formula.
    pub cnf: BTreeSet<Clause>,
    /// Cubes; their disjunction is the formula.
    pub dnf: BTreeSet<Clause>,
}

impl NormalForm {
    pub fn cnf_formula(&self) -> Formula {
        Formula::conj(
            self.cnf
                .iter()
                .map(|c| Formula::disj(c.iter().map(NormalLiteral::to_formula))),
        )
    }

    pub fn dnf_formula(&self) -> Formula {
        Formula::disj(
            self.dnf
                .iter()
                .map(|c| Formula::conj(c.iter().map(NormalLiteral::to_formula))),
        )
    }
}

pub fn normal_form(f: &Formula) -> NormalForm {
    NormalForm { cnf: cnf(f, true), dnf: dnf(f, true) }
}

fn literal(f: &Formula, positive: bool) -> BTreeSet<Clause> {
    BTreeSet::from([BTreeSet::from([NormalLiteral { formula: f.clone(), positive }])])
}

fn complementary(c: &Clause) -> bool {
    c.iter().any(|l| c.contains(&NormalLiteral { formula: l.formula.clone(), positive: !l.positive }))
}

/// Pairwise unions of the clause sets, dropping tautological clauses.
fn product(a: &BTreeSet<Clause>, b: &BTreeSet<Clause>) -> BTreeSet<Clause> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            let c: Clause = x.union(y).cloned().collect();
            if !complementary(&c) {
                out.insert(c);
            }
        }
    }
    out
}

/// Clauses of `f` (or of `!f` when `pos` is false).
fn cnf(f: &Formula, pos: bool) -> BTreeSet<Clause> {
    match (f, pos) {
        (Formula::True, true) | (Formula::False, false) => BTreeSet::new(),
        (Formula::False, true) | (Formula::True, false) => BTreeSet::from([BTreeSet::new()]),
        (Formula::Not(a), _) => cnf(a, !pos),
        (Formula::And(a, b), true) => cnf(a, true).union(&cnf(b, true)).cloned().collect(),
        (Formula::Or(a, b), false) => cnf(a, false).union(&cnf(b, false)).cloned().collect(),
        (Formula::Implies(a, b), false) => cnf(a, true).union(&cnf(b, false)).cloned().collect(),
        (Formula::Or(a, b), true) => product(&cnf(a, true), &cnf(b, true)),
        (Formula::And(a, b), false) => product(&cnf(a, false), &cnf(b, false)),
        (Formula::Implies(a, b), true) => product(&cnf(a, false), &cnf(b, true)),
        (Formula::Iff(a, b), _) => {
            // a <-> b = (!a | b) & (a | !b); its negation = (a | b) & (!a | !b)
            let l = product(&cnf(a, !pos), &cnf(b, true));
            let r = product(&cnf(a, pos), &cnf(b, false));
            l.union(&r).cloned().collect()
        }
        (other, _) => literal(other, pos),
    }
}

/// Cubes of `f` (or of `!f` when `pos` is false).
fn dnf(f: &Formula, pos: bool) -> BTreeSet<Clause> {
    match (f, pos) {
        (Formula::True, true) | (Formula::False, false) => BTreeSet::from([BTreeSet::new()]),
        (Formula::False, true) | (Formula::True, false) => BTreeSet::new(),
        (Formula::Not(a), _) => dnf(a, !pos),
        (Formula::Or(a, b), true) => dnf(a, true).union(&dnf(b, true)).cloned().collect(),
        (Formula::And(a, b), false) => dnf(a, false).union(&dnf(b, false)).cloned().collect(),
        (Formula::Implies(a, b), true) => dnf(a, false).union(&dnf(b, true)).cloned().collect(),
        (Formula::And(a, b), true) => product(&dnf(a, true), &dnf(b, true)),
        (Formula::Or(a, b), false) => product(&dnf(a, false), &dnf(b, false)),
        (Formula::Implies(a, b), false) => product(&dnf(a, true), &dnf(b, false)),
        (Formula::Iff(a, b), _) => {
            // a <-> b = (a & b) | (!a & !b); its negation = (a & !b) | (!a & b)
            let l = product(&dnf(a, true), &dnf(b, pos));
            let r = product(&dnf(a, false), &dnf(b, !pos));
            l.union(&r).cloned().collect()
        }
        (other, _) => literal(other, pos),
    }
}
