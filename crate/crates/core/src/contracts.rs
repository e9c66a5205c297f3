//! Assume-guarantee contracts over LTL: saturation, well-formedness,
//! composition, conjunction and refinement, plus goals binding contracts to
//! contexts.

use std::fmt;
use std::sync::Arc;

use crate::ltl::{Checker, CompareOp, Formula, LtlError};
use crate::patterns::PatternInstance;
use crate::synth::MealyMachine;
use crate::world::World;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error("contract list is empty")]
    Empty,
    /// Indices into the combined list of the smallest infeasible subset
    /// found by greedy deletion.
    #[error("conflicting contracts {0:?}")]
    Conflict(Vec<usize>),
}

/// A specification item: either a catalog pattern or a raw formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Spec {
    Pattern(PatternInstance),
    Raw(Formula),
}

impl Spec {
    pub fn to_formula(&self) -> Formula {
        match self {
            Spec::Pattern(p) => p.instantiate(),
            Spec::Raw(f) => f.clone(),
        }
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spec::Pattern(p) => write!(f, "{p}"),
            Spec::Raw(x) => write!(f, "{x}"),
        }
    }
}

/// One source contract's structure: its guarantees are owed only while all
/// of its assumptions hold. Synthesis works from these rather than from the
/// flattened formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub assumptions: Vec<Spec>,
    pub guarantees: Vec<Spec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct WellFormedness {
    /// The assumptions are satisfiable.
    pub compatible: bool,
    /// The guarantees are satisfiable.
    pub consistent: bool,
    /// Assumptions and guarantees are jointly satisfiable.
    pub feasible: bool,
}

impl WellFormedness {
    pub fn ok(&self) -> bool {
        self.compatible && self.consistent && self.feasible
    }
}

/// An assume-guarantee pair with guarantees kept in saturated form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    assumptions: Formula,
    guarantees: Formula,
    obligations: Vec<Obligation>,
}

/// Saturates `raw` under `assumptions`. Guarantees already of the form
/// `assumptions -> _` are kept as they are.
pub fn saturate(assumptions: Formula, raw: Formula) -> Contract {
    let guarantees = match &raw {
        Formula::Implies(a, _) if **a == assumptions => raw.clone(),
        _ => Formula::implies_simp(assumptions.clone(), raw),
    };
    Contract { assumptions, guarantees, obligations: Vec::new() }
}

impl Contract {
    /// Builds a leaf contract from specification items; both lists are
    /// conjoined, an empty list meaning `true`.
    pub fn from_specs(assumptions: Vec<Spec>, guarantees: Vec<Spec>) -> Contract {
        let psi = Formula::conj_simp(assumptions.iter().map(Spec::to_formula));
        let phi = Formula::conj_simp(guarantees.iter().map(Spec::to_formula));
        let mut c = saturate(psi, phi);
        c.obligations = vec![Obligation { assumptions, guarantees }];
        c
    }

    pub fn assumptions(&self) -> &Formula {
        &self.assumptions
    }

    /// Saturated guarantees.
    pub fn guarantees(&self) -> &Formula {
        &self.guarantees
    }

    pub fn obligations(&self) -> &[Obligation] {
        &self.obligations
    }

    /// Replaces the assumptions and re-saturates against the unsaturated
    /// guarantee `raw`.
    pub fn with_assumptions(&self, assumptions: Formula, raw: Formula) -> Contract {
        let mut c = saturate(assumptions, raw);
        c.obligations = self.obligations.clone();
        c
    }

    /// Saturating an already saturated contract leaves it unchanged.
    pub fn resaturate(&self) -> Contract {
        let mut c = saturate(self.assumptions.clone(), self.guarantees.clone());
        c.obligations = self.obligations.clone();
        c
    }

    /// `assumptions -> guarantees`, the specification a realization must meet.
    pub fn gamma(&self) -> Formula {
        Formula::implies_simp(self.assumptions.clone(), self.guarantees.clone())
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(A: {}, G: {})", self.assumptions, self.guarantees)
    }
}

pub fn check_wellformed(c: &Contract, checker: &Checker) -> Result<WellFormedness, LtlError> {
    Ok(WellFormedness {
        compatible: checker.is_satisfiable(&c.assumptions)?,
        consistent: checker.is_satisfiable(&c.guarantees)?,
        feasible: checker.is_satisfiable(&Formula::and_simp(c.assumptions.clone(), c.guarantees.clone()))?,
    })
}

fn compose_unchecked(cs: &[&Contract]) -> Contract {
    let mut it = cs.iter();
    let first = (*it.next().expect("nonempty")).clone();
    it.fold(first, |acc, c| {
        let phi = Formula::and_simp(acc.guarantees.clone(), c.guarantees.clone());
        let psi = Formula::or_simp(
            Formula::and_simp(acc.assumptions.clone(), c.assumptions.clone()),
            Formula::not_simp(phi.clone()),
        );
        let mut obligations = acc.obligations;
        obligations.extend(c.obligations.iter().cloned());
        // psi -> phi is equivalent to phi here, so phi is already saturated.
        Contract { assumptions: psi, guarantees: phi, obligations }
    })
}

fn conjoin_unchecked(cs: &[&Contract]) -> Contract {
    let psi = Formula::disj_simp(cs.iter().map(|c| c.assumptions.clone()));
    let phi = Formula::conj_simp(cs.iter().map(|c| c.guarantees.clone()));
    saturate(psi, phi)
}

/// Smallest infeasible subset by greedy deletion.
fn conflict_core(
    cs: &[&Contract],
    combine: fn(&[&Contract]) -> Contract,
    checker: &Checker,
) -> Result<Vec<usize>, LtlError> {
    let mut keep: Vec<usize> = (0..cs.len()).collect();
    let mut i = 0;
    while i < keep.len() {
        let trial: Vec<usize> = keep.iter().copied().filter(|&k| k != keep[i]).collect();
        if !trial.is_empty() {
            let sub: Vec<&Contract> = trial.iter().map(|&k| cs[k]).collect();
            if !check_wellformed(&combine(&sub), checker)?.ok() {
                keep = trial;
                continue;
            }
        }
        i += 1;
    }
    Ok(keep)
}

fn checked(
    cs: &[&Contract],
    combine: fn(&[&Contract]) -> Contract,
    checker: &Checker,
) -> Result<Contract, ContractError> {
    if cs.is_empty() {
        return Err(ContractError::Empty);
    }
    let out = combine(cs);
    if !check_wellformed(&out, checker)?.ok() {
        return Err(ContractError::Conflict(conflict_core(cs, combine, checker)?));
    }
    Ok(out)
}

/// Parallel composition: guarantees conjoined, assumptions
/// `(∧ψ) ∨ ¬(∧φ)`, folded left. Fails with the conflicting subset when the
/// result is not well formed.
pub fn compose(cs: &[&Contract], checker: &Checker) -> Result<Contract, ContractError> {
    checked(cs, compose_unchecked, checker)
}

/// Conjunction: assumptions disjoined, guarantees conjoined, saturated.
pub fn conjoin(cs: &[&Contract], checker: &Checker) -> Result<Contract, ContractError> {
    checked(cs, conjoin_unchecked, checker)
}

/// Composition without the well-formedness check.
pub fn compose_raw(cs: &[&Contract]) -> Contract {
    compose_unchecked(cs)
}

/// Conjunction without the well-formedness check.
pub fn conjoin_raw(cs: &[&Contract]) -> Contract {
    conjoin_unchecked(cs)
}

/// `c1 <= c2` iff `c1` has weaker assumptions and stronger guarantees.
pub fn compare_contracts(c1: &Contract, c2: &Contract, op: CompareOp, checker: &Checker) -> Result<bool, LtlError> {
    let le = |a: &Contract, b: &Contract| -> Result<bool, LtlError> {
        Ok(checker.compare(&a.assumptions, &b.assumptions, CompareOp::Ge)?
            && checker.compare(&a.guarantees, &b.guarantees, CompareOp::Le)?)
    };
    Ok(match op {
        CompareOp::Le => le(c1, c2)?,
        CompareOp::Ge => le(c2, c1)?,
        CompareOp::Eq => le(c1, c2)? && le(c2, c1)?,
        CompareOp::Ne => !(le(c1, c2)? && le(c2, c1)?),
        CompareOp::Lt => le(c1, c2)? && !le(c2, c1)?,
        CompareOp::Gt => le(c2, c1)? && !le(c1, c2)?,
    })
}

/// A contract bound to the context in which it applies.
#[derive(Debug, Clone)]
pub struct Goal {
    pub name: String,
    pub description: String,
    /// Formula over context atoms; `true` applies everywhere.
    pub context: Formula,
    pub contract: Contract,
    pub controller: Option<MealyMachine>,
    pub world: Arc<World>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_free;

    fn f(s: &str) -> Formula {
        parse_free(s).unwrap()
    }

    fn c(a: &str, g: &str) -> Contract {
        saturate(f(a), f(g))
    }

    #[test]
    fn saturation() {
        let ck = Checker::without_rules();
        assert_eq!(c("true", "G a").guarantees(), &f("G a"));
        assert_eq!(c("G F p", "G q").guarantees(), &f("G F p -> G q"));
        assert!(ck.is_valid(c("false", "G q").guarantees()).unwrap());
        let s = c("G F p", "G q");
        assert_eq!(s.resaturate(), s);
    }

    #[test]
    fn wellformedness() {
        let ck = Checker::without_rules();
        assert!(!check_wellformed(&c("false", "G a"), &ck).unwrap().compatible);
        let w = check_wellformed(&c("G F p", "G F p -> G !p"), &ck).unwrap();
        assert!(w.compatible && w.consistent && !w.feasible);
    }

    #[test]
    fn composition_conflict_names_the_culprits() {
        let ck = Checker::without_rules();
        let (a, b, d) = (c("true", "G a"), c("true", "G F q"), c("true", "G !a"));
        match compose(&[&a, &b, &d], &ck) {
            Err(ContractError::Conflict(ix)) => assert_eq!(ix, vec![0, 2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn composition_and_conjunction_basics() {
        let ck = Checker::without_rules();
        let x = c("G F p", "G(p -> g)");
        let same = compose(&[&x, &x], &ck).unwrap();
        assert!(ck.compare(same.guarantees(), x.guarantees(), CompareOp::Eq).unwrap());
        let conj = conjoin(&[&c("true", "G a"), &x], &ck).unwrap();
        assert!(ck.is_valid(conj.assumptions()).unwrap());
        assert!(compare_contracts(&conjoin(&[&x, &x], &ck).unwrap(), &x, CompareOp::Eq, &ck).unwrap());
        assert!(compare_contracts(&c("true", "G a"), &c("true", "F a"), CompareOp::Le, &ck).unwrap());
        assert!(compare_contracts(&x, &x, CompareOp::Le, &ck).unwrap());
    }
}
