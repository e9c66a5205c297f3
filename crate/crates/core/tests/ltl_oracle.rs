mod common;

use common::{atom, brute_force_sat, eval_lasso, formula_corpus};
use mission_core::ltl::{parse_free, to_buchi, Checker, CompareOp, Formula};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reencode(ba_atoms: &[mission_core::ltl::Atom], alphabet: &[mission_core::ltl::Atom], v: u64) -> u64 {
    ba_atoms.iter().enumerate().fold(0, |acc, (i, a)| {
        let k = alphabet.iter().position(|b| b == a).unwrap();
        acc | (v >> k & 1) << i
    })
}

#[test]
fn satisfiability_agrees_with_lasso_enumeration() {
    let alphabet = [atom("p"), atom("q")];
    let corpus = formula_corpus(&alphabet, 5, 5000);
    assert!(corpus.len() >= 5000);
    let checker = Checker::without_rules();
    let mut disagreements = Vec::new();
    for f in &corpus {
        let engine = checker.is_satisfiable(f).unwrap();
        let oracle = brute_force_sat(f, &alphabet, 2, 3);
        if engine != oracle {
            disagreements.push(f.to_string());
        }
    }
    assert!(disagreements.is_empty(), "{} disagreements, e.g. {:?}", disagreements.len(), &disagreements[..5.min(disagreements.len())]);
}

#[test]
fn witnesses_satisfy_their_formula() {
    let alphabet = [atom("p"), atom("q")];
    for f in formula_corpus(&alphabet, 4, 0) {
        let ba = to_buchi(&f).unwrap();
        if let Some(l) = ba.find_lasso() {
            // Decode onto the test alphabet.
            let decode = |v: u64| {
                ba.atoms().iter().enumerate().fold(0u64, |acc, (i, a)| {
                    let k = alphabet.iter().position(|b| b == a).unwrap();
                    acc | (v >> i & 1) << k
                })
            };
            let stem: Vec<u64> = l.stem.iter().map(|&v| decode(v)).collect();
            let cycle: Vec<u64> = l.cycle.iter().map(|&v| decode(v)).collect();
            assert!(eval_lasso(&f, &alphabet, &stem, &cycle), "witness for {f} does not satisfy it");
        }
    }
}

#[test]
fn automaton_acceptance_matches_lasso_semantics() {
    let alphabet = [atom("p"), atom("q")];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in formula_corpus(&alphabet, 4, 0) {
        let ba = to_buchi(&f).unwrap();
        for _ in 0..4 {
            let stem: Vec<u64> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..4)).collect();
            let cycle: Vec<u64> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..4)).collect();
            let s: Vec<u64> = stem.iter().map(|&v| reencode(ba.atoms(), &alphabet, v)).collect();
            let c: Vec<u64> = cycle.iter().map(|&v| reencode(ba.atoms(), &alphabet, v)).collect();
            assert_eq!(
                ba.accepts_lasso(&s, &c),
                eval_lasso(&f, &alphabet, &stem, &cycle),
                "{f} on {stem:?} {cycle:?}"
            );
        }
    }
}

#[test]
fn validity_of_textbook_equivalences() {
    let c = Checker::without_rules();
    let eq = |a: &str, b: &str| c.compare(&parse_free(a).unwrap(), &parse_free(b).unwrap(), CompareOp::Eq).unwrap();
    assert!(eq("G G p", "G p"));
    assert!(eq("F F p", "F p"));
    assert!(eq("!G p", "F !p"));
    assert!(eq("p W q", "(p U q) | G p"));
    assert!(eq("X (p & q)", "X p & X q"));
    assert!(eq("G F G F p", "G F p"));
    assert!(!eq("F G p", "G F p"));
    assert!(c.compare(&parse_free("F G p").unwrap(), &parse_free("G F p").unwrap(), CompareOp::Lt).unwrap());
    assert!(c.is_valid(&Formula::or(parse_free("G F p").unwrap(), parse_free("F G !p").unwrap())).unwrap());
}
