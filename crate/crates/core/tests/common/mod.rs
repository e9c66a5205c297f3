//! Reference implementations used as test oracles. They share no code with
//! the engine beyond the formula and game data types.
#![allow(dead_code)]

use std::sync::OnceLock;

use mission_core::contracts::{compare_contracts, saturate, Contract};
use mission_core::ltl::{Atom, AtomKind, Checker, CompareOp, Formula};
use mission_core::synth::GameStructure;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn atom(name: &str) -> Atom {
    Atom::new(name, AtomKind::Internal)
}

/// Truth of `f` at every position of the lasso `stem · cycle^ω`, where a
/// letter is the set of atom indices in `atoms` that hold.
pub fn eval_lasso(f: &Formula, atoms: &[Atom], stem: &[u64], cycle: &[u64]) -> bool {
    let word: Vec<u64> = stem.iter().chain(cycle).copied().collect();
    let n = word.len();
    let succ: Vec<usize> = (0..n).map(|i| if i + 1 < n { i + 1 } else { stem.len() }).collect();
    sat(f, atoms, &word, &succ)[0]
}

fn fixpoint(n: usize, init: bool, step: impl Fn(&[bool], usize) -> bool) -> Vec<bool> {
    let mut v = vec![init; n];
    // Each position depends on its successor only, so n + 1 rounds reach
    // the fixpoint.
    for _ in 0..=n {
        let next: Vec<bool> = (0..n).map(|i| step(&v, i)).collect();
        if next == v {
            break;
        }
        v = next;
    }
    v
}

fn sat(f: &Formula, atoms: &[Atom], word: &[u64], succ: &[usize]) -> Vec<bool> {
    let n = word.len();
    let rec = |g: &Formula| sat(g, atoms, word, succ);
    match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(a) => {
            let k = atoms.iter().position(|b| b == a).expect("atom in alphabet");
            word.iter().map(|&v| v >> k & 1 == 1).collect()
        }
        Formula::Not(a) => rec(a).iter().map(|x| !x).collect(),
        Formula::And(a, b) => rec(a).iter().zip(rec(b)).map(|(x, y)| *x && y).collect(),
        Formula::Or(a, b) => rec(a).iter().zip(rec(b)).map(|(x, y)| *x || y).collect(),
        Formula::Implies(a, b) => rec(a).iter().zip(rec(b)).map(|(x, y)| !*x || y).collect(),
        Formula::Iff(a, b) => rec(a).iter().zip(rec(b)).map(|(x, y)| *x == y).collect(),
        Formula::Next(a) => {
            let va = rec(a);
            (0..n).map(|i| va[succ[i]]).collect()
        }
        Formula::Until(a, b) => {
            let (va, vb) = (rec(a), rec(b));
            fixpoint(n, false, |v, i| vb[i] || (va[i] && v[succ[i]]))
        }
        Formula::WeakUntil(a, b) => {
            let (va, vb) = (rec(a), rec(b));
            fixpoint(n, true, |v, i| vb[i] || (va[i] && v[succ[i]]))
        }
        Formula::Globally(a) => {
            let va = rec(a);
            fixpoint(n, true, |v, i| va[i] && v[succ[i]])
        }
        Formula::Eventually(a) => {
            let va = rec(a);
            fixpoint(n, false, |v, i| va[i] || v[succ[i]])
        }
    }
}

/// Whether some lasso with stem length at most `max_stem` and cycle length
/// at most `max_cycle` over `atoms` satisfies `f`.
pub fn brute_force_sat(f: &Formula, atoms: &[Atom], max_stem: usize, max_cycle: usize) -> bool {
    let letters = 1u64 << atoms.len();
    let words = |len: usize| -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out.into_iter().flat_map(|w| (0..letters).map(move |l| [w.clone(), vec![l]].concat())).collect();
        }
        out
    };
    for s in 0..=max_stem {
        for stem in words(s) {
            for c in 1..=max_cycle {
                for cycle in words(c) {
                    if eval_lasso(f, atoms, &stem, &cycle) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Every formula over `atoms` with exactly `size` operator and atom nodes.
pub fn formulas_of_size(atoms: &[Atom], size: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new()];
    for s in 1..=size {
        let mut out: Vec<Formula> = Vec::new();
        if s == 1 {
            out.extend(atoms.iter().map(Formula::atom));
        } else {
            for f in &by_size[s - 1] {
                out.push(Formula::not(f.clone()));
                out.push(Formula::next(f.clone()));
                out.push(Formula::eventually(f.clone()));
                out.push(Formula::globally(f.clone()));
            }
            for l in 1..s - 1 {
                for a in &by_size[l] {
                    for b in &by_size[s - 1 - l] {
                        out.push(Formula::and(a.clone(), b.clone()));
                        out.push(Formula::or(a.clone(), b.clone()));
                        out.push(Formula::implies(a.clone(), b.clone()));
                        out.push(Formula::until(a.clone(), b.clone()));
                        out.push(Formula::weak_until(a.clone(), b.clone()));
                    }
                }
            }
        }
        by_size.push(out);
    }
    by_size.swap_remove(size)
}

/// At least `min` formulas: every formula up to `full` nodes, then an
/// evenly spaced selection of the next size.
pub fn formula_corpus(atoms: &[Atom], full: usize, min: usize) -> Vec<Formula> {
    let mut out: Vec<Formula> = (1..=full).flat_map(|s| formulas_of_size(atoms, s)).collect();
    if out.len() < min {
        let next = formulas_of_size(atoms, full + 1);
        let want = min - out.len();
        let stride = (next.len() / want).max(1);
        out.extend(next.into_iter().step_by(stride).take(want));
    }
    out
}

/// Move lists of a random game: `moves[s][k]` as for
/// [`GameStructure::from_moves`].
pub type Moves = Vec<Vec<Option<Vec<usize>>>>;

pub fn random_game(seed: u64) -> (Moves, Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=12);
    let k = rng.gen_range(1..=3);
    let moves: Moves = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| {
                    if rng.gen_bool(0.15) {
                        None
                    } else {
                        let m = rng.gen_range(0..=3);
                        Some((0..m).map(|_| rng.gen_range(0..n)).collect())
                    }
                })
                .collect()
        })
        .collect();
    let sets = |rng: &mut ChaCha8Rng, p: f64| -> Vec<Vec<bool>> {
        let count = rng.gen_range(0..=2);
        (0..count).map(|_| (0..n).map(|_| rng.gen_bool(p)).collect()).collect()
    };
    let env = sets(&mut rng, 0.4);
    let sys = sets(&mut rng, 0.3);
    (moves, env, sys)
}

/// Winning region of `∧ GF env -> ∧ GF sys`, computed straight from the
/// nested fixpoint on explicit state sets.
pub fn naive_gr1(moves: &Moves, env: &[Vec<bool>], sys: &[Vec<bool>]) -> Vec<bool> {
    let n = moves.len();
    let all = vec![true; n];
    let env: Vec<Vec<bool>> = if env.is_empty() { vec![all.clone()] } else { env.to_vec() };
    let sys: Vec<Vec<bool>> = if sys.is_empty() { vec![all.clone()] } else { sys.to_vec() };
    let cpre = |set: &[bool]| -> Vec<bool> {
        (0..n)
            .map(|s| moves[s].iter().all(|m| m.as_ref().map_or(true, |ts| ts.iter().any(|&t| set[t]))))
            .collect()
    };
    let mut z = all.clone();
    loop {
        let mut next_z = all.clone();
        for goal in &sys {
            let mut y = vec![false; n];
            loop {
                let pz = cpre(&z);
                let py = cpre(&y);
                let mut next_y = vec![false; n];
                for avoid in &env {
                    let mut x = all.clone();
                    loop {
                        let px = cpre(&x);
                        let nx: Vec<bool> =
                            (0..n).map(|s| (goal[s] && pz[s]) || py[s] || (!avoid[s] && px[s])).collect();
                        if nx == x {
                            break;
                        }
                        x = nx;
                    }
                    for s in 0..n {
                        next_y[s] |= x[s];
                    }
                }
                if next_y == y {
                    break;
                }
                y = next_y;
            }
            for s in 0..n {
                next_z[s] &= y[s];
            }
        }
        if next_z == z {
            return z;
        }
        z = next_z;
    }
}

pub fn build_game(moves: &Moves, env: &[Vec<bool>], sys: &[Vec<bool>]) -> GameStructure {
    GameStructure::from_moves(moves, env.to_vec(), sys.to_vec())
}

/// All-pairs shortest path lengths by Floyd–Warshall; `None` when
/// unreachable.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<usize>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(a, b) in edges {
        d[a][b] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].map_or(true, |z| x + y < z) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

pub fn checker() -> &'static Checker {
    static C: OnceLock<Checker> = OnceLock::new();
    C.get_or_init(Checker::without_rules)
}

pub fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just(Formula::atom(&Atom::new("p", AtomKind::Sensor))),
        Just(Formula::atom(&Atom::new("q", AtomKind::Sensor))),
        Just(Formula::atom(&Atom::new("g", AtomKind::Action))),
        Just(Formula::atom(&Atom::new("h", AtomKind::Action))),
    ]
}

pub fn small_formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::eventually),
            inner.clone().prop_map(Formula::globally),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::until(a, b)),
        ]
    })
}

/// Random contracts over two sensors and two actions.
pub fn contract() -> impl Strategy<Value = Contract> {
    (prop_oneof![1 => Just(Formula::True), 3 => small_formula()], small_formula()).prop_map(|(a, g)| saturate(a, g))
}

pub fn contract_eq(a: &Contract, b: &Contract) -> bool {
    compare_contracts(a, b, CompareOp::Eq, checker()).unwrap()
}

pub fn contract_le(a: &Contract, b: &Contract) -> bool {
    compare_contracts(a, b, CompareOp::Le, checker()).unwrap()
}


/// Every algebra law on one triple of contracts; the first failing law is
/// named in the error.
pub fn algebra_laws(a: &Contract, b: &Contract, c: &Contract) -> Result<(), String> {
    use mission_core::contracts::{compose_raw, conjoin_raw};
    let check = |ok: bool, law: &str| if ok { Ok(()) } else { Err(format!("{law} fails for {a}, {b}, {c}")) };
    check(contract_eq(&compose_raw(&[a, b]), &compose_raw(&[b, a])), "composition commutativity")?;
    check(
        contract_eq(&compose_raw(&[&compose_raw(&[a, b]), c]), &compose_raw(&[a, &compose_raw(&[b, c])])),
        "composition associativity",
    )?;
    check(contract_eq(&conjoin_raw(&[a, b]), &conjoin_raw(&[b, a])), "conjunction commutativity")?;
    check(
        contract_eq(&conjoin_raw(&[&conjoin_raw(&[a, b]), c]), &conjoin_raw(&[a, &conjoin_raw(&[b, c])])),
        "conjunction associativity",
    )?;
    let ab = conjoin_raw(&[a, b]);
    check(contract_le(&ab, a) && contract_le(&ab, b), "conjunction lower bound")?;
    if contract_le(c, a) && contract_le(c, b) {
        check(contract_le(c, &ab), "conjunction greatest lower bound")?;
    }
    check(a.resaturate() == *a && contract_eq(&a.resaturate(), a), "saturation idempotence")
}
