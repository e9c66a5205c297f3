//! Tableau translation of LTL to generalized Büchi automata.
//!
//! Formulas are put in negation normal form over {U, W, X, &, |, literals}
//! and expanded into covers. A state is a cover: the literals it demands of
//! the current letter plus the obligations for the next step. State 0 is an
//! unlabeled initial pseudo-state. There is one acceptance set per Until
//! subformula, holding the states that do not postpone it.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::{Atom, Formula, LtlError, DEFAULT_STATE_BOUND};
use crate::graph;

const TRUE: u32 = 0;
const FALSE: u32 = 1;
const MAX_ATOMS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(u8, bool),
    And(u32, u32),
    Or(u32, u32),
    Next(u32),
    Until(u32, u32),
    Weak(u32, u32),
}

struct Store {
    nodes: Vec<Node>,
    index: HashMap<Node, u32>,
    atom_ix: HashMap<Atom, u8>,
}

impl Store {
    fn new(atoms: &[Atom]) -> Self {
        let mut s = Store {
            nodes: Vec::new(),
            index: HashMap::new(),
            atom_ix: atoms.iter().enumerate().map(|(i, a)| (a.clone(), i as u8)).collect(),
        };
        s.mk(Node::True);
        s.mk(Node::False);
        s
    }

    fn mk(&mut self, n: Node) -> u32 {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(n);
        self.index.insert(n, id);
        id
    }

    fn complementary(&self, a: u32, b: u32) -> bool {
        matches!((self.nodes[a as usize], self.nodes[b as usize]),
            (Node::Lit(x, p), Node::Lit(y, q)) if x == y && p != q)
    }

    fn and(&mut self, a: u32, b: u32) -> u32 {
        if a == FALSE || b == FALSE || self.complementary(a, b) {
            return FALSE;
        }
        if a == TRUE || a == b {
            return b;
        }
        if b == TRUE {
            return a;
        }
        self.mk(Node::And(a.min(b), a.max(b)))
    }

    fn or(&mut self, a: u32, b: u32) -> u32 {
        if a == TRUE || b == TRUE || self.complementary(a, b) {
            return TRUE;
        }
        if a == FALSE || a == b {
            return b;
        }
        if b == FALSE {
            return a;
        }
        self.mk(Node::Or(a.min(b), a.max(b)))
    }

    fn next(&mut self, a: u32) -> u32 {
        if a == TRUE || a == FALSE {
            return a;
        }
        self.mk(Node::Next(a))
    }

    fn until(&mut self, a: u32, b: u32) -> u32 {
        if b == TRUE || b == FALSE || a == FALSE || a == b {
            return b;
        }
        self.mk(Node::Until(a, b))
    }

    fn weak(&mut self, a: u32, b: u32) -> u32 {
        if a == TRUE || b == TRUE {
            return TRUE;
        }
        if a == FALSE || a == b {
            return b;
        }
        self.mk(Node::Weak(a, b))
    }

    /// Negation normal form of `f`, negated when `neg` is set.
    fn nnf(&mut self, f: &Formula, neg: bool) -> u32 {
        match f {
            Formula::True => {
                if neg {
                    FALSE
                } else {
                    TRUE
                }
            }
            Formula::False => {
                if neg {
                    TRUE
                } else {
                    FALSE
                }
            }
            Formula::Atom(a) => {
                let ix = self.atom_ix[a];
                self.mk(Node::Lit(ix, !neg))
            }
            Formula::Not(a) => self.nnf(a, !neg),
            Formula::And(a, b) => {
                let (x, y) = (self.nnf(a, neg), self.nnf(b, neg));
                if neg {
                    self.or(x, y)
                } else {
                    self.and(x, y)
                }
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.nnf(a, neg), self.nnf(b, neg));
                if neg {
                    self.and(x, y)
                } else {
                    self.or(x, y)
                }
            }
            Formula::Implies(a, b) => {
                let (x, y) = (self.nnf(a, !neg), self.nnf(b, neg));
                if neg {
                    self.and(x, y)
                } else {
                    self.or(x, y)
                }
            }
            Formula::Iff(a, b) => {
                let (pa, pb) = (self.nnf(a, false), self.nnf(b, false));
                let (na, nb) = (self.nnf(a, true), self.nnf(b, true));
                let (l, r) = if neg {
                    (self.and(pa, nb), self.and(na, pb))
                } else {
                    (self.and(pa, pb), self.and(na, nb))
                };
                self.or(l, r)
            }
            Formula::Next(a) => {
                let x = self.nnf(a, neg);
                self.next(x)
            }
            Formula::Until(a, b) => {
                if neg {
                    // !(a U b) = !b W (!a & !b)
                    let (na, nb) = (self.nnf(a, true), self.nnf(b, true));
                    let both = self.and(na, nb);
                    self.weak(nb, both)
                } else {
                    let (x, y) = (self.nnf(a, false), self.nnf(b, false));
                    self.until(x, y)
                }
            }
            Formula::WeakUntil(a, b) => {
                if neg {
                    // !(a W b) = !b U (!a & !b)
                    let (na, nb) = (self.nnf(a, true), self.nnf(b, true));
                    let both = self.and(na, nb);
                    self.until(nb, both)
                } else {
                    let (x, y) = (self.nnf(a, false), self.nnf(b, false));
                    self.weak(x, y)
                }
            }
            Formula::Globally(a) => {
                let x = self.nnf(a, neg);
                if neg {
                    self.until(TRUE, x)
                } else {
                    self.weak(x, FALSE)
                }
            }
            Formula::Eventually(a) => {
                let x = self.nnf(a, neg);
                if neg {
                    self.weak(x, FALSE)
                } else {
                    self.until(TRUE, x)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Cover {
    pos: u64,
    neg: u64,
    next: Vec<u32>,
    postponed: u64,
}

/// Propositional constraints that hold at every position, kept as the
/// explicit list of allowed valuations over their own atoms.
#[derive(Debug, Clone)]
pub struct Invariant {
    atoms: Vec<Atom>,
    allowed: Vec<u64>,
}

impl Invariant {
    pub fn trivial() -> Self {
        Invariant { atoms: Vec::new(), allowed: vec![0] }
    }

    /// Builds the invariant from propositional formulas. Non-propositional
    /// inputs are returned untouched in the second component.
    pub fn split(rules: &[Formula]) -> Result<(Invariant, Vec<Formula>), LtlError> {
        let mut props = Vec::new();
        let mut rest = Vec::new();
        for r in rules {
            match r {
                Formula::Globally(body) if body.is_propositional() => props.push((**body).clone()),
                f => rest.push(f.clone()),
            }
        }
        Ok((Invariant::new(&props)?, rest))
    }

    /// Builds the invariant `G(∧ props)`; each formula must be propositional.
    pub fn new(props: &[Formula]) -> Result<Invariant, LtlError> {
        let atoms: Vec<Atom> = props
            .iter()
            .flat_map(|f| f.atoms())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if atoms.len() > MAX_ATOMS {
            return Err(LtlError::ResourceLimit(format!(
                "{} atoms in invariant exceed the limit of {MAX_ATOMS}",
                atoms.len()
            )));
        }
        let ix: HashMap<&Atom, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut allowed = Vec::new();
        let mut stack = vec![(0usize, 0u64)];
        while let Some((depth, val)) = stack.pop() {
            let partial = |a: &Atom| -> Option<bool> {
                let i = ix[a];
                (i < depth).then_some(val >> i & 1 == 1)
            };
            if props.iter().any(|p| eval3(p, &partial) == Some(false)) {
                continue;
            }
            if depth == atoms.len() {
                allowed.push(val);
                continue;
            }
            stack.push((depth + 1, val | 1 << depth));
            stack.push((depth + 1, val));
        }
        allowed.sort_unstable();
        if allowed.len() > 1 << 20 {
            return Err(LtlError::ResourceLimit("invariant has too many valuations".into()));
        }
        Ok(Invariant { atoms, allowed })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Allowed valuations, bit i standing for `atoms()[i]`.
    pub fn allowed(&self) -> &[u64] {
        &self.allowed
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.allowed.is_empty()
    }
}

/// Kleene three-valued evaluation under a partial valuation.
fn eval3(f: &Formula, val: &dyn Fn(&Atom) -> Option<bool>) -> Option<bool> {
    match f {
        Formula::True => Some(true),
        Formula::False => Some(false),
        Formula::Atom(a) => val(a),
        Formula::Not(a) => eval3(a, val).map(|b| !b),
        Formula::And(a, b) => match (eval3(a, val), eval3(b, val)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Formula::Or(a, b) => match (eval3(a, val), eval3(b, val)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Formula::Implies(a, b) => match (eval3(a, val), eval3(b, val)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        Formula::Iff(a, b) => match (eval3(a, val), eval3(b, val)) {
            (Some(x), Some(y)) => Some(x == y),
            _ => None,
        },
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TableauConfig {
    pub bound: usize,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig { bound: DEFAULT_STATE_BOUND }
    }
}

#[derive(Debug, Clone)]
pub struct BuchiState {
    /// Atoms that must be true in the letter read on entering the state.
    pub pos: u64,
    /// Atoms that must be false in that letter.
    pub neg: u64,
    pub succ: Vec<usize>,
    /// Bit k is set when the state belongs to acceptance set k.
    pub acc: u64,
}

/// A generalized Büchi automaton with state-labeled letters. A run on
/// w0 w1 ... is 0, s1, s2, ... where s(i+1) matches wi.
#[derive(Debug, Clone)]
pub struct BuchiAutomaton {
    atoms: Vec<Atom>,
    states: Vec<BuchiState>,
    n_acc: usize,
    /// Invariant valuations remapped onto `atoms`.
    inv_mask: u64,
    inv_allowed: Arc<Vec<u64>>,
}

/// An ultimately periodic word, letters encoded over the automaton atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<u64>,
    pub cycle: Vec<u64>,
}

impl Lasso {
    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    /// Letter at position `i` of the infinite word.
    pub fn at(&self, i: usize) -> u64 {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }
}

/// Translates `f` with no invariant and the default state bound.
pub fn to_buchi(f: &Formula) -> Result<BuchiAutomaton, LtlError> {
    BuchiAutomaton::build(f, &Invariant::trivial(), TableauConfig::default())
}

impl BuchiAutomaton {
    /// Translates `f`, restricting every letter to the valuations allowed by
    /// `inv`.
    pub fn build(f: &Formula, inv: &Invariant, cfg: TableauConfig) -> Result<Self, LtlError> {
        let atoms: Vec<Atom> = f
            .atoms()
            .into_iter()
            .chain(inv.atoms.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if atoms.len() > MAX_ATOMS {
            return Err(LtlError::ResourceLimit(format!(
                "{} atoms exceed the limit of {MAX_ATOMS}",
                atoms.len()
            )));
        }
        let global: HashMap<&Atom, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let remap = |v: u64| -> u64 {
            let mut out = 0;
            for (i, a) in inv.atoms.iter().enumerate() {
                if v >> i & 1 == 1 {
                    out |= 1 << global[a];
                }
            }
            out
        };
        let inv_mask = remap(mask_of(inv.atoms.len()));
        let inv_allowed: Vec<u64> = inv.allowed.iter().map(|&v| remap(v)).collect();

        let mut store = Store::new(&atoms);
        let root = store.nnf(f, false);
        let mut until_ix: HashMap<u32, u32> = HashMap::new();
        for (id, n) in store.nodes.iter().enumerate() {
            if let Node::Until(..) = n {
                let k = until_ix.len() as u32;
                until_ix.insert(id as u32, k);
            }
        }
        if until_ix.len() > 64 {
            return Err(LtlError::ResourceLimit("more than 64 until subformulas".into()));
        }
        let n_acc = until_ix.len();
        let all_acc = mask_of(n_acc);

        let mut builder = Builder {
            store: &store,
            until_ix: &until_ix,
            expansions: HashMap::new(),
            compat: HashMap::new(),
            inv_mask,
            inv_allowed: &inv_allowed,
        };

        let mut states = vec![BuchiState { pos: 0, neg: 0, succ: Vec::new(), acc: all_acc }];
        let mut obligations: Vec<Vec<u32>> = vec![if root == TRUE { vec![] } else { vec![root] }];
        let mut ids: HashMap<Cover, usize> = HashMap::new();
        let mut work = vec![0usize];
        while let Some(s) = work.pop() {
            let covers = builder.expand(&obligations[s]);
            let mut succ = Vec::with_capacity(covers.len());
            for c in covers.iter() {
                let id = match ids.get(c) {
                    Some(&id) => id,
                    None => {
                        let id = states.len();
                        if id >= cfg.bound {
                            return Err(LtlError::ResourceLimit(format!(
                                "tableau exceeded {} states",
                                cfg.bound
                            )));
                        }
                        states.push(BuchiState {
                            pos: c.pos,
                            neg: c.neg,
                            succ: Vec::new(),
                            acc: all_acc & !c.postponed,
                        });
                        obligations.push(c.next.clone());
                        ids.insert(c.clone(), id);
                        work.push(id);
                        id
                    }
                };
                succ.push(id);
            }
            succ.sort_unstable();
            succ.dedup();
            states[s].succ = succ;
        }
        Ok(BuchiAutomaton { atoms, states, n_acc, inv_mask, inv_allowed: Arc::new(inv_allowed) })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn states(&self) -> &[BuchiState] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn num_acceptance_sets(&self) -> usize {
        self.n_acc
    }

    /// Acceptance sets as explicit state lists.
    pub fn acceptance(&self) -> Vec<Vec<usize>> {
        (0..self.n_acc)
            .map(|k| (1..self.states.len()).filter(|&s| self.states[s].acc >> k & 1 == 1).collect())
            .collect()
    }

    /// Encodes a valuation given as a predicate over atoms.
    pub fn encode(&self, is_true: impl Fn(&Atom) -> bool) -> u64 {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| is_true(a))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Whether the letter `v` may be read on entering state `s`.
    pub fn matches(&self, s: usize, v: u64) -> bool {
        let st = &self.states[s];
        v & st.pos == st.pos && v & st.neg == 0 && self.letter_allowed(v)
    }

    fn letter_allowed(&self, v: u64) -> bool {
        if self.inv_mask == 0 {
            return !self.inv_allowed.is_empty();
        }
        let r = v & self.inv_mask;
        self.inv_allowed.binary_search(&r).is_ok()
    }

    /// The guard of edges entering `s`, as a conjunction of literals.
    pub fn guard(&self, s: usize) -> Formula {
        let st = &self.states[s];
        Formula::conj(self.atoms.iter().enumerate().filter_map(|(i, a)| {
            if st.pos >> i & 1 == 1 {
                Some(Formula::atom(a))
            } else if st.neg >> i & 1 == 1 {
                Some(Formula::not(Formula::atom(a)))
            } else {
                None
            }
        }))
    }

    /// Edges as (source, guard, target) triples.
    pub fn transitions(&self) -> Vec<(usize, Formula, usize)> {
        let mut out = Vec::new();
        for (s, st) in self.states.iter().enumerate() {
            for &t in &st.succ {
                out.push((s, self.guard(t), t));
            }
        }
        out
    }

    fn succ_lists(&self) -> Vec<Vec<usize>> {
        self.states.iter().map(|s| s.succ.clone()).collect()
    }

    /// SCCs that contain a cycle and meet every acceptance set.
    fn accepting_sccs(&self, succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let full = mask_of(self.n_acc);
        graph::sccs(succ)
            .into_iter()
            .filter(|c| graph::is_nontrivial(c, succ))
            .filter(|c| c.iter().fold(0u64, |m, &s| m | self.states[s].acc) & full == full)
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.accepting_sccs(&self.succ_lists()).is_empty()
    }

    /// States from which some accepting run continues.
    pub fn live_states(&self) -> Vec<bool> {
        let succ = self.succ_lists();
        let mut target = vec![false; succ.len()];
        for c in self.accepting_sccs(&succ) {
            for s in c {
                target[s] = true;
            }
        }
        graph::reach_backward(&succ, &target)
    }

    /// A concrete letter that enters `s` and respects the invariant.
    fn witness_letter(&self, s: usize) -> u64 {
        let st = &self.states[s];
        let inv_pos = st.pos & self.inv_mask;
        let inv_neg = st.neg & self.inv_mask;
        let fill = self
            .inv_allowed
            .iter()
            .copied()
            .find(|&a| a & inv_pos == inv_pos && a & inv_neg == 0)
            .unwrap_or(0);
        st.pos | fill
    }

    /// An accepted word, if the language is nonempty.
    pub fn find_lasso(&self) -> Option<Lasso> {
        let succ = self.succ_lists();
        let comps = self.accepting_sccs(&succ);
        let comp = comps.first()?;
        let mut in_comp = vec![false; succ.len()];
        for &s in comp {
            in_comp[s] = true;
        }
        let stem_path = graph::bfs_path(&succ, 0, false, |v| in_comp[v], |_| true)?;
        let entry = *stem_path.last().unwrap();
        // Walk through one state of every acceptance set and back to the entry.
        let mut cycle_path = vec![entry];
        let mut cur = entry;
        for k in 0..self.n_acc {
            if self.states[cur].acc >> k & 1 == 1 {
                continue;
            }
            let seg = graph::bfs_path(&succ, cur, true, |v| self.states[v].acc >> k & 1 == 1, |v| in_comp[v])?;
            cycle_path.extend_from_slice(&seg[1..]);
            cur = *seg.last().unwrap();
        }
        let back = graph::bfs_path(&succ, cur, true, |v| v == entry, |v| in_comp[v])?;
        cycle_path.extend_from_slice(&back[1..]);
        let stem = stem_path[1..].iter().map(|&s| self.witness_letter(s)).collect();
        let cycle = cycle_path[1..].iter().map(|&s| self.witness_letter(s)).collect();
        Some(Lasso { stem, cycle })
    }

    /// Exact acceptance of the lasso word `stem · cycle^ω`.
    pub fn accepts_lasso(&self, stem: &[u64], cycle: &[u64]) -> bool {
        assert!(!cycle.is_empty(), "lasso needs a nonempty cycle");
        let period = stem.len() + cycle.len();
        let next_pos = |p: usize| if p + 1 == period { stem.len() } else { p + 1 };
        let letter = |p: usize| if p < stem.len() { stem[p] } else { cycle[p - stem.len()] };
        // Product nodes (state, position of the letter to read next).
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut nodes: Vec<(usize, usize)> = Vec::new();
        let mut succ: Vec<Vec<usize>> = Vec::new();
        ids.insert((0, 0), 0);
        nodes.push((0, 0));
        succ.push(Vec::new());
        let mut i = 0;
        while i < nodes.len() {
            let (q, p) = nodes[i];
            let v = letter(p);
            let np = next_pos(p);
            for &t in &self.states[q].succ {
                if !self.matches(t, v) {
                    continue;
                }
                let key = (t, np);
                let id = *ids.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    succ.push(Vec::new());
                    nodes.len() - 1
                });
                succ[i].push(id);
            }
            i += 1;
        }
        let full = mask_of(self.n_acc);
        graph::sccs(&succ).into_iter().any(|c| {
            graph::is_nontrivial(&c, &succ)
                && c.iter().fold(0u64, |m, &n| m | self.states[nodes[n].0].acc) & full == full
        })
    }
}

fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

struct Builder<'a> {
    store: &'a Store,
    until_ix: &'a HashMap<u32, u32>,
    expansions: HashMap<Vec<u32>, Arc<Vec<Cover>>>,
    compat: HashMap<(u64, u64), bool>,
    inv_mask: u64,
    inv_allowed: &'a [u64],
}

impl Builder<'_> {
    fn compatible(&mut self, pos: u64, neg: u64) -> bool {
        let (p, n) = (pos & self.inv_mask, neg & self.inv_mask);
        let allowed = self.inv_allowed;
        *self
            .compat
            .entry((p, n))
            .or_insert_with(|| allowed.iter().any(|&a| a & p == p && a & n == 0))
    }

    fn expand(&mut self, obligations: &[u32]) -> Arc<Vec<Cover>> {
        if let Some(c) = self.expansions.get(obligations) {
            return c.clone();
        }
        struct Branch {
            todo: Vec<u32>,
            done: Vec<u32>,
            cover: Cover,
        }
        let mut out: Vec<Cover> = Vec::new();
        let mut stack = vec![Branch {
            todo: obligations.to_vec(),
            done: Vec::new(),
            cover: Cover { pos: 0, neg: 0, next: Vec::new(), postponed: 0 },
        }];
        'branches: while let Some(mut b) = stack.pop() {
            while let Some(n) = b.todo.pop() {
                if b.done.contains(&n) {
                    continue;
                }
                b.done.push(n);
                match self.store.nodes[n as usize] {
                    Node::True => {}
                    Node::False => continue 'branches,
                    Node::Lit(i, positive) => {
                        let bit = 1u64 << i;
                        if positive {
                            if b.cover.neg & bit != 0 {
                                continue 'branches;
                            }
                            b.cover.pos |= bit;
                        } else {
                            if b.cover.pos & bit != 0 {
                                continue 'branches;
                            }
                            b.cover.neg |= bit;
                        }
                    }
                    Node::And(x, y) => {
                        b.todo.push(x);
                        b.todo.push(y);
                    }
                    Node::Or(x, y) => {
                        let mut alt = Branch { todo: b.todo.clone(), done: b.done.clone(), cover: b.cover.clone() };
                        alt.todo.push(y);
                        stack.push(alt);
                        b.todo.push(x);
                    }
                    Node::Next(x) => insert_sorted(&mut b.cover.next, x),
                    Node::Until(x, y) => {
                        let mut alt = Branch { todo: b.todo.clone(), done: b.done.clone(), cover: b.cover.clone() };
                        alt.todo.push(x);
                        insert_sorted(&mut alt.cover.next, n);
                        alt.cover.postponed |= 1 << self.until_ix[&n];
                        stack.push(alt);
                        b.todo.push(y);
                    }
                    Node::Weak(x, y) => {
                        let mut alt = Branch { todo: b.todo.clone(), done: b.done.clone(), cover: b.cover.clone() };
                        alt.todo.push(x);
                        insert_sorted(&mut alt.cover.next, n);
                        stack.push(alt);
                        b.todo.push(y);
                    }
                }
            }
            if self.compatible(b.cover.pos, b.cover.neg) && !out.contains(&b.cover) {
                out.push(b.cover);
            }
        }
        let out = Arc::new(out);
        self.expansions.insert(obligations.to_vec(), out.clone());
        out
    }
}

fn insert_sorted(v: &mut Vec<u32>, x: u32) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_free;

    fn aut(s: &str) -> BuchiAutomaton {
        to_buchi(&parse_free(s).unwrap()).unwrap()
    }

    #[test]
    fn constants() {
        assert!(aut("false").is_empty());
        assert!(!aut("true").is_empty());
        assert!(aut("p & !p").is_empty());
        assert!(aut("G(p & !p)").is_empty());
    }

    #[test]
    fn gf_p_has_one_acceptance_set() {
        let a = aut("G F p");
        assert_eq!(a.num_acceptance_sets(), 1);
        assert!(a.accepts_lasso(&[], &[0, 1]));
        assert!(!a.accepts_lasso(&[1, 1], &[0]));
    }

    #[test]
    fn atomic_reads_first_letter() {
        let a = aut("p");
        assert!(a.accepts_lasso(&[1], &[0]));
        assert!(!a.accepts_lasso(&[0], &[1]));
    }

    #[test]
    fn lasso_witness_is_accepted() {
        for s in ["G F p & G F !p", "p U (q & X !p)", "F G q", "(p W q) & F !p"] {
            let a = aut(s);
            let l = a.find_lasso().expect(s);
            assert!(a.accepts_lasso(&l.stem, &l.cycle), "{s}");
        }
    }

    #[test]
    fn invariant_filters_letters() {
        let rules = [parse_free("a <-> !b").unwrap()];
        let inv = Invariant::new(&rules).unwrap();
        assert_eq!(inv.allowed().len(), 2);
        let f = parse_free("F(a & b)").unwrap();
        assert!(BuchiAutomaton::build(&f, &inv, TableauConfig::default()).unwrap().is_empty());
        let g = parse_free("G F a & G F b").unwrap();
        assert!(!BuchiAutomaton::build(&g, &inv, TableauConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn state_bound_is_an_error() {
        let f = parse_free("G F a & G F b & G F c").unwrap();
        let r = BuchiAutomaton::build(&f, &Invariant::trivial(), TableauConfig { bound: 3 });
        assert!(matches!(r, Err(LtlError::ResourceLimit(_))));
    }
}
