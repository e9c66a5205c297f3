//! Deterministic automata over explicit valuations: safety automata from
//! U-free formulas by subset construction, hand-built liveness monitors, and
//! a generic explorer for bespoke constraints.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use crate::ltl::{Atom, BuchiAutomaton, Formula, Invariant, LtlError, TableauConfig};
use crate::patterns::Liveness;

/// A deterministic automaton with a partial transition table. A missing
/// successor means the letter violates the constraint the automaton tracks.
#[derive(Debug, Clone)]
pub struct DetAutomaton {
    pub name: String,
    atoms: Vec<Atom>,
    /// `table[state][valuation over atoms]`.
    table: Vec<Vec<Option<u32>>>,
    /// Justice states of a monitor; `None` for pure safety automata.
    justice: Option<Vec<bool>>,
}

pub(crate) const MAX_LOCAL_ATOMS: usize = 16;

fn eval(f: &Formula, atoms: &[Atom], v: u64) -> bool {
    f.eval_prop(&|a| atoms.iter().position(|b| b == a).is_some_and(|i| v >> i & 1 == 1))
        .expect("propositional argument")
}

impl DetAutomaton {
    /// Builds an automaton by exploring labelled states from `init`. `step`
    /// returns `None` for rejected letters.
    pub fn explore<S: Clone + Eq + Hash>(
        name: impl Into<String>,
        atoms: Vec<Atom>,
        init: S,
        step: impl Fn(&S, u64) -> Option<S>,
        justice: Option<&dyn Fn(&S) -> bool>,
    ) -> Result<DetAutomaton, LtlError> {
        Self::explore_mut(name, atoms, init, step, justice)
    }

    fn explore_mut<S: Clone + Eq + Hash>(
        name: impl Into<String>,
        atoms: Vec<Atom>,
        init: S,
        mut step: impl FnMut(&S, u64) -> Option<S>,
        justice: Option<&dyn Fn(&S) -> bool>,
    ) -> Result<DetAutomaton, LtlError> {
        if atoms.len() > MAX_LOCAL_ATOMS {
            return Err(LtlError::ResourceLimit(format!(
                "automaton over {} atoms exceeds {MAX_LOCAL_ATOMS}",
                atoms.len()
            )));
        }
        let width = 1u64 << atoms.len();
        let mut ids: HashMap<S, u32> = HashMap::from([(init.clone(), 0)]);
        let mut states = vec![init];
        let mut table = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let row = (0..width)
                .map(|v| {
                    step(&states[i], v).map(|n| {
                        let next = ids.len() as u32;
                        *ids.entry(n.clone()).or_insert_with(|| {
                            states.push(n);
                            next
                        })
                    })
                })
                .collect();
            table.push(row);
            i += 1;
        }
        let justice = justice.map(|j| states.iter().map(j).collect());
        Ok(DetAutomaton { name: name.into(), atoms, table, justice }.minimized())
    }

    /// Merges states with the same future behaviour and justice flag.
    fn minimized(self) -> DetAutomaton {
        let n = self.table.len();
        let mut block: Vec<u32> = match &self.justice {
            Some(j) => j.iter().map(|&b| b as u32).collect(),
            None => vec![0; n],
        };
        let mut count = block.iter().collect::<BTreeSet<_>>().len();
        loop {
            let mut ids: HashMap<(u32, Vec<Option<u32>>), u32> = HashMap::new();
            let next: Vec<u32> = (0..n)
                .map(|s| {
                    let sig = self.table[s].iter().map(|t| t.map(|t| block[t as usize])).collect();
                    let k = ids.len() as u32;
                    *ids.entry((block[s], sig)).or_insert(k)
                })
                .collect();
            let done = ids.len() == count;
            count = ids.len();
            block = next;
            if done {
                break;
            }
        }
        if count == n {
            return self;
        }
        // Renumber blocks in order of first appearance from state 0.
        let mut order: Vec<Option<u32>> = vec![None; count];
        let mut reps = Vec::new();
        let mut queue = std::collections::VecDeque::from([0usize]);
        order[block[0] as usize] = Some(0);
        reps.push(0);
        while let Some(s) = queue.pop_front() {
            for t in self.table[s].iter().flatten() {
                let b = block[*t as usize] as usize;
                if order[b].is_none() {
                    order[b] = Some(reps.len() as u32);
                    reps.push(*t as usize);
                    queue.push_back(*t as usize);
                }
            }
        }
        let table = reps
            .iter()
            .map(|&s| self.table[s].iter().map(|t| t.map(|t| order[block[t as usize] as usize].unwrap())).collect())
            .collect();
        let justice = self.justice.as_ref().map(|j| reps.iter().map(|&s| j[s]).collect());
        DetAutomaton { name: self.name, atoms: self.atoms, table, justice }
    }

    /// Safety automaton for a formula free of U: subset construction over
    /// the live states of its tableau.
    pub fn safety(name: impl Into<String>, f: &Formula) -> Result<DetAutomaton, LtlError> {
        Self::safety_within(name, f, &Invariant::trivial())
    }

    /// Like [`DetAutomaton::safety`], but letters outside `inv` are rejected.
    /// Only sound where the game never offers such letters.
    pub fn safety_within(name: impl Into<String>, f: &Formula, inv: &Invariant) -> Result<DetAutomaton, LtlError> {
        let parts = f.conjuncts();
        if parts.len() < 2 {
            return Self::subset(name, f, inv);
        }
        // One automaton per conjunct keeps each tableau small.
        let parts = parts.iter().map(|p| Self::subset("part", p, inv)).collect::<Result<Vec<_>, _>>()?;
        Self::product(name, &parts)
    }

    /// Synchronous product; a letter is rejected when any part rejects it.
    pub fn product(name: impl Into<String>, parts: &[DetAutomaton]) -> Result<DetAutomaton, LtlError> {
        let atoms: Vec<Atom> =
            parts.iter().flat_map(|p| p.atoms.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
        let proj: Vec<Vec<usize>> =
            parts.iter().map(|p| p.atoms.iter().map(|a| atoms.iter().position(|b| b == a).unwrap()).collect()).collect();
        let local = |k: usize, v: u64| proj[k].iter().enumerate().fold(0u64, |acc, (i, &g)| acc | (v >> g & 1) << i);
        Self::explore(
            name,
            atoms.clone(),
            vec![0u32; parts.len()],
            |st: &Vec<u32>, v| st.iter().enumerate().map(|(k, &s)| parts[k].step(s, local(k, v))).collect(),
            None,
        )
    }

    fn subset(name: impl Into<String>, f: &Formula, inv: &Invariant) -> Result<DetAutomaton, LtlError> {
        let ba = BuchiAutomaton::build(f, inv, TableauConfig::default())?;
        let live = ba.live_states();
        let atoms = ba.atoms().to_vec();
        if atoms.len() > MAX_LOCAL_ATOMS {
            return Self::explore(name, atoms, (), |_, _| None, None);
        }
        if !live[0] {
            // Unsatisfiable: reject every letter.
            return Self::explore(name, atoms, (), |_, _| None, None);
        }
        let n = ba.num_states();
        let words = n.div_ceil(64);
        let bits = |it: &mut dyn Iterator<Item = usize>| {
            let mut b = vec![0u64; words];
            for t in it {
                b[t / 64] |= 1 << (t % 64);
            }
            b
        };
        let succ: Vec<Vec<u64>> =
            ba.states().iter().map(|st| bits(&mut st.succ.iter().copied().filter(|&t| live[t]))).collect();
        // Live states matching each letter.
        let matching: Vec<Vec<u64>> =
            (0..1u64 << atoms.len()).map(|v| bits(&mut (0..n).filter(|&t| live[t] && ba.matches(t, v)))).collect();
        let mut start = vec![0u64; words];
        start[0] = 1;
        let mut reach: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
        let step = |set: &Vec<u64>, v: u64| -> Option<Vec<u64>> {
            let union = reach.entry(set.clone()).or_insert_with(|| {
                let mut u = vec![0u64; words];
                for (w, &word) in set.iter().enumerate() {
                    let mut rest = word;
                    while rest != 0 {
                        let s = w * 64 + rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        u.iter_mut().zip(&succ[s]).for_each(|(a, b)| *a |= b);
                    }
                }
                u
            });
            let next: Vec<u64> = union.iter().zip(&matching[v as usize]).map(|(a, b)| a & b).collect();
            next.iter().any(|&w| w != 0).then_some(next)
        };
        Self::explore_mut(name, atoms, start, step, None)
    }

    /// Monitor with justice states for a liveness item over propositional
    /// arguments.
    pub fn liveness(name: impl Into<String>, item: &Liveness) -> Result<DetAutomaton, LtlError> {
        let collect = |fs: &[&Formula]| -> Vec<Atom> {
            fs.iter().flat_map(|f| f.atoms()).collect::<BTreeSet<_>>().into_iter().collect()
        };
        match item {
            // State 1 iff p held on the last letter.
            Liveness::Recurrence(p) => {
                let atoms = collect(&[p]);
                let a2 = atoms.clone();
                Self::explore(name, atoms, false, move |_, v| Some(eval(p, &a2, v)), Some(&|s: &bool| *s))
            }
            // Absorbing once p has held.
            Liveness::Eventually(p) => {
                let atoms = collect(&[p]);
                let a2 = atoms.clone();
                Self::explore(name, atoms, false, move |s, v| Some(*s || eval(p, &a2, v)), Some(&|s: &bool| *s))
            }
            // Pending while a trigger awaits its response; the response on
            // the trigger's own letter discharges it.
            Liveness::Response(t, r) => {
                let atoms = collect(&[t, r]);
                let a2 = atoms.clone();
                Self::explore(
                    name,
                    atoms,
                    false,
                    move |s, v| Some(!eval(r, &a2, v) && (*s || eval(t, &a2, v))),
                    Some(&|s: &bool| !*s),
                )
            }
        }
    }

    /// Freezes the automaton on letters where `gate` is false: they leave
    /// the state unchanged and are never rejected.
    pub fn gated(&self, gate: &Formula) -> Result<DetAutomaton, LtlError> {
        let atoms: Vec<Atom> =
            self.atoms.iter().cloned().chain(gate.atoms()).collect::<BTreeSet<_>>().into_iter().collect();
        let proj: Vec<Option<usize>> = self.atoms.iter().map(|a| atoms.iter().position(|b| b == a)).collect();
        let local = |v: u64| -> u64 {
            proj.iter().enumerate().fold(0, |acc, (i, p)| acc | ((v >> p.unwrap()) & 1) << i)
        };
        let ga = atoms.clone();
        let justice = self.justice.clone();
        let j = justice.as_ref().map(|j| move |s: &u32| j[*s as usize]);
        Self::explore(
            format!("{}|{gate}", self.name),
            atoms,
            0u32,
            |s: &u32, v| if eval(gate, &ga, v) { self.table[*s as usize][local(v) as usize] } else { Some(*s) },
            j.as_ref().map(|f| f as &dyn Fn(&u32) -> bool),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn step(&self, s: u32, v: u64) -> Option<u32> {
        self.table[s as usize][v as usize]
    }

    pub fn is_justice(&self, s: u32) -> bool {
        self.justice.as_ref().is_some_and(|j| j[s as usize])
    }

    pub fn is_monitor(&self) -> bool {
        self.justice.is_some()
    }

    /// Whether the automaton rejects no letter in any state.
    pub fn is_universal(&self) -> bool {
        self.table.iter().all(|row| row.iter().all(Option::is_some))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse_free, AtomKind};

    fn a(n: &str) -> Atom {
        Atom::new(n, AtomKind::Internal)
    }

    fn run(d: &DetAutomaton, word: &[u64]) -> Option<u32> {
        word.iter().try_fold(0u32, |s, &v| d.step(s, v))
    }

    #[test]
    fn safety_automaton_tracks_prefixes() {
        // atoms sorted: p (bit 0), q (bit 1)
        let d = DetAutomaton::safety("s", &parse_free("G(p -> X q)").unwrap()).unwrap();
        assert_eq!(d.atoms(), &[a("p"), a("q")]);
        assert!(run(&d, &[0b01, 0b10, 0b00]).is_some());
        assert!(run(&d, &[0b01, 0b00]).is_none());
        let f = DetAutomaton::safety("f", &Formula::False).unwrap();
        assert!(run(&f, &[0]).is_none());
        assert!(DetAutomaton::safety("t", &Formula::True).unwrap().is_universal());
    }

    #[test]
    fn response_monitor() {
        let item = Liveness::Response(Formula::atom(&a("t")), Formula::atom(&a("r")));
        let d = DetAutomaton::liveness("m", &item).unwrap();
        // atoms sorted: r (bit 0), t (bit 1)
        let s1 = d.step(0, 0b10).unwrap();
        assert!(!d.is_justice(s1));
        assert!(d.is_justice(d.step(s1, 0b01).unwrap()));
        assert!(d.is_justice(d.step(0, 0b11).unwrap()));
    }

    #[test]
    fn gating_freezes_state() {
        let d = DetAutomaton::safety("s", &parse_free("G(p -> X q)").unwrap()).unwrap();
        let g = d.gated(&Formula::atom(&a("c"))).unwrap();
        // atoms sorted: c (bit 0), p (bit 1), q (bit 2)
        assert!(run(&g, &[0b011, 0b000, 0b000, 0b101]).is_some());
        assert!(run(&g, &[0b011, 0b000, 0b001]).is_none());
    }
}
