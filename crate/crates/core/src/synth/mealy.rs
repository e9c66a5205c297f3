//! Deterministic, input-complete Mealy machines with explicit valuation
//! tables, minimization, and text/DOT export.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::ltl::{Atom, AtomKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineFormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// States are `0..num_states()`. For every state and every valuation of
/// `inputs` (bit i = `inputs[i]`), `table` gives the output valuation (bit
/// i = `outputs[i]`) and the successor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MealyMachine {
    pub name: String,
    pub inputs: Vec<Atom>,
    pub outputs: Vec<Atom>,
    pub initial: usize,
    pub terminal: Option<usize>,
    pub table: Vec<Vec<(u64, usize)>>,
    /// The region each state assumes the robot to be in.
    pub regions: Vec<Option<Atom>>,
}

impl MealyMachine {
    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.table.iter().map(Vec::len).sum()
    }

    pub fn step(&self, state: usize, input: u64) -> (u64, usize) {
        self.table[state][input as usize]
    }

    /// Output sequence for a finite input sequence from the initial state.
    pub fn run(&self, inputs: &[u64]) -> Vec<u64> {
        let mut s = self.initial;
        inputs
            .iter()
            .map(|&i| {
                let (o, n) = self.step(s, i);
                s = n;
                o
            })
            .collect()
    }

    /// Encodes the true atoms of a named input set.
    pub fn encode_inputs(&self, is_true: impl Fn(&Atom) -> bool) -> u64 {
        encode(&self.inputs, is_true)
    }

    pub fn output_atoms(&self, v: u64) -> Vec<Atom> {
        self.outputs.iter().enumerate().filter(|(i, _)| v >> i & 1 == 1).map(|(_, a)| a.clone()).collect()
    }

    /// Merges states with identical futures, then drops unreachable states
    /// and renumbers in breadth-first order from the initial state. The
    /// terminal marker and region annotations are preserved.
    pub fn minimize(&self) -> MealyMachine {
        let n = self.num_states();
        // Initial partition: terminal flag and region annotation.
        let mut block: Vec<usize> = {
            let mut keys: HashMap<(bool, Option<Atom>), usize> = HashMap::new();
            (0..n)
                .map(|s| {
                    let k = (self.terminal == Some(s), self.regions[s].clone());
                    let next = keys.len();
                    *keys.entry(k).or_insert(next)
                })
                .collect()
        };
        loop {
            let mut keys: HashMap<(usize, Vec<(u64, usize)>), usize> = HashMap::new();
            let refined: Vec<usize> = (0..n)
                .map(|s| {
                    let sig: Vec<(u64, usize)> = self.table[s].iter().map(|&(o, t)| (o, block[t])).collect();
                    let next = keys.len();
                    *keys.entry((block[s], sig)).or_insert(next)
                })
                .collect();
            let count = keys.len();
            let before = block.iter().copied().max().map_or(0, |m| m + 1);
            block = refined;
            if count == before {
                break;
            }
        }
        // Breadth-first renumbering over blocks.
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        for s in 0..n {
            rep.entry(block[s]).or_insert(s);
        }
        let mut order: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::from([block[self.initial]]);
        order.insert(block[self.initial], 0);
        let mut blocks = Vec::new();
        while let Some(b) = queue.pop_front() {
            blocks.push(b);
            for &(_, t) in &self.table[rep[&b]] {
                let tb = block[t];
                if !order.contains_key(&tb) {
                    order.insert(tb, order.len());
                    queue.push_back(tb);
                }
            }
        }
        let table = blocks
            .iter()
            .map(|b| self.table[rep[b]].iter().map(|&(o, t)| (o, order[&block[t]])).collect())
            .collect();
        let regions = blocks.iter().map(|b| self.regions[rep[b]].clone()).collect();
        MealyMachine {
            name: self.name.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            initial: 0,
            terminal: self.terminal.and_then(|t| order.get(&block[t]).copied()),
            table,
            regions,
        }
    }

    fn valuation_text(atoms: &[Atom], v: u64) -> String {
        if atoms.is_empty() {
            return "-".to_string();
        }
        atoms
            .iter()
            .enumerate()
            .map(|(i, a)| if v >> i & 1 == 1 { a.name().to_string() } else { format!("!{}", a.name()) })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Line-based listing: header lines, then one line per transition of
    /// the form `state -- inputs / outputs -> state` with every atom
    /// written positively or negated.
    pub fn to_text(&self) -> String {
        let names = |v: &[Atom]| v.iter().map(|a| format!("{}:{}", a.name(), a.kind())).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        writeln!(s, "machine {}", self.name).unwrap();
        writeln!(s, "inputs {}", names(&self.inputs)).unwrap();
        writeln!(s, "outputs {}", names(&self.outputs)).unwrap();
        writeln!(s, "initial {}", self.initial).unwrap();
        if let Some(t) = self.terminal {
            writeln!(s, "terminal {t}").unwrap();
        }
        for (q, r) in self.regions.iter().enumerate() {
            if let Some(r) = r {
                writeln!(s, "region {q} {r}").unwrap();
            }
        }
        for (q, row) in self.table.iter().enumerate() {
            for (i, &(o, t)) in row.iter().enumerate() {
                writeln!(
                    s,
                    "{q} -- {} / {} -> {t}",
                    Self::valuation_text(&self.inputs, i as u64),
                    Self::valuation_text(&self.outputs, o)
                )
                .unwrap();
            }
        }
        s
    }

    /// Parses the format written by [`Self::to_text`].
    pub fn from_text(text: &str) -> Result<MealyMachine, MachineFormatError> {
        let err = |line: usize, msg: &str| MachineFormatError::Syntax { line: line + 1, msg: msg.to_string() };
        let parse_atoms = |rest: &str, line: usize| -> Result<Vec<Atom>, MachineFormatError> {
            rest.split_whitespace()
                .map(|w| {
                    let (n, k) = w.split_once(':').ok_or_else(|| err(line, "expected name:kind"))?;
                    let kind = match k {
                        "sensor" => AtomKind::Sensor,
                        "location" => AtomKind::Location,
                        "action" => AtomKind::Action,
                        "context" => AtomKind::Context,
                        "internal" => AtomKind::Internal,
                        _ => return Err(err(line, "unknown atom kind")),
                    };
                    Ok(Atom::new(n, kind))
                })
                .collect()
        };
        let parse_val = |atoms: &[Atom], txt: &str, line: usize| -> Result<u64, MachineFormatError> {
            if txt.trim() == "-" {
                return Ok(0);
            }
            let words: Vec<&str> = txt.split_whitespace().collect();
            if words.len() != atoms.len() {
                return Err(err(line, "valuation must list every atom"));
            }
            let mut v = 0;
            for (i, (w, a)) in words.iter().zip(atoms).enumerate() {
                match w.strip_prefix('!') {
                    Some(n) if n == a.name() => {}
                    None if *w == a.name() => v |= 1 << i,
                    _ => return Err(err(line, "atoms out of order")),
                }
            }
            Ok(v)
        };
        let mut m = MealyMachine {
            name: String::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            initial: 0,
            terminal: None,
            table: Vec::new(),
            regions: Vec::new(),
        };
        let mut regions: BTreeMap<usize, Atom> = BTreeMap::new();
        let mut rows: BTreeMap<usize, BTreeMap<u64, (u64, usize)>> = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            match head {
                "machine" => m.name = rest.to_string(),
                "inputs" => m.inputs = parse_atoms(rest, ln)?,
                "outputs" => m.outputs = parse_atoms(rest, ln)?,
                "initial" => m.initial = rest.trim().parse().map_err(|_| err(ln, "bad state"))?,
                "terminal" => m.terminal = Some(rest.trim().parse().map_err(|_| err(ln, "bad state"))?),
                "region" => {
                    let (q, r) = rest.split_once(' ').ok_or_else(|| err(ln, "expected state and region"))?;
                    let q: usize = q.parse().map_err(|_| err(ln, "bad state"))?;
                    regions.insert(q, Atom::new(r.trim(), AtomKind::Location));
                }
                _ => {
                    let q: usize = head.parse().map_err(|_| err(ln, "unknown line"))?;
                    let rest = rest.strip_prefix("-- ").ok_or_else(|| err(ln, "expected `--`"))?;
                    let (inp, rest) = rest.split_once(" / ").ok_or_else(|| err(ln, "expected `/`"))?;
                    let (out, tgt) = rest.rsplit_once(" -> ").ok_or_else(|| err(ln, "expected `->`"))?;
                    let i = parse_val(&m.inputs, inp, ln)?;
                    let o = parse_val(&m.outputs, out, ln)?;
                    let t: usize = tgt.trim().parse().map_err(|_| err(ln, "bad target"))?;
                    rows.entry(q).or_default().insert(i, (o, t));
                }
            }
        }
        let n = rows.keys().copied().max().map_or(0, |x| x + 1);
        let width = 1usize << m.inputs.len();
        for q in 0..n {
            let row = rows.get(&q).ok_or_else(|| err(0, "missing state"))?;
            if row.len() != width {
                return Err(err(0, "state is not input-complete"));
            }
            m.table.push(row.values().copied().collect());
        }
        m.regions = (0..n).map(|q| regions.get(&q).cloned()).collect();
        Ok(m)
    }

    /// Graphviz rendering with one edge per (state, input) pair.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        writeln!(s, "digraph \"{}\" {{", self.name).unwrap();
        writeln!(s, "  rankdir=LR;").unwrap();
        for q in 0..self.num_states() {
            let shape = if Some(q) == self.terminal { "doublecircle" } else { "circle" };
            let region = self.regions[q].as_ref().map(|r| format!("\\n@{r}")).unwrap_or_default();
            writeln!(s, "  s{q} [shape={shape}, label=\"{q}{region}\"];").unwrap();
        }
        writeln!(s, "  init [shape=point];\n  init -> s{};", self.initial).unwrap();
        for (q, row) in self.table.iter().enumerate() {
            for (i, &(o, t)) in row.iter().enumerate() {
                let on: Vec<String> = self.output_atoms(o).iter().map(|a| a.to_string()).collect();
                writeln!(
                    s,
                    "  s{q} -> s{t} [label=\"{} / {}\"];",
                    Self::valuation_text(&self.inputs, i as u64),
                    on.join(" ")
                )
                .unwrap();
            }
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn encode(atoms: &[Atom], is_true: impl Fn(&Atom) -> bool) -> u64 {
    atoms.iter().enumerate().filter(|(_, a)| is_true(a)).fold(0, |acc, (i, _)| acc | 1 << i)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Toggles its output on every `p`, with a redundant copy of each state.
    fn toggler() -> MealyMachine {
        let p = Atom::new("p", AtomKind::Sensor);
        let g = Atom::new("g", AtomKind::Action);
        MealyMachine {
            name: "t".into(),
            inputs: vec![p],
            outputs: vec![g],
            initial: 0,
            terminal: None,
            table: vec![
                vec![(0, 2), (1, 1)],
                vec![(1, 3), (0, 0)],
                vec![(0, 0), (1, 3)],
                vec![(1, 1), (0, 2)],
            ],
            regions: vec![None; 4],
        }
    }

    #[test]
    fn minimization_merges_and_is_idempotent() {
        let m = toggler();
        let min = m.minimize();
        assert_eq!(min.num_states(), 2);
        assert_eq!(min.minimize(), min);
        // Same behaviour on every input sequence up to length 8.
        for word in 0..(1u32 << 8) {
            let ins: Vec<u64> = (0..8).map(|k| (word >> k & 1) as u64).collect();
            assert_eq!(m.run(&ins), min.run(&ins));
        }
    }

    #[test]
    fn text_round_trip() {
        let mut m = toggler().minimize();
        m.regions[0] = Some(Atom::new("r1", AtomKind::Location));
        m.terminal = Some(1);
        let back = MealyMachine::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(m.to_dot().contains("doublecircle"));
        assert!(MealyMachine::from_text("0 -- p / g -> 0").is_err());
    }
}
