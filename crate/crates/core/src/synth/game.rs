//! Explicit game arenas: a product of deterministic automata driven by
//! environment input letters and system output letters.

use std::collections::HashMap;

use crate::ltl::{Atom, Invariant, LtlError};
use crate::synth::automaton::DetAutomaton;

/// How an automaton takes part in the arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Reads inputs only; a rejected input is one the environment may not pick.
    EnvSafety,
    /// Reads the full letter; a rejected letter is one the system may not play.
    SysSafety,
    EnvJustice,
    SysJustice,
}

/// A two-player game. In state `s` the environment picks an input letter
/// `k`, then the system picks one of the listed outputs, which fixes the
/// successor. States are positions before an input is read; state labels
/// record the last letter through the component automata.
#[derive(Debug, Clone)]
pub struct GameStructure {
    pub inputs: Vec<Atom>,
    pub outputs: Vec<Atom>,
    /// Input valuations the environment can ever pick (bit i = `inputs[i]`).
    pub input_letters: Vec<u64>,
    /// Output valuations available for each input letter, ascending.
    pub output_letters: Vec<Vec<u64>>,
    pub initial: usize,
    /// `env_ok[s * K + k]`: whether input letter `k` is allowed in `s`.
    env_ok: Vec<bool>,
    /// Edges of (s, k) are `edges[offsets[s*K+k]..offsets[s*K+k+1]]`, each
    /// packing the output index (high 32 bits) and the successor.
    offsets: Vec<u32>,
    edges: Vec<u64>,
    pub env_justice: Vec<Vec<bool>>,
    pub sys_justice: Vec<Vec<bool>>,
    /// When false the solver ignores `env_justice`: some guarantee is
    /// unconditional, so the assumptions may not be relied upon.
    pub use_assumptions: bool,
    /// Per-state tuple of component automaton states.
    pub labels: Vec<Vec<u32>>,
    pub component_names: Vec<String>,
}

fn project(bits: &[usize], v: u64) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((v >> b) & 1) << i)
}

/// Output valuations allowed with each input valuation under `inv`. Atoms
/// outside the invariant are unconstrained.
fn letters(inv: &Invariant, inputs: &[Atom], outputs: &[Atom]) -> Vec<Vec<u64>> {
    let ni = inputs.len();
    let pos = |a: &Atom| {
        inputs
            .iter()
            .position(|b| b == a)
            .or_else(|| outputs.iter().position(|b| b == a).map(|p| p + ni))
    };
    let inv_bits: Vec<Option<usize>> = inv.atoms().iter().map(pos).collect();
    let in_inv = |g: usize| inv_bits.contains(&Some(g));
    let free_out: Vec<usize> = (0..outputs.len()).filter(|&o| !in_inv(o + ni)).collect();
    let in_mask: u64 = inv_bits.iter().flatten().filter(|&&g| g < ni).fold(0, |m, &g| m | 1 << g);
    // Group the invariant's valuations by their input part.
    let mut by_input: HashMap<u64, Vec<u64>> = HashMap::new();
    for &a in inv.allowed() {
        // Invariant atoms outside the arena are projected away.
        let global = inv_bits
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.map(|g| ((a >> i) & 1) << g))
            .fold(0u64, |m, b| m | b);
        by_input.entry(global & in_mask).or_default().push(global >> ni);
    }
    (0..1u64 << ni)
        .map(|i| {
            let mut outs: Vec<u64> = Vec::new();
            if let Some(bases) = by_input.get(&(i & in_mask)) {
                for &b in bases {
                    for f in 0..1u64 << free_out.len() {
                        let extra = free_out.iter().enumerate().fold(0, |m, (k, &o)| m | ((f >> k) & 1) << o);
                        outs.push(b | extra);
                    }
                }
            }
            outs.sort_unstable();
            outs.dedup();
            outs
        })
        .collect()
}

impl GameStructure {
    /// Explores the product of `automata` from their initial states. The
    /// invariant filters letters; inputs with no allowed output are never
    /// offered to the environment.
    pub fn build(
        inputs: Vec<Atom>,
        outputs: Vec<Atom>,
        inv: &Invariant,
        automata: Vec<(DetAutomaton, Role)>,
        use_assumptions: bool,
        max_states: usize,
    ) -> Result<GameStructure, LtlError> {
        let ni = inputs.len();
        if ni + outputs.len() > 64 {
            return Err(LtlError::ResourceLimit("more than 64 arena atoms".into()));
        }
        let all_letters = letters(inv, &inputs, &outputs);
        let (input_letters, output_letters): (Vec<u64>, Vec<Vec<u64>>) =
            all_letters.into_iter().enumerate().filter(|(_, o)| !o.is_empty()).map(|(i, o)| (i as u64, o)).unzip();
        let global: Vec<&Atom> = inputs.iter().chain(&outputs).collect();
        let bits: Vec<Vec<usize>> = automata
            .iter()
            .map(|(d, role)| {
                d.atoms()
                    .iter()
                    .map(|a| {
                        let p = global.iter().position(|g| *g == a).ok_or_else(|| {
                            LtlError::UnknownAtom(format!("{} (automaton {})", a.name(), d.name))
                        })?;
                        if *role == Role::EnvSafety && p >= ni {
                            return Err(LtlError::UnknownAtom(format!(
                                "{} is not an input (automaton {})",
                                a.name(),
                                d.name
                            )));
                        }
                        Ok(p)
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let k_count = input_letters.len();
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut labels: Vec<Vec<u32>> = vec![vec![0; automata.len()]];
        ids.insert(labels[0].clone(), 0);
        let mut env_ok = Vec::new();
        let mut offsets = vec![0u32];
        let mut edges: Vec<u64> = Vec::new();
        let mut s = 0;
        let mut next = vec![0u32; automata.len()];
        while s < labels.len() {
            for (k, &i) in input_letters.iter().enumerate() {
                let mut ok = true;
                for (c, (d, role)) in automata.iter().enumerate() {
                    if *role == Role::EnvSafety {
                        match d.step(labels[s][c], project(&bits[c], i)) {
                            Some(n) => next[c] = n,
                            None => ok = false,
                        }
                    }
                }
                env_ok.push(ok);
                if ok {
                    'outs: for (oi, &o) in output_letters[k].iter().enumerate() {
                        let letter = i | o << ni;
                        for (c, (d, role)) in automata.iter().enumerate() {
                            if *role != Role::EnvSafety {
                                match d.step(labels[s][c], project(&bits[c], letter)) {
                                    Some(n) => next[c] = n,
                                    None => continue 'outs,
                                }
                            }
                        }
                        let id = match ids.get(&next) {
                            Some(&id) => id,
                            None => {
                                if labels.len() >= max_states {
                                    return Err(LtlError::ResourceLimit(format!(
                                        "arena exceeds {max_states} states"
                                    )));
                                }
                                let id = labels.len() as u32;
                                ids.insert(next.clone(), id);
                                labels.push(next.clone());
                                id
                            }
                        };
                        edges.push((oi as u64) << 32 | id as u64);
                    }
                }
                offsets.push(edges.len() as u32);
            }
            s += 1;
        }
        let justice = |want: Role| -> Vec<Vec<bool>> {
            automata
                .iter()
                .enumerate()
                .filter(|(_, (_, r))| *r == want)
                .map(|(c, (d, _))| labels.iter().map(|l| d.is_justice(l[c])).collect())
                .collect()
        };
        let env_justice = justice(Role::EnvJustice);
        let sys_justice = justice(Role::SysJustice);
        debug_assert_eq!(env_ok.len(), labels.len() * k_count);
        Ok(GameStructure {
            inputs,
            outputs,
            input_letters,
            output_letters,
            initial: 0,
            env_ok,
            offsets,
            edges,
            env_justice,
            sys_justice,
            use_assumptions,
            component_names: automata.iter().map(|(d, _)| d.name.clone()).collect(),
            labels,
        })
    }

    /// A game given directly by its move lists: `moves[s][k]` is `None` when
    /// the environment may not pick letter `k` in `s`, else the successors
    /// the system can choose (output `j` is the j-th entry).
    pub fn from_moves(
        moves: &[Vec<Option<Vec<usize>>>],
        env_justice: Vec<Vec<bool>>,
        sys_justice: Vec<Vec<bool>>,
    ) -> GameStructure {
        let k_count = moves.first().map_or(0, Vec::len);
        let mut env_ok = Vec::new();
        let mut offsets = vec![0u32];
        let mut edges = Vec::new();
        let mut width = 0;
        for row in moves {
            assert_eq!(row.len(), k_count, "every state needs the same input letters");
            for m in row {
                env_ok.push(m.is_some());
                for (j, &t) in m.iter().flatten().enumerate() {
                    edges.push((j as u64) << 32 | t as u64);
                    width = width.max(j + 1);
                }
                offsets.push(edges.len() as u32);
            }
        }
        GameStructure {
            inputs: Vec::new(),
            outputs: Vec::new(),
            input_letters: (0..k_count as u64).collect(),
            output_letters: vec![(0..width as u64).collect(); k_count],
            initial: 0,
            env_ok,
            offsets,
            edges,
            env_justice,
            sys_justice,
            use_assumptions: true,
            labels: vec![Vec::new(); moves.len()],
            component_names: Vec::new(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn num_input_letters(&self) -> usize {
        self.input_letters.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn env_allowed(&self, s: usize, k: usize) -> bool {
        self.env_ok[s * self.input_letters.len() + k]
    }

    /// System choices after input letter `k` in `s`, as (output valuation,
    /// successor), lowest output first.
    pub fn moves(&self, s: usize, k: usize) -> impl Iterator<Item = (u64, usize)> + '_ {
        let ix = s * self.input_letters.len() + k;
        let (a, b) = (self.offsets[ix] as usize, self.offsets[ix + 1] as usize);
        self.edges[a..b].iter().map(move |&e| (self.output_letters[k][(e >> 32) as usize], (e & 0xffff_ffff) as usize))
    }

    pub(crate) fn successors(&self, s: usize, k: usize) -> impl Iterator<Item = usize> + '_ {
        let ix = s * self.input_letters.len() + k;
        let (a, b) = (self.offsets[ix] as usize, self.offsets[ix + 1] as usize);
        self.edges[a..b].iter().map(|&e| (e & 0xffff_ffff) as usize)
    }
}
