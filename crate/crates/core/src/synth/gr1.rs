//! GR(1) game solving by the triple fixpoint, memoryful strategies, and
//! Mealy machine extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::ltl::Atom;
use crate::synth::game::GameStructure;
use crate::synth::mealy::MealyMachine;
use crate::synth::SynthError;

/// One rank of the least fixpoint for a fixed system justice index.
#[derive(Debug, Clone)]
struct Layer {
    y: Vec<bool>,
    x: Vec<Vec<bool>>,
}

/// The winning region together with the rank structure needed to play.
#[derive(Debug, Clone)]
pub struct Gr1Solution {
    pub winning: Vec<bool>,
    env: Vec<Vec<bool>>,
    sys: Vec<Vec<bool>>,
    layers: Vec<Vec<Layer>>,
    rank: Vec<Vec<u32>>,
}

/// Controllable predecessor: states where every allowed input has some
/// system move into `set`. States where the environment has no allowed
/// input are won by the system.
pub fn cpre(g: &GameStructure, set: &[bool]) -> Vec<bool> {
    (0..g.num_states())
        .map(|s| (0..g.num_input_letters()).all(|k| !g.env_allowed(s, k) || g.successors(s, k).any(|t| set[t])))
        .collect()
}

fn or(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x || *y).collect()
}

/// Solves the game `∧ GF env -> ∧ GF sys`. An empty justice list counts as
/// a single set containing every state.
pub fn solve(g: &GameStructure) -> Gr1Solution {
    let n = g.num_states();
    let all = vec![true; n];
    let env: Vec<Vec<bool>> =
        if g.use_assumptions && !g.env_justice.is_empty() { g.env_justice.clone() } else { vec![all.clone()] };
    let sys: Vec<Vec<bool>> = if g.sys_justice.is_empty() { vec![all.clone()] } else { g.sys_justice.clone() };
    let mut z = all;
    loop {
        let z_round = z.clone();
        let mut layers_all = Vec::with_capacity(sys.len());
        for js in &sys {
            let cz = cpre(g, &z);
            let base: Vec<bool> = js.iter().zip(&cz).map(|(a, b)| *a && *b).collect();
            let mut y = vec![false; n];
            let mut layers = Vec::new();
            loop {
                let start = or(&base, &cpre(g, &y));
                let mut y_next = y.clone();
                let mut xs = Vec::with_capacity(env.len());
                for je in &env {
                    let mut x = vec![true; n];
                    loop {
                        let cx = cpre(g, &x);
                        let x_next: Vec<bool> =
                            (0..n).map(|s| start[s] || (!je[s] && cx[s])).collect();
                        if x_next == x {
                            break;
                        }
                        x = x_next;
                    }
                    y_next = or(&y_next, &x);
                    xs.push(x);
                }
                if y_next == y {
                    break;
                }
                layers.push(Layer { y: y_next.clone(), x: xs });
                y = y_next;
            }
            z = y;
            layers_all.push(layers);
        }
        if z == z_round {
            let rank = layers_all
                .iter()
                .map(|ls| {
                    (0..n)
                        .map(|s| ls.iter().position(|l| l.y[s]).map_or(u32::MAX, |r| r as u32))
                        .collect()
                })
                .collect();
            return Gr1Solution { winning: z, env, sys, layers: layers_all, rank };
        }
    }
}

impl Gr1Solution {
    pub fn is_winning(&self, s: usize) -> bool {
        self.winning[s]
    }

    pub fn num_sys_justice(&self) -> usize {
        self.sys.len()
    }

    /// The system's reply to input letter `k` in winning state `s` with
    /// justice memory `j`: the lowest output that keeps the play winning,
    /// its successor, and the updated memory.
    pub fn choose(&self, g: &GameStructure, s: usize, j: usize, k: usize) -> Option<(u64, usize, usize)> {
        if !self.winning[s] || !g.env_allowed(s, k) {
            return None;
        }
        let pick = |set: &[bool]| g.moves(s, k).find(|&(_, t)| set[t]);
        if self.sys[j][s] {
            let (o, t) = pick(&self.winning)?;
            return Some((o, t, (j + 1) % self.sys.len()));
        }
        let r = self.rank[j][s] as usize;
        if r > 0 {
            if let Some((o, t)) = pick(&self.layers[j][r - 1].y) {
                return Some((o, t, j));
            }
        }
        let layer = &self.layers[j][r];
        for (i, x) in layer.x.iter().enumerate() {
            if x[s] && !self.env[i][s] {
                if let Some((o, t)) = pick(x) {
                    return Some((o, t, j));
                }
            }
        }
        // Reachable only for states added through the base set.
        pick(&self.winning).map(|(o, t)| (o, t, j))
    }

    /// An input letter with which the environment wins from the initial
    /// state: one after which no system move stays winning, else any.
    pub fn losing_input(&self, g: &GameStructure) -> Option<u64> {
        let s = g.initial;
        let ks: Vec<usize> = (0..g.num_input_letters()).filter(|&k| g.env_allowed(s, k)).collect();
        ks.iter()
            .find(|&&k| !g.successors(s, k).any(|t| self.winning[t]))
            .or(ks.first())
            .map(|&k| g.input_letters[k])
    }
}

/// Builds a Mealy machine that plays the winning strategy from the initial
/// state. `adjacency` maps each leaf location to the locations reachable
/// in one step (itself included); it drives the region annotation of
/// states. Inputs the environment may not pick lead to an all-false sink.
pub fn extract_mealy(
    g: &GameStructure,
    sol: &Gr1Solution,
    name: &str,
    adjacency: &BTreeMap<Atom, BTreeSet<Atom>>,
) -> Result<MealyMachine, SynthError> {
    if !sol.is_winning(g.initial) {
        return Err(SynthError::Unrealizable { scenario: name.to_string(), input: None });
    }
    let leaf_of = |o: u64| -> Option<Atom> {
        let mut hit = g.outputs.iter().enumerate().filter(|(i, a)| o >> i & 1 == 1 && adjacency.contains_key(*a));
        match (hit.next(), hit.next()) {
            (Some((_, a)), None) => Some(a.clone()),
            _ => None,
        }
    };
    let letter_index: HashMap<u64, usize> = g.input_letters.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let width = 1u64 << g.inputs.len();
    type Key = (usize, usize, Option<Atom>);
    let mut ids: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut table: Vec<Vec<(u64, usize)>> = vec![Vec::new()];
    let mut sink: Option<usize> = None;
    let init: Key = (g.initial, 0, None);
    ids.insert(init.clone(), 0);
    keys.push(init);
    let mut queue = VecDeque::from([0usize]);
    let mut regions: Vec<Option<Atom>> = vec![None];
    while let Some(q) = queue.pop_front() {
        let (s, j, _) = keys[q].clone();
        let mut row = Vec::with_capacity(width as usize);
        for v in 0..width {
            let reply = letter_index.get(&v).and_then(|&k| sol.choose(g, s, j, k));
            let (o, t) = match reply {
                Some((o, t, j2)) => {
                    let key = (t, j2, leaf_of(o));
                    let id = match ids.get(&key) {
                        Some(&id) => id,
                        None => {
                            let id = keys.len();
                            ids.insert(key.clone(), id);
                            regions.push(key.2.clone());
                            keys.push(key);
                            table.push(Vec::new());
                            queue.push_back(id);
                            id
                        }
                    };
                    (o, id)
                }
                None => {
                    let id = *sink.get_or_insert_with(|| {
                        let id = keys.len();
                        keys.push((usize::MAX, 0, None));
                        regions.push(None);
                        table.push(Vec::new());
                        id
                    });
                    (0, id)
                }
            };
            row.push((o, t));
        }
        table[q] = row;
    }
    if let Some(sk) = sink {
        table[sk] = (0..width).map(|_| (0, sk)).collect();
    }
    // The initial state assumes a region from which every first move is one
    // step away.
    let firsts: BTreeSet<Atom> = table[0].iter().filter_map(|&(o, _)| leaf_of(o)).collect();
    if !firsts.is_empty() {
        let preferred = leaf_of(table[0][0].0);
        let fits = |c: &Atom| firsts.iter().all(|r| adjacency[c].contains(r));
        let chosen = preferred
            .into_iter()
            .chain(adjacency.keys().cloned())
            .find(fits)
            .ok_or_else(|| SynthError::Region(format!("{name}: no start region adjacent to all first moves")))?;
        regions[0] = Some(chosen);
    }
    Ok(MealyMachine {
        name: name.to_string(),
        inputs: g.inputs.clone(),
        outputs: g.outputs.clone(),
        initial: 0,
        terminal: None,
        table,
        regions,
    })
}
