//! Model checking a Mealy machine against an LTL formula by emptiness of
//! its product with the automaton of the negation.

use std::collections::HashMap;

use crate::graph;
use crate::ltl::{to_buchi, Formula, LtlError};
use crate::synth::mealy::MealyMachine;

/// Whether every infinite run of `m`, under every input sequence, satisfies
/// `f`. Atoms of `f` that the machine does not mention read as false.
pub fn realizes(m: &MealyMachine, f: &Formula) -> Result<bool, LtlError> {
    let neg = to_buchi(&Formula::not(f.clone()))?;
    let atoms = neg.atoms();
    // Bit positions of the automaton atoms inside the machine's letter.
    let in_bits: Vec<(usize, usize)> =
        atoms.iter().enumerate().filter_map(|(b, a)| m.inputs.iter().position(|x| x == a).map(|p| (b, p))).collect();
    let out_bits: Vec<(usize, usize)> =
        atoms.iter().enumerate().filter_map(|(b, a)| m.outputs.iter().position(|x| x == a).map(|p| (b, p))).collect();
    let letter = |i: u64, o: u64| -> u64 {
        in_bits.iter().fold(0, |v, &(b, p)| v | ((i >> p) & 1) << b)
            | out_bits.iter().fold(0, |v, &(b, p)| v | ((o >> p) & 1) << b)
    };
    let mut ids: HashMap<(usize, usize), usize> = HashMap::from([((m.initial, 0), 0)]);
    let mut nodes = vec![(m.initial, 0usize)];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut i = 0;
    while i < nodes.len() {
        let (q, b) = nodes[i];
        for (inp, &(o, q2)) in m.table[q].iter().enumerate() {
            let v = letter(inp as u64, o);
            for &b2 in &neg.states()[b].succ {
                if !neg.matches(b2, v) {
                    continue;
                }
                let key = (q2, b2);
                let id = *ids.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    succ.push(Vec::new());
                    nodes.len() - 1
                });
                succ[i].push(id);
            }
        }
        i += 1;
    }
    let full = if neg.num_acceptance_sets() >= 64 { u64::MAX } else { (1u64 << neg.num_acceptance_sets()) - 1 };
    let violating = graph::sccs(&succ).into_iter().any(|c| {
        graph::is_nontrivial(&c, &succ)
            && c.iter().fold(0u64, |acc, &n| acc | neg.states()[nodes[n].1].acc) & full == full
    });
    Ok(!violating)
}
