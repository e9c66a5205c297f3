//! Activation inputs and lock-step composition of controllers.

use std::collections::BTreeSet;

use crate::ltl::{Atom, AtomKind};
use crate::orchestrator::OrchestratorError;
use crate::synth::MealyMachine;

/// A controller extended with an activation input. While the input is false
/// the machine keeps its state and leaves its outputs undetermined; a
/// transition controller sitting in its terminal state returns to its start
/// state instead.
#[derive(Debug, Clone)]
pub struct AugmentedMachine {
    pub base: MealyMachine,
    pub activation: Atom,
    pub is_transition: bool,
}

pub fn augment(m: MealyMachine, atom: Atom, is_transition: bool) -> Result<AugmentedMachine, OrchestratorError> {
    if m.inputs.contains(&atom) || m.outputs.contains(&atom) {
        return Err(OrchestratorError::AtomCollision { machine: m.name.clone(), atom: atom.to_string() });
    }
    Ok(AugmentedMachine { base: m, activation: atom, is_transition })
}

impl AugmentedMachine {
    /// Base inputs followed by the activation atom.
    pub fn inputs(&self) -> Vec<Atom> {
        self.base.inputs.iter().cloned().chain([self.activation.clone()]).collect()
    }

    /// One reaction. `input` is a valuation over the base inputs. Returns
    /// `None` as output when the machine is inactive.
    pub fn react(&self, state: usize, active: bool, input: u64) -> (Option<u64>, usize) {
        if active {
            let (o, t) = self.base.step(state, input);
            return (Some(o), t);
        }
        match self.base.terminal {
            Some(t) if self.is_transition && state == t => (None, self.base.initial),
            _ => (None, state),
        }
    }
}

/// Where each member reads its inputs from and writes its outputs to.
#[derive(Debug, Clone)]
struct Wiring {
    inputs: Vec<usize>,
    activation: usize,
    outputs: Vec<usize>,
}

/// Side-by-side composition: all members react on every tick. Outputs left
/// undetermined by every member resolve to false.
#[derive(Debug, Clone)]
pub struct Composition {
    pub members: Vec<AugmentedMachine>,
    /// Shared inputs: the union of the members' base inputs, then one
    /// activation atom per member.
    pub inputs: Vec<Atom>,
    pub outputs: Vec<Atom>,
    wiring: Vec<Wiring>,
}

pub fn compose_side_by_side(members: Vec<AugmentedMachine>) -> Result<Composition, OrchestratorError> {
    if members.len() > 64 {
        return Err(OrchestratorError::Parameter(format!("{} machines exceed the limit of 64", members.len())));
    }
    let mut inputs: Vec<Atom> = Vec::new();
    let mut outputs: Vec<Atom> = Vec::new();
    for m in &members {
        for a in &m.base.inputs {
            if !inputs.contains(a) {
                inputs.push(a.clone());
            }
        }
        for a in &m.base.outputs {
            if !outputs.contains(a) {
                outputs.push(a.clone());
            }
        }
    }
    let acts: BTreeSet<&Atom> = members.iter().map(|m| &m.activation).collect();
    if acts.len() != members.len() {
        return Err(OrchestratorError::AtomCollision { machine: "composition".into(), atom: "activation".into() });
    }
    for m in &members {
        if inputs.contains(&m.activation) || outputs.contains(&m.activation) {
            return Err(OrchestratorError::AtomCollision { machine: m.base.name.clone(), atom: m.activation.to_string() });
        }
    }
    inputs.extend(members.iter().map(|m| m.activation.clone()));
    if inputs.len() > 64 || outputs.len() > 64 {
        return Err(OrchestratorError::Parameter("composition exceeds 64 input or output atoms".into()));
    }
    let pos = |list: &[Atom], a: &Atom| list.iter().position(|b| b == a).expect("collected above");
    let wiring = members
        .iter()
        .map(|m| Wiring {
            inputs: m.base.inputs.iter().map(|a| pos(&inputs, a)).collect(),
            activation: pos(&inputs, &m.activation),
            outputs: m.base.outputs.iter().map(|a| pos(&outputs, a)).collect(),
        })
        .collect();
    Ok(Composition { members, inputs, outputs, wiring })
}

/// Activation atom for a controller.
pub fn activation_atom(name: &str) -> Atom {
    Atom::new(format!("a_{name}"), AtomKind::Internal)
}

impl Composition {
    pub fn initial_states(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.base.initial).collect()
    }

    /// Bit of the activation input of member `k`.
    pub fn activation_bit(&self, k: usize) -> u64 {
        1 << self.wiring[k].activation
    }

    /// Encodes shared inputs from the set of true atoms.
    pub fn encode_inputs<'a>(&self, true_atoms: impl IntoIterator<Item = &'a Atom>) -> u64 {
        true_atoms.into_iter().filter_map(|a| self.inputs.iter().position(|b| b == a)).fold(0, |v, i| v | 1 << i)
    }

    /// All members react to `input`; `states` is updated in place. Fails
    /// when two members determine an output differently.
    pub fn react(&self, states: &mut [usize], input: u64, tick: usize) -> Result<u64, OrchestratorError> {
        let mut value = 0u64;
        let mut owner: Vec<Option<usize>> = vec![None; self.outputs.len()];
        for (k, (m, w)) in self.members.iter().zip(&self.wiring).enumerate() {
            let local = w.inputs.iter().enumerate().fold(0u64, |v, (i, &g)| v | (input >> g & 1) << i);
            let active = input >> w.activation & 1 == 1;
            let (out, next) = m.react(states[k], active, local);
            states[k] = next;
            let Some(out) = out else { continue };
            for (i, &g) in w.outputs.iter().enumerate() {
                let bit = out >> i & 1;
                match owner[g] {
                    Some(prev) if (value >> g & 1) != bit => {
                        return Err(OrchestratorError::Conflict {
                            first: self.members[prev].base.name.clone(),
                            second: m.base.name.clone(),
                            atom: self.outputs[g].to_string(),
                            tick,
                        });
                    }
                    Some(_) => {}
                    None => {
                        owner[g] = Some(k);
                        value |= bit << g;
                    }
                }
            }
        }
        Ok(value)
    }

    /// Explores every joint state reachable when, on each tick, the set of
    /// active members is one of `patterns` and the base inputs are
    /// arbitrary. Returns the number of joint states, or the first conflict.
    pub fn check_well_defined(&self, patterns: &[Vec<usize>]) -> Result<usize, OrchestratorError> {
        let sensor_bits = self.inputs.len() - self.members.len();
        let acts: Vec<u64> =
            patterns.iter().map(|p| p.iter().fold(0u64, |v, &k| v | self.activation_bit(k))).collect();
        let start = self.initial_states();
        let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::from([start.clone()]);
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            for &a in &acts {
                for v in 0..1u64 << sensor_bits {
                    let mut next = s.clone();
                    self.react(&mut next, v | a, 0)?;
                    if seen.insert(next.clone()) {
                        stack.push(next);
                    }
                }
            }
        }
        Ok(seen.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(n: &str) -> Atom {
        Atom::new(n, AtomKind::Location)
    }

    /// Two states alternating between emitting `a` and not.
    fn blinker(name: &str, out: &str, phase: u64) -> MealyMachine {
        MealyMachine {
            name: name.into(),
            inputs: vec![],
            outputs: vec![loc(out)],
            initial: 0,
            terminal: None,
            table: vec![vec![(phase, 1)], vec![(1 - phase, 0)]],
            regions: vec![None, None],
        }
    }

    #[test]
    fn inactive_machines_freeze_and_transition_machines_reset() {
        let m = augment(blinker("m", "g", 1), activation_atom("m"), false).unwrap();
        assert_eq!(m.react(1, false, 0), (None, 1));
        let mut t = blinker("t", "g", 1);
        t.terminal = Some(1);
        let t = augment(t, activation_atom("t"), true).unwrap();
        assert_eq!(t.react(1, false, 0), (None, 0));
        assert_eq!(t.react(0, false, 0), (None, 0));
    }

    #[test]
    fn collision_is_rejected() {
        let err = augment(blinker("m", "g", 1), loc("g"), false).unwrap_err();
        assert!(matches!(err, OrchestratorError::AtomCollision { .. }));
    }

    #[test]
    fn opposite_drivers_conflict() {
        let a = augment(blinker("a", "g", 1), activation_atom("a"), false).unwrap();
        let b = augment(blinker("b", "g", 0), activation_atom("b"), false).unwrap();
        let c = compose_side_by_side(vec![a, b]).unwrap();
        let both = c.activation_bit(0) | c.activation_bit(1);
        let mut s = c.initial_states();
        let err = c.react(&mut s, both, 5).unwrap_err();
        assert_eq!(
            err,
            OrchestratorError::Conflict { first: "a".into(), second: "b".into(), atom: "g".into(), tick: 5 }
        );
        assert!(c.check_well_defined(&[vec![], vec![0], vec![1]]).is_ok());
        assert!(c.check_well_defined(&[vec![0, 1]]).is_err());
    }

    #[test]
    fn disjoint_outputs_never_conflict() {
        let a = augment(blinker("a", "g", 1), activation_atom("a"), false).unwrap();
        let b = augment(blinker("b", "h", 0), activation_atom("b"), false).unwrap();
        let c = compose_side_by_side(vec![a, b]).unwrap();
        assert_eq!(c.check_well_defined(&[vec![0, 1], vec![0], vec![]]).unwrap(), 4);
    }
}
