//! Typed variable declarations, their mutex/refinement/adjacency relations,
//! and the rule formulas inferred from them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ltl::{Atom, AtomKind, AtomTable, Formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("duplicate declaration `{0}`")]
    Duplicate(String),
    #[error("invalid identifier `{0}`")]
    InvalidName(String),
    #[error("refinement cycle through `{0}`")]
    RefinementCycle(String),
    #[error("`{0}` declares adjacency but is not a location")]
    AdjacencyOnNonLocation(String),
    #[error("`{0}` extends unknown type `{1}`")]
    UnknownParent(String, String),
    #[error("`{0}` is adjacent to unknown location `{1}`")]
    UnknownAdjacent(String, String),
    #[error("`{0}` ({1}) cannot extend `{2}` ({3})")]
    IncompatibleParent(String, TypeKind, String, TypeKind),
    #[error("`{0}` has an empty range {1}..{2}")]
    BadRange(String, i64, i64),
    #[error("bounded type `{0}` cannot take part in refinement or adjacency")]
    BoundedRelation(String),
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("contexts `{0}` and `{1}` are not mutually exclusive")]
    ContextsNotMutex(String, String),
    #[error("t_context must be at least 1")]
    BadContextTime,
    #[error("unknown mutex group `{0}`")]
    UnknownGroup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Sensor,
    Location,
    Action,
    Context,
}

impl TypeKind {
    pub fn atom_kind(self) -> AtomKind {
        match self {
            TypeKind::Sensor => AtomKind::Sensor,
            TypeKind::Location => AtomKind::Location,
            TypeKind::Action => AtomKind::Action,
            TypeKind::Context => AtomKind::Context,
        }
    }
}

impl std::fmt::Display for TypeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.atom_kind().fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseType {
    Boolean,
    Bounded { lo: i64, hi: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub kind: TypeKind,
    pub base: BaseType,
    pub mutex_groups: BTreeSet<String>,
    pub adjacency: BTreeSet<String>,
    pub parents: BTreeSet<String>,
}

impl TypeDecl {
    pub fn boolean(name: &str, kind: TypeKind) -> Self {
        TypeDecl {
            name: name.to_string(),
            kind,
            base: BaseType::Boolean,
            mutex_groups: BTreeSet::new(),
            adjacency: BTreeSet::new(),
            parents: BTreeSet::new(),
        }
    }

    pub fn in_group(mut self, g: &str) -> Self {
        self.mutex_groups.insert(g.to_string());
        self
    }

    pub fn extends(mut self, p: &str) -> Self {
        self.parents.insert(p.to_string());
        self
    }

    pub fn adjacent_to(mut self, locs: &[&str]) -> Self {
        self.adjacency.extend(locs.iter().map(|s| s.to_string()));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutexMode {
    ExactlyOne,
    AtMostOne,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutexGroup {
    pub name: String,
    /// Members in declaration order.
    pub members: Vec<Atom>,
    pub default_mode: MutexMode,
}

#[derive(Debug, Clone)]
pub struct Typeset {
    types: BTreeMap<String, TypeDecl>,
    /// Atoms in declaration order.
    atoms: Vec<Atom>,
    by_name: BTreeMap<String, Atom>,
    groups: Vec<MutexGroup>,
    /// (child, ancestor) pairs, transitively closed.
    pub refinement_rel: BTreeSet<(Atom, Atom)>,
    /// Symmetric, irreflexive.
    pub mutex_rel: BTreeSet<(Atom, Atom)>,
    /// Declared adjacency plus self-adjacency of every location.
    pub adjacency_rel: BTreeSet<(Atom, Atom)>,
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some('a'..='z'))
        && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && s != "true"
        && s != "false"
}

pub fn build_typeset(decls: &[TypeDecl]) -> Result<Typeset, WorldError> {
    let mut types = BTreeMap::new();
    let mut atoms = Vec::new();
    let mut by_name = BTreeMap::new();
    let mut groups: Vec<MutexGroup> = Vec::new();

    let mut add_atom = |name: String, kind: TypeKind, by_name: &mut BTreeMap<String, Atom>| {
        if !valid_ident(&name) {
            return Err(WorldError::InvalidName(name));
        }
        if by_name.contains_key(&name) {
            return Err(WorldError::Duplicate(name));
        }
        let a = Atom::new(&name, kind.atom_kind());
        atoms.push(a.clone());
        by_name.insert(name, a.clone());
        Ok(a)
    };
    let join = |group: &str, a: &Atom, kind: TypeKind, groups: &mut Vec<MutexGroup>| {
        let mode = if kind == TypeKind::Location { MutexMode::ExactlyOne } else { MutexMode::AtMostOne };
        match groups.iter_mut().find(|g| g.name == group) {
            Some(g) => {
                g.members.push(a.clone());
                if mode == MutexMode::AtMostOne {
                    g.default_mode = MutexMode::AtMostOne;
                }
            }
            None => groups.push(MutexGroup {
                name: group.to_string(),
                members: vec![a.clone()],
                default_mode: mode,
            }),
        }
    };

    for d in decls {
        if types.contains_key(&d.name) {
            return Err(WorldError::Duplicate(d.name.clone()));
        }
        match d.base {
            BaseType::Boolean => {
                let a = add_atom(d.name.clone(), d.kind, &mut by_name)?;
                for g in &d.mutex_groups {
                    join(g, &a, d.kind, &mut groups);
                }
            }
            BaseType::Bounded { lo, hi } => {
                if lo > hi {
                    return Err(WorldError::BadRange(d.name.clone(), lo, hi));
                }
                if !d.parents.is_empty() || !d.adjacency.is_empty() || !d.mutex_groups.is_empty() {
                    return Err(WorldError::BoundedRelation(d.name.clone()));
                }
                // One-hot encoding in a dedicated exactly-one group.
                let mut members = Vec::new();
                for k in lo..=hi {
                    let n = if k < 0 { format!("{}_m{}", d.name, -k) } else { format!("{}_{}", d.name, k) };
                    members.push(add_atom(n, d.kind, &mut by_name)?);
                }
                groups.push(MutexGroup {
                    name: d.name.clone(),
                    members,
                    default_mode: MutexMode::ExactlyOne,
                });
            }
        }
        types.insert(d.name.clone(), d.clone());
    }

    // Direct refinement edges and their kind checks.
    let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for d in decls {
        for p in &d.parents {
            let Some(pd) = types.get(p) else {
                return Err(WorldError::UnknownParent(d.name.clone(), p.clone()));
            };
            if !matches!(pd.base, BaseType::Boolean) {
                return Err(WorldError::BoundedRelation(p.clone()));
            }
            if pd.kind != d.kind {
                return Err(WorldError::IncompatibleParent(d.name.clone(), d.kind, p.clone(), pd.kind));
            }
            parents.entry(d.name.clone()).or_default().insert(p.clone());
        }
    }
    let mut refinement_rel = BTreeSet::new();
    for d in decls {
        // DFS over ancestors; meeting the start again is a cycle.
        let mut stack: Vec<String> = parents.get(&d.name).into_iter().flatten().cloned().collect();
        let mut seen = BTreeSet::new();
        while let Some(p) = stack.pop() {
            if p == d.name {
                return Err(WorldError::RefinementCycle(d.name.clone()));
            }
            if seen.insert(p.clone()) {
                refinement_rel.insert((by_name[&d.name].clone(), by_name[&p].clone()));
                stack.extend(parents.get(&p).into_iter().flatten().cloned());
            }
        }
    }

    let mut mutex_rel = BTreeSet::new();
    for g in &groups {
        for a in &g.members {
            for b in &g.members {
                if a != b {
                    mutex_rel.insert((a.clone(), b.clone()));
                }
            }
        }
    }

    let mut adjacency_rel = BTreeSet::new();
    for d in decls {
        if d.kind == TypeKind::Location && d.base == BaseType::Boolean {
            let a = by_name[&d.name].clone();
            adjacency_rel.insert((a.clone(), a));
        }
        if d.adjacency.is_empty() {
            continue;
        }
        if d.kind != TypeKind::Location {
            return Err(WorldError::AdjacencyOnNonLocation(d.name.clone()));
        }
        for n in &d.adjacency {
            match types.get(n) {
                Some(nd) if nd.kind == TypeKind::Location && nd.base == BaseType::Boolean => {
                    adjacency_rel.insert((by_name[&d.name].clone(), by_name[n].clone()));
                }
                _ => return Err(WorldError::UnknownAdjacent(d.name.clone(), n.clone())),
            }
        }
    }

    Ok(Typeset { types, atoms, by_name, groups, refinement_rel, mutex_rel, adjacency_rel })
}

impl AtomTable for Typeset {
    fn lookup(&self, name: &str) -> Option<Atom> {
        self.by_name.get(name).cloned()
    }
}

impl Typeset {
    pub fn decl(&self, name: &str) -> Option<&TypeDecl> {
        self.types.get(name)
    }

    pub fn atom(&self, name: &str) -> Option<&Atom> {
        self.by_name.get(name)
    }

    /// All atoms in declaration order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atoms_of(&self, kind: AtomKind) -> Vec<Atom> {
        self.atoms.iter().filter(|a| a.kind() == kind).cloned().collect()
    }

    pub fn groups(&self) -> &[MutexGroup] {
        &self.groups
    }

    pub fn are_mutex(&self, a: &Atom, b: &Atom) -> bool {
        self.mutex_rel.contains(&(a.clone(), b.clone()))
    }

    /// Locations that declare adjacency, with their neighbours (self included).
    pub fn adjacency_graph(&self) -> BTreeMap<Atom, BTreeSet<Atom>> {
        let mut g: BTreeMap<Atom, BTreeSet<Atom>> = BTreeMap::new();
        for d in self.types.values() {
            if !d.adjacency.is_empty() {
                let a = self.by_name[&d.name].clone();
                let ns = self
                    .adjacency_rel
                    .iter()
                    .filter(|(x, _)| *x == a)
                    .map(|(_, y)| y.clone())
                    .collect();
                g.insert(a, ns);
            }
        }
        g
    }

    /// Ancestors of `a` under refinement.
    pub fn ancestors(&self, a: &Atom) -> BTreeSet<Atom> {
        self.refinement_rel.iter().filter(|(c, _)| c == a).map(|(_, p)| p.clone()).collect()
    }
}

/// Rule formulas inferred from a typeset, each list sorted by atom name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub mtx: Vec<Formula>,
    pub refinement: Vec<Formula>,
    pub adj: Vec<Formula>,
}

impl RuleSet {
    pub fn is_empty(&self) -> bool {
        self.mtx.is_empty() && self.refinement.is_empty() && self.adj.is_empty()
    }

    pub fn all(&self) -> impl Iterator<Item = &Formula> {
        self.mtx.iter().chain(self.refinement.iter()).chain(self.adj.iter())
    }

    /// Rules whose atoms all lie in `scope`.
    pub fn restricted_to(&self, scope: &BTreeSet<Atom>) -> RuleSet {
        let keep = |v: &Vec<Formula>| v.iter().filter(|f| f.atoms().is_subset(scope)).cloned().collect();
        RuleSet { mtx: keep(&self.mtx), refinement: keep(&self.refinement), adj: keep(&self.adj) }
    }
}

/// Infers mutex, refinement and adjacency rules. `modes` overrides the
/// per-group default semantics.
pub fn infer_rules(ts: &Typeset, modes: &BTreeMap<String, MutexMode>) -> RuleSet {
    let mut mtx = Vec::new();
    let mut groups: Vec<&MutexGroup> = ts.groups.iter().collect();
    groups.sort_by(|a, b| a.name.cmp(&b.name));
    for g in groups {
        let mode = modes.get(&g.name).copied().unwrap_or(g.default_mode);
        let mut members = g.members.clone();
        members.sort();
        if members.len() < 2 && mode == MutexMode::AtMostOne {
            continue;
        }
        for (i, m) in members.iter().enumerate() {
            let others = Formula::conj(
                members.iter().filter(|o| *o != m).map(|o| Formula::not(Formula::atom(o))),
            );
            let body = match mode {
                MutexMode::ExactlyOne => Formula::iff(Formula::atom(m), others),
                MutexMode::AtMostOne => Formula::implies(Formula::atom(m), others),
            };
            mtx.push(Formula::globally(body));
            // For two members the second biconditional restates the first.
            if mode == MutexMode::ExactlyOne && members.len() == 2 && i == 0 {
                break;
            }
        }
    }

    let mut by_parent: BTreeMap<Atom, BTreeSet<Atom>> = BTreeMap::new();
    for (c, p) in &ts.refinement_rel {
        by_parent.entry(p.clone()).or_default().insert(c.clone());
    }
    let refinement = by_parent
        .into_iter()
        .map(|(p, cs)| {
            Formula::globally(Formula::implies(
                Formula::disj(cs.iter().map(Formula::atom)),
                Formula::atom(&p),
            ))
        })
        .collect();

    let adj = ts
        .adjacency_graph()
        .into_iter()
        .map(|(r, ns)| {
            Formula::globally(Formula::implies(
                Formula::atom(&r),
                Formula::next(Formula::disj(ns.iter().map(Formula::atom))),
            ))
        })
        .collect();

    RuleSet { mtx, refinement, adj }
}

/// Declarations plus the mission contexts and their minimum dwell time.
#[derive(Debug, Clone)]
pub struct World {
    pub typeset: Typeset,
    pub contexts: Vec<Atom>,
    pub t_context: u32,
    pub mutex_modes: BTreeMap<String, MutexMode>,
}

impl World {
    pub fn new(
        typeset: Typeset,
        contexts: &[&str],
        t_context: u32,
        mutex_modes: BTreeMap<String, MutexMode>,
    ) -> Result<World, WorldError> {
        if t_context < 1 {
            return Err(WorldError::BadContextTime);
        }
        for g in mutex_modes.keys() {
            if !typeset.groups.iter().any(|x| &x.name == g) {
                return Err(WorldError::UnknownGroup(g.clone()));
            }
        }
        let mut ctx = Vec::new();
        for c in contexts {
            match typeset.atom(c) {
                Some(a) if a.kind() == AtomKind::Context => ctx.push(a.clone()),
                _ => return Err(WorldError::UnknownContext(c.to_string())),
            }
        }
        for (i, a) in ctx.iter().enumerate() {
            for b in &ctx[i + 1..] {
                if !typeset.are_mutex(a, b) {
                    return Err(WorldError::ContextsNotMutex(a.to_string(), b.to_string()));
                }
            }
        }
        Ok(World { typeset, contexts: ctx, t_context, mutex_modes })
    }

    pub fn rules(&self) -> RuleSet {
        infer_rules(&self.typeset, &self.mutex_modes)
    }

    pub fn locations(&self) -> Vec<Atom> {
        self.typeset.atoms_of(AtomKind::Location)
    }
}
