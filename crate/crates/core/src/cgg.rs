//! Goal graphs: clustering goals by context, composing each cluster,
//! conjoining the clusters into a root, and extracting one mission scenario
//! per cluster.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::contracts::{
    check_wellformed, compare_contracts, compose, conjoin_raw, Contract, ContractError, Goal, Obligation, Spec,
    WellFormedness,
};
use crate::ltl::{Atom, CheckStats, Checker, CompareOp, Formula, LtlError};
use crate::world::World;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CggError {
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error("goal {0} has an unsatisfiable context")]
    UnsatisfiableContext(String),
    #[error("goal {0} fits no mission context")]
    OrphanGoal(String),
    #[error("goals {goals:?} conflict in {node}")]
    Conflict { node: String, goals: Vec<String> },
    #[error("{child} does not refine {parent}")]
    NotARefinement { child: String, parent: String },
    #[error(transparent)]
    Contract(ContractError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Refinement,
    Composition,
    Conjunction,
}

/// Contract-based goal graph. Edges run from a derived node to each of its
/// sources; shared goals have several parents.
#[derive(Debug, Clone)]
pub struct Cgg {
    pub nodes: Vec<Goal>,
    pub edges: Vec<(usize, usize, LinkKind)>,
    pub root: usize,
    /// Cluster node of each context, in context declaration order.
    pub clusters: Vec<(Atom, usize)>,
    pub root_wellformedness: WellFormedness,
    /// Checks performed while building.
    pub stats: CheckStats,
}

/// A scenario to realize: the context it applies to and its specification.
#[derive(Debug, Clone)]
pub struct MissionScenario {
    pub name: String,
    pub context: Atom,
    /// `assumptions -> guarantees` of the cluster's composed contract.
    pub gamma: Formula,
    pub regions: BTreeSet<Atom>,
    pub obligations: Vec<Obligation>,
    pub contract: Contract,
}

/// Goals compatible with each context, in context declaration order.
pub fn cluster_goals(goals: &[Goal], world: &World, checker: &Checker) -> Result<Vec<(Atom, Vec<usize>)>, CggError> {
    for g in goals {
        if !checker.is_satisfiable(&g.context)? {
            return Err(CggError::UnsatisfiableContext(g.name.clone()));
        }
    }
    let mut out: Vec<(Atom, Vec<usize>)> = world.contexts.iter().map(|x| (x.clone(), Vec::new())).collect();
    let mut placed = vec![false; goals.len()];
    for (x, members) in &mut out {
        for (i, g) in goals.iter().enumerate() {
            if checker.is_satisfiable(&Formula::and(g.context.clone(), Formula::atom(x)))? {
                members.push(i);
                placed[i] = true;
            }
        }
    }
    if let Some(i) = placed.iter().position(|p| !p) {
        return Err(CggError::OrphanGoal(goals[i].name.clone()));
    }
    Ok(out)
}

/// Clusters, composes each nonempty cluster and conjoins the clusters into
/// the root. Only cluster compositions must be well formed; the root's
/// well-formedness is reported.
pub fn build_cgg(goals: Vec<Goal>, world: &Arc<World>) -> Result<Cgg, CggError> {
    let checker = Checker::new(&world.rules())?;
    build_cgg_with(goals, world, &checker)
}

pub fn build_cgg_with(goals: Vec<Goal>, world: &Arc<World>, checker: &Checker) -> Result<Cgg, CggError> {
    let before = checker.stats();
    let clusters = cluster_goals(&goals, world, checker)?;
    let mut nodes = goals;
    let mut edges = Vec::new();
    let mut cluster_nodes = Vec::new();
    for (x, members) in clusters {
        if members.is_empty() {
            continue;
        }
        let contracts: Vec<&Contract> = members.iter().map(|&i| &nodes[i].contract).collect();
        let name = format!("G_{x}");
        let contract = compose(&contracts, checker).map_err(|e| match e {
            ContractError::Conflict(ix) => CggError::Conflict {
                node: name.clone(),
                goals: ix.iter().map(|&k| nodes[members[k]].name.clone()).collect(),
            },
            ContractError::Ltl(e) => CggError::Ltl(e),
            other => CggError::Contract(other),
        })?;
        let id = nodes.len();
        nodes.push(Goal {
            name,
            description: format!("composition of the goals active in {x}"),
            context: Formula::atom(&x),
            contract,
            controller: None,
            world: Arc::clone(world),
        });
        edges.extend(members.iter().map(|&m| (id, m, LinkKind::Composition)));
        cluster_nodes.push((x, id));
    }
    let parts: Vec<&Contract> = cluster_nodes.iter().map(|&(_, i)| &nodes[i].contract).collect();
    let root_contract = conjoin_raw(&parts);
    let root_wellformedness = check_wellformed(&root_contract, checker)?;
    let root = nodes.len();
    nodes.push(Goal {
        name: "root".into(),
        description: "conjunction of all mission scenarios".into(),
        context: Formula::disj_simp(cluster_nodes.iter().map(|(x, _)| Formula::atom(x))),
        contract: root_contract,
        controller: None,
        world: Arc::clone(world),
    });
    edges.extend(cluster_nodes.iter().map(|&(_, i)| (root, i, LinkKind::Conjunction)));
    let after = checker.stats();
    Ok(Cgg {
        nodes,
        edges,
        root,
        clusters: cluster_nodes,
        root_wellformedness,
        stats: CheckStats {
            satisfiability: after.satisfiability - before.satisfiability,
            validity: after.validity - before.validity,
        },
    })
}

impl Cgg {
    pub fn node(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|g| g.name == name)
    }

    pub fn children(&self, n: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.0 == n).map(|e| e.1).collect()
    }

    pub fn parents(&self, n: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.1 == n).map(|e| e.0).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&n| self.children(n).is_empty()).collect()
    }

    /// Records that `child` refines `parent` after checking `child <= parent`.
    pub fn add_refinement(&mut self, child: usize, parent: usize, checker: &Checker) -> Result<(), CggError> {
        if !compare_contracts(&self.nodes[child].contract, &self.nodes[parent].contract, CompareOp::Le, checker)? {
            return Err(CggError::NotARefinement {
                child: self.nodes[child].name.clone(),
                parent: self.nodes[parent].name.clone(),
            });
        }
        self.edges.push((parent, child, LinkKind::Refinement));
        Ok(())
    }

    /// Graphviz rendering; edge style encodes the link kind.
    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut s = String::from("digraph cgg {\n  rankdir=TB;\n  node [shape=box];\n");
        for (i, g) in self.nodes.iter().enumerate() {
            writeln!(
                s,
                "  n{i} [label=\"{}\\ncontext: {}\\nA: {}\\nG: {}\"];",
                esc(&g.name),
                esc(&g.context.to_string()),
                esc(&g.contract.assumptions().to_string()),
                esc(&g.contract.guarantees().to_string())
            )
            .unwrap();
        }
        for &(p, c, k) in &self.edges {
            let style = match k {
                LinkKind::Composition => "solid",
                LinkKind::Conjunction => "bold",
                LinkKind::Refinement => "dashed",
            };
            writeln!(s, "  n{p} -> n{c} [style={style}, label=\"{k:?}\"];").unwrap();
        }
        s.push_str("}\n");
        s
    }
}

/// One scenario per cluster node, in context declaration order.
pub fn extract_scenarios(cgg: &Cgg) -> Vec<MissionScenario> {
    cgg.clusters
        .iter()
        .map(|(x, n)| {
            let goal = &cgg.nodes[*n];
            let obligations = goal.contract.obligations().to_vec();
            let regions = obligations
                .iter()
                .flat_map(|o| &o.guarantees)
                .filter_map(|s| match s {
                    Spec::Pattern(p) => Some(p.regions()),
                    Spec::Raw(_) => None,
                })
                .flatten()
                .collect();
            MissionScenario {
                name: goal.name.clone(),
                context: x.clone(),
                gamma: goal.contract.gamma(),
                regions,
                obligations,
                contract: goal.contract.clone(),
            }
        })
        .collect()
}

/// Whether the scenarios' region sets are pairwise disjoint.
pub fn check_disjoint_scenarios(scenarios: &[MissionScenario]) -> bool {
    scenarios
        .iter()
        .enumerate()
        .all(|(i, a)| scenarios[i + 1..].iter().all(|b| a.regions.is_disjoint(&b.regions)))
}
