//! Small graph helpers over adjacency lists, shared by the automata,
//! game and network code.

use std::collections::VecDeque;

use petgraph::graph::{DiGraph, NodeIndex};

/// Strongly connected components of the graph given by `succ`.
pub fn sccs(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(succ.len(), 0);
    for _ in 0..succ.len() {
        g.add_node(());
    }
    for (u, vs) in succ.iter().enumerate() {
        for &v in vs {
            g.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
        }
    }
    petgraph::algo::tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .collect()
}

/// An SCC is nontrivial when it contains at least one edge.
pub fn is_nontrivial(scc: &[usize], succ: &[Vec<usize>]) -> bool {
    scc.len() > 1 || succ[scc[0]].contains(&scc[0])
}

/// Nodes that can reach some node marked in `targets`.
pub fn reach_backward(succ: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let mut pred = vec![Vec::new(); succ.len()];
    for (u, vs) in succ.iter().enumerate() {
        for &v in vs {
            pred[v].push(u);
        }
    }
    let mut seen = targets.to_vec();
    let mut queue: VecDeque<usize> = (0..succ.len()).filter(|&i| seen[i]).collect();
    while let Some(v) = queue.pop_front() {
        for &u in &pred[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// Nodes reachable from `start`.
pub fn reach_forward(succ: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in &succ[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Shortest path (inclusive of both ends) from `from` to a node satisfying
/// `is_target`, moving only through nodes accepted by `allowed`. Requires at
/// least one edge when `nonempty` is set, which is how cycles are found.
pub fn bfs_path(
    succ: &[Vec<usize>],
    from: usize,
    nonempty: bool,
    is_target: impl Fn(usize) -> bool,
    allowed: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    if !nonempty && is_target(from) {
        return Some(vec![from]);
    }
    let mut parent: Vec<Option<usize>> = vec![None; succ.len()];
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::new();
    for &v in &succ[from] {
        if allowed(v) && !seen[v] {
            seen[v] = true;
            parent[v] = Some(from);
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        if is_target(u) {
            let mut path = vec![u];
            let mut cur = u;
            while let Some(p) = parent[cur] {
                path.push(p);
                if p == from {
                    break;
                }
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for &v in &succ[u] {
            if allowed(v) && !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    None
}
