//! Small reachability and cycle helpers over index-based graphs.

use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

pub fn reach(adj: &[Vec<usize>], starts: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = Vec::new();
    for s in starts {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..adj.len()).filter(|&v| seen[v]).collect()
}

/// Vertices from which some vertex flagged in `targets` is reachable (including the targets).
pub fn co_reach(adj: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            rev[w].push(v);
        }
    }
    let r = reach(&rev, (0..adj.len()).filter(|&v| targets[v]));
    (0..adj.len()).map(|v| r.contains(&v)).collect()
}

/// Strongly connected components, via petgraph.
pub fn sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(adj.len(), 0);
    for _ in 0..adj.len() {
        g.add_node(());
    }
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            g.add_edge(NodeIndex::new(v), NodeIndex::new(w), ());
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .collect()
}

/// Vertices lying on some cycle (nontrivial component or self-loop).
pub fn cyclic_vertices(adj: &[Vec<usize>]) -> Vec<bool> {
    let mut out = vec![false; adj.len()];
    for c in sccs(adj) {
        if c.len() > 1 || adj[c[0]].contains(&c[0]) {
            for v in c {
                out[v] = true;
            }
        }
    }
    out
}

/// Component id per vertex.
pub fn component_ids(adj: &[Vec<usize>]) -> Vec<usize> {
    let mut id = vec![0; adj.len()];
    for (i, c) in sccs(adj).into_iter().enumerate() {
        for v in c {
            id[v] = i;
        }
    }
    id
}

/// Edge-indexed graph: `edges[i] = (tail, head)`.
pub struct EdgeGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
}

impl EdgeGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); n];
        for (i, &(a, _)) in edges.iter().enumerate() {
            out[a].push(i);
        }
        EdgeGraph { n, edges, out }
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn adjacency(&self, allowed: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if allowed(i) {
                adj[a].push(b);
            }
        }
        adj
    }

    /// Shortest edge path from any of `starts` to a vertex satisfying `goal` (empty if a start
    /// already satisfies it), using only allowed edges.
    pub fn path_to(
        &self,
        starts: &[usize],
        goal: impl Fn(usize) -> bool,
        allowed: impl Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        let mut pred: Vec<Option<Option<usize>>> = vec![None; self.n];
        let mut queue = VecDeque::new();
        for &s in starts {
            if pred[s].is_none() {
                pred[s] = Some(None);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if goal(v) {
                let mut path = Vec::new();
                let mut cur = v;
                while let Some(Some(e)) = pred[cur] {
                    path.push(e);
                    cur = self.edges[e].0;
                }
                path.reverse();
                return Some(path);
            }
            for &e in &self.out[v] {
                let w = self.edges[e].1;
                if allowed(e) && pred[w].is_none() {
                    pred[w] = Some(Some(e));
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// A shortest nonempty closed path through `v` using only allowed edges.
    pub fn cycle_through(&self, v: usize, allowed: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        for &e in &self.out[v] {
            if !allowed(e) {
                continue;
            }
            let w = self.edges[e].1;
            if let Some(rest) = self.path_to(&[w], |x| x == v, &allowed) {
                if best.as_ref().is_none_or(|b| rest.len() + 1 < b.len()) {
                    let mut c = vec![e];
                    c.extend(rest);
                    best = Some(c);
                }
            }
        }
        best
    }
}
