//! Exact path weights in integer-weighted digraphs.
//!
//! Every walk from `u` to `v` is a short "base" walk plus nonnegative numbers of simple cycles
//! that live on cyclic vertices the base walk already visits. Grouping base walks by the exact
//! set of cyclic vertices they visit gives an exact description of all achievable weights.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::epset::EpSet;
use crate::graph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiArc {
    pub tail: usize,
    pub head: usize,
    pub weight: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedDigraph {
    pub k: usize,
    pub n: usize,
    pub arcs: Vec<DiArc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathAnswer {
    /// Arc ids of a walk with exactly the requested weight.
    Yes(Vec<usize>),
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EplError {
    #[error("weight has dimension {found}, graph has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} cyclic vertices exceed the supported maximum of {MAX_CYCLIC}")]
    TooManyCyclicVertices(usize),
}

pub const MAX_CYCLIC: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Branch nodes allowed per multi-dimensional coefficient search.
    pub node_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { node_budget: 1_000_000 }
    }
}

impl WeightedDigraph {
    pub fn new(k: usize, n: usize) -> Self {
        WeightedDigraph { k, n, arcs: Vec::new() }
    }

    pub fn add_arc(&mut self, tail: usize, head: usize, weight: Vec<i64>) -> usize {
        assert_eq!(weight.len(), self.k);
        self.arcs.push(DiArc { tail, head, weight });
        self.arcs.len() - 1
    }

    /// End vertex and total weight of a walk, or `None` if the arcs do not chain from `u`.
    pub fn replay(&self, u: usize, walk: &[usize]) -> Option<(usize, Vec<i64>)> {
        let mut at = u;
        let mut w = vec![0; self.k];
        for &a in walk {
            let arc = self.arcs.get(a)?;
            if arc.tail != at {
                return None;
            }
            add_into(&mut w, &arc.weight);
            at = arc.head;
        }
        Some((at, w))
    }
}

fn add_into(acc: &mut [i64], w: &[i64]) {
    for (a, b) in acc.iter_mut().zip(w) {
        *a += b;
    }
}

fn added(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn subtracted(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

type Key = (usize, u64, Vec<i64>);

#[derive(Clone, Debug)]
struct CycleRep {
    mask: u64,
    weight: Vec<i64>,
    anchor: usize,
    arcs: Vec<usize>,
}

/// All walk weights from one source, in base-plus-cycles form.
pub struct WalkSets<'g> {
    g: &'g WeightedDigraph,
    source: usize,
    cycles: Vec<CycleRep>,
    pred: HashMap<Key, Option<(Key, usize)>>,
    bases: HashMap<usize, BTreeMap<u64, BTreeSet<Vec<i64>>>>,
}

/// One family of walks to a fixed target: `bases + N-span(generators)`.
pub struct Piece {
    pub mask: u64,
    pub bases: Vec<Vec<i64>>,
    pub generators: Vec<Vec<i64>>,
}

impl<'g> WalkSets<'g> {
    pub fn new(g: &'g WeightedDigraph, source: usize) -> Result<Self, EplError> {
        let mut adj = vec![Vec::new(); g.n];
        for a in &g.arcs {
            adj[a.tail].push(a.head);
        }
        let reach = graph::reach(&adj, [source]);
        let mut radj = vec![Vec::new(); g.n];
        for a in &g.arcs {
            if reach.contains(&a.tail) {
                radj[a.tail].push(a.head);
            }
        }
        let cyclic = graph::cyclic_vertices(&radj);
        let comp = graph::component_ids(&radj);
        let mut bit = vec![None; g.n];
        let mut c = 0usize;
        for v in 0..g.n {
            if cyclic[v] && reach.contains(&v) {
                bit[v] = Some(c);
                c += 1;
            }
        }
        if c > MAX_CYCLIC {
            return Err(EplError::TooManyCyclicVertices(c));
        }
        let bitmask = |v: usize| bit[v].map_or(0u64, |b| 1u64 << b);

        let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.n];
        for (i, a) in g.arcs.iter().enumerate() {
            if reach.contains(&a.tail) {
                out[a.tail].push(i);
            }
        }

        // Simple cycles, one representative per (vertex set, weight).
        let mut cycles: Vec<CycleRep> = Vec::new();
        let mut seen_cycle: HashSet<(u64, Vec<i64>)> = HashSet::new();
        for s in 0..g.n {
            if bit[s].is_none() {
                continue;
            }
            let mut seen: HashSet<Key> = HashSet::new();
            let mut stack: Vec<(usize, u64, Vec<i64>, Vec<usize>)> = vec![(s, bitmask(s), vec![0; g.k], vec![])];
            while let Some((v, mask, w, path)) = stack.pop() {
                for &ai in &out[v] {
                    let a = &g.arcs[ai];
                    let h = a.head;
                    if h == s {
                        let cw = added(&w, &a.weight);
                        if seen_cycle.insert((mask, cw.clone())) {
                            let mut arcs = path.clone();
                            arcs.push(ai);
                            cycles.push(CycleRep { mask, weight: cw, anchor: s, arcs });
                        }
                        continue;
                    }
                    if h < s || comp[h] != comp[s] || mask & bitmask(h) != 0 {
                        continue;
                    }
                    let nw = added(&w, &a.weight);
                    let nm = mask | bitmask(h);
                    if seen.insert((h, nm, nw.clone())) {
                        let mut np = path.clone();
                        np.push(ai);
                        stack.push((h, nm, nw, np));
                    }
                }
            }
        }

        // Base walks: breadth-first over (vertex, visited cyclic set, weight) up to the length
        // beyond which a walk must contain a removable cycle.
        let nr = reach.len();
        let limit = (c + 1) * nr.saturating_sub(1);
        let start: Key = (source, bitmask(source), vec![0; g.k]);
        let mut pred: HashMap<Key, Option<(Key, usize)>> = HashMap::new();
        let mut bases: HashMap<usize, BTreeMap<u64, BTreeSet<Vec<i64>>>> = HashMap::new();
        let mut queue: VecDeque<(Key, usize)> = VecDeque::new();
        pred.insert(start.clone(), None);
        queue.push_back((start, 0));
        while let Some((key, depth)) = queue.pop_front() {
            bases.entry(key.0).or_default().entry(key.1).or_default().insert(key.2.clone());
            if depth == limit {
                continue;
            }
            for &ai in &out[key.0] {
                let a = &g.arcs[ai];
                let nk: Key = (a.head, key.1 | bitmask(a.head), added(&key.2, &a.weight));
                if !pred.contains_key(&nk) {
                    pred.insert(nk.clone(), Some((key.clone(), ai)));
                    queue.push_back((nk, depth + 1));
                }
            }
        }

        Ok(WalkSets { g, source, cycles, pred, bases })
    }

    fn generators(&self, mask: u64) -> Vec<&CycleRep> {
        let mut seen = HashSet::new();
        self.cycles
            .iter()
            .filter(|c| c.mask & !mask == 0 && c.weight.iter().any(|&x| x != 0))
            .filter(|c| seen.insert(c.weight.clone()))
            .collect()
    }

    pub fn pieces(&self, target: usize) -> Vec<Piece> {
        let Some(by_mask) = self.bases.get(&target) else {
            return Vec::new();
        };
        by_mask
            .iter()
            .map(|(&mask, bs)| Piece {
                mask,
                bases: bs.iter().cloned().collect(),
                generators: self.generators(mask).into_iter().map(|c| c.weight.clone()).collect(),
            })
            .collect()
    }

    pub fn reaches(&self, target: usize) -> bool {
        self.bases.contains_key(&target)
    }

    /// Achievable weights to `target` (dimension 1 only).
    pub fn weight_set(&self, target: usize) -> Result<EpSet, EplError> {
        if self.g.k != 1 {
            return Err(EplError::DimensionMismatch { expected: 1, found: self.g.k });
        }
        let mut acc = EpSet::empty();
        for p in self.pieces(target) {
            let gens: Vec<i64> = p.generators.iter().map(|w| w[0]).collect();
            let offsets: Vec<i64> = p.bases.iter().map(|w| w[0]).collect();
            acc = acc.union(&EpSet::nonneg_span(&gens).shift_union(&offsets));
        }
        Ok(acc)
    }

    /// Achievable weights when no cycle on the way changes the weight; `None` otherwise.
    pub fn finite_weights(&self, target: usize) -> Option<BTreeSet<Vec<i64>>> {
        let mut out = BTreeSet::new();
        for p in self.pieces(target) {
            if !p.generators.is_empty() {
                return None;
            }
            out.extend(p.bases);
        }
        Some(out)
    }

    /// Weights of walks using each weight-changing cycle at most `max_copies` times.
    pub fn bounded_weights(&self, target: usize, max_copies: u32) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        for p in self.pieces(target) {
            let mut sums: BTreeSet<Vec<i64>> = [vec![0; self.g.k]].into_iter().collect();
            for gen in &p.generators {
                let mut next = BTreeSet::new();
                for s in &sums {
                    let mut cur = s.clone();
                    for _ in 0..=max_copies {
                        next.insert(cur.clone());
                        cur = added(&cur, gen);
                    }
                }
                sums = next;
            }
            for b in &p.bases {
                for s in &sums {
                    out.insert(added(b, s));
                }
            }
        }
        out
    }

    fn base_walk(&self, key: &Key) -> Vec<usize> {
        let mut walk = Vec::new();
        let mut cur = key.clone();
        while let Some(Some((prev, arc))) = self.pred.get(&cur) {
            walk.push(*arc);
            cur = prev.clone();
        }
        walk.reverse();
        walk
    }

    fn assemble(&self, target: usize, mask: u64, base: &[i64], uses: &[(&CycleRep, u64)]) -> Vec<usize> {
        let walk = self.base_walk(&(target, mask, base.to_vec()));
        let mut inserts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (cyc, n) in uses {
            if *n == 0 {
                continue;
            }
            let entry = inserts.entry(cyc.anchor).or_default();
            for _ in 0..*n {
                entry.extend(&cyc.arcs);
            }
        }
        let mut out = Vec::new();
        let mut at = self.source;
        let mut pending = inserts;
        if let Some(c) = pending.remove(&at) {
            out.extend(c);
        }
        for a in walk {
            out.push(a);
            at = self.g.arcs[a].head;
            if let Some(c) = pending.remove(&at) {
                out.extend(c);
            }
        }
        debug_assert!(pending.is_empty());
        out
    }

    /// Decides whether some walk to `target` has weight exactly `z`.
    pub fn find(&self, target: usize, z: &[i64], cfg: &SolverConfig) -> Result<PathAnswer, EplError> {
        if z.len() != self.g.k {
            return Err(EplError::DimensionMismatch { expected: self.g.k, found: z.len() });
        }
        let Some(by_mask) = self.bases.get(&target) else {
            return Ok(PathAnswer::No);
        };
        let mut unknown = false;
        for (&mask, bases) in by_mask {
            let gens = self.generators(mask);
            for b in bases {
                let r = subtracted(z, b);
                let coeffs = if self.g.k == 1 {
                    let gs: Vec<i64> = gens.iter().map(|c| c.weight[0]).collect();
                    solve_scalar(&gs, r[0])
                } else {
                    let gs: Vec<Vec<i64>> = gens.iter().map(|c| c.weight.clone()).collect();
                    match solve_vector(&gs, &r, cfg.node_budget) {
                        Search::Found(c) => Some(c),
                        Search::Infeasible => None,
                        Search::Exhausted => {
                            unknown = true;
                            None
                        }
                    }
                };
                if let Some(coeffs) = coeffs {
                    let uses: Vec<(&CycleRep, u64)> = gens.iter().copied().zip(coeffs).collect();
                    let walk = self.assemble(target, mask, b, &uses);
                    let (end, w) = self.g.replay(self.source, &walk).expect("assembled walk chains");
                    assert!(end == target && w == z, "walk reconstruction produced a wrong weight");
                    return Ok(PathAnswer::Yes(walk));
                }
            }
        }
        Ok(if unknown { PathAnswer::Unknown } else { PathAnswer::No })
    }
}

/// Nonnegative coefficients with `Σ c_i g_i = r`, found by breadth-first search over partial
/// sums kept in a window that any solution can be reordered to respect.
fn solve_scalar(gens: &[i64], r: i64) -> Option<Vec<u64>> {
    if r == 0 {
        return Some(vec![0; gens.len()]);
    }
    if gens.is_empty() {
        return None;
    }
    let m = gens.iter().map(|g| g.abs()).max().unwrap();
    let lo = r.min(0) - m;
    let hi = r.max(0) + m;
    if !EpSet::nonneg_span(gens).contains(r) {
        return None;
    }
    let mut pred: HashMap<i64, (i64, usize)> = HashMap::new();
    let mut queue = VecDeque::from([0i64]);
    let mut seen: HashSet<i64> = HashSet::from([0]);
    while let Some(v) = queue.pop_front() {
        if v == r {
            let mut coeffs = vec![0u64; gens.len()];
            let mut cur = r;
            while cur != 0 {
                let (p, i) = pred[&cur];
                coeffs[i] += 1;
                cur = p;
            }
            return Some(coeffs);
        }
        for (i, &g) in gens.iter().enumerate() {
            let w = v + g;
            if w >= lo && w <= hi && seen.insert(w) {
                pred.insert(w, (v, i));
                queue.push_back(w);
            }
        }
    }
    None
}

enum Search {
    Found(Vec<u64>),
    Infeasible,
    Exhausted,
}

/// Classical bound on the entries of some nonnegative solution of `A x = b`, if any exists:
/// `n (m a)^(2m+1)` with `a` the largest absolute entry of `A` and `b`.
fn small_solution_bound(gens: &[Vec<i64>], r: &[i64]) -> i64 {
    let m = r.len() as u32;
    let a = gens.iter().flatten().chain(r).map(|x| x.abs()).max().unwrap_or(1).max(1) as i128;
    let base = (m as i128) * a;
    let mut v: i128 = gens.len() as i128;
    for _ in 0..(2 * m + 1) {
        v = v.saturating_mul(base);
        if v > i64::MAX as i128 / 4 {
            return i64::MAX / 4;
        }
    }
    v as i64
}

fn solve_vector(gens: &[Vec<i64>], r: &[i64], budget: u64) -> Search {
    if gens.is_empty() {
        return if r.iter().all(|&x| x == 0) { Search::Found(vec![]) } else { Search::Infeasible };
    }
    let bound = small_solution_bound(gens, r);
    let mut nodes = 0u64;
    let mut coeffs = vec![0u64; gens.len()];
    let mut residual = r.to_vec();
    match branch(gens, 0, &mut residual, &mut coeffs, bound, &mut nodes, budget) {
        Some(true) => Search::Found(coeffs),
        Some(false) => Search::Infeasible,
        None => Search::Exhausted,
    }
}

/// Depth-first branch and bound; `None` when the node budget runs out.
fn branch(
    gens: &[Vec<i64>],
    i: usize,
    residual: &mut Vec<i64>,
    coeffs: &mut Vec<u64>,
    bound: i64,
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    *nodes += 1;
    if *nodes > budget {
        return None;
    }
    let k = residual.len();
    if i == gens.len() {
        return Some(residual.iter().all(|&x| x == 0));
    }
    let rest = &gens[i..];
    let g = &gens[i];
    let mut ub = bound;
    for j in 0..k {
        let nonneg = rest.iter().all(|v| v[j] >= 0);
        let nonpos = rest.iter().all(|v| v[j] <= 0);
        if nonneg && nonpos {
            if residual[j] != 0 {
                return Some(false);
            }
            continue;
        }
        if nonneg && residual[j] < 0 || nonpos && residual[j] > 0 {
            return Some(false);
        }
        if (nonneg || nonpos) && g[j] != 0 {
            ub = ub.min(residual[j] / g[j]);
        }
    }
    if i + 1 == gens.len() {
        let Some(j) = (0..k).find(|&j| g[j] != 0) else {
            return Some(residual.iter().all(|&x| x == 0));
        };
        if residual[j] % g[j] != 0 {
            return Some(false);
        }
        let n = residual[j] / g[j];
        if n < 0 || n > ub || (0..k).any(|t| g[t] * n != residual[t]) {
            return Some(false);
        }
        coeffs[i] = n as u64;
        return Some(true);
    }
    let mut taken = 0i64;
    let mut result = Some(false);
    for n in 0..=ub {
        coeffs[i] = n as u64;
        match branch(gens, i + 1, residual, coeffs, bound, nodes, budget) {
            Some(true) => return Some(true),
            Some(false) => {}
            None => {
                result = None;
                break;
            }
        }
        for j in 0..k {
            residual[j] -= g[j];
        }
        taken += 1;
    }
    for j in 0..k {
        residual[j] += g[j] * taken;
    }
    coeffs[i] = 0;
    result
}

/// All weights of walks from `u` to `v` (dimension 1).
pub fn weight_set(g: &WeightedDigraph, u: usize, v: usize) -> Result<EpSet, EplError> {
    WalkSets::new(g, u)?.weight_set(v)
}

pub fn has_path_with_weight(
    g: &WeightedDigraph,
    u: usize,
    v: usize,
    z: &[i64],
    cfg: &SolverConfig,
) -> Result<PathAnswer, EplError> {
    if z.len() != g.k {
        return Err(EplError::DimensionMismatch { expected: g.k, found: z.len() });
    }
    WalkSets::new(g, u)?.find(v, z, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_walk() {
        let g = WeightedDigraph::new(1, 1);
        assert_eq!(weight_set(&g, 0, 0).unwrap(), EpSet::singleton(0));
    }

    #[test]
    fn self_loop_gives_naturals() {
        let mut g = WeightedDigraph::new(1, 1);
        g.add_arc(0, 0, vec![1]);
        assert_eq!(weight_set(&g, 0, 0).unwrap(), EpSet::at_least(0));
    }

    #[test]
    fn cycle_only_reachable_through_another_cycle() {
        // u -> v weight 0; u <-> b weight 100 total; loop at b weight 1.
        let mut g = WeightedDigraph::new(1, 3);
        g.add_arc(0, 1, vec![0]);
        g.add_arc(0, 2, vec![50]);
        g.add_arc(2, 0, vec![50]);
        g.add_arc(2, 2, vec![1]);
        let s = weight_set(&g, 0, 1).unwrap();
        assert!(s.contains(0) && s.contains(100) && s.contains(101));
        assert!(!s.contains(1) && !s.contains(50) && !s.contains(99));
    }

    #[test]
    fn dead_end() {
        let mut g = WeightedDigraph::new(1, 2);
        g.add_arc(1, 0, vec![1]);
        let cfg = SolverConfig::default();
        assert_eq!(has_path_with_weight(&g, 0, 1, &[0], &cfg).unwrap(), PathAnswer::No);
    }

    #[test]
    fn two_dimensional_chain() {
        let mut g = WeightedDigraph::new(2, 3);
        g.add_arc(0, 1, vec![1, 0]);
        g.add_arc(1, 2, vec![0, 1]);
        let cfg = SolverConfig::default();
        assert_eq!(has_path_with_weight(&g, 0, 2, &[1, 1], &cfg).unwrap(), PathAnswer::Yes(vec![0, 1]));
        assert_eq!(has_path_with_weight(&g, 0, 2, &[1, 0], &cfg).unwrap(), PathAnswer::No);
        assert!(matches!(has_path_with_weight(&g, 0, 2, &[1], &cfg), Err(EplError::DimensionMismatch { .. })));
    }

    #[test]
    fn two_dimensional_cycles() {
        let mut g = WeightedDigraph::new(2, 2);
        g.add_arc(0, 1, vec![0, 0]);
        g.add_arc(1, 1, vec![1, -1]);
        g.add_arc(1, 1, vec![2, 3]);
        let cfg = SolverConfig::default();
        // 3*(1,-1) + 2*(2,3) = (7,3)
        let PathAnswer::Yes(w) = has_path_with_weight(&g, 0, 1, &[7, 3], &cfg).unwrap() else { panic!() };
        assert_eq!(g.replay(0, &w), Some((1, vec![7, 3])));
        assert_eq!(has_path_with_weight(&g, 0, 1, &[1, 1], &cfg).unwrap(), PathAnswer::No);
    }

    #[test]
    fn mixed_sign_scalar_witness() {
        let mut g = WeightedDigraph::new(1, 1);
        g.add_arc(0, 0, vec![5]);
        g.add_arc(0, 0, vec![-3]);
        let cfg = SolverConfig::default();
        let PathAnswer::Yes(w) = has_path_with_weight(&g, 0, 0, &[1], &cfg).unwrap() else { panic!() };
        assert_eq!(g.replay(0, &w), Some((0, vec![1])));
    }
}
