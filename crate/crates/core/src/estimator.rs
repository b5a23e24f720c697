//! Observers and detectors: finite automata over (label, weight) observations whose states are
//! sets of automaton states.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::epl::EplError;
use crate::epset::EpSet;
use crate::graph::EdgeGraph;
use crate::prepared::{Engine, Prepared, StateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Observer,
    Detector,
}

/// The set of step weights that lead along one estimator transition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelCell {
    Scalar(EpSet),
    Vectors(BTreeSet<Vec<i64>>),
}

impl LabelCell {
    pub fn contains(&self, w: &[i64]) -> bool {
        match self {
            LabelCell::Scalar(s) => w.len() == 1 && s.contains(w[0]),
            LabelCell::Vectors(v) => v.contains(w),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            LabelCell::Scalar(s) => s.is_empty(),
            LabelCell::Vectors(v) => v.is_empty(),
        }
    }

    /// Representative member: smallest absolute value for scalars, least vector otherwise.
    pub fn witness(&self) -> Option<Vec<i64>> {
        match self {
            LabelCell::Scalar(s) => s.min_abs_witness().map(|t| vec![t]),
            LabelCell::Vectors(v) => {
                v.iter().min_by_key(|w| (w.iter().map(|x| x.abs()).sum::<i64>(), (*w).clone())).cloned()
            }
        }
    }

    pub fn union(&self, other: &LabelCell) -> LabelCell {
        match (self, other) {
            (LabelCell::Scalar(a), LabelCell::Scalar(b)) => LabelCell::Scalar(a.union(b)),
            (LabelCell::Vectors(a), LabelCell::Vectors(b)) => LabelCell::Vectors(a.union(b).cloned().collect()),
            _ => panic!("mixed label cell kinds"),
        }
    }

    pub fn as_scalar(&self) -> Option<&EpSet> {
        match self {
            LabelCell::Scalar(s) => Some(s),
            LabelCell::Vectors(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub target: StateSet,
    pub cell: LabelCell,
    pub witness: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstTransition {
    pub source: usize,
    pub label: usize,
    pub witness: Vec<i64>,
    pub cell: LabelCell,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstimatorAutomaton {
    pub kind: Kind,
    pub states: Vec<StateSet>,
    pub initial: usize,
    pub transitions: Vec<EstTransition>,
    /// False when some weights were enumerated only up to a bound.
    pub exact: bool,
}

/// Step weights that move from `x` to each state under `label`, before closure.
fn target_weights(engine: &Engine, x: &StateSet, label: usize) -> Result<(BTreeMap<usize, LabelCell>, bool), EplError> {
    let p = engine.p;
    let mut exact = true;
    let mut t: BTreeMap<usize, LabelCell> = BTreeMap::new();
    for &q in x {
        let ws = engine.walks(q)?;
        for arc in &p.arcs {
            if p.event_label[arc.event] != Some(label) || !ws.reaches(arc.source) {
                continue;
            }
            let cell = if p.k == 1 {
                LabelCell::Scalar(engine.unobs_set(q, arc.source)?.shift(arc.weight[0]))
            } else {
                let base = match ws.finite_weights(arc.source) {
                    Some(f) => f,
                    None => {
                        exact = false;
                        ws.bounded_weights(arc.source, 2)
                    }
                };
                LabelCell::Vectors(
                    base.into_iter().map(|w| w.iter().zip(&arc.weight).map(|(a, b)| a + b).collect()).collect(),
                )
            };
            let merged = match t.remove(&arc.target) {
                Some(old) => old.union(&cell),
                None => cell,
            };
            t.insert(arc.target, merged);
        }
    }
    Ok((t, exact))
}

/// Partition of the observable step weights from `x` under `label` by the estimate they lead to.
/// Returns the cells sorted by witness and whether the computation was exact.
pub fn successor_cells(engine: &Engine, x: &StateSet, label: usize) -> Result<(Vec<Cell>, bool), EplError> {
    let p = engine.p;
    let (t, exact) = target_weights(engine, x, label)?;
    let mut by_target: BTreeMap<StateSet, LabelCell> = BTreeMap::new();
    if p.k == 1 {
        // Identical weight sets are grouped, then cells are refined one group at a time.
        let mut groups: BTreeMap<EpSet, StateSet> = BTreeMap::new();
        for (q, c) in &t {
            let s = c.as_scalar().unwrap().clone();
            if !s.is_empty() {
                groups.entry(s).or_default().insert(*q);
            }
        }
        let all = groups.keys().fold(EpSet::empty(), |acc, s| acc.union(s));
        let mut cells: Vec<(EpSet, StateSet)> = vec![(all, StateSet::new())];
        for (s, qs) in &groups {
            let mut next = Vec::new();
            for (c, sel) in cells {
                let inside = c.intersect(s);
                let outside = c.difference(s);
                if !inside.is_empty() {
                    next.push((inside, sel.union(qs).copied().collect()));
                }
                if !outside.is_empty() {
                    next.push((outside, sel));
                }
            }
            cells = next;
        }
        for (c, sel) in cells {
            if c.is_empty() {
                continue;
            }
            let target = p.closure(&sel);
            let merged = match by_target.remove(&target) {
                Some(LabelCell::Scalar(old)) => old.union(&c),
                _ => c,
            };
            by_target.insert(target, LabelCell::Scalar(merged));
        }
    } else {
        let mut by_weight: BTreeMap<Vec<i64>, StateSet> = BTreeMap::new();
        for (q, c) in &t {
            if let LabelCell::Vectors(ws) = c {
                for w in ws {
                    by_weight.entry(w.clone()).or_default().insert(*q);
                }
            }
        }
        let mut grouped: BTreeMap<StateSet, BTreeSet<Vec<i64>>> = BTreeMap::new();
        for (w, sel) in by_weight {
            grouped.entry(p.closure(&sel)).or_default().insert(w);
        }
        by_target = grouped.into_iter().map(|(k, v)| (k, LabelCell::Vectors(v))).collect();
    }
    let mut out: Vec<Cell> = by_target
        .into_iter()
        .map(|(target, cell)| {
            let witness = cell.witness().expect("cells are nonempty");
            Cell { target, cell, witness }
        })
        .collect();
    out.sort_by(|a, b| (a.witness.clone(), &a.target).cmp(&(b.witness.clone(), &b.target)));
    Ok((out, exact))
}

fn two_subsets(y: &StateSet) -> Vec<StateSet> {
    let v: Vec<usize> = y.iter().copied().collect();
    let mut out = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            out.push(StateSet::from([v[i], v[j]]));
        }
    }
    out
}

/// Targets a detector keeps for a raw successor estimate.
pub fn detector_targets(y: &StateSet) -> Vec<StateSet> {
    if y.len() <= 1 {
        vec![y.clone()]
    } else {
        two_subsets(y)
    }
}

fn build(engine: &Engine, kind: Kind) -> Result<EstimatorAutomaton, EplError> {
    let p = engine.p;
    let x0 = p.initial_estimate();
    let mut est =
        EstimatorAutomaton { kind, states: vec![x0.clone()], initial: 0, transitions: Vec::new(), exact: true };
    let mut index: HashMap<StateSet, usize> = HashMap::from([(x0, 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let x = est.states[s].clone();
        for label in 0..p.labels.len() {
            let (cells, exact) = successor_cells(engine, &x, label)?;
            est.exact &= exact;
            let mut merged: BTreeMap<StateSet, LabelCell> = BTreeMap::new();
            for c in cells {
                let targets = match kind {
                    Kind::Observer => vec![c.target.clone()],
                    Kind::Detector => detector_targets(&c.target),
                };
                for y in targets {
                    let m = match merged.remove(&y) {
                        Some(old) => old.union(&c.cell),
                        None => c.cell.clone(),
                    };
                    merged.insert(y, m);
                }
            }
            let mut out: Vec<(Vec<i64>, StateSet, LabelCell)> =
                merged.into_iter().map(|(y, c)| (c.witness().unwrap(), y, c)).collect();
            out.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
            for (witness, y, cell) in out {
                let target = *index.entry(y.clone()).or_insert_with(|| {
                    est.states.push(y);
                    queue.push_back(est.states.len() - 1);
                    est.states.len() - 1
                });
                est.transitions.push(EstTransition { source: s, label, witness, cell, target });
            }
        }
    }
    Ok(est)
}

pub fn build_observer(engine: &Engine) -> Result<EstimatorAutomaton, EplError> {
    build(engine, Kind::Observer)
}

pub fn build_detector(engine: &Engine) -> Result<EstimatorAutomaton, EplError> {
    build(engine, Kind::Detector)
}

impl EstimatorAutomaton {
    pub fn edge_graph(&self) -> EdgeGraph {
        EdgeGraph::new(self.states.len(), self.transitions.iter().map(|t| (t.source, t.target)).collect())
    }

    pub fn state_index(&self, x: &StateSet) -> Option<usize> {
        self.states.iter().position(|s| s == x)
    }

    /// The transition taken from `state` on a concrete observation, if any.
    pub fn step(&self, state: usize, label: usize, delta: &[i64]) -> Option<&EstTransition> {
        self.transitions.iter().find(|t| t.source == state && t.label == label && t.cell.contains(delta))
    }

    pub fn outgoing(&self, state: usize) -> impl Iterator<Item = &EstTransition> {
        self.transitions.iter().filter(move |t| t.source == state)
    }
}

/// Convenience wrapper building from an automaton description.
pub fn observer_of(p: &Prepared) -> Result<EstimatorAutomaton, EplError> {
    build_observer(&Engine::new(p))
}

pub fn detector_of(p: &Prepared) -> Result<EstimatorAutomaton, EplError> {
    build_detector(&Engine::new(p))
}
