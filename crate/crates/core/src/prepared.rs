//! Normalized, integer-scaled view of an automaton used by every analysis.

use std::cell::{OnceCell, RefCell};
use std::collections::{BTreeSet, HashMap};

use crate::epl::{EplError, PathAnswer, SolverConfig, WalkSets, WeightedDigraph};
use crate::epset::EpSet;
use crate::graph::{self, EdgeGraph};
use crate::model::WeightedAutomaton;

pub type StateSet = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub source: usize,
    pub event: usize,
    pub target: usize,
    pub weight: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct Prepared {
    pub k: usize,
    /// Factor all original weights were multiplied by.
    pub scale: i64,
    pub model: WeightedAutomaton,
    /// Sorted output alphabet.
    pub labels: Vec<String>,
    pub event_label: Vec<Option<usize>>,
    /// Same order as `model.transitions`.
    pub arcs: Vec<Arc>,
    pub initial: StateSet,
    pub unobs: WeightedDigraph,
    /// Transition index of each arc of `unobs`.
    pub unobs_transition: Vec<usize>,
    pub reachable: StateSet,
    /// The state can reach an unobservable cycle using unobservable transitions only.
    pub reaches_unobs_cycle: Vec<bool>,
    /// The state can reach some cycle.
    pub reaches_cycle: Vec<bool>,
    zero_adj: Vec<Vec<usize>>,
}

impl Prepared {
    pub fn new(a: &WeightedAutomaton) -> Prepared {
        let (model, scale) = a.normalize().scale_to_integers();
        let k = model.k;
        let labels: Vec<String> = model.labels().into_iter().collect();
        let event_label =
            model.events.iter().map(|e| e.label.as_ref().map(|l| labels.binary_search(l).unwrap())).collect::<Vec<_>>();
        let arcs: Vec<Arc> = model
            .transitions
            .iter()
            .map(|t| Arc {
                source: t.source,
                event: t.event,
                target: t.target,
                weight: t.weight.to_ints().expect("scaled weights are integers"),
            })
            .collect();
        let n = model.states.len();
        let mut unobs = WeightedDigraph::new(k, n);
        let mut unobs_transition = Vec::new();
        let mut zero_adj = vec![Vec::new(); n];
        let mut uo_adj = vec![Vec::new(); n];
        let mut adj = vec![Vec::new(); n];
        for (i, arc) in arcs.iter().enumerate() {
            adj[arc.source].push(arc.target);
            if event_label[arc.event].is_none() {
                unobs.add_arc(arc.source, arc.target, arc.weight.clone());
                unobs_transition.push(i);
                uo_adj[arc.source].push(arc.target);
                if arc.weight.iter().all(|&x| x == 0) {
                    zero_adj[arc.source].push(arc.target);
                }
            }
        }
        let initial: StateSet = model.initial.iter().map(|(q, _)| *q).collect();
        let reachable = graph::reach(&adj, initial.iter().copied());
        let reaches_unobs_cycle = graph::co_reach(&uo_adj, &graph::cyclic_vertices(&uo_adj));
        let reaches_cycle = graph::co_reach(&adj, &graph::cyclic_vertices(&adj));
        Prepared {
            k,
            scale,
            model,
            labels,
            event_label,
            arcs,
            initial,
            unobs,
            unobs_transition,
            reachable,
            reaches_unobs_cycle,
            reaches_cycle,
            zero_adj,
        }
    }

    pub fn n(&self) -> usize {
        self.model.states.len()
    }

    pub fn observable(&self, arc: usize) -> bool {
        self.event_label[self.arcs[arc].event].is_some()
    }

    pub fn arc_label(&self, arc: usize) -> Option<usize> {
        self.event_label[self.arcs[arc].event]
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn closure(&self, x: &StateSet) -> StateSet {
        graph::reach(&self.zero_adj, x.iter().copied())
    }

    pub fn initial_estimate(&self) -> StateSet {
        self.closure(&self.initial)
    }

    pub fn names(&self, x: &StateSet) -> Vec<String> {
        x.iter().map(|&q| self.model.states[q].clone()).collect()
    }

    pub fn state_set(&self, names: &[String]) -> Option<StateSet> {
        names.iter().map(|n| self.model.state_index(n)).collect()
    }

    /// Transition graph of the automaton; edge ids are transition indices.
    pub fn edge_graph(&self) -> EdgeGraph {
        EdgeGraph::new(self.n(), self.arcs.iter().map(|a| (a.source, a.target)).collect())
    }

    /// Shortest path of zero-weight unobservable transitions from `a` to `b`.
    pub fn zero_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let g = self.edge_graph();
        g.path_to(&[a], |v| v == b, |e| !self.observable(e) && self.arcs[e].weight.iter().all(|&x| x == 0))
    }

    /// A path from an initial state to `q`.
    pub fn path_from_initial(&self, q: usize) -> Option<Vec<usize>> {
        let starts: Vec<usize> = self.initial.iter().copied().collect();
        self.edge_graph().path_to(&starts, |v| v == q, |_| true)
    }

    /// An unobservable path from `q` to an unobservable cycle, and that cycle.
    pub fn unobs_cycle_from(&self, q: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let g = self.edge_graph();
        let uo = |e: usize| !self.observable(e);
        let mut uo_adj = vec![Vec::new(); self.n()];
        for (i, a) in self.arcs.iter().enumerate() {
            if uo(i) {
                uo_adj[a.source].push(a.target);
            }
        }
        let cyclic = graph::cyclic_vertices(&uo_adj);
        let path = g.path_to(&[q], |v| cyclic[v], uo)?;
        let anchor = path.last().map_or(q, |&e| self.arcs[e].target);
        let cycle = g.cycle_through(anchor, uo)?;
        Some((path, cycle))
    }

    /// A path from `q` to some cycle, and that cycle.
    pub fn cycle_from(&self, q: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let g = self.edge_graph();
        let cyclic = graph::cyclic_vertices(&g.adjacency(|_| true));
        let path = g.path_to(&[q], |v| cyclic[v], |_| true)?;
        let anchor = path.last().map_or(q, |&e| self.arcs[e].target);
        let cycle = g.cycle_through(anchor, |_| true)?;
        Some((path, cycle))
    }

    /// Accumulated weights along a transition path starting from zero.
    pub fn path_weight(&self, path: &[usize]) -> Vec<i64> {
        let mut w = vec![0; self.k];
        for &t in path {
            for (a, b) in w.iter_mut().zip(&self.arcs[t].weight) {
                *a += b;
            }
        }
        w
    }
}

/// Memoized unobservable walk sets for one prepared automaton.
pub struct Engine<'a> {
    pub p: &'a Prepared,
    pub cfg: SolverConfig,
    walks: Vec<OnceCell<Result<WalkSets<'a>, EplError>>>,
    sets: RefCell<HashMap<(usize, usize), EpSet>>,
}

impl<'a> Engine<'a> {
    pub fn new(p: &'a Prepared) -> Self {
        Self::with_config(p, SolverConfig::default())
    }

    pub fn with_config(p: &'a Prepared, cfg: SolverConfig) -> Self {
        Engine { p, cfg, walks: (0..p.n()).map(|_| OnceCell::new()).collect(), sets: RefCell::new(HashMap::new()) }
    }

    pub fn walks(&self, q: usize) -> Result<&WalkSets<'a>, EplError> {
        self.walks[q].get_or_init(|| WalkSets::new(&self.p.unobs, q)).as_ref().map_err(|e| e.clone())
    }

    /// Weights of unobservable walks from `q` to `r` (dimension 1).
    pub fn unobs_set(&self, q: usize, r: usize) -> Result<EpSet, EplError> {
        if let Some(s) = self.sets.borrow().get(&(q, r)) {
            return Ok(s.clone());
        }
        let s = self.walks(q)?.weight_set(r)?;
        self.sets.borrow_mut().insert((q, r), s.clone());
        Ok(s)
    }

    /// An unobservable walk `q ⇝ r` of weight `z`, as transition indices.
    pub fn unobs_path(&self, q: usize, r: usize, z: &[i64]) -> Result<PathAnswer, EplError> {
        Ok(match self.walks(q)?.find(r, z, &self.cfg)? {
            PathAnswer::Yes(w) => PathAnswer::Yes(w.into_iter().map(|a| self.p.unobs_transition[a]).collect()),
            other => other,
        })
    }

    /// States reached from `x` by an unobservable walk followed by a `label` transition whose
    /// total weight is `delta`. The flag is false if some query was undecided.
    pub fn step(&self, x: &StateSet, label: usize, delta: &[i64]) -> Result<(StateSet, bool), EplError> {
        let mut out = StateSet::new();
        let mut exact = true;
        for &q in x {
            let ws = self.walks(q)?;
            for arc in &self.p.arcs {
                if self.p.event_label[arc.event] != Some(label) || out.contains(&arc.target) || !ws.reaches(arc.source)
                {
                    continue;
                }
                let z: Vec<i64> = delta.iter().zip(&arc.weight).map(|(d, w)| d - w).collect();
                let hit = if self.p.k == 1 {
                    self.unobs_set(q, arc.source)?.contains(z[0])
                } else {
                    match ws.find(arc.source, &z, &self.cfg)? {
                        PathAnswer::Yes(_) => true,
                        PathAnswer::No => false,
                        PathAnswer::Unknown => {
                            exact = false;
                            false
                        }
                    }
                };
                if hit {
                    out.insert(arc.target);
                }
            }
        }
        Ok((out, exact))
    }
}
