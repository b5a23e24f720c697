//! Self-composition: pairs of runs producing identical weighted observations.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::epl::{EplError, PathAnswer, WalkSets, WeightedDigraph};
use crate::graph::{self, EdgeGraph};
use crate::model::WeightedAutomaton;
use crate::prepared::{Engine, Prepared, StateSet};
use crate::verdict::{steps, PairStep, Property, Status, Verdict, Witness};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcTransition {
    pub source: usize,
    /// Event indices of the two synchronized observable events.
    pub events: (usize, usize),
    pub target: usize,
    pub label: usize,
    /// Transitions of a left run realizing this step: unobservable walk, the event, then a
    /// zero-weight unobservable path.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfComposition {
    pub states: Vec<(usize, usize)>,
    pub initial: Vec<usize>,
    pub transitions: Vec<CcTransition>,
    /// (source state, event pair) queries the solver could not decide.
    pub possibly_missing: Vec<(usize, (usize, usize))>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Asynchronous product of the unobservable part with itself; right moves carry negated
/// weights so a walk's weight is the left weight minus the right weight.
pub struct Product {
    pub graph: WeightedDigraph,
    /// Which side moved and along which transition, per arc.
    pub origin: Vec<(Side, usize)>,
    pub n: usize,
}

impl Product {
    pub fn vertex(&self, a: usize, b: usize) -> usize {
        a * self.n + b
    }
}

pub fn unobservable_product(p: &Prepared) -> Product {
    let n = p.n();
    let mut graph = WeightedDigraph::new(p.k, n * n);
    let mut origin = Vec::new();
    for (i, &t) in p.unobs_transition.iter().enumerate() {
        let arc = &p.unobs.arcs[i];
        for other in 0..n {
            graph.add_arc(arc.tail * n + other, arc.head * n + other, arc.weight.clone());
            origin.push((Side::Left, t));
            let neg: Vec<i64> = arc.weight.iter().map(|x| -x).collect();
            graph.add_arc(other * n + arc.tail, other * n + arc.head, neg);
            origin.push((Side::Right, t));
        }
    }
    Product { graph, origin, n }
}

impl SelfComposition {
    pub fn build(p: &Prepared) -> Result<SelfComposition, EplError> {
        Self::build_with(&Engine::new(p))
    }

    pub fn build_with(engine: &Engine) -> Result<SelfComposition, EplError> {
        let p = engine.p;
        let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); p.labels.len()];
        for (i, _) in p.arcs.iter().enumerate() {
            if let Some(l) = p.arc_label(i) {
                by_label[l].push(i);
            }
        }
        let mut closures: HashMap<usize, Vec<(usize, Vec<usize>)>> = HashMap::new();
        let mut zero_closure = |q: usize| -> Vec<(usize, Vec<usize>)> {
            closures
                .entry(q)
                .or_insert_with(|| {
                    p.closure(&StateSet::from([q]))
                        .into_iter()
                        .map(|r| (r, p.zero_path(q, r).expect("closure member has a zero path")))
                        .collect()
                })
                .clone()
        };
        let no_unobs = p.unobs.arcs.is_empty();
        let product = (p.k > 1 && !no_unobs).then(|| unobservable_product(p));

        let mut cc = SelfComposition {
            states: Vec::new(),
            initial: Vec::new(),
            transitions: Vec::new(),
            possibly_missing: Vec::new(),
        };
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for &a in &p.initial {
            for &b in &p.initial {
                let i = cc.states.len();
                cc.states.push((a, b));
                index.insert((a, b), i);
                cc.initial.push(i);
                queue.push_back(i);
            }
        }

        while let Some(s) = queue.pop_front() {
            let (q1, q2) = cc.states[s];
            let pw = match &product {
                Some(pr) => Some(WalkSets::new(&pr.graph, pr.vertex(q1, q2))?),
                None => None,
            };
            let mut seen: HashSet<((usize, usize), (usize, usize))> = HashSet::new();
            for arcs in &by_label {
                for &t1 in arcs {
                    for &t2 in arcs {
                        let (a1, a2) = (&p.arcs[t1], &p.arcs[t2]);
                        let found: Option<(Vec<usize>, Vec<usize>)> = if no_unobs {
                            (a1.source == q1 && a2.source == q2 && a1.weight == a2.weight).then(|| (vec![], vec![]))
                        } else if let (Some(pr), Some(pw)) = (&product, &pw) {
                            let target = pr.vertex(a1.source, a2.source);
                            if !pw.reaches(target) {
                                continue;
                            }
                            let z: Vec<i64> = a2.weight.iter().zip(&a1.weight).map(|(x, y)| x - y).collect();
                            match pw.find(target, &z, &engine.cfg)? {
                                PathAnswer::Yes(walk) => {
                                    let side = |sd: Side| -> Vec<usize> {
                                        walk.iter()
                                            .filter(|&&a| pr.origin[a].0 == sd)
                                            .map(|&a| pr.origin[a].1)
                                            .collect()
                                    };
                                    Some((side(Side::Left), side(Side::Right)))
                                }
                                PathAnswer::No => None,
                                PathAnswer::Unknown => {
                                    cc.possibly_missing.push((s, (a1.event, a2.event)));
                                    None
                                }
                            }
                        } else {
                            if !engine.walks(q1)?.reaches(a1.source) || !engine.walks(q2)?.reaches(a2.source) {
                                continue;
                            }
                            let s1 = engine.unobs_set(q1, a1.source)?.shift(a1.weight[0]);
                            let s2 = engine.unobs_set(q2, a2.source)?.shift(a2.weight[0]);
                            match s1.intersect(&s2).min_abs_witness() {
                                None => None,
                                Some(w) => {
                                    let lw = engine.unobs_path(q1, a1.source, &[w - a1.weight[0]])?;
                                    let rw = engine.unobs_path(q2, a2.source, &[w - a2.weight[0]])?;
                                    match (lw, rw) {
                                        (PathAnswer::Yes(l), PathAnswer::Yes(r)) => Some((l, r)),
                                        _ => unreachable!("weight set member without a walk"),
                                    }
                                }
                            }
                        };
                        let Some((lw, rw)) = found else { continue };
                        for (q3, z1) in zero_closure(a1.target) {
                            for (q4, z2) in zero_closure(a2.target) {
                                if !seen.insert(((a1.event, a2.event), (q3, q4))) {
                                    continue;
                                }
                                let target = *index.entry((q3, q4)).or_insert_with(|| {
                                    cc.states.push((q3, q4));
                                    queue.push_back(cc.states.len() - 1);
                                    cc.states.len() - 1
                                });
                                let mut left = lw.clone();
                                left.push(t1);
                                left.extend(&z1);
                                let mut right = rw.clone();
                                right.push(t2);
                                right.extend(&z2);
                                cc.transitions.push(CcTransition {
                                    source: s,
                                    events: (a1.event, a2.event),
                                    target,
                                    label: p.arc_label(t1).unwrap(),
                                    left,
                                    right,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(cc)
    }

    pub fn state_index(&self, pair: (usize, usize)) -> Option<usize> {
        self.states.iter().position(|&s| s == pair)
    }

    pub fn edge_graph(&self) -> EdgeGraph {
        EdgeGraph::new(self.states.len(), self.transitions.iter().map(|t| (t.source, t.target)).collect())
    }

    /// Transitions as name tuples, for comparisons in tests and output.
    pub fn named_transitions(&self, p: &Prepared) -> Vec<([String; 2], [String; 2], [String; 2])> {
        let st = |i: usize| {
            let (a, b) = self.states[i];
            [p.model.states[a].clone(), p.model.states[b].clone()]
        };
        let mut v: Vec<_> = self
            .transitions
            .iter()
            .map(|t| {
                (
                    st(t.source),
                    [p.model.events[t.events.0].name.clone(), p.model.events[t.events.1].name.clone()],
                    st(t.target),
                )
            })
            .collect();
        v.sort();
        v
    }

    pub(crate) fn pair_step(&self, p: &Prepared, t: usize) -> PairStep {
        let tr = &self.transitions[t];
        let st = |i: usize| {
            let (a, b) = self.states[i];
            [p.model.states[a].clone(), p.model.states[b].clone()]
        };
        PairStep {
            from: st(tr.source),
            events: [p.model.events[tr.events.0].name.clone(), p.model.events[tr.events.1].name.clone()],
            to: st(tr.target),
            left: steps(p, &tr.left),
            right: steps(p, &tr.right),
        }
    }
}

pub fn build_self_composition(a: &WeightedAutomaton) -> Result<SelfComposition, EplError> {
    SelfComposition::build(&Prepared::new(a))
}

pub fn check_sd(p: &Prepared) -> Verdict {
    match SelfComposition::build(p) {
        Ok(cc) => check_sd_on(p, &cc),
        Err(e) => {
            let mut v = Verdict::new(Property::Sd, Status::Unknown);
            v.notes.push(e.to_string());
            v
        }
    }
}

pub fn check_sd_on(p: &Prepared, cc: &SelfComposition) -> Verdict {
    let g = cc.edge_graph();
    let adj = g.adjacency(|_| true);
    let cyclic = graph::cyclic_vertices(&adj);
    let bad: Vec<bool> = cc.states.iter().map(|&(l, r)| l != r && p.reaches_cycle[l]).collect();
    let co = graph::co_reach(&adj, &bad);
    let Some(q1) = (0..cc.states.len()).find(|&s| cyclic[s] && co[s]) else {
        let mut v =
            Verdict::new(Property::Sd, if cc.possibly_missing.is_empty() { Status::Holds } else { Status::Unknown });
        if !cc.possibly_missing.is_empty() {
            v.notes.push(format!("{} self-composition transitions undecided", cc.possibly_missing.len()));
        }
        return v;
    };
    let stem = g.path_to(&cc.initial, |s| s == q1, |_| true).expect("all states are reachable");
    let cycle = g.cycle_through(q1, |_| true).expect("state lies on a cycle");
    let tail = g.path_to(&[q1], |s| bad[s], |_| true).expect("bad state reachable");
    let end = tail.last().map_or(q1, |&t| cc.transitions[t].target);
    let (to_cycle, automaton_cycle) = p.cycle_from(cc.states[end].0).expect("cycle reachable");
    let pairs = |path: &[usize]| path.iter().map(|&t| cc.pair_step(p, t)).collect::<Vec<_>>();
    let mut v = Verdict::new(Property::Sd, Status::Fails);
    v.conditions.push("ambiguous_cycle".into());
    v.witness = Some(Witness::AmbiguousCycle {
        stem: pairs(&stem),
        cycle: pairs(&cycle),
        tail: pairs(&tail),
        to_cycle: steps(p, &to_cycle),
        automaton_cycle: steps(p, &automaton_cycle),
    });
    v
}
