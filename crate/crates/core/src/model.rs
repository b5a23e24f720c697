use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::format::{parse_rational, AutomatonDocument, EventEntry, InitialEntry, TransitionEntry};
use crate::graph;

pub type Rational = Ratio<i64>;

/// A weight in Q^k. Entries are always kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightVector(pub Vec<Rational>);

impl WeightVector {
    pub fn zero(k: usize) -> Self {
        WeightVector(vec![Rational::zero(); k])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        WeightVector(v.iter().map(|&x| Rational::from_integer(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|r| r.is_zero())
    }

    pub fn scaled(&self, f: Rational) -> Self {
        WeightVector(self.0.iter().map(|r| r * f).collect())
    }

    /// Integer entries, or `None` if some entry has a denominator other than 1.
    pub fn to_ints(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|r| r.is_integer().then(|| r.to_integer())).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(rational_to_string).collect()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", rational_to_string(&self.0[0]));
        }
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", rational_to_string(r))?;
        }
        write!(f, ")")
    }
}

pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub name: String,
    /// `None` is the empty label.
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: usize,
    pub event: usize,
    pub target: usize,
    pub weight: WeightVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedAutomaton {
    pub k: usize,
    pub states: Vec<String>,
    pub events: Vec<Event>,
    /// Sorted by state index.
    pub initial: Vec<(usize, WeightVector)>,
    /// Sorted by (source, event, target); no two share that triple.
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("{path}: dimension k must be at least 1")]
    ZeroDimension { path: String },
    #[error("{path}: unsupported format version {found}")]
    UnsupportedVersion { path: String, found: u32 },
    #[error("{path}: duplicate state `{name}`")]
    DuplicateState { path: String, name: String },
    #[error("{path}: duplicate event `{name}`")]
    DuplicateEvent { path: String, name: String },
    #[error("{path}: undeclared state `{name}`")]
    UndeclaredState { path: String, name: String },
    #[error("{path}: undeclared event `{name}`")]
    UndeclaredEvent { path: String, name: String },
    #[error("{path}: weight has {found} entries, expected {expected}")]
    DimensionMismatch { path: String, expected: usize, found: usize },
    #[error("{path}: `{text}` is not a rational number")]
    NonRationalWeight { path: String, text: String },
    #[error("{path}: empty label (use null for the empty label)")]
    EmptyLabel { path: String },
    #[error("initial: no initial state")]
    EmptyInitialSet,
    #[error("{path}: state `{name}` listed as initial twice")]
    DuplicateInitial { path: String, name: String },
    #[error("{path}: duplicate transition ({source_state}, {event}, {target})")]
    DuplicateTransition { path: String, source_state: String, event: String, target: String },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid automaton: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

pub const FORMAT_VERSION: u32 = 1;

/// Checks a parsed document and builds the canonical automaton, reporting every violation found.
pub fn validate(doc: &AutomatonDocument) -> Result<WeightedAutomaton, ValidationError> {
    let mut errs = Vec::new();
    if doc.format_version != FORMAT_VERSION {
        errs.push(Violation::UnsupportedVersion { path: "format_version".into(), found: doc.format_version });
    }
    if doc.k == 0 {
        errs.push(Violation::ZeroDimension { path: "k".into() });
    }
    let k = doc.k;

    let mut state_ix = BTreeMap::new();
    for (i, s) in doc.states.iter().enumerate() {
        if state_ix.insert(s.clone(), i).is_some() {
            errs.push(Violation::DuplicateState { path: format!("states[{i}]"), name: s.clone() });
        }
    }
    let mut event_ix = BTreeMap::new();
    for (i, e) in doc.events.iter().enumerate() {
        if event_ix.insert(e.name.clone(), i).is_some() {
            errs.push(Violation::DuplicateEvent { path: format!("events[{i}]"), name: e.name.clone() });
        }
        if e.label.as_deref() == Some("") {
            errs.push(Violation::EmptyLabel { path: format!("events[{i}].label") });
        }
    }

    let weight = |path: String, w: &[String], errs: &mut Vec<Violation>| -> Option<WeightVector> {
        let mut ok = true;
        if k > 0 && w.len() != k {
            errs.push(Violation::DimensionMismatch { path: path.clone(), expected: k, found: w.len() });
            ok = false;
        }
        let mut out = Vec::with_capacity(w.len());
        for (j, text) in w.iter().enumerate() {
            match parse_rational(text) {
                Some(r) => out.push(r),
                None => {
                    errs.push(Violation::NonRationalWeight { path: format!("{path}[{j}]"), text: text.clone() });
                    ok = false;
                }
            }
        }
        ok.then_some(WeightVector(out))
    };

    if doc.initial.is_empty() {
        errs.push(Violation::EmptyInitialSet);
    }
    let mut initial = BTreeMap::new();
    for (i, ie) in doc.initial.iter().enumerate() {
        let w = weight(format!("initial[{i}].weight"), &ie.weight, &mut errs);
        match state_ix.get(&ie.state) {
            None => {
                errs.push(Violation::UndeclaredState { path: format!("initial[{i}].state"), name: ie.state.clone() })
            }
            Some(&s) => match initial.entry(s) {
                std::collections::btree_map::Entry::Occupied(_) => {
                    errs.push(Violation::DuplicateInitial { path: format!("initial[{i}]"), name: ie.state.clone() })
                }
                std::collections::btree_map::Entry::Vacant(slot) => {
                    if let Some(w) = w {
                        slot.insert(w);
                    }
                }
            },
        }
    }

    let mut transitions: BTreeMap<(usize, usize, usize), WeightVector> = BTreeMap::new();
    for (i, t) in doc.transitions.iter().enumerate() {
        let w = weight(format!("transitions[{i}].weight"), &t.weight, &mut errs);
        let s = state_ix.get(&t.from).copied();
        if s.is_none() {
            errs.push(Violation::UndeclaredState { path: format!("transitions[{i}].from"), name: t.from.clone() });
        }
        let d = state_ix.get(&t.to).copied();
        if d.is_none() {
            errs.push(Violation::UndeclaredState { path: format!("transitions[{i}].to"), name: t.to.clone() });
        }
        let e = event_ix.get(&t.event).copied();
        if e.is_none() {
            errs.push(Violation::UndeclaredEvent { path: format!("transitions[{i}].event"), name: t.event.clone() });
        }
        if let (Some(s), Some(e), Some(d), Some(w)) = (s, e, d, w) {
            if transitions.insert((s, e, d), w).is_some() {
                errs.push(Violation::DuplicateTransition {
                    path: format!("transitions[{i}]"),
                    source_state: t.from.clone(),
                    event: t.event.clone(),
                    target: t.to.clone(),
                });
            }
        }
    }

    if !errs.is_empty() {
        return Err(ValidationError { violations: errs });
    }
    Ok(WeightedAutomaton {
        k,
        states: doc.states.clone(),
        events: doc.events.iter().map(|e| Event { name: e.name.clone(), label: e.label.clone() }).collect(),
        initial: initial.into_iter().collect(),
        transitions: transitions
            .into_iter()
            .map(|((source, event, target), weight)| Transition { source, event, target, weight })
            .collect(),
    })
}

/// Report of structural properties of the reachable part of an automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub deadlock_free: bool,
    pub divergence_free: bool,
    pub deterministic: bool,
    pub unambiguous_checked_to_bound: bool,
    pub all_observable: bool,
    pub reachable_states: BTreeSet<String>,
}

fn fresh_name(taken: &BTreeSet<&str>, base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(name.as_str()) {
        name.push('\'');
    }
    name
}

impl WeightedAutomaton {
    pub fn to_document(&self) -> AutomatonDocument {
        AutomatonDocument {
            format_version: FORMAT_VERSION,
            k: self.k,
            states: self.states.clone(),
            initial: self
                .initial
                .iter()
                .map(|(s, w)| InitialEntry { state: self.states[*s].clone(), weight: w.to_strings() })
                .collect(),
            events: self.events.iter().map(|e| EventEntry { name: e.name.clone(), label: e.label.clone() }).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionEntry {
                    from: self.states[t.source].clone(),
                    event: self.events[t.event].name.clone(),
                    to: self.states[t.target].clone(),
                    weight: t.weight.to_strings(),
                })
                .collect(),
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.name == name)
    }

    pub fn is_observable(&self, event: usize) -> bool {
        self.events[event].label.is_some()
    }

    /// The output alphabet: labels actually carried by some event.
    pub fn labels(&self) -> BTreeSet<String> {
        self.events.iter().filter_map(|e| e.label.clone()).collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.initial.iter().all(|(_, w)| w.is_zero())
    }

    /// Moves nonzero initial weights onto a fresh initial state feeding the old initial
    /// states through a fresh unobservable event.
    pub fn normalize(&self) -> WeightedAutomaton {
        if self.is_normalized() {
            return self.clone();
        }
        let mut out = self.clone();
        let taken: BTreeSet<&str> = self.states.iter().map(|s| s.as_str()).collect();
        let init = out.states.len();
        out.states.push(fresh_name(&taken, "init"));
        let taken: BTreeSet<&str> = self.events.iter().map(|e| e.name.as_str()).collect();
        let eps = out.events.len();
        out.events.push(Event { name: fresh_name(&taken, "eps"), label: None });
        let mut initial = vec![(init, WeightVector::zero(self.k))];
        for (q, w) in &self.initial {
            if w.is_zero() {
                initial.push((*q, w.clone()));
            } else {
                out.transitions.push(Transition { source: init, event: eps, target: *q, weight: w.clone() });
            }
        }
        initial.sort();
        out.initial = initial;
        out.transitions.sort();
        out
    }

    fn map_weights(&self, f: impl Fn(&WeightVector) -> WeightVector) -> WeightedAutomaton {
        let mut out = self.clone();
        for (_, w) in out.initial.iter_mut() {
            *w = f(w);
        }
        for t in out.transitions.iter_mut() {
            t.weight = f(&t.weight);
        }
        out
    }

    /// Multiplies every weight (initial and transition) by `factor`.
    pub fn scale_weights(&self, factor: Rational) -> WeightedAutomaton {
        self.map_weights(|w| w.scaled(factor))
    }

    /// Multiplies all weights by the lcm of their denominators.
    pub fn scale_to_integers(&self) -> (WeightedAutomaton, i64) {
        let all = self.initial.iter().map(|(_, w)| w).chain(self.transitions.iter().map(|t| &t.weight));
        let m = all.flat_map(|w| w.0.iter()).fold(1i64, |acc, r| acc.lcm(r.denom()));
        if m == 1 {
            return (self.clone(), 1);
        }
        (self.scale_weights(Rational::from_integer(m)), m)
    }

    fn zero_unobservable_successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            if !self.is_observable(t.event) && t.weight.is_zero() {
                adj[t.source].push(t.target);
            }
        }
        adj
    }

    /// States reachable from `x` through unobservable transitions of weight zero.
    pub fn instantaneous_closure(&self, x: &BTreeSet<usize>) -> BTreeSet<usize> {
        graph::reach(&self.zero_unobservable_successors(), x.iter().copied())
    }

    pub fn reachable_states(&self) -> BTreeSet<usize> {
        let mut adj = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            adj[t.source].push(t.target);
        }
        graph::reach(&adj, self.initial.iter().map(|(q, _)| *q))
    }

    pub fn structure_report(&self) -> StructureReport {
        let n = self.states.len();
        let reach = self.reachable_states();
        let deadlock_free = reach.iter().all(|&q| self.transitions.iter().any(|t| t.source == q));

        let mut uo = vec![Vec::new(); n];
        for t in &self.transitions {
            if !self.is_observable(t.event) {
                uo[t.source].push(t.target);
            }
        }
        let cyclic = graph::cyclic_vertices(&uo);
        let divergence_free = !reach.iter().any(|&q| cyclic[q]);

        let mut seen = BTreeSet::new();
        let mut deterministic = self.initial.len() == 1;
        for t in &self.transitions {
            if !seen.insert((t.source, t.event)) {
                deterministic = false;
            }
        }

        StructureReport {
            deadlock_free,
            divergence_free,
            deterministic,
            unambiguous_checked_to_bound: self.is_unambiguous(),
            all_observable: self.events.iter().all(|e| e.label.is_some()),
            reachable_states: reach.iter().map(|&q| self.states[q].clone()).collect(),
        }
    }

    /// Twin-run product: two runs under the same event sequence that have diverged and
    /// later meet in a common state witness ambiguity.
    pub fn is_unambiguous(&self) -> bool {
        let mut by_source_event: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for t in &self.transitions {
            by_source_event.entry((t.source, t.event)).or_default().push(t.target);
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for (a, _) in &self.initial {
            for (b, _) in &self.initial {
                let node = (*a, *b, a != b);
                if seen.insert(node) {
                    queue.push_back(node);
                }
            }
        }
        while let Some((p, q, diverged)) = queue.pop_front() {
            if diverged && p == q {
                return false;
            }
            for e in 0..self.events.len() {
                let (Some(ps), Some(qs)) = (by_source_event.get(&(p, e)), by_source_event.get(&(q, e))) else {
                    continue;
                };
                for &p2 in ps {
                    for &q2 in qs {
                        let node = (p2, q2, diverged || p2 != q2);
                        if seen.insert(node) {
                            queue.push_back(node);
                        }
                    }
                }
            }
        }
        true
    }
}
