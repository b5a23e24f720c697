//! Brute force straight from the definitions: bounded run enumeration, current-state estimates, lasso
//! falsification and witness replay. Used as ground truth by the test suites.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::epl::{EplError, PathAnswer};
use crate::format::Observation;
use crate::prepared::{Engine, Prepared, StateSet};
use crate::verdict::{steps, ObsStep, Property, Step, Witness};

/// Largest horizon accepted by `oracle_runs`.
pub const MAX_HORIZON: usize = 12;

/// A labeled observation with its accumulated weight, in scaled integer units.
pub type LabeledPoint = (usize, Vec<i64>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("horizon {0} exceeds the maximum of {MAX_HORIZON}")]
    HorizonTooLarge(usize),
    #[error("observation weight has dimension {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error(transparent)]
    Solver(#[from] EplError),
}

/// A finite path from an initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedRun {
    pub start: usize,
    pub path: Vec<usize>,
    /// Accumulated weight after each transition.
    pub weights: Vec<Vec<i64>>,
}

impl BoundedRun {
    pub fn end(&self, p: &Prepared) -> usize {
        self.path.last().map_or(self.start, |&t| p.arcs[t].target)
    }

    /// Event names with accumulated weights.
    pub fn weighted_word(&self, p: &Prepared) -> Vec<(String, Vec<i64>)> {
        self.path
            .iter()
            .zip(&self.weights)
            .map(|(&t, w)| (p.model.events[p.arcs[t].event].name.clone(), w.clone()))
            .collect()
    }

    /// The observable part of the weighted word.
    pub fn label_sequence(&self, p: &Prepared) -> Vec<LabeledPoint> {
        self.path.iter().zip(&self.weights).filter_map(|(&t, w)| p.arc_label(t).map(|l| (l, w.clone()))).collect()
    }
}

/// Every run of length at most `horizon` from an initial state.
pub fn oracle_runs(p: &Prepared, horizon: usize) -> Result<Vec<BoundedRun>, OracleError> {
    if horizon > MAX_HORIZON {
        return Err(OracleError::HorizonTooLarge(horizon));
    }
    let mut out = Vec::new();
    let mut stack: Vec<BoundedRun> =
        p.initial.iter().map(|&q| BoundedRun { start: q, path: Vec::new(), weights: Vec::new() }).collect();
    while let Some(run) = stack.pop() {
        if run.path.len() < horizon {
            let end = run.end(p);
            let acc = run.weights.last().cloned().unwrap_or_else(|| vec![0; p.k]);
            for (t, arc) in p.arcs.iter().enumerate() {
                if arc.source == end {
                    let mut next = run.clone();
                    next.path.push(t);
                    next.weights.push(acc.iter().zip(&arc.weight).map(|(a, b)| a + b).collect());
                    stack.push(next);
                }
            }
        }
        out.push(run);
    }
    out.sort_by(|a, b| (a.path.len(), a.start, &a.path).cmp(&(b.path.len(), b.start, &b.path)));
    Ok(out)
}

/// Converts user observations (accumulated, original units) to scaled label points. `None`
/// when some label is unknown or some weight is not a multiple of the scaling unit, in which
/// case no run produces the sequence.
pub fn scaled_observations(p: &Prepared, obs: &[Observation]) -> Result<Option<Vec<LabeledPoint>>, OracleError> {
    let mut out = Vec::new();
    for (label, w) in obs {
        if w.dim() != p.k {
            return Err(OracleError::Dimension { got: w.dim(), expected: p.k });
        }
        let Some(l) = p.label_index(label) else { return Ok(None) };
        let Some(ints) = w.scaled(num_rational::Ratio::from_integer(p.scale)).to_ints() else { return Ok(None) };
        out.push((l, ints));
    }
    Ok(Some(out))
}

fn deltas(gamma: &[LabeledPoint], k: usize) -> Vec<(usize, Vec<i64>)> {
    let mut prev = vec![0; k];
    gamma
        .iter()
        .map(|(l, t)| {
            let d = t.iter().zip(&prev).map(|(a, b)| a - b).collect();
            prev = t.clone();
            (*l, d)
        })
        .collect()
}

/// Successor chain from the initial estimate. Returns every intermediate estimate (before
/// closure, except the first) and whether all solver queries were decided.
fn chain(engine: &Engine, gamma: &[LabeledPoint]) -> Result<(Vec<StateSet>, bool), EplError> {
    let p = engine.p;
    let mut sets = vec![p.initial_estimate()];
    let mut exact = true;
    for (l, d) in deltas(gamma, p.k) {
        let (y, e) = engine.step(sets.last().unwrap(), l, &d)?;
        exact &= e;
        sets.push(y);
    }
    Ok((sets, exact))
}

/// Current-state estimate of a scaled label sequence by the successor chain.
pub fn estimate_chain(engine: &Engine, gamma: &[LabeledPoint]) -> Result<(StateSet, bool), EplError> {
    let (sets, exact) = chain(engine, gamma)?;
    Ok((engine.p.closure(sets.last().unwrap()), exact))
}

/// Current-state estimate of user observations. The flag is false if some solver query was
/// undecided.
pub fn oracle_estimate(engine: &Engine, obs: &[Observation]) -> Result<(StateSet, bool), OracleError> {
    match scaled_observations(engine.p, obs)? {
        Some(gamma) => Ok(estimate_chain(engine, &gamma)?),
        None => Ok((StateSet::new(), true)),
    }
}

/// Current-state estimate by enumerating paths of length at most `horizon`; an
/// under-approximation that does not use the path-weight solver.
pub fn estimate_enumerated(p: &Prepared, gamma: &[LabeledPoint], horizon: usize) -> StateSet {
    let mut out = StateSet::new();
    let mut seen: HashSet<(usize, usize, Vec<i64>, usize)> = HashSet::new();
    let mut stack: Vec<(usize, usize, Vec<i64>, usize)> = p.initial.iter().map(|&q| (q, 0, vec![0; p.k], 0)).collect();
    while let Some(node) = stack.pop() {
        if !seen.insert(node.clone()) {
            continue;
        }
        let (q, i, acc, len) = node;
        if i == gamma.len() {
            out.insert(q);
        }
        if len == horizon {
            continue;
        }
        for (t, arc) in p.arcs.iter().enumerate() {
            if arc.source != q {
                continue;
            }
            let next: Vec<i64> = acc.iter().zip(&arc.weight).map(|(a, b)| a + b).collect();
            match p.arc_label(t) {
                None if i == gamma.len() => {
                    if arc.weight.iter().all(|&x| x == 0) {
                        stack.push((arc.target, i, next, len + 1));
                    }
                }
                None => stack.push((arc.target, i, next, len + 1)),
                Some(l) if i < gamma.len() && gamma[i].0 == l && gamma[i].1 == next => {
                    stack.push((arc.target, i + 1, next, len + 1))
                }
                Some(_) => {}
            }
        }
    }
    out
}

/// Whether `path` is a run from an initial state whose observations are `gamma` and whose
/// transitions after the last observation are unobservable with zero weight.
pub fn explains(p: &Prepared, path: &[usize], gamma: &[LabeledPoint]) -> bool {
    let Some(&first) = path.first() else {
        return gamma.is_empty();
    };
    if !p.initial.contains(&p.arcs[first].source) || path.windows(2).any(|w| p.arcs[w[0]].target != p.arcs[w[1]].source)
    {
        return false;
    }
    let run = BoundedRun {
        start: p.arcs[first].source,
        path: path.to_vec(),
        weights: path
            .iter()
            .scan(vec![0; p.k], |acc, &t| {
                for (a, b) in acc.iter_mut().zip(&p.arcs[t].weight) {
                    *a += b;
                }
                Some(acc.clone())
            })
            .collect(),
    };
    let last_obs = path.iter().rposition(|&t| p.observable(t));
    let silent_tail = path[last_obs.map_or(0, |i| i + 1)..].iter().all(|&t| p.arcs[t].weight.iter().all(|&x| x == 0));
    silent_tail && run.label_sequence(p) == gamma
}

/// A run explaining `gamma` that ends in `q`, built backwards along the successor chain.
pub fn estimate_witness(engine: &Engine, gamma: &[LabeledPoint], q: usize) -> Result<Option<Vec<usize>>, EplError> {
    let p = engine.p;
    let (sets, _) = chain(engine, gamma)?;
    let ds = deltas(gamma, p.k);
    let last = sets.last().unwrap();
    let Some((r, tail)) = last.iter().find_map(|&r| p.zero_path(r, q).map(|z| (r, z))) else { return Ok(None) };
    let mut rev: Vec<Vec<usize>> = vec![tail];
    let mut cur = r;
    for i in (0..ds.len()).rev() {
        let (l, d) = &ds[i];
        let mut found = None;
        'search: for &q0 in &sets[i] {
            for (t, arc) in p.arcs.iter().enumerate() {
                if arc.target != cur || p.arc_label(t) != Some(*l) {
                    continue;
                }
                let z: Vec<i64> = d.iter().zip(&arc.weight).map(|(a, b)| a - b).collect();
                if let PathAnswer::Yes(w) = engine.unobs_path(q0, arc.source, &z)? {
                    let mut seg = w;
                    seg.push(t);
                    found = Some((q0, seg));
                    break 'search;
                }
            }
        }
        let Some((q0, seg)) = found else { return Ok(None) };
        rev.push(seg);
        cur = q0;
    }
    // `cur` lies in the closure of the initial states.
    let Some(stem) = p.initial.iter().find_map(|&s| p.zero_path(s, cur)) else { return Ok(None) };
    rev.push(stem);
    let path: Vec<usize> = rev.into_iter().rev().flatten().collect();
    if path.is_empty() && !p.initial.contains(&q) {
        return Ok(None);
    }
    Ok(Some(path))
}

/// Evidence that a property fails, found by bounded search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub property: Property,
    /// `lasso` or `silent`.
    pub shape: String,
    pub stem: Vec<Step>,
    pub cycle: Vec<Step>,
    /// Estimates observed along the pumped lasso or at the silent suffix.
    pub estimates: Vec<EstimatePoint>,
    /// True when the evidence is bounded only and does not prove the failure.
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EstimatePoint {
    /// Accumulated observations, as label names with scaled weights.
    pub observations: Vec<(String, Vec<i64>)>,
    pub estimate: Vec<String>,
}

fn point(p: &Prepared, gamma: &[LabeledPoint], x: &StateSet) -> EstimatePoint {
    EstimatePoint {
        observations: gamma.iter().map(|(l, w)| (p.labels[*l].clone(), w.clone())).collect(),
        estimate: p.names(x),
    }
}

/// Closed walks of length 1..=`max_len` starting and ending at `v`.
fn closed_walks(p: &Prepared, v: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(path) = stack.pop() {
        let end = path.last().map_or(v, |&t| p.arcs[t].target);
        if !path.is_empty() && end == v {
            out.push(path.clone());
        }
        if path.len() == max_len {
            continue;
        }
        for (t, arc) in p.arcs.iter().enumerate() {
            if arc.source == end {
                let mut next = path.clone();
                next.push(t);
                stack.push(next);
            }
        }
    }
    out
}

/// Paths from initial states of length at most `max_len`, one per distinct (end state,
/// observation sequence, accumulated weight).
fn stems(p: &Prepared, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    type Node = (usize, Vec<usize>, Vec<LabeledPoint>, Vec<i64>);
    let mut seen: HashSet<(usize, Vec<LabeledPoint>, Vec<i64>)> = HashSet::new();
    let mut frontier: Vec<Node> = p.initial.iter().map(|&q| (q, Vec::new(), Vec::new(), vec![0; p.k])).collect();
    for len in 0..=max_len {
        let mut next = Vec::new();
        for (q, path, obs, acc) in frontier {
            if !seen.insert((q, obs.clone(), acc.clone())) {
                continue;
            }
            out.push(path.clone());
            if len == max_len {
                continue;
            }
            for (t, arc) in p.arcs.iter().enumerate() {
                if arc.source == q {
                    let w: Vec<i64> = acc.iter().zip(&arc.weight).map(|(a, b)| a + b).collect();
                    let mut o = obs.clone();
                    if let Some(l) = p.arc_label(t) {
                        o.push((l, w.clone()));
                    }
                    let mut pth = path.clone();
                    pth.push(t);
                    next.push((arc.target, pth, o, w));
                }
            }
        }
        frontier = next;
    }
    out
}

fn end_of(p: &Prepared, path: &[usize], start: usize) -> usize {
    path.last().map_or(start, |&t| p.arcs[t].target)
}

/// Label sequences after each observable transition of `path`.
fn prefixes(p: &Prepared, path: &[usize]) -> Vec<Vec<LabeledPoint>> {
    let mut acc = vec![0; p.k];
    let mut obs = Vec::new();
    let mut out = Vec::new();
    for &t in path {
        for (a, b) in acc.iter_mut().zip(&p.arcs[t].weight) {
            *a += b;
        }
        if let Some(l) = p.arc_label(t) {
            obs.push((l, acc.clone()));
            out.push(obs.clone());
        }
    }
    out
}

/// Searches lassos with stem and cycle of length at most `horizon` for a violation of
/// `property`. SD and SPD lassos are pumped three times; every estimate checked must have at
/// least two states. WD and WPD evidence is bounded: it is reported only when no lasso within
/// the horizon avoids ambiguity.
pub fn oracle_falsify(engine: &Engine, property: Property, horizon: usize) -> Result<Option<Counterexample>, EplError> {
    let p = engine.p;
    let stems = stems(p, horizon);
    let cycles: Vec<Vec<Vec<usize>>> = (0..p.n())
        .map(|v| closed_walks(p, v, horizon).into_iter().filter(|c| c.iter().any(|&t| p.observable(t))).collect())
        .collect();
    let start_of = |s: &[usize]| s.first().map(|&t| p.arcs[t].source);
    let ambiguous = |gamma: &[LabeledPoint]| -> Result<(bool, StateSet), EplError> {
        let (x, _) = estimate_chain(engine, gamma)?;
        Ok((x.len() >= 2, x))
    };

    // Silent lassos: an unobservable cycle after the last observation.
    if matches!(property, Property::Spd) {
        let ends = stems.iter().flat_map(|stem| match start_of(stem) {
            Some(_) => vec![(stem, end_of(p, stem, 0))],
            None => p.initial.iter().map(|&q| (stem, q)).collect(),
        });
        for (stem, q) in ends {
            if !p.reaches_unobs_cycle[q] {
                continue;
            }
            let gamma = prefixes(p, stem).pop().unwrap_or_default();
            let (bad, x) = ambiguous(&gamma)?;
            if bad {
                let (to_cycle, cycle) = p.unobs_cycle_from(q).expect("reaches an unobservable cycle");
                let mut full = stem.clone();
                full.extend(to_cycle);
                return Ok(Some(Counterexample {
                    property,
                    shape: "silent".into(),
                    stem: steps(p, &full),
                    cycle: steps(p, &cycle),
                    estimates: vec![point(p, &gamma, &x)],
                    bounded: false,
                }));
            }
        }
    }

    let mut all_lassos_ambiguous = true;
    let mut any_lasso = None;
    for stem in &stems {
        let starts: Vec<usize> = match start_of(stem) {
            Some(s) => vec![s],
            None => p.initial.iter().copied().collect(),
        };
        for s in starts {
            let v = end_of(p, stem, s);
            for cycle in &cycles[v] {
                let mut path = stem.clone();
                let base = prefixes(p, stem).len();
                let mut points = Vec::new();
                let mut violation = true;
                let mut saw_singleton = false;
                for n in 1..=3 {
                    path.extend(cycle);
                    let pre = prefixes(p, &path);
                    match property {
                        Property::Sd => {
                            let gamma = pre.last().unwrap();
                            let (bad, x) = ambiguous(gamma)?;
                            points.push(point(p, gamma, &x));
                            violation &= bad;
                        }
                        _ => {
                            let from = if n == 1 { base } else { pre.len() - prefixes(p, cycle).len() };
                            for gamma in &pre[from..] {
                                let (bad, x) = ambiguous(gamma)?;
                                saw_singleton |= !bad;
                                if n == 3 {
                                    points.push(point(p, gamma, &x));
                                }
                                violation &= bad;
                            }
                        }
                    }
                    if !violation && matches!(property, Property::Sd | Property::Spd) {
                        break;
                    }
                }
                any_lasso.get_or_insert_with(|| (stem.clone(), cycle.clone(), points.clone()));
                if violation && matches!(property, Property::Sd | Property::Spd) {
                    return Ok(Some(Counterexample {
                        property,
                        shape: "lasso".into(),
                        stem: steps(p, stem),
                        cycle: steps(p, cycle),
                        estimates: points,
                        bounded: false,
                    }));
                }
                if saw_singleton {
                    all_lassos_ambiguous = false;
                }
            }
        }
    }
    if matches!(property, Property::Wd | Property::Wpd)
        && all_lassos_ambiguous
        && !p.reachable.iter().any(|&q| p.reaches_unobs_cycle[q])
    {
        if let Some((stem, cycle, points)) = any_lasso {
            return Ok(Some(Counterexample {
                property,
                shape: "lasso".into(),
                stem: steps(p, &stem),
                cycle: steps(p, &cycle),
                estimates: points,
                bounded: true,
            }));
        }
    }
    Ok(None)
}

/// Outcome of replaying a checker witness through the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    /// Observation sequences checked, with their estimates.
    pub points: Vec<(Vec<LabeledPoint>, StateSet)>,
}

fn transitions(s: &[Step]) -> Vec<usize> {
    s.iter().map(|x| x.transition).collect()
}

fn word(p: &Prepared, path: &[usize]) -> Vec<LabeledPoint> {
    prefixes(p, path).pop().unwrap_or_default()
}

fn is_path_from(p: &Prepared, from: usize, path: &[usize]) -> bool {
    let mut cur = from;
    for &t in path {
        if p.arcs[t].source != cur {
            return false;
        }
        cur = p.arcs[t].target;
    }
    true
}

fn accumulate(p: &Prepared, obs: &[ObsStep]) -> Option<Vec<LabeledPoint>> {
    let mut acc = vec![0; p.k];
    obs.iter()
        .map(|o| {
            for (a, b) in acc.iter_mut().zip(&o.delta) {
                *a += b;
            }
            Some((p.label_index(&o.label)?, acc.clone()))
        })
        .collect()
}

/// Replays an SD or SPD failure witness, pumping its cycle `n` times for each `n` in `pumps`.
/// Returns the ambiguous estimates found, or a description of the first check that failed.
pub fn replay_witness(engine: &Engine, witness: &Witness, pumps: &[usize]) -> Result<Replay, String> {
    let p = engine.p;
    let est = |gamma: &[LabeledPoint]| estimate_chain(engine, gamma).map(|r| r.0).map_err(|e| e.to_string());
    let mut points = Vec::new();
    match witness {
        Witness::AmbiguousCycle { stem, cycle, tail, to_cycle, automaton_cycle } => {
            for &n in pumps {
                let side = |left: bool| -> Vec<usize> {
                    let pick = |s: &crate::verdict::PairStep| transitions(if left { &s.left } else { &s.right });
                    let mut v: Vec<usize> = stem.iter().flat_map(pick).collect();
                    for _ in 0..n {
                        v.extend(cycle.iter().flat_map(pick));
                    }
                    v.extend(tail.iter().flat_map(pick));
                    v
                };
                let (l, r) = (side(true), side(false));
                let gamma = word(p, &l);
                if gamma.len() < 2 {
                    return Err(format!("pump {n}: fewer than two observations"));
                }
                if !explains(p, &l, &gamma) || !explains(p, &r, &gamma) {
                    return Err(format!("pump {n}: the two runs do not share their observations"));
                }
                let (le, re) = (end_of(p, &l, 0), end_of(p, &r, 0));
                let x = est(&gamma)?;
                if le == re || !x.contains(&le) || !x.contains(&re) {
                    return Err(format!("pump {n}: estimate {:?} does not separate the runs", p.names(&x)));
                }
                let to = transitions(to_cycle);
                let cyc = transitions(automaton_cycle);
                let anchor = to.last().map_or(le, |&t| p.arcs[t].target);
                if !is_path_from(p, le, &to)
                    || cyc.is_empty()
                    || !is_path_from(p, anchor, &cyc)
                    || end_of(p, &cyc, anchor) != anchor
                {
                    return Err(format!("pump {n}: the left run does not continue into a cycle"));
                }
                points.push((gamma, x));
            }
        }
        Witness::SilentDivergence { observations, estimate, state, to_cycle, cycle } => {
            let gamma = accumulate(p, observations).ok_or("unknown label in witness")?;
            let x = est(&gamma)?;
            let claimed = p.state_set(estimate).ok_or("unknown state in witness")?;
            let q = p.model.state_index(state).ok_or("unknown state in witness")?;
            if x.len() < 2 || !claimed.is_subset(&x) || !x.contains(&q) {
                return Err(format!("estimate {:?} is not ambiguous at {state}", p.names(&x)));
            }
            let (to, cyc) = (transitions(to_cycle), transitions(cycle));
            let anchor = to.last().map_or(q, |&t| p.arcs[t].target);
            let silent = to.iter().chain(&cyc).all(|&t| !p.observable(t));
            if !silent
                || !is_path_from(p, q, &to)
                || cyc.is_empty()
                || !is_path_from(p, anchor, &cyc)
                || end_of(p, &cyc, anchor) != anchor
            {
                return Err("the divergence is not an unobservable cycle".into());
            }
            points.push((gamma, x));
        }
        Witness::PairCycle { stem, cycle } => {
            for &n in pumps {
                let mut obs: Vec<ObsStep> = stem.clone();
                for _ in 0..n {
                    obs.extend(cycle.iter().cloned());
                }
                let gamma = accumulate(p, &obs).ok_or("unknown label in witness")?;
                for i in stem.len()..=gamma.len() {
                    let x = est(&gamma[..i])?;
                    let claimed = if i == 0 {
                        p.initial_estimate()
                    } else {
                        p.state_set(&obs[i - 1].to).ok_or("unknown state")?
                    };
                    if x.len() < 2 || !claimed.is_subset(&x) {
                        return Err(format!(
                            "pump {n}: estimate {:?} after {i} observations is not ambiguous",
                            p.names(&x)
                        ));
                    }
                    if i == gamma.len() {
                        points.push((gamma.clone(), x));
                    }
                }
            }
        }
        other => return Err(format!("no replay for witness {other:?}")),
    }
    Ok(Replay { points })
}

/// States of `x` as a sorted set of names, for messages.
pub fn state_names(p: &Prepared, x: &StateSet) -> BTreeSet<String> {
    x.iter().map(|&q| p.model.states[q].clone()).collect()
}
