//! Verdicts for the four detectability properties.

use crate::estimator::{build_detector, build_observer, EstimatorAutomaton};
use crate::graph;
use crate::model::WeightedAutomaton;
use crate::prepared::{Engine, Prepared};
use crate::selfcomp::{check_sd_on, SelfComposition};
use crate::verdict::{obs_step, steps, ObsStep, Property, Status, Verdict, Witness};

fn unknown(property: Property, note: impl ToString) -> Verdict {
    let mut v = Verdict::new(property, Status::Unknown);
    v.notes.push(note.to_string());
    v
}

fn obs_path(p: &Prepared, est: &EstimatorAutomaton, path: &[usize]) -> Vec<ObsStep> {
    path.iter()
        .map(|&t| {
            let tr = &est.transitions[t];
            obs_step(p, &est.states[tr.source], tr.label, &tr.witness, &est.states[tr.target])
        })
        .collect()
}

/// A reachable estimator state with more than one element that contains a state able to go
/// silent forever.
fn silent_divergence(p: &Prepared, est: &EstimatorAutomaton) -> Option<Witness> {
    let g = est.edge_graph();
    for (i, x) in est.states.iter().enumerate() {
        if x.len() < 2 {
            continue;
        }
        if let Some(&q) = x.iter().find(|&&q| p.reaches_unobs_cycle[q]) {
            let path = g.path_to(&[est.initial], |s| s == i, |_| true)?;
            let (to_cycle, cycle) = p.unobs_cycle_from(q)?;
            return Some(Witness::SilentDivergence {
                observations: obs_path(p, est, &path),
                estimate: p.names(x),
                state: p.model.states[q].clone(),
                to_cycle: steps(p, &to_cycle),
                cycle: steps(p, &cycle),
            });
        }
    }
    None
}

/// A cycle all of whose states satisfy `keep`, with a stem from the initial state.
fn cycle_within(est: &EstimatorAutomaton, keep: impl Fn(usize) -> bool) -> Option<(Vec<usize>, Vec<usize>)> {
    let g = est.edge_graph();
    let allowed = |e: usize| {
        let (a, b) = g.edges[e];
        keep(a) && keep(b)
    };
    let cyclic = graph::cyclic_vertices(&g.adjacency(allowed));
    let s = (0..est.states.len()).find(|&s| cyclic[s])?;
    let stem = g.path_to(&[est.initial], |v| v == s, |_| true)?;
    let cycle = g.cycle_through(s, allowed)?;
    Some((stem, cycle))
}

pub fn check_spd(p: &Prepared, det: &EstimatorAutomaton) -> Verdict {
    if !det.exact {
        return unknown(Property::Spd, "detector weights were enumerated only up to a bound");
    }
    let mut v = Verdict::new(Property::Spd, Status::Holds);
    if let Some(w) = silent_divergence(p, det) {
        v.status = Status::Fails;
        v.conditions.push("silent_divergence".into());
        v.witness = Some(w);
    }
    if let Some((stem, cycle)) = cycle_within(det, |s| det.states[s].len() == 2) {
        v.status = Status::Fails;
        v.conditions.push("pair_cycle".into());
        if v.witness.is_none() {
            v.witness = Some(Witness::PairCycle { stem: obs_path(p, det, &stem), cycle: obs_path(p, det, &cycle) });
        }
    }
    v
}

/// The same property evaluated on the observer.
pub fn check_spd_observer(p: &Prepared, obs: &EstimatorAutomaton) -> Status {
    if !obs.exact {
        return Status::Unknown;
    }
    let diverges = silent_divergence(p, obs).is_some();
    let cycle = cycle_within(obs, |s| obs.states[s].len() >= 2).is_some();
    if diverges || cycle {
        Status::Fails
    } else {
        Status::Holds
    }
}

fn no_infinite_path(p: &Prepared) -> bool {
    !p.initial.iter().any(|&q| p.reaches_cycle[q])
}

fn reachable_unobs_cycle(p: &Prepared) -> Option<Witness> {
    let q = p.reachable.iter().copied().find(|&q| p.reaches_unobs_cycle[q])?;
    let mut path = p.path_from_initial(q)?;
    let (to_cycle, cycle) = p.unobs_cycle_from(q)?;
    path.extend(to_cycle);
    Some(Witness::UnobservableCycle { path: steps(p, &path), cycle: steps(p, &cycle) })
}

pub fn check_wd(p: &Prepared, obs: &EstimatorAutomaton) -> Verdict {
    let mut v = Verdict::new(Property::Wd, Status::Fails);
    if no_infinite_path(p) {
        v.conditions.push("no_infinite_path".into());
        v.witness = Some(Witness::NoInfinitePath);
    }
    if let Some(w) = reachable_unobs_cycle(p) {
        v.conditions.push("unobservable_cycle".into());
        v.witness.get_or_insert(w);
    }
    if obs.exact {
        if let Some((stem, cycle)) = cycle_within(obs, |s| obs.states[s].len() == 1) {
            v.conditions.push("singleton_cycle".into());
            v.witness.get_or_insert(Witness::SingletonCycle {
                stem: obs_path(p, obs, &stem),
                cycle: obs_path(p, obs, &cycle),
            });
        }
    }
    finish(v, obs)
}

fn finish(mut v: Verdict, obs: &EstimatorAutomaton) -> Verdict {
    if !v.conditions.is_empty() {
        v.status = Status::Holds;
    } else if !obs.exact {
        v.status = Status::Unknown;
        v.notes.push("observer weights were enumerated only up to a bound".into());
    } else {
        v.witness =
            Some(Witness::Exhausted { observer_states: obs.states.len(), observer_transitions: obs.transitions.len() });
    }
    v
}

pub fn check_wpd(p: &Prepared, obs: &EstimatorAutomaton) -> Verdict {
    let mut v = Verdict::new(Property::Wpd, Status::Fails);
    if no_infinite_path(p) {
        v.conditions.push("no_infinite_path".into());
        v.witness = Some(Witness::NoInfinitePath);
    }
    if obs.exact {
        let g = obs.edge_graph();
        let singleton_divergence = obs.states.iter().enumerate().find_map(|(i, x)| {
            let q = *x.iter().next()?;
            (x.len() == 1 && p.reaches_unobs_cycle[q]).then_some((i, q))
        });
        if let Some((i, q)) = singleton_divergence {
            let path = g.path_to(&[obs.initial], |s| s == i, |_| true).expect("reachable");
            let (to_cycle, cycle) = p.unobs_cycle_from(q).expect("cycle reachable");
            v.conditions.push("singleton_divergence".into());
            v.witness.get_or_insert(Witness::SingletonDivergence {
                observations: obs_path(p, obs, &path),
                state: p.model.states[q].clone(),
                to_cycle: steps(p, &to_cycle),
                cycle: steps(p, &cycle),
            });
        }
        let cyclic = graph::cyclic_vertices(&g.adjacency(|_| true));
        if let Some(s) = (0..obs.states.len()).find(|&s| cyclic[s] && obs.states[s].len() == 1) {
            let stem = g.path_to(&[obs.initial], |v| v == s, |_| true).expect("reachable");
            let cycle = g.cycle_through(s, |_| true).expect("on a cycle");
            v.conditions.push("cycle_with_singleton".into());
            v.witness.get_or_insert(Witness::SingletonCycle {
                stem: obs_path(p, obs, &stem),
                cycle: obs_path(p, obs, &cycle),
            });
        }
    }
    finish(v, obs)
}

type Built = Result<EstimatorAutomaton, crate::epl::EplError>;

/// Detector-based verdict, downgraded to UNKNOWN when the observer-based evaluation disagrees.
fn spd_both(p: &Prepared, det: &Built, obs: &Built) -> Verdict {
    match (det, obs) {
        (Ok(det), Ok(obs)) => {
            let mut v = check_spd(p, det);
            let other = check_spd_observer(p, obs);
            if other != v.status {
                v.notes.push(format!("observer-based evaluation gives {other}"));
                v.status = Status::Unknown;
            }
            v
        }
        (Err(e), _) | (_, Err(e)) => unknown(Property::Spd, e),
    }
}

/// All four verdicts for one automaton, sharing the constructed structures.
pub struct Checker<'a> {
    pub p: &'a Prepared,
    engine: Engine<'a>,
}

impl<'a> Checker<'a> {
    pub fn new(p: &'a Prepared) -> Self {
        Checker { p, engine: Engine::new(p) }
    }

    pub fn engine(&self) -> &Engine<'a> {
        &self.engine
    }

    pub fn self_composition(&self) -> Result<SelfComposition, crate::epl::EplError> {
        SelfComposition::build_with(&self.engine)
    }

    pub fn observer(&self) -> Result<EstimatorAutomaton, crate::epl::EplError> {
        build_observer(&self.engine)
    }

    pub fn detector(&self) -> Result<EstimatorAutomaton, crate::epl::EplError> {
        build_detector(&self.engine)
    }

    pub fn check(&self, property: Property) -> Verdict {
        match property {
            Property::Sd => match self.self_composition() {
                Ok(cc) => check_sd_on(self.p, &cc),
                Err(e) => unknown(property, e),
            },
            Property::Spd => spd_both(self.p, &self.detector(), &self.observer()),
            Property::Wd => match self.observer() {
                Ok(obs) => check_wd(self.p, &obs),
                Err(e) => unknown(property, e),
            },
            Property::Wpd => match self.observer() {
                Ok(obs) => check_wpd(self.p, &obs),
                Err(e) => unknown(property, e),
            },
        }
    }

    pub fn check_all(&self) -> Vec<Verdict> {
        let obs = self.observer();
        let det = self.detector();
        let mut out = vec![self.check(Property::Sd)];
        out.push(spd_both(self.p, &det, &obs));
        match &obs {
            Ok(obs) => {
                out.push(check_wd(self.p, obs));
                out.push(check_wpd(self.p, obs));
            }
            Err(e) => {
                out.push(unknown(Property::Wd, e));
                out.push(unknown(Property::Wpd, e));
            }
        }
        out
    }
}

pub fn check_all(a: &WeightedAutomaton) -> Vec<Verdict> {
    let p = Prepared::new(a);
    Checker::new(&p).check_all()
}

/// `check all` style aggregation: any failure, else any unknown, else success.
pub fn aggregate_exit_code(verdicts: &[Verdict]) -> i32 {
    if verdicts.iter().any(|v| v.status == Status::Fails) {
        1
    } else if verdicts.iter().any(|v| v.status == Status::Unknown) {
        2
    } else {
        0
    }
}
