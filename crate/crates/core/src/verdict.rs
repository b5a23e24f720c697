use std::fmt;

use serde::{Deserialize, Serialize};

use crate::prepared::{Prepared, StateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "SD")]
    Sd,
    #[serde(rename = "SPD")]
    Spd,
    #[serde(rename = "WD")]
    Wd,
    #[serde(rename = "WPD")]
    Wpd,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Sd, Property::Spd, Property::Wd, Property::Wpd];

    pub fn parse(s: &str) -> Option<Property> {
        match s.to_ascii_lowercase().as_str() {
            "sd" => Some(Property::Sd),
            "spd" => Some(Property::Spd),
            "wd" => Some(Property::Wd),
            "wpd" => Some(Property::Wpd),
            _ => None,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Sd => "SD",
            Property::Spd => "SPD",
            Property::Wd => "WD",
            Property::Wpd => "WPD",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Holds => 0,
            Status::Fails => 1,
            Status::Unknown => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Unknown => "UNKNOWN",
        })
    }
}

/// One transition of the (normalized, scaled) automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub transition: usize,
    pub from: String,
    pub event: String,
    pub to: String,
    pub weight: Vec<i64>,
}

/// One transition of the self-composition with the two underlying paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStep {
    pub from: [String; 2],
    pub events: [String; 2],
    pub to: [String; 2],
    pub left: Vec<Step>,
    pub right: Vec<Step>,
}

/// One transition of an observer or detector; `delta` is the weight of this step alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsStep {
    pub from: Vec<String>,
    pub label: String,
    pub delta: Vec<i64>,
    pub to: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Two runs with equal observations that stay apart after an observable cycle, continuing
    /// into a cycle of the automaton.
    AmbiguousCycle {
        stem: Vec<PairStep>,
        cycle: Vec<PairStep>,
        tail: Vec<PairStep>,
        to_cycle: Vec<Step>,
        automaton_cycle: Vec<Step>,
    },
    /// A non-singleton estimate containing a state that can go silent forever.
    SilentDivergence {
        observations: Vec<ObsStep>,
        estimate: Vec<String>,
        state: String,
        to_cycle: Vec<Step>,
        cycle: Vec<Step>,
    },
    /// A detector cycle whose states all have two elements.
    PairCycle { stem: Vec<ObsStep>, cycle: Vec<ObsStep> },
    /// The automaton has no infinite path.
    NoInfinitePath,
    /// A reachable cycle of unobservable transitions.
    UnobservableCycle { path: Vec<Step>, cycle: Vec<Step> },
    /// A singleton estimate containing a state that can go silent forever.
    SingletonDivergence { observations: Vec<ObsStep>, state: String, to_cycle: Vec<Step>, cycle: Vec<Step> },
    /// An observer cycle of the required shape.
    SingletonCycle { stem: Vec<ObsStep>, cycle: Vec<ObsStep> },
    /// No condition holds; summary of the structure searched.
    Exhausted { observer_states: usize, observer_transitions: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: Property,
    pub status: Status,
    pub witness: Option<Witness>,
    /// Tags of the characterizing conditions found to hold.
    #[serde(default)]
    pub conditions: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(property: Property, status: Status) -> Self {
        Verdict { property, status, witness: None, conditions: Vec::new(), notes: Vec::new() }
    }
}

pub fn step(p: &Prepared, t: usize) -> Step {
    let a = &p.arcs[t];
    Step {
        transition: t,
        from: p.model.states[a.source].clone(),
        event: p.model.events[a.event].name.clone(),
        to: p.model.states[a.target].clone(),
        weight: a.weight.clone(),
    }
}

pub fn steps(p: &Prepared, path: &[usize]) -> Vec<Step> {
    path.iter().map(|&t| step(p, t)).collect()
}

pub(crate) fn obs_step(p: &Prepared, from: &StateSet, label: usize, delta: &[i64], to: &StateSet) -> ObsStep {
    ObsStep { from: p.names(from), label: p.labels[label].clone(), delta: delta.to_vec(), to: p.names(to) }
}
