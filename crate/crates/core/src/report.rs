//! JSON reports and Graphviz DOT renderings of the constructed structures.
//!
//! Weights in reports are in scaled integer units: a reported weight `w` stands for `w / scale`
//! in the units of the input automaton.

use std::fmt::Write;

use serde::Serialize;

use crate::estimator::{EstimatorAutomaton, Kind, LabelCell};
use crate::model::{rational_to_string, WeightedAutomaton};
use crate::prepared::Prepared;
use crate::selfcomp::SelfComposition;
use crate::verdict::{steps, Step, Verdict};

/// Version of the JSON output layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct SelfCompositionReport {
    pub schema_version: u32,
    pub scale: i64,
    pub states: Vec<[String; 2]>,
    pub initial: Vec<usize>,
    pub transitions: Vec<PairTransitionReport>,
    /// Event pairs whose synchronization the solver could not decide.
    pub undecided: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairTransitionReport {
    pub from: usize,
    pub events: [String; 2],
    pub label: String,
    pub to: usize,
    pub left: Vec<Step>,
    pub right: Vec<Step>,
}

pub fn self_composition_report(p: &Prepared, cc: &SelfComposition) -> SelfCompositionReport {
    let name = |q: usize| p.model.states[q].clone();
    SelfCompositionReport {
        schema_version: SCHEMA_VERSION,
        scale: p.scale,
        states: cc.states.iter().map(|&(a, b)| [name(a), name(b)]).collect(),
        initial: cc.initial.clone(),
        transitions: cc
            .transitions
            .iter()
            .map(|t| PairTransitionReport {
                from: t.source,
                events: [p.model.events[t.events.0].name.clone(), p.model.events[t.events.1].name.clone()],
                label: p.labels[t.label].clone(),
                to: t.target,
                left: steps(p, &t.left),
                right: steps(p, &t.right),
            })
            .collect(),
        undecided: cc.possibly_missing.len(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimatorReport {
    pub schema_version: u32,
    pub kind: Kind,
    pub scale: i64,
    /// False when some weights were enumerated only up to a bound.
    pub exact: bool,
    pub states: Vec<Vec<String>>,
    pub initial: usize,
    pub transitions: Vec<EstimatorTransitionReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimatorTransitionReport {
    pub from: usize,
    pub label: String,
    pub witness: Vec<i64>,
    /// Every step weight taking this transition.
    pub cell: LabelCell,
    pub cell_text: String,
    pub to: usize,
}

pub fn cell_text(cell: &LabelCell) -> String {
    match cell {
        LabelCell::Scalar(s) => s.to_string(),
        LabelCell::Vectors(v) => {
            let items: Vec<String> = v.iter().map(|w| format!("{w:?}")).collect();
            format!("{{{}}}", items.join(", "))
        }
    }
}

pub fn estimator_report(p: &Prepared, est: &EstimatorAutomaton) -> EstimatorReport {
    EstimatorReport {
        schema_version: SCHEMA_VERSION,
        kind: est.kind,
        scale: p.scale,
        exact: est.exact,
        states: est.states.iter().map(|x| p.names(x)).collect(),
        initial: est.initial,
        transitions: est
            .transitions
            .iter()
            .map(|t| EstimatorTransitionReport {
                from: t.source,
                label: p.labels[t.label].clone(),
                witness: t.witness.clone(),
                cell: t.cell.clone(),
                cell_text: cell_text(&t.cell),
                to: t.target,
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub schema_version: u32,
    pub scale: i64,
    pub verdicts: Vec<Verdict>,
}

pub fn verdict_report(p: &Prepared, verdicts: Vec<Verdict>) -> VerdictReport {
    VerdictReport { schema_version: SCHEMA_VERSION, scale: p.scale, verdicts }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn weight_text(w: &[i64]) -> String {
    match w {
        [x] => x.to_string(),
        _ => format!("{w:?}"),
    }
}

/// The automaton as given, with rational weights.
pub fn automaton_dot(a: &WeightedAutomaton) -> String {
    let mut s = String::from("digraph automaton {\n  rankdir=LR;\n");
    for (i, q) in a.states.iter().enumerate() {
        let initial = a.initial.iter().any(|(x, _)| *x == i);
        let _ = writeln!(s, "  {} [shape={}];", quote(q), if initial { "doublecircle" } else { "circle" });
    }
    for (q, w) in &a.initial {
        let _ = writeln!(s, "  {} [shape=point];", quote(&format!("__init_{}", a.states[*q])));
        let ws: Vec<String> = w.0.iter().map(rational_to_string).collect();
        let _ = writeln!(
            s,
            "  {} -> {} [label={}];",
            quote(&format!("__init_{}", a.states[*q])),
            quote(&a.states[*q]),
            quote(&ws.join(","))
        );
    }
    for t in &a.transitions {
        let e = &a.events[t.event];
        let ws: Vec<String> = t.weight.0.iter().map(rational_to_string).collect();
        let label = match &e.label {
            Some(l) => format!("{}:{}/{}", e.name, l, ws.join(",")),
            None => format!("{}/{}", e.name, ws.join(",")),
        };
        let style = if e.label.is_none() { ", style=dashed" } else { "" };
        let _ = writeln!(
            s,
            "  {} -> {} [label={}{}];",
            quote(&a.states[t.source]),
            quote(&a.states[t.target]),
            quote(&label),
            style
        );
    }
    s.push_str("}\n");
    s
}

pub fn self_composition_dot(p: &Prepared, cc: &SelfComposition) -> String {
    let name = |i: usize| {
        let (a, b) = cc.states[i];
        format!("({},{})", p.model.states[a], p.model.states[b])
    };
    let mut s = String::from("digraph self_composition {\n  rankdir=LR;\n");
    for i in 0..cc.states.len() {
        let shape = if cc.initial.contains(&i) { "doublebox" } else { "box" };
        let _ = writeln!(s, "  {} [shape={shape}];", quote(&name(i)));
    }
    for t in &cc.transitions {
        let label = format!("({},{})", p.model.events[t.events.0].name, p.model.events[t.events.1].name);
        let _ = writeln!(s, "  {} -> {} [label={}];", quote(&name(t.source)), quote(&name(t.target)), quote(&label));
    }
    s.push_str("}\n");
    s
}

pub fn estimator_dot(p: &Prepared, est: &EstimatorAutomaton) -> String {
    let name = |i: usize| format!("{{{}}}", p.names(&est.states[i]).join(","));
    let title = match est.kind {
        Kind::Observer => "observer",
        Kind::Detector => "detector",
    };
    let mut s = format!("digraph {title} {{\n  rankdir=LR;\n");
    for i in 0..est.states.len() {
        let shape = if i == est.initial { "doublebox" } else { "box" };
        let _ = writeln!(s, "  {} [shape={shape}];", quote(&name(i)));
    }
    for t in &est.transitions {
        let label = format!("({},{}) {}", p.labels[t.label], weight_text(&t.witness), cell_text(&t.cell));
        let _ = writeln!(s, "  {} -> {} [label={}];", quote(&name(t.source)), quote(&name(t.target)), quote(&label));
    }
    s.push_str("}\n");
    s
}
