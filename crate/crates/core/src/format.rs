//! JSON document format for automata and the textual observation syntax.

use serde::{Deserialize, Serialize};

use crate::model::{validate, Rational, ValidationError, WeightVector, WeightedAutomaton};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDocument {
    pub format_version: u32,
    pub k: usize,
    pub states: Vec<String>,
    pub initial: Vec<InitialEntry>,
    pub events: Vec<EventEntry>,
    pub transitions: Vec<TransitionEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialEntry {
    pub state: String,
    pub weight: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventEntry {
    pub name: String,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub from: String,
    pub event: String,
    pub to: String,
    pub weight: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("bad observation sequence: {0}")]
    Observation(String),
}

/// Parses `p`, `-p`, `p/q` with q > 0. Decimal notation is rejected.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let digits = |s: &str| {
        let s = s.strip_prefix(['-', '+']).unwrap_or(s);
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(num) || !den.bytes().all(|b| b.is_ascii_digit()) || den.is_empty() {
        return None;
    }
    let n: i64 = num.parse().ok()?;
    let d: i64 = den.parse().ok()?;
    (d != 0).then(|| Rational::new(n, d))
}

pub fn parse_document(text: &str) -> Result<AutomatonDocument, InputError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse(text: &str) -> Result<WeightedAutomaton, InputError> {
    Ok(validate(&parse_document(text)?)?)
}

pub fn serialize(a: &WeightedAutomaton) -> String {
    let mut s = serde_json::to_string_pretty(&a.to_document()).expect("document serializes");
    s.push('\n');
    s
}

/// One observed output: a label and the accumulated weight at which it was seen.
pub type Observation = (String, WeightVector);

/// Parses `(a,1);(b,5/2)` or, for k > 1, `(a,[1,0]);(b,[0,1])`. The empty string is the
/// empty sequence.
pub fn parse_observations(text: &str, k: usize) -> Result<Vec<Observation>, InputError> {
    let err = |m: String| InputError::Observation(m);
    let mut out = Vec::new();
    for (i, item) in text.split(';').enumerate() {
        let item = item.trim();
        if item.is_empty() {
            if text.trim().is_empty() {
                continue;
            }
            return Err(err(format!("item {i} is empty")));
        }
        let inner = item
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| err(format!("item {i} `{item}` is not of the form (label,weight)")))?;
        let (label, value) = inner.split_once(',').ok_or_else(|| err(format!("item {i} `{item}` has no weight")))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(err(format!("item {i} has an empty label")));
        }
        let value = value.trim();
        let parts: Vec<&str> = match value.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            Some(list) => list.split(',').map(str::trim).collect(),
            None => vec![value],
        };
        if parts.len() != k {
            return Err(err(format!("item {i} has {} weight entries, expected {k}", parts.len())));
        }
        let w = parts
            .iter()
            .map(|p| parse_rational(p).ok_or_else(|| err(format!("item {i}: `{p}` is not a rational number"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push((label.to_string(), WeightVector(w)));
    }
    Ok(out)
}
