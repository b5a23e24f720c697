//! Shipped example automata, the subset-sum family, and seeded random automata.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::{parse, AutomatonDocument, EventEntry, InitialEntry, TransitionEntry};
use crate::model::{validate, WeightedAutomaton, FORMAT_VERSION};
use crate::verdict::{Property, Status};

/// Incremental construction of small automata from names and integer weights.
pub struct Builder {
    doc: AutomatonDocument,
}

impl Builder {
    pub fn new(k: usize) -> Self {
        Builder {
            doc: AutomatonDocument {
                format_version: FORMAT_VERSION,
                k,
                states: Vec::new(),
                initial: Vec::new(),
                events: Vec::new(),
                transitions: Vec::new(),
            },
        }
    }

    pub fn state(&mut self, name: &str) -> &mut Self {
        self.doc.states.push(name.to_string());
        self
    }

    pub fn states<'s>(&mut self, names: impl IntoIterator<Item = &'s str>) -> &mut Self {
        for n in names {
            self.state(n);
        }
        self
    }

    pub fn event(&mut self, name: &str, label: Option<&str>) -> &mut Self {
        self.doc.events.push(EventEntry { name: name.to_string(), label: label.map(str::to_string) });
        self
    }

    pub fn initial(&mut self, state: &str, weight: &[i64]) -> &mut Self {
        self.doc
            .initial
            .push(InitialEntry { state: state.to_string(), weight: weight.iter().map(|x| x.to_string()).collect() });
        self
    }

    pub fn transition(&mut self, from: &str, event: &str, to: &str, weight: &[i64]) -> &mut Self {
        self.doc.transitions.push(TransitionEntry {
            from: from.to_string(),
            event: event.to_string(),
            to: to.to_string(),
            weight: weight.iter().map(|x| x.to_string()).collect(),
        });
        self
    }

    pub fn build(&self) -> WeightedAutomaton {
        validate(&self.doc).expect("builder input is valid")
    }
}

/// Five states, two equally labeled events and one silent self-looping event; two runs reach
/// the same state under `ab`.
pub fn a1_automaton() -> WeightedAutomaton {
    let mut b = Builder::new(1);
    b.states(["q0", "q1", "q2", "q3", "q4"])
        .event("a", Some("ρ"))
        .event("b", Some("ρ"))
        .event("u", None)
        .initial("q0", &[0])
        .transition("q0", "a", "q1", &[1])
        .transition("q0", "a", "q2", &[1])
        .transition("q1", "u", "q1", &[1])
        .transition("q2", "u", "q2", &[1])
        .transition("q1", "b", "q3", &[2])
        .transition("q2", "b", "q3", &[1])
        .transition("q3", "u", "q4", &[1])
        .transition("q4", "a", "q4", &[1]);
    b.build()
}

/// Silent branching with a silent self-loop; not divergence free.
pub fn a0_automaton() -> WeightedAutomaton {
    let mut b = Builder::new(1);
    b.states(["q0", "q1", "q2", "q3", "q4"])
        .event("u", None)
        .event("a", Some("a"))
        .initial("q0", &[0])
        .transition("q0", "u", "q1", &[10])
        .transition("q0", "u", "q2", &[1])
        .transition("q2", "u", "q2", &[1])
        .transition("q1", "a", "q3", &[1])
        .transition("q2", "a", "q4", &[1])
        .transition("q3", "a", "q3", &[1])
        .transition("q4", "a", "q4", &[1]);
    b.build()
}

fn unit(k: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; k];
    v[i] = 1;
    v
}

fn diff(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A robot on an energy scale 0..=10 moving between four positions; positions are the unit
/// vectors of Z^4 and each move's weight is the change of position.
pub fn robot_automaton() -> WeightedAutomaton {
    let name = |i: i64, j: usize| format!("({i},P{j})");
    let p = |j: usize| unit(4, j - 1);
    let mut b = Builder::new(4);
    for i in 0..=10 {
        for j in 1..=4 {
            b.state(&name(i, j));
        }
    }
    b.event("a", Some("a")).event("b", Some("b")).event("u", None);
    b.initial(&name(5, 1), &p(1));
    for i in 1..=10 {
        for k in [1, 3] {
            b.transition(&name(i, k), "a", &name(i - 1, k + 1), &diff(&p(k + 1), &p(k)));
        }
        b.transition(&name(i, 2), "u", &name(i - 1, 3), &diff(&p(3), &p(2)));
        b.transition(&name(i, 2), "u", &name(i, 3), &diff(&p(3), &p(2)));
    }
    for l in 2..=4 {
        for j in 0..=9 {
            b.transition(&name(j, l), "b", &name(j + 1, l - 1), &diff(&p(l - 1), &p(l)));
        }
        b.transition(&name(10, l), "b", &name(10, l - 1), &diff(&p(l - 1), &p(l)));
    }
    b.build()
}

/// The reduction automaton of a subset-sum instance: silent chains that either add `n_i` or
/// nothing, then an observable event whose weight can match `target + 1` along the other branch
/// exactly when some subset sums to `target`.
pub fn subset_sum_automaton(n: &[u64], target: u64) -> WeightedAutomaton {
    assert!(!n.is_empty() && n.iter().all(|&x| x >= 1) && target >= 1);
    let m = n.len();
    let q = |i: usize| format!("q{i}");
    let s1 = format!("q{}_1", m + 1);
    let s2 = format!("q{}_2", m + 1);
    let mut b = Builder::new(1);
    for i in 0..=m {
        b.state(&q(i));
    }
    b.state(&s1).state(&s2);
    b.event("u1", None).event("u2", None).event("e", Some("e"));
    b.initial(&q(0), &[0]);
    for (i, &ni) in n.iter().enumerate() {
        b.transition(&q(i), "u1", &q(i + 1), &[ni as i64]);
        b.transition(&q(i), "u2", &q(i + 1), &[0]);
    }
    b.transition(&q(m), "e", &s1, &[1]);
    b.transition(&q(0), "e", &s2, &[target as i64 + 1]);
    b.transition(&s1, "e", &s1, &[1]);
    b.transition(&s2, "e", &s2, &[1]);
    b.build()
}

/// Brute-force subset-sum decision.
pub fn subset_sum_solvable(n: &[u64], target: u64) -> bool {
    let mut reach = vec![false; target as usize + 1];
    reach[0] = true;
    for &x in n {
        for s in (x as usize..=target as usize).rev() {
            reach[s] |= reach[s - x as usize];
        }
    }
    reach[target as usize]
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomBounds {
    pub max_states: usize,
    pub max_events: usize,
    pub weight_min: i64,
    pub weight_max: i64,
    pub k: usize,
    pub unobservable_fraction: f64,
    /// Probability of each possible (source, event, target) transition.
    pub density: f64,
    pub labels: usize,
    /// Probability that a state other than the first is initial.
    pub extra_initial: f64,
    /// Probability that an initial weight is drawn nonzero.
    pub nonzero_initial: f64,
}

impl Default for RandomBounds {
    fn default() -> Self {
        RandomBounds {
            max_states: 5,
            max_events: 3,
            weight_min: -2,
            weight_max: 2,
            k: 1,
            unobservable_fraction: 0.3,
            density: 0.2,
            labels: 2,
            extra_initial: 0.2,
            nonzero_initial: 0.2,
        }
    }
}

pub fn random_automaton(seed: u64, bounds: &RandomBounds) -> WeightedAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=bounds.max_states);
    let m = rng.gen_range(1..=bounds.max_events);
    let mut b = Builder::new(bounds.k);
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    for s in &names {
        b.state(s);
    }
    let weight = |rng: &mut ChaCha8Rng| -> Vec<i64> {
        (0..bounds.k).map(|_| rng.gen_range(bounds.weight_min..=bounds.weight_max)).collect()
    };
    for e in 0..m {
        let label = if rng.gen_bool(bounds.unobservable_fraction) {
            None
        } else {
            Some(((b'a' + rng.gen_range(0..bounds.labels) as u8) as char).to_string())
        };
        b.event(&format!("e{e}"), label.as_deref());
    }
    for (i, s) in names.iter().enumerate() {
        if i == 0 || rng.gen_bool(bounds.extra_initial) {
            let w = if rng.gen_bool(bounds.nonzero_initial) { weight(&mut rng) } else { vec![0; bounds.k] };
            b.initial(s, &w);
        }
    }
    for src in &names {
        for e in 0..m {
            for dst in &names {
                if rng.gen_bool(bounds.density) {
                    let w = weight(&mut rng);
                    b.transition(src, &format!("e{e}"), dst, &w);
                }
            }
        }
    }
    b.build()
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub automaton: WeightedAutomaton,
    pub expected: BTreeMap<Property, Status>,
    pub provenance: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("unknown fixture `{0}` (known: A0, A1, robot)")]
    UnknownFixture(String),
}

pub const FIXTURE_NAMES: [&str; 3] = ["A0", "A1", "robot"];

pub fn fixture_text(name: &str) -> Option<&'static str> {
    match name {
        "A0" => Some(include_str!("../fixtures/A0.json")),
        "A1" => Some(include_str!("../fixtures/A1.json")),
        "robot" => Some(include_str!("../fixtures/robot.json")),
        _ => None,
    }
}

pub fn load_fixture(name: &str) -> Result<Fixture, CorpusError> {
    use Property::*;
    use Status::*;
    let text = fixture_text(name).ok_or_else(|| CorpusError::UnknownFixture(name.to_string()))?;
    let automaton = parse(text).expect("shipped fixtures are valid");
    let (expected, provenance): (Vec<(Property, Status)>, &str) = match name {
        "A1" => (
            vec![(Sd, Holds), (Spd, Fails), (Wd, Holds), (Wpd, Holds)],
            "ambiguous automaton: two runs reach q3 under ab",
        ),
        "A0" => (
            vec![(Sd, Fails), (Spd, Fails), (Wd, Holds), (Wpd, Holds)],
            "silent branching with a silent self-loop on q2",
        ),
        _ => (vec![(Sd, Fails), (Wd, Holds)], "robot with energy levels over four positions, weights in Z^4"),
    };
    Ok(Fixture {
        name: name.to_string(),
        automaton,
        expected: expected.into_iter().collect(),
        provenance: provenance.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize;

    #[test]
    fn fixtures_match_builders() {
        for (name, built) in [("A0", a0_automaton()), ("A1", a1_automaton()), ("robot", robot_automaton())] {
            assert_eq!(load_fixture(name).unwrap().automaton, built, "{name}");
            assert_eq!(fixture_text(name).unwrap(), serialize(&built), "{name}");
        }
        assert!(load_fixture("nope").is_err());
    }

    #[test]
    fn subset_sum_shape() {
        let a = subset_sum_automaton(&[2, 3], 5);
        assert_eq!(a.states.len(), 5);
        assert_eq!(a.transitions.len(), 8);
        assert!(subset_sum_solvable(&[2, 3], 5));
        assert!(!subset_sum_solvable(&[2, 4], 5));
    }

    #[test]
    fn random_is_reproducible() {
        let b = RandomBounds::default();
        assert_eq!(random_automaton(7, &b), random_automaton(7, &b));
        let z = RandomBounds { weight_min: 0, weight_max: 0, unobservable_fraction: 0.0, ..b };
        let a = random_automaton(3, &z);
        assert!(a.transitions.iter().all(|t| t.weight.is_zero()));
        assert!(a.events.iter().all(|e| e.label.is_some()));
    }

    #[test]
    #[ignore]
    fn write_fixture_files() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
        for (name, a) in [("A0", a0_automaton()), ("A1", a1_automaton()), ("robot", robot_automaton())] {
            std::fs::write(format!("{dir}/{name}.json"), serialize(&a)).unwrap();
        }
    }
}
