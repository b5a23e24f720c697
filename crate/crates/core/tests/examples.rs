use std::collections::BTreeSet;

use lwa_core::corpus::{a0_automaton, a1_automaton, load_fixture, subset_sum_automaton, FIXTURE_NAMES};
use lwa_core::epset::EpSet;
use lwa_core::estimator::{build_detector, build_observer, successor_cells, EstimatorAutomaton, LabelCell};
use lwa_core::selfcomp::SelfComposition;
use lwa_core::verify::{check_all, Checker};
use lwa_core::{Engine, Prepared, Property, StateSet, Status};

fn set(p: &Prepared, names: &[&str]) -> StateSet {
    names.iter().map(|n| p.model.state_index(n).unwrap()).collect()
}

fn statuses(a: &lwa_core::WeightedAutomaton) -> Vec<Status> {
    check_all(a).into_iter().map(|v| v.status).collect()
}

use Status::{Fails as F, Holds as H};

#[test]
fn verdict_table() {
    assert_eq!(statuses(&a1_automaton()), vec![H, F, H, H]);
    assert_eq!(statuses(&a0_automaton()), vec![F, F, H, H]);
    assert_eq!(statuses(&subset_sum_automaton(&[2, 3], 5)), vec![F, F, H, H]);
    assert_eq!(statuses(&subset_sum_automaton(&[2, 4], 5)), vec![H, H, H, H]);
    assert_eq!(statuses(&subset_sum_automaton(&[7], 7))[0], F);
}

#[test]
fn fixtures_reproduce_expected_verdicts() {
    for name in FIXTURE_NAMES {
        let f = load_fixture(name).unwrap();
        let got = check_all(&f.automaton);
        for (prop, status) in &f.expected {
            let v = got.iter().find(|v| v.property == *prop).unwrap();
            assert_eq!(v.status, *status, "{name} {prop}: {v:?}");
        }
    }
}

fn named(p: &Prepared, cc: &SelfComposition) -> BTreeSet<(String, String, String)> {
    cc.named_transitions(p)
        .into_iter()
        .map(|(s, e, t)| {
            (
                format!("{}{}", &s[0][1..], &s[1][1..]),
                format!("{}{}", e[0], e[1]),
                format!("{}{}", &t[0][1..], &t[1][1..]),
            )
        })
        .collect()
}

#[test]
fn self_composition_of_a1() {
    let p = Prepared::new(&a1_automaton());
    let cc = SelfComposition::build(&p).unwrap();
    let states: BTreeSet<String> =
        cc.states.iter().map(|&(a, b)| format!("{}{}", &p.model.states[a][1..], &p.model.states[b][1..])).collect();
    let expect: BTreeSet<String> = ["00", "11", "12", "21", "22", "33", "44"].iter().map(|s| s.to_string()).collect();
    assert_eq!(states, expect);
    let t = named(&p, &cc);
    let expect: BTreeSet<(String, String, String)> = [
        ("00", "aa", "11"),
        ("00", "aa", "12"),
        ("00", "aa", "21"),
        ("00", "aa", "22"),
        ("11", "bb", "33"),
        ("12", "bb", "33"),
        ("21", "bb", "33"),
        ("22", "bb", "33"),
        ("33", "aa", "44"),
        ("44", "aa", "44"),
    ]
    .iter()
    .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    .collect();
    assert_eq!(t, expect);
    assert_eq!(cc.transitions.len(), 10);
}

#[test]
fn self_composition_of_a0() {
    let p = Prepared::new(&a0_automaton());
    let cc = SelfComposition::build(&p).unwrap();
    let t = named(&p, &cc);
    let off_diagonal: BTreeSet<_> = t.iter().filter(|(_, _, d)| d.as_bytes()[0] != d.as_bytes()[1]).cloned().collect();
    let expect: BTreeSet<(String, String, String)> =
        [("00", "aa", "34"), ("00", "aa", "43"), ("34", "aa", "34"), ("43", "aa", "43")]
            .iter()
            .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
            .collect();
    assert_eq!(off_diagonal, expect);
    assert_eq!(cc.states.len(), 5);
    assert_eq!(t.len(), 8);
}

fn cells_of(est: &EstimatorAutomaton, p: &Prepared, from: &[&str]) -> Vec<(StateSet, LabelCell, Vec<i64>)> {
    let s = est.state_index(&set(p, from)).unwrap();
    est.outgoing(s).map(|t| (est.states[t.target].clone(), t.cell.clone(), t.witness.clone())).collect()
}

#[test]
fn observer_of_a0() {
    let p = Prepared::new(&a0_automaton());
    let e = Engine::new(&p);
    let obs = build_observer(&e).unwrap();
    assert_eq!(obs.states.len(), 3);
    let out = cells_of(&obs, &p, &["q0"]);
    let not_eleven = EpSet::at_least(2).difference(&EpSet::singleton(11));
    assert_eq!(
        out,
        vec![
            (set(&p, &["q4"]), LabelCell::Scalar(not_eleven), vec![2]),
            (set(&p, &["q3", "q4"]), LabelCell::Scalar(EpSet::singleton(11)), vec![11]),
        ]
    );
    for from in [["q4"].as_slice(), &["q3", "q4"]] {
        let out = cells_of(&obs, &p, from);
        assert_eq!(out, vec![(set(&p, from), LabelCell::Scalar(EpSet::singleton(1)), vec![1])]);
    }
    let det = build_detector(&e).unwrap();
    assert_eq!(det.states, obs.states);
    assert_eq!(det.transitions, obs.transitions);
}

#[test]
fn observer_of_a1() {
    let p = Prepared::new(&a1_automaton());
    let e = Engine::new(&p);
    let obs = build_observer(&e).unwrap();
    let rho = p.label_index("ρ").unwrap();
    let (cells, exact) = successor_cells(&e, &set(&p, &["q1", "q2"]), rho).unwrap();
    assert!(exact);
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].target, set(&p, &["q3"]));
    assert_eq!(cells[0].cell, LabelCell::Scalar(EpSet::at_least(1)));
    assert_eq!(cells[0].witness, vec![1]);
    let chain = [
        (vec!["q0"], vec!["q1", "q2"], EpSet::singleton(1)),
        (vec!["q1", "q2"], vec!["q3"], EpSet::at_least(1)),
        (vec!["q3"], vec!["q4"], EpSet::singleton(2)),
        (vec!["q4"], vec!["q4"], EpSet::singleton(1)),
    ];
    assert_eq!(obs.states.len(), 4);
    for (from, to, cell) in chain {
        let out = cells_of(&obs, &p, &from);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, set(&p, &to));
        assert_eq!(out[0].1, LabelCell::Scalar(cell.clone()));
    }
    let det = build_detector(&e).unwrap();
    assert_eq!(det.states, obs.states);
    assert_eq!(det.transitions, obs.transitions);
}

#[test]
fn detector_of_solvable_subset_sum() {
    let p = Prepared::new(&subset_sum_automaton(&[2, 3], 5));
    let det = build_detector(&Engine::new(&p)).unwrap();
    let pair = set(&p, &["q3_1", "q3_2"]);
    let s = det.state_index(&pair).expect("pair state present");
    let e = p.label_index("e").unwrap();
    assert!(det.outgoing(s).any(|t| t.target == s && t.label == e && t.witness == vec![1]));
}

#[test]
fn verdict_conditions() {
    let p = Prepared::new(&a1_automaton());
    let c = Checker::new(&p);
    let spd = c.check(Property::Spd);
    assert_eq!(spd.conditions, vec!["silent_divergence"]);
    let wd = c.check(Property::Wd);
    assert!(wd.conditions.contains(&"singleton_cycle".to_string()));
    assert!(wd.conditions.contains(&"unobservable_cycle".to_string()));

    let p = Prepared::new(&a0_automaton());
    let c = Checker::new(&p);
    assert!(c.check(Property::Spd).conditions.contains(&"pair_cycle".to_string()));
    assert!(c.check(Property::Wd).conditions.contains(&"unobservable_cycle".to_string()));
    assert!(c.check(Property::Wpd).conditions.contains(&"singleton_divergence".to_string()));

    let p = Prepared::new(&subset_sum_automaton(&[2, 3], 5));
    let c = Checker::new(&p);
    assert!(c.check(Property::Wpd).conditions.contains(&"cycle_with_singleton".to_string()));
}
