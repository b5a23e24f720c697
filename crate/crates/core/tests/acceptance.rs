//! Acceptance report: one PASS/FAIL line per criterion, with the tolerances used.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use lwa_core::corpus::{a0_automaton, a1_automaton, load_fixture, subset_sum_automaton, FIXTURE_NAMES};
use lwa_core::estimator::{build_detector, build_observer, LabelCell};
use lwa_core::oracle::{estimate_chain, oracle_falsify, replay_witness};
use lwa_core::selfcomp::SelfComposition;
use lwa_core::verify::Checker;
use lwa_core::{Engine, EpSet, Prepared, Property, StateSet, Status, WeightedAutomaton};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn names(p: &Prepared, x: &StateSet) -> String {
    format!("{{{}}}", p.names(x).join(","))
}

fn set(p: &Prepared, n: &[&str]) -> StateSet {
    n.iter().map(|s| p.model.state_index(s).expect("state exists")).collect()
}

fn verdict_table() -> Check {
    use Status::{Fails as F, Holds as H};
    let cases: Vec<(&str, WeightedAutomaton, [Status; 4])> = vec![
        ("A1", a1_automaton(), [H, F, H, H]),
        ("A0", a0_automaton(), [F, F, H, H]),
        ("subset-sum {2,3}/5", subset_sum_automaton(&[2, 3], 5), [F, F, H, H]),
        ("subset-sum {2,4}/5", subset_sum_automaton(&[2, 4], 5), [H, H, H, H]),
    ];
    let limit = Duration::from_secs(2);
    let mut slowest = Duration::ZERO;
    for (name, a, want) in cases {
        let t = Instant::now();
        let p = Prepared::new(&a);
        let got: Vec<Status> = Checker::new(&p).check_all().into_iter().map(|v| v.status).collect();
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        ensure(got == want, || format!("{name}: got {got:?}, expected {want:?}"))?;
        ensure(dt < limit, || format!("{name}: took {dt:?}"))?;
    }
    Ok(format!("4 instances exact; slowest {slowest:.2?} (limit 2s each)"))
}

fn structures() -> Check {
    // Self-composition of A1.
    let p = Prepared::new(&a1_automaton());
    let cc = SelfComposition::build(&p).map_err(|e| e.to_string())?;
    let pair = |i: usize| {
        let (a, b) = cc.states[i];
        format!("{}{}", &p.model.states[a][1..], &p.model.states[b][1..])
    };
    let edges: BTreeSet<(String, String, String)> = cc
        .transitions
        .iter()
        .map(|t| {
            (
                pair(t.source),
                format!("{}{}", p.model.events[t.events.0].name, p.model.events[t.events.1].name),
                pair(t.target),
            )
        })
        .collect();
    let mut want = BTreeSet::new();
    for s in ["11", "12", "21", "22"] {
        want.insert(("00".to_string(), "aa".to_string(), s.to_string()));
        want.insert((s.to_string(), "bb".to_string(), "33".to_string()));
    }
    want.insert(("33".into(), "aa".into(), "44".into()));
    want.insert(("44".into(), "aa".into(), "44".into()));
    ensure(cc.states.len() == 7 && cc.transitions.len() == edges.len() && edges == want, || {
        format!("CC(A1) has {} states and edges {edges:?}", cc.states.len())
    })?;

    // Self-composition of A0: the off-diagonal part plus the diagonal states.
    let p0 = Prepared::new(&a0_automaton());
    let cc0 = SelfComposition::build(&p0).map_err(|e| e.to_string())?;
    let off: BTreeSet<(String, String)> = cc0
        .transitions
        .iter()
        .filter(|t| cc0.states[t.target].0 != cc0.states[t.target].1)
        .map(|t| {
            let n = |i: usize| format!("{}{}", p0.model.states[cc0.states[i].0], p0.model.states[cc0.states[i].1]);
            (n(t.source), n(t.target))
        })
        .collect();
    let want_off: BTreeSet<(String, String)> = [("q0q0", "q3q4"), ("q0q0", "q4q3"), ("q3q4", "q3q4"), ("q4q3", "q4q3")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    ensure(off == want_off && cc0.states.len() == 5, || format!("CC(A0) off-diagonal edges {off:?}"))?;

    // Observer of A0.
    let e0 = Engine::new(&p0);
    let obs0 = build_observer(&e0).map_err(|e| e.to_string())?;
    let start = obs0.initial;
    let cells: BTreeSet<(String, LabelCell)> =
        obs0.outgoing(start).map(|t| (names(&p0, &obs0.states[t.target]), t.cell.clone())).collect();
    let want_cells: BTreeSet<(String, LabelCell)> = [
        ("{q3,q4}".to_string(), LabelCell::Scalar(EpSet::singleton(11))),
        ("{q4}".to_string(), LabelCell::Scalar(EpSet::at_least(2).difference(&EpSet::singleton(11)))),
    ]
    .into_iter()
    .collect();
    ensure(cells == want_cells, || format!("observer of A0 from {{q0}}: {cells:?}"))?;

    // Observer and detector of A1.
    let e1 = Engine::new(&p);
    let obs1 = build_observer(&e1).map_err(|e| e.to_string())?;
    let det1 = build_detector(&e1).map_err(|e| e.to_string())?;
    let first: Vec<(String, Vec<i64>)> =
        obs1.outgoing(obs1.initial).map(|t| (names(&p, &obs1.states[t.target]), t.witness.clone())).collect();
    ensure(first == vec![("{q1,q2}".to_string(), vec![1])], || format!("observer of A1 starts with {first:?}"))?;
    let chain: Vec<String> = obs1.states.iter().map(|x| names(&p, x)).collect();
    ensure(chain == ["{q0}", "{q1,q2}", "{q3}", "{q4}"], || format!("observer of A1 states {chain:?}"))?;
    ensure(det1.states == obs1.states && det1.transitions == obs1.transitions, || {
        "detector of A1 differs from its observer".into()
    })?;
    Ok("CC(A1) 7 states / 10 transitions incl. four (b,b) merges; CC(A0) 5 states; A0 observer cells {11} and {n>=2}\\{11}; A1 observer = detector with witness (ρ,1)".into())
}

fn estimates() -> Check {
    let p = Prepared::new(&a1_automaton());
    let e = Engine::new(&p);
    let rho = p.label_index("ρ").ok_or("no label ρ")?;
    for second in [2, 3] {
        let (x, exact) = estimate_chain(&e, &[(rho, vec![1]), (rho, vec![second])]).map_err(|e| e.to_string())?;
        ensure(exact && x == set(&p, &["q3"]), || format!("M(A1,(ρ,1)(ρ,{second})) = {}", names(&p, &x)))?;
    }
    let p2 = Prepared::new(&subset_sum_automaton(&[2, 3], 5));
    let e2 = Engine::new(&p2);
    let (x, _) = estimate_chain(&e2, &[]).map_err(|e| e.to_string())?;
    ensure(x == set(&p2, &["q0", "q1", "q2"]), || format!("M(A2,ε) = {}", names(&p2, &x)))?;
    Ok("M(A1,(ρ,1)(ρ,2)) = M(A1,(ρ,1)(ρ,3)) = {q3}; M(A2,ε) = {q0,q1,q2} (exact match)".into())
}

fn sweep() -> Check {
    let limit = Duration::from_secs(60);
    let t = Instant::now();
    let n = subset_sum_sweep(300, 2024)?;
    let dt = t.elapsed();
    ensure(dt < limit, || format!("sweep took {dt:?}"))?;
    Ok(format!("{n} cases (m<=8, entries<=10, N<=30) agree with brute force in {dt:.2?} (limit 60s)"))
}

fn oracle_suite() -> Check {
    let limit = Duration::from_secs(300);
    let t = Instant::now();
    let a = oracle_agreement(0..200)?;
    let b = epl_agreement(0..200)?;
    let c = spd_agreement(0..200)?;
    let d = detector_coverage(0..200)?;
    let dt = t.elapsed();
    ensure(dt < limit, || format!("suite took {dt:?}"))?;
    Ok(format!(
        "200 automata: (a) {a} observer/oracle checks, (b) {b} weight-set memberships, (c) {c} SPD pairs, (d) {d} coverage checks; 0 counterexamples in {dt:.2?} (limit 5min)"
    ))
}

fn invariance() -> Check {
    let s = scaling_invariance(50)?;
    let n = normalize_idempotence(50)?;
    let e = epset_laws(500, 42)?;
    Ok(format!("{s} scaled instances (M in {{2,3,7}}), {n} normalizations, {e} EPSet cases; 0 failures"))
}

fn witness_replay() -> Check {
    let mut instances: Vec<(String, WeightedAutomaton)> =
        FIXTURE_NAMES.iter().map(|n| (n.to_string(), load_fixture(n).unwrap().automaton)).collect();
    instances.push(("subset-sum {2,3}/5".into(), subset_sum_automaton(&[2, 3], 5)));
    instances.push(("subset-sum {2,4}/5".into(), subset_sum_automaton(&[2, 4], 5)));
    let mut replayed = 0;
    for (name, a) in instances {
        let p = Prepared::new(&a);
        let c = Checker::new(&p);
        for v in c.check_all().into_iter().filter(|v| v.status == Status::Fails) {
            ensure(matches!(v.property, Property::Sd | Property::Spd), || {
                format!("{name}: unexpected {} failure", v.property)
            })?;
            let w = v.witness.as_ref().ok_or_else(|| format!("{name} {}: no witness", v.property))?;
            let r = replay_witness(c.engine(), w, &[1, 2, 3]).map_err(|e| format!("{name} {}: {e}", v.property))?;
            ensure(r.points.iter().all(|(_, x)| x.len() >= 2), || {
                format!("{name} {}: unambiguous replay", v.property)
            })?;
            let f = oracle_falsify(c.engine(), v.property, 8).map_err(|e| e.to_string())?;
            ensure(f.is_some_and(|c| !c.bounded), || format!("{name} {}: no lasso within horizon 8", v.property))?;
            replayed += 1;
        }
    }
    Ok(format!(
        "{replayed} FAILS verdicts replay with pumping n=1..3 and are confirmed by lasso search within horizon 8"
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 7] = [
        ("verdict table", verdict_table),
        ("structure reproduction", structures),
        ("estimate reproduction", estimates),
        ("subset-sum equivalence sweep", sweep),
        ("oracle-equivalence suite", oracle_suite),
        ("invariance suite", invariance),
        ("witness replay", witness_replay),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into())) {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {name}: {e}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
