//! Seeded suites shared by the property tests and the acceptance report. Each returns the
//! number of cases checked or a description of the first counterexample.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use lwa_core::corpus::{
    load_fixture, random_automaton, subset_sum_automaton, subset_sum_solvable, RandomBounds, FIXTURE_NAMES,
};
use lwa_core::epl::{weight_set, PathAnswer, SolverConfig, WalkSets, WeightedDigraph};
use lwa_core::epset::RawEpSet;
use lwa_core::estimator::{build_detector, build_observer, EstimatorAutomaton};
use lwa_core::oracle::{estimate_chain, estimate_enumerated, estimate_witness, explains, oracle_runs, LabeledPoint};
use lwa_core::verify::{check_spd, check_spd_observer, Checker};
use lwa_core::{Engine, EpSet, Prepared, StateSet, Status, WeightedAutomaton};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Outcome = Result<usize, String>;

pub fn small_bounds() -> RandomBounds {
    RandomBounds { max_states: 5, weight_min: -2, weight_max: 2, k: 1, ..RandomBounds::default() }
}

pub fn random_small(seed: u64) -> WeightedAutomaton {
    random_automaton(seed, &small_bounds())
}

/// Observation sequences along estimator paths of length at most `depth`, taking each
/// transition's witness weight, with the estimator state reached.
pub fn estimator_paths(est: &EstimatorAutomaton, depth: usize) -> Vec<(Vec<LabeledPoint>, usize)> {
    let mut out = vec![(Vec::new(), est.initial)];
    let mut frontier = vec![(Vec::<LabeledPoint>::new(), est.initial)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (gamma, s) in &frontier {
            let acc = gamma.last().map_or_else(|| vec![0; est_k(est)], |(_, w)| w.clone());
            for t in est.outgoing(*s) {
                let mut g = gamma.clone();
                g.push((t.label, acc.iter().zip(&t.witness).map(|(a, b)| a + b).collect()));
                next.push((g, t.target));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn est_k(est: &EstimatorAutomaton) -> usize {
    est.transitions.first().map_or(1, |t| t.witness.len())
}

/// Observer paths of length ≤ 4 agree with the successor-chain estimate; every estimate of a
/// run of length ≤ 5 contains the path-enumerated estimate and each of its states has a run
/// that replays to the same observations.
pub fn oracle_agreement(seeds: std::ops::Range<u64>) -> Outcome {
    let mut cases = 0;
    for seed in seeds {
        let a = random_small(seed);
        let p = Prepared::new(&a);
        let e = Engine::new(&p);
        let obs = build_observer(&e).map_err(|x| format!("seed {seed}: {x}"))?;
        for (gamma, s) in estimator_paths(&obs, 4) {
            let (x, exact) = estimate_chain(&e, &gamma).map_err(|x| x.to_string())?;
            if !exact || x != obs.states[s] {
                return Err(format!(
                    "seed {seed}: observer state {:?} but oracle {:?} for {gamma:?}",
                    obs.states[s], x
                ));
            }
            cases += 1;
        }
        for r in oracle_runs(&p, 5).map_err(|x| x.to_string())? {
            let gamma = r.label_sequence(&p);
            let (x, _) = estimate_chain(&e, &gamma).map_err(|x| x.to_string())?;
            let enumerated = estimate_enumerated(&p, &gamma, 10);
            if !enumerated.is_subset(&x) || !x.contains(&r.end(&p)) && r.path.last().is_some_and(|&t| p.observable(t)) {
                return Err(format!("seed {seed}: enumeration {enumerated:?} not within chain {x:?} for {gamma:?}"));
            }
            for &q in x.difference(&enumerated) {
                let path = estimate_witness(&e, &gamma, q).map_err(|x| x.to_string())?;
                if !path.is_some_and(|w| explains(&p, &w, &gamma)) {
                    return Err(format!("seed {seed}: state {q} of {gamma:?} has no replayable run"));
                }
            }
            cases += 1;
        }
    }
    Ok(cases)
}

/// Weights of walks of length ≤ `len` from `u` to `v`.
pub fn enumerate_walk_weights(g: &WeightedDigraph, u: usize, v: usize, len: usize) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    let mut layer: BTreeSet<(usize, i64)> = BTreeSet::from([(u, 0)]);
    for step in 0..=len {
        out.extend(layer.iter().filter(|(x, _)| *x == v).map(|(_, w)| *w));
        if step == len {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|&(x, w)| g.arcs.iter().filter(move |a| a.tail == x).map(move |a| (a.head, w + a.weight[0])))
            .collect();
    }
    out
}

pub fn random_digraph(seed: u64) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let mut g = WeightedDigraph::new(1, n);
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(0.25) {
                g.add_arc(a, b, vec![rng.gen_range(-3..=3)]);
            }
        }
    }
    g
}

/// Exact weight sets agree with bounded walk enumeration on [-36, 36]; members the
/// enumeration misses come with a solver walk that replays to the claimed weight.
pub fn epl_agreement(seeds: std::ops::Range<u64>) -> Outcome {
    let mut cases = 0;
    let cfg = SolverConfig::default();
    for seed in seeds {
        let g = random_digraph(seed);
        for u in 0..g.n {
            let ws = WalkSets::new(&g, u).map_err(|x| x.to_string())?;
            for v in 0..g.n {
                let exact = weight_set(&g, u, v).map_err(|x| x.to_string())?;
                let seen = enumerate_walk_weights(&g, u, v, 12);
                for z in -36..=36 {
                    let claimed = exact.contains(z);
                    if seen.contains(&z) && !claimed {
                        return Err(format!("seed {seed}: {u}->{v} weight {z} has a walk but is not in {exact}"));
                    }
                    if claimed && !seen.contains(&z) {
                        match ws.find(v, &[z], &cfg).map_err(|x| x.to_string())? {
                            PathAnswer::Yes(w) if g.replay(u, &w) == Some((v, vec![z])) => {}
                            other => {
                                return Err(format!("seed {seed}: {u}->{v} weight {z} claimed, solver gives {other:?}"))
                            }
                        }
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(cases)
}

/// The detector-based and observer-based strong periodic evaluations agree.
pub fn spd_agreement(seeds: std::ops::Range<u64>) -> Outcome {
    let mut cases = 0;
    for seed in seeds {
        let p = Prepared::new(&random_small(seed));
        let e = Engine::new(&p);
        let det = build_detector(&e).map_err(|x| x.to_string())?;
        let obs = build_observer(&e).map_err(|x| x.to_string())?;
        let a = check_spd(&p, &det).status;
        let b = check_spd_observer(&p, &obs);
        if a != b || a == Status::Unknown {
            return Err(format!("seed {seed}: detector gives {a}, observer gives {b}"));
        }
        cases += 1;
    }
    Ok(cases)
}

/// Detector states reachable on an observation sequence.
fn detector_run(det: &EstimatorAutomaton, gamma: &[LabeledPoint]) -> BTreeSet<usize> {
    let mut cur = BTreeSet::from([det.initial]);
    let mut prev = vec![0; gamma.first().map_or(1, |g| g.1.len())];
    for (l, w) in gamma {
        let d: Vec<i64> = w.iter().zip(&prev).map(|(a, b)| a - b).collect();
        prev = w.clone();
        cur = cur
            .iter()
            .flat_map(|&s| {
                det.outgoing(s).filter(|t| t.label == *l && t.cell.contains(&d)).map(|t| t.target).collect::<Vec<_>>()
            })
            .collect();
    }
    cur
}

/// Along every observer path, the detector reaches every two-element subset of each
/// non-singleton estimate and the estimate itself when it is a singleton.
pub fn detector_coverage(seeds: std::ops::Range<u64>) -> Outcome {
    let mut cases = 0;
    for seed in seeds {
        let p = Prepared::new(&random_small(seed));
        let e = Engine::new(&p);
        let det = build_detector(&e).map_err(|x| x.to_string())?;
        let obs = build_observer(&e).map_err(|x| x.to_string())?;
        for (gamma, s) in estimator_paths(&obs, 4).into_iter().filter(|(g, _)| !g.is_empty()) {
            let x = &obs.states[s];
            let reached: BTreeSet<&StateSet> = detector_run(&det, &gamma).into_iter().map(|d| &det.states[d]).collect();
            let wanted: Vec<StateSet> = if x.len() == 1 {
                vec![x.clone()]
            } else {
                let v: Vec<usize> = x.iter().copied().collect();
                (0..v.len())
                    .flat_map(|i| {
                        (i + 1..v.len()).map({
                            let v = v.clone();
                            move |j| StateSet::from([v[i], v[j]])
                        })
                    })
                    .collect()
            };
            if let Some(miss) = wanted.iter().find(|y| !reached.contains(y)) {
                return Err(format!("seed {seed}: detector misses {miss:?} after {gamma:?}"));
            }
            if reached.iter().any(|y| !y.is_subset(x)) {
                return Err(format!("seed {seed}: detector state outside estimate {x:?} after {gamma:?}"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

fn statuses(a: &WeightedAutomaton) -> Vec<Status> {
    let p = Prepared::new(a);
    Checker::new(&p).check_all().into_iter().map(|v| v.status).collect()
}

/// Corpus instances plus `random` seeded instances.
pub fn invariance_instances(random: u64) -> Vec<(String, WeightedAutomaton)> {
    let mut out: Vec<(String, WeightedAutomaton)> =
        FIXTURE_NAMES.iter().map(|n| (n.to_string(), load_fixture(n).unwrap().automaton)).collect();
    out.push(("subset-sum 2,3/5".into(), subset_sum_automaton(&[2, 3], 5)));
    out.push(("subset-sum 2,4/5".into(), subset_sum_automaton(&[2, 4], 5)));
    out.extend((0..random).map(|s| (format!("random {s}"), random_small(1000 + s))));
    out
}

/// Multiplying all weights by 2, 3 or 7 leaves all four statuses unchanged.
pub fn scaling_invariance(random: u64) -> Outcome {
    let mut cases = 0;
    for (name, a) in invariance_instances(random) {
        let base = statuses(&a);
        for m in [2, 3, 7] {
            let scaled = statuses(&a.scale_weights(Ratio::from_integer(m)));
            if scaled != base {
                return Err(format!("{name}: scaling by {m} changes {base:?} to {scaled:?}"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

pub fn normalize_idempotence(random: u64) -> Outcome {
    let mut cases = 0;
    for (name, a) in invariance_instances(random) {
        let once = a.normalize();
        if !once.is_normalized() || once.normalize() != once {
            return Err(format!("{name}: normalization is not idempotent"));
        }
        cases += 1;
    }
    Ok(cases)
}

pub fn random_raw(rng: &mut ChaCha8Rng) -> RawEpSet {
    let lo = rng.gen_range(-15..=5);
    let hi = lo + rng.gen_range(1..=15);
    let pattern = |rng: &mut ChaCha8Rng| -> Vec<bool> {
        let len = rng.gen_range(1..=4);
        let density = [0.0, 0.5, 1.0][rng.gen_range(0..3)];
        (0..len).map(|_| rng.gen_bool(density)).collect()
    };
    let down = pattern(rng);
    let up = pattern(rng);
    let mid = (lo + 1..hi).map(|_| rng.gen_bool(0.5)).collect();
    RawEpSet { lo, hi, down, up, mid }
}

/// Boolean operations, shifts and witnesses of canonical sets agree with a direct evaluation
/// of random raw descriptions; canonical forms are unique.
pub fn epset_laws(count: u64, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = -80..=80i64;
    let mut cases = 0;
    for i in 0..count {
        let (ra, rb) = (random_raw(&mut rng), random_raw(&mut rng));
        let (a, b) = (ra.canonicalize(), rb.canonicalize());
        let c = rng.gen_range(-7..=7);
        type Law<'a> = (&'static str, EpSet, Box<dyn Fn(i64) -> bool + 'a>);
        let checks: [Law; 7] = [
            ("canonical", a.clone(), Box::new(|n| ra.contains(n))),
            ("union", a.union(&b), Box::new(|n| ra.contains(n) || rb.contains(n))),
            ("intersect", a.intersect(&b), Box::new(|n| ra.contains(n) && rb.contains(n))),
            ("difference", a.difference(&b), Box::new(|n| ra.contains(n) && !rb.contains(n))),
            ("complement", a.complement(), Box::new(|n| !ra.contains(n))),
            ("shift", a.shift(c), Box::new(|n| ra.contains(n - c))),
            ("negate", a.negate(), Box::new(|n| ra.contains(-n))),
        ];
        for (name, set, f) in &checks {
            if let Some(n) = window.clone().find(|&n| set.contains(n) != f(n)) {
                return Err(format!("case {i}: {name} differs at {n}: {set}"));
            }
            if set.to_raw().canonicalize() != *set {
                return Err(format!("case {i}: {name} result {set} is not canonical"));
            }
        }
        if a.complement().complement() != a || a.union(&b) != b.union(&a) {
            return Err(format!("case {i}: involution or commutativity fails for {a}, {b}"));
        }
        if a.union(&b).complement() != a.complement().intersect(&b.complement()) {
            return Err(format!("case {i}: De Morgan fails for {a}, {b}"));
        }
        let w = a.min_abs_witness();
        let best = window.clone().filter(|&n| ra.contains(n)).min_by_key(|n| (n.abs(), *n < 0));
        if a.is_empty() != best.is_none() || (best.is_some() && w.map(i64::abs) != best.map(i64::abs)) {
            return Err(format!("case {i}: witness {w:?} of {a}, expected {best:?}"));
        }
        cases += 1;
    }
    Ok(cases)
}

/// SD of generated subset-sum automata against direct subset-sum search.
pub fn subset_sum_sweep(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashMap<(Vec<u64>, u64), bool> = HashMap::new();
    let mut queue: VecDeque<(Vec<u64>, u64)> = VecDeque::new();
    while queue.len() < count {
        let m = rng.gen_range(1..=8);
        let mut n: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=10)).collect();
        n.sort();
        let target = rng.gen_range(1..=30);
        if seen.insert((n.clone(), target), true).is_none() {
            queue.push_back((n, target));
        }
    }
    let mut solvable = 0;
    for (n, target) in &queue {
        let expect = subset_sum_solvable(n, *target);
        solvable += expect as usize;
        let p = Prepared::new(&subset_sum_automaton(n, *target));
        let v = Checker::new(&p).check(lwa_core::Property::Sd);
        let want = if expect { Status::Fails } else { Status::Holds };
        if v.status != want {
            return Err(format!("weights {n:?} target {target}: SD {} but subset sum solvable = {expect}", v.status));
        }
    }
    if solvable == 0 || solvable == queue.len() {
        return Err("sweep did not cover both outcomes".into());
    }
    Ok(queue.len())
}
