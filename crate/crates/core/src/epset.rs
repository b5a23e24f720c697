//! Eventually periodic subsets of Z: finitely many exceptions plus optional upward and
//! downward residue-class cores.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// `{n : n mod period ∈ residues}` restricted to one side of `threshold`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Core {
    pub threshold: i64,
    pub period: i64,
    pub residues: Vec<i64>,
}

impl Core {
    fn matches(&self, n: i64) -> bool {
        self.residues.binary_search(&n.rem_euclid(self.period)).is_ok()
    }

    fn pattern(&self) -> Vec<bool> {
        let mut p = vec![false; self.period as usize];
        for &r in &self.residues {
            p[r as usize] = true;
        }
        p
    }
}

/// A canonical eventually periodic set.
///
/// Members `n >= up.threshold` are given by the up core, members `n <= down.threshold` by the
/// down core, and everything strictly between by `exceptions`. Thresholds are chosen as tight as
/// possible and periods minimal, so two equal sets have equal representations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "EpSetRepr", into = "EpSetRepr")]
pub struct EpSet {
    exceptions: BTreeSet<i64>,
    up: Option<Core>,
    down: Option<Core>,
}

#[derive(Serialize, Deserialize)]
struct EpSetRepr {
    exceptions: Vec<i64>,
    up_core: Option<Core>,
    down_core: Option<Core>,
}

impl From<EpSet> for EpSetRepr {
    fn from(s: EpSet) -> Self {
        EpSetRepr { exceptions: s.exceptions.into_iter().collect(), up_core: s.up, down_core: s.down }
    }
}

impl TryFrom<EpSetRepr> for EpSet {
    type Error = String;

    fn try_from(r: EpSetRepr) -> Result<Self, String> {
        for c in r.up_core.iter().chain(r.down_core.iter()) {
            if c.period < 1 || c.residues.iter().any(|&x| x < 0 || x >= c.period) {
                return Err(format!("bad core {c:?}"));
            }
        }
        if let (Some(u), Some(d)) = (&r.up_core, &r.down_core) {
            if u.threshold <= d.threshold {
                return Err("up threshold must exceed down threshold".into());
            }
        }
        let mut s = EpSet { exceptions: r.exceptions.into_iter().collect(), up: r.up_core, down: r.down_core };
        for c in s.up.iter_mut().chain(s.down.iter_mut()) {
            c.residues.sort_unstable();
            c.residues.dedup();
        }
        Ok(s.to_raw().canonicalize())
    }
}

/// An uncanonicalized description: below or at `lo` the down pattern applies, at or above `hi`
/// the up pattern, and `mid[n - lo - 1]` in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEpSet {
    pub lo: i64,
    pub hi: i64,
    pub down: Vec<bool>,
    pub up: Vec<bool>,
    pub mid: Vec<bool>,
}

fn pat(p: &[bool], n: i64) -> bool {
    p[n.rem_euclid(p.len() as i64) as usize]
}

fn minimal_period(p: &[bool]) -> Vec<bool> {
    let len = p.len();
    for d in 1..=len {
        if len.is_multiple_of(d) && (0..len).all(|i| p[i] == p[i % d]) {
            return p[..d].to_vec();
        }
    }
    p.to_vec()
}

fn to_core(threshold: i64, p: &[bool]) -> Option<Core> {
    let residues: Vec<i64> = (0..p.len()).filter(|&i| p[i]).map(|i| i as i64).collect();
    (!residues.is_empty()).then_some(Core { threshold, period: p.len() as i64, residues })
}

impl RawEpSet {
    pub fn contains(&self, n: i64) -> bool {
        if n <= self.lo {
            pat(&self.down, n)
        } else if n >= self.hi {
            pat(&self.up, n)
        } else {
            self.mid[(n - self.lo - 1) as usize]
        }
    }

    pub fn canonicalize(&self) -> EpSet {
        assert!(self.lo < self.hi && !self.up.is_empty() && !self.down.is_empty());
        let up = minimal_period(&self.up);
        let down = minimal_period(&self.down);
        let (lo, hi) = (self.lo, self.hi);
        let span = (up.len() as i64).lcm(&(down.len() as i64));

        if up == down && (lo + 1..hi).all(|n| self.contains(n) == pat(&up, n)) {
            return EpSet { exceptions: BTreeSet::new(), up: to_core(0, &up), down: to_core(-1, &down) };
        }

        let last_down = (lo + 1..=hi + span)
            .find(|&n| self.contains(n) != pat(&down, n))
            .expect("set differs from its down pattern")
            - 1;
        let first_up =
            (lo - span..hi).rev().find(|&n| self.contains(n) != pat(&up, n)).expect("set differs from its up pattern")
                + 1;
        let u = first_up.max(last_down + 1);
        EpSet {
            exceptions: (last_down + 1..u).filter(|&n| self.contains(n)).collect(),
            up: to_core(u, &up),
            down: to_core(last_down, &down),
        }
    }
}

fn lcm_pattern(a: &[bool], b: &[bool], f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    let p = a.len().lcm(&b.len());
    (0..p).map(|i| f(a[i % a.len()], b[i % b.len()])).collect()
}

impl EpSet {
    pub fn empty() -> Self {
        EpSet { exceptions: BTreeSet::new(), up: None, down: None }
    }

    pub fn all() -> Self {
        Self::periodic(1, &[0])
    }

    /// `{n : n mod period ∈ residues}` over all of Z.
    pub fn periodic(period: i64, residues: &[i64]) -> Self {
        assert!(period >= 1);
        let mut p = vec![false; period as usize];
        for &r in residues {
            p[r.rem_euclid(period) as usize] = true;
        }
        RawEpSet { lo: -1, hi: 0, down: p.clone(), up: p, mid: vec![] }.canonicalize()
    }

    pub fn from_finite(items: impl IntoIterator<Item = i64>) -> Self {
        let s: BTreeSet<i64> = items.into_iter().collect();
        EpSet { exceptions: s, up: None, down: None }
    }

    pub fn singleton(n: i64) -> Self {
        Self::from_finite([n])
    }

    /// `{n : n >= start}`.
    pub fn at_least(start: i64) -> Self {
        EpSet {
            exceptions: BTreeSet::new(),
            up: Some(Core { threshold: start, period: 1, residues: vec![0] }),
            down: None,
        }
    }

    pub fn exceptions(&self) -> &BTreeSet<i64> {
        &self.exceptions
    }

    pub fn up_core(&self) -> Option<&Core> {
        self.up.as_ref()
    }

    pub fn down_core(&self) -> Option<&Core> {
        self.down.as_ref()
    }

    pub fn contains(&self, n: i64) -> bool {
        if let Some(u) = &self.up {
            if n >= u.threshold {
                return u.matches(n);
            }
        }
        if let Some(d) = &self.down {
            if n <= d.threshold {
                return d.matches(n);
            }
        }
        self.exceptions.contains(&n)
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_none() && self.down.is_none() && self.exceptions.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.up.is_none() && self.down.is_none()
    }

    /// Largest absolute value that has to be inspected to see every feature of the set.
    fn extent(&self) -> i64 {
        let mut b = 0i64;
        for &e in &self.exceptions {
            b = b.max(e.abs());
        }
        for c in self.up.iter().chain(self.down.iter()) {
            b = b.max(c.threshold.abs() + c.period);
        }
        b
    }

    /// The member of smallest absolute value; ties go to the nonnegative one.
    pub fn min_abs_witness(&self) -> Option<i64> {
        if self.is_empty() {
            return None;
        }
        (0..=self.extent() + 1).flat_map(|d| [d, -d]).find(|&n| self.contains(n))
    }

    pub fn witness(&self) -> Option<i64> {
        self.min_abs_witness()
    }

    pub fn to_raw(&self) -> RawEpSet {
        let lo = match &self.down {
            Some(d) => d.threshold,
            None => {
                let mut m = self.exceptions.first().copied().unwrap_or(0);
                if let Some(u) = &self.up {
                    m = m.min(u.threshold);
                }
                m - 1
            }
        };
        let hi = match &self.up {
            Some(u) => u.threshold,
            None => (self.exceptions.last().copied().unwrap_or(lo) + 1).max(lo + 1),
        };
        RawEpSet {
            lo,
            hi,
            down: self.down.as_ref().map_or(vec![false], Core::pattern),
            up: self.up.as_ref().map_or(vec![false], Core::pattern),
            mid: (lo + 1..hi).map(|n| self.contains(n)).collect(),
        }
    }

    fn combine(&self, other: &EpSet, f: impl Fn(bool, bool) -> bool) -> EpSet {
        let (a, b) = (self.to_raw(), other.to_raw());
        let lo = a.lo.min(b.lo);
        let hi = a.hi.max(b.hi);
        RawEpSet {
            lo,
            hi,
            down: lcm_pattern(&a.down, &b.down, &f),
            up: lcm_pattern(&a.up, &b.up, &f),
            mid: (lo + 1..hi).map(|n| f(a.contains(n), b.contains(n))).collect(),
        }
        .canonicalize()
    }

    pub fn union(&self, other: &EpSet) -> EpSet {
        self.combine(other, |x, y| x || y)
    }

    pub fn intersect(&self, other: &EpSet) -> EpSet {
        self.combine(other, |x, y| x && y)
    }

    pub fn difference(&self, other: &EpSet) -> EpSet {
        self.combine(other, |x, y| x && !y)
    }

    pub fn complement(&self) -> EpSet {
        let r = self.to_raw();
        RawEpSet {
            lo: r.lo,
            hi: r.hi,
            down: r.down.iter().map(|b| !b).collect(),
            up: r.up.iter().map(|b| !b).collect(),
            mid: r.mid.iter().map(|b| !b).collect(),
        }
        .canonicalize()
    }

    /// `{n + c : n ∈ self}`.
    pub fn shift(&self, c: i64) -> EpSet {
        self.shift_union(&[c])
    }

    /// `{-n : n ∈ self}`.
    pub fn negate(&self) -> EpSet {
        let r = self.to_raw();
        let flip = |p: &[bool]| -> Vec<bool> { (0..p.len() as i64).map(|i| pat(p, -i)).collect() };
        RawEpSet {
            lo: -r.hi,
            hi: -r.lo,
            down: flip(&r.up),
            up: flip(&r.down),
            mid: r.mid.iter().rev().copied().collect(),
        }
        .canonicalize()
    }

    /// `{n + c : n ∈ self, c ∈ offsets}`.
    pub fn shift_union(&self, offsets: &[i64]) -> EpSet {
        if offsets.is_empty() || self.is_empty() {
            return EpSet::empty();
        }
        let r = self.to_raw();
        let cmin = *offsets.iter().min().unwrap();
        let cmax = *offsets.iter().max().unwrap();
        let lo = r.lo + cmin;
        let hi = r.hi + cmax;
        let side =
            |p: &[bool]| -> Vec<bool> { (0..p.len() as i64).map(|i| offsets.iter().any(|&c| pat(p, i - c))).collect() };
        RawEpSet {
            lo,
            hi,
            down: side(&r.down),
            up: side(&r.up),
            mid: (lo + 1..hi).map(|n| offsets.iter().any(|&c| r.contains(n - c))).collect(),
        }
        .canonicalize()
    }

    /// Members within `[lo, hi]`.
    pub fn members_in(&self, lo: i64, hi: i64) -> Vec<i64> {
        (lo..=hi).filter(|&n| self.contains(n)).collect()
    }

    /// The additive monoid generated by `gens`: all sums of nonnegative integer multiples.
    pub fn nonneg_span(gens: &[i64]) -> EpSet {
        let gens: Vec<i64> = gens.iter().copied().filter(|&g| g != 0).collect();
        if gens.is_empty() {
            return EpSet::singleton(0);
        }
        let g = gens.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        let pos = gens.iter().any(|&x| x > 0);
        let neg = gens.iter().any(|&x| x < 0);
        if pos && neg {
            // Both signs: the monoid is closed under negation, hence the subgroup gZ.
            return EpSet::periodic(g, &[0]);
        }
        if neg {
            let flipped: Vec<i64> = gens.iter().map(|x| -x).collect();
            return EpSet::nonneg_span(&flipped).negate();
        }
        let a: Vec<usize> = gens.iter().map(|&x| (x / g) as usize).collect();
        let amax = *a.iter().max().unwrap();
        let f = amax * amax;
        let mut reach = vec![false; f + 1];
        reach[0] = true;
        for n in 1..=f {
            reach[n] = a.iter().any(|&ai| ai <= n && reach[n - ai]);
        }
        let hi = g * f as i64;
        let mut up = vec![false; g as usize];
        up[0] = true;
        RawEpSet {
            lo: -1,
            hi,
            down: vec![false],
            up,
            mid: (0..hi).map(|n| n % g == 0 && reach[(n / g) as usize]).collect(),
        }
        .canonicalize()
    }
}

impl fmt::Debug for EpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for EpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        let mut parts = Vec::new();
        if let Some(d) = &self.down {
            parts.push(format!("{{n<={} : n mod {} in {:?}}}", d.threshold, d.period, d.residues));
        }
        if !self.exceptions.is_empty() {
            let items: Vec<String> = self.exceptions.iter().map(|n| n.to_string()).collect();
            parts.push(format!("{{{}}}", items.join(",")));
        }
        if let Some(u) = &self.up {
            parts.push(format!("{{n>={} : n mod {} in {:?}}}", u.threshold, u.period, u.residues));
        }
        write!(f, "{}", parts.join(" ∪ "))
    }
}
