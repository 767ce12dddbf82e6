//! Exhaustive range verifiers for the residue-class structure of `T`.
//!
//! Each verifier is a per-value check run over a range in blocks. Every check
//! goes through the public operations in [`crate::map`], [`crate::trajectory`]
//! and [`crate::cycles`]; nothing here re-implements the map arithmetic.
//! A reported violation can be replayed with [`recheck`].

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cycles;
use crate::error::{Error, Result};
use crate::exec::{self, Executor};
use crate::map::{self, ResidueClass, Rule};
use crate::nat::Nat;
use crate::trajectory;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BLOCK: u64 = 1 << 16;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fact {
    /// Predecessor counts and classes by residue class.
    PredecessorStructure,
    /// Class of `T(x)` as a function of the class and parity of `x`.
    Transitions,
    /// `T'` closure, `T`/`T'` orbit correspondence, class-1 elimination hooks.
    Reduction,
    /// No fixed points of `T`; period-2 points are exactly 1 and 2.
    NoSmallCycles,
    /// Class-0 values decompose as `2^i * q` and their orbits never return to class 0.
    C0Chains,
}

impl Fact {
    pub const ALL: [Fact; 5] = [
        Fact::PredecessorStructure,
        Fact::Transitions,
        Fact::Reduction,
        Fact::NoSmallCycles,
        Fact::C0Chains,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Fact::PredecessorStructure => "predecessors",
            Fact::Transitions => "transitions",
            Fact::Reduction => "reduction",
            Fact::NoSmallCycles => "small-cycles",
            Fact::C0Chains => "c0-chains",
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Fact {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Fact::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| format!("unknown fact {s:?}"))
    }
}

/// Result of checking one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Holds,
    Violated(String),
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub x: Nat,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub schema_version: u32,
    pub fact_id: String,
    pub range: [u64; 2],
    pub checked: u64,
    pub violations: Vec<Violation>,
    pub inconclusive: Vec<Violation>,
    #[serde(with = "millis")]
    pub elapsed: Duration,
}

impl RangeReport {
    pub fn new(fact_id: impl Into<String>, lo: u64, hi: u64) -> Self {
        RangeReport {
            schema_version: REPORT_SCHEMA_VERSION,
            fact_id: fact_id.into(),
            range: [lo, hi],
            checked: 0,
            violations: Vec::new(),
            inconclusive: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.checked == self.range[1] - self.range[0] + 1
    }

    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &RangeReport) -> bool {
        let mut a = self.clone();
        a.elapsed = other.elapsed;
        a == *other
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis().try_into().unwrap_or(u64::MAX))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub executor: Executor,
    pub block: u64,
    /// Step budget for checks that follow orbits.
    pub budget: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            executor: Executor::sequential(),
            block: DEFAULT_BLOCK,
            budget: DEFAULT_BUDGET,
        }
    }
}

fn class(x: &Nat) -> ResidueClass {
    ResidueClass::of(x)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Check::Violated(format!($($msg)+));
        }
    };
}

macro_rules! try_check {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Check::Violated(e.to_string()),
        }
    };
}

/// Predecessor structure at `x`: class 0 and class 1 values have only the
/// even predecessor, class 2 values have both, and the class of the odd
/// predecessor follows the class of `(x-2)/3` (1 ↦ 0, 0 ↦ 1, 2 ↦ 2).
pub fn check_predecessor_structure(x: &Nat) -> Check {
    let c = try_check!(map::residue_class(x));
    let preds = try_check!(map::predecessors(x));
    for (y, rule) in &preds {
        let (image, fired) = try_check!(map::step(y));
        ensure!(image == *x && fired == *rule, "predecessor {y} maps to {image} by {fired}, not to {x} by {rule}");
    }
    let even = try_check!(map::pred_even(x));
    ensure!(preds[0] == (even.clone(), Rule::R1), "even predecessor {even} not listed first");
    let expected_even = match c {
        ResidueClass::C0 => ResidueClass::C0,
        ResidueClass::C1 => ResidueClass::C2,
        ResidueClass::C2 => ResidueClass::C1,
    };
    ensure!(class(&even) == expected_even, "P_e({x}) = {even} is in {} instead of {expected_even}", class(&even));

    match c {
        ResidueClass::C0 | ResidueClass::C1 => {
            ensure!(preds.len() == 1, "{x} in {c} has {} predecessors", preds.len());
            ensure!(try_check!(map::pred_odd(x)).is_none(), "{x} in {c} has an odd predecessor");
        }
        ResidueClass::C2 => {
            ensure!(preds.len() == 2, "{x} in [2] has {} predecessors", preds.len());
            let odd = &preds[1].0;
            ensure!(odd.is_odd(), "P_o({x}) = {odd} is even");
            let quotient = x.checked_sub(2).and_then(|v| v.div_exact(3));
            let Some(quotient) = quotient else {
                return Check::Violated(format!("(x-2)/3 is not an integer for {x}"));
            };
            let expected_odd = match class(&quotient) {
                ResidueClass::C1 => ResidueClass::C0,
                ResidueClass::C0 => ResidueClass::C1,
                ResidueClass::C2 => ResidueClass::C2,
            };
            ensure!(
                class(odd) == expected_odd,
                "P_o({x}) = {odd} is in {} but (x-2)/3 = {quotient} is in {}",
                class(odd),
                class(&quotient)
            );
        }
    }
    Check::Holds
}

/// Class of `T(x)`: class 0 stays in class 0 when `x/3` is even and moves to
/// class 2 when `x/3` is odd; class 1 always moves to class 2; class 2 moves
/// to class 1 when even and stays in class 2 when odd.
pub fn check_transitions(x: &Nat) -> Check {
    let c = try_check!(map::residue_class(x));
    let (image, _) = try_check!(map::step(x));
    let expected = match c {
        ResidueClass::C0 => {
            let third = x.div_floor(3);
            if third.is_even() {
                ResidueClass::C0
            } else {
                ResidueClass::C2
            }
        }
        ResidueClass::C1 => ResidueClass::C2,
        ResidueClass::C2 if x.is_even() => ResidueClass::C1,
        ResidueClass::C2 => ResidueClass::C2,
    };
    ensure!(class(&image) == expected, "T({x}) = {image} is in {} instead of {expected}", class(&image));
    Check::Holds
}

/// For class-2 values: `T'` stays in class 2 and the `T` and `T'` orbits
/// correspond. For class-1 values: the even predecessor and the image are
/// both in class 2, so the vertex can be contracted.
pub fn check_reduction(x: &Nat, budget: u64) -> Check {
    match try_check!(map::residue_class(x)) {
        ResidueClass::C0 => Check::Holds,
        ResidueClass::C1 => {
            let even = try_check!(map::pred_even(x));
            let (image, _) = try_check!(map::step(x));
            ensure!(class(&even) == ResidueClass::C2, "P_e({x}) = {even} is not in [2]");
            ensure!(class(&image) == ResidueClass::C2, "T({x}) = {image} is not in [2]");
            Check::Holds
        }
        ResidueClass::C2 => {
            let (image, rule) = try_check!(map::reduced_step(x));
            ensure!(class(&image) == ResidueClass::C2, "T'({x}) = {image} by {rule} is not in [2]");
            match trajectory::correspondence(x, budget) {
                Ok(true) => Check::Holds,
                Ok(false) => Check::Violated(format!("T and T' orbits of {x} disagree on [2]")),
                Err(Error::Inconclusive { .. }) => {
                    Check::Inconclusive(format!("orbit of {x} exceeded {budget} steps"))
                }
                Err(e) => Check::Violated(e.to_string()),
            }
        }
    }
}

/// For class-0 values `x >= 3`: `x = 2^i * q` with `q` odd and divisible by
/// 3, `T^i(x) = q`, and once the orbit leaves class 0 it never comes back.
pub fn check_c0_chain(x: &Nat, budget: u64) -> Check {
    if try_check!(map::residue_class(x)) != ResidueClass::C0 {
        return Check::Holds;
    }
    let chain = try_check!(cycles::c0_chain(x));
    ensure!(chain.q.is_odd() && chain.q.rem_u64(3) == 0, "{x} = 2^{} * {} with bad odd part", chain.i, chain.q);
    ensure!(chain.q.shl(chain.i) == *x, "2^{} * {} != {x}", chain.i, chain.q);
    let mut v = x.clone();
    for _ in 0..chain.i {
        v = try_check!(map::step(&v)).0;
    }
    ensure!(v == chain.q, "T^{}({x}) = {v}, expected {}", chain.i, chain.q);

    let mut left = false;
    let mut steps = 0u64;
    let mut v = x.clone();
    while v != 1 {
        if steps >= budget {
            return Check::Inconclusive(format!("orbit of {x} exceeded {budget} steps"));
        }
        v = try_check!(map::step(&v)).0;
        steps += 1;
        let in_c0 = class(&v) == ResidueClass::C0;
        ensure!(!(left && in_c0), "orbit of {x} re-enters [0] at {v} after {steps} steps");
        left |= !in_c0;
    }
    Check::Holds
}

/// Replays the check behind `fact` at a single value.
pub fn recheck(fact: Fact, x: &Nat, budget: u64) -> Check {
    match fact {
        Fact::PredecessorStructure => check_predecessor_structure(x),
        Fact::Transitions => check_transitions(x),
        Fact::Reduction => check_reduction(x, budget),
        Fact::NoSmallCycles => cycles::check_no_small_cycle(x),
        Fact::C0Chains => check_c0_chain(x, budget),
    }
}

/// Runs the check for `fact` over every `x` in `[lo, hi]`.
pub fn verify(fact: Fact, lo: u64, hi: u64, opts: &VerifyOptions) -> Result<RangeReport> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    let started = Instant::now();
    let budget = opts.budget;
    let blocks = exec::blocks(lo, hi, opts.block.max(1));
    let partials = opts.executor.map(&blocks, |&(a, b)| {
        let mut part = RangeReport::new(fact.id(), a, b);
        for v in a..=b {
            let x = Nat::new(v);
            match recheck(fact, &x, budget) {
                Check::Holds => {}
                Check::Violated(detail) => part.violations.push(Violation { x, detail }),
                Check::Inconclusive(detail) => part.inconclusive.push(Violation { x, detail }),
            }
            part.checked += 1;
        }
        part
    });

    let mut report = RangeReport::new(fact.id(), lo, hi);
    for part in partials {
        report.checked += part.checked;
        report.violations.extend(part.violations);
        report.inconclusive.extend(part.inconclusive);
    }
    report.elapsed = started.elapsed();
    Ok(report)
}

pub fn verify_predecessor_structure(lo: u64, hi: u64, opts: &VerifyOptions) -> Result<RangeReport> {
    verify(Fact::PredecessorStructure, lo, hi, opts)
}

pub fn verify_transitions(lo: u64, hi: u64, opts: &VerifyOptions) -> Result<RangeReport> {
    verify(Fact::Transitions, lo, hi, opts)
}

pub fn verify_reduction(lo: u64, hi: u64, opts: &VerifyOptions) -> Result<RangeReport> {
    verify(Fact::Reduction, lo, hi, opts)
}

pub fn verify_c0_chains(lo: u64, hi: u64, opts: &VerifyOptions) -> Result<RangeReport> {
    verify(Fact::C0Chains, lo, hi, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Nat {
        Nat::new(v)
    }

    #[test]
    fn predecessor_structure_examples() {
        assert_eq!(check_predecessor_structure(&n(5)), Check::Holds);
        assert_eq!(check_predecessor_structure(&n(17)), Check::Holds);
        assert_eq!(check_predecessor_structure(&n(2)), Check::Holds);
        // P_o(5) = 3 in [0] with (5-2)/3 = 1 in [1]; P_o(17) = 11 in [2] with 5 in [2].
        assert_eq!(map::pred_odd(&n(5)).unwrap(), Some(n(3)));
        assert_eq!(map::pred_odd(&n(17)).unwrap(), Some(n(11)));
        assert!(matches!(check_predecessor_structure(&n(0)), Check::Violated(_)));
    }

    #[test]
    fn transition_examples() {
        assert_eq!(map::step(&n(6)).unwrap().0, n(3));
        assert_eq!(map::step(&n(3)).unwrap().0, n(5));
        assert_eq!(map::step(&n(8)).unwrap().0, n(4));
        for x in [6u64, 42, 3, 21, 7, 13, 4, 10, 8, 20, 5, 11] {
            assert_eq!(check_transitions(&n(x)), Check::Holds, "x = {x}");
        }
    }

    #[test]
    fn reduction_elimination_examples() {
        assert_eq!(map::pred_even(&n(4)).unwrap(), n(8));
        assert_eq!(map::step(&n(4)).unwrap().0, n(2));
        assert_eq!(map::pred_even(&n(13)).unwrap(), n(26));
        assert_eq!(map::step(&n(13)).unwrap().0, n(20));
        assert_eq!(check_reduction(&n(4), 100), Check::Holds);
        assert_eq!(check_reduction(&n(13), 100), Check::Holds);
        assert!(matches!(check_reduction(&n(27 * 3 + 2), 3), Check::Inconclusive(_)));
    }

    #[test]
    fn c0_chain_check() {
        for x in [3u64, 6, 12, 24, 21, 42, 9, 27] {
            assert_eq!(check_c0_chain(&n(x), 10_000), Check::Holds, "x = {x}");
        }
    }

    #[test]
    fn verify_counts_every_value() {
        let opts = VerifyOptions { block: 7, ..Default::default() };
        for fact in Fact::ALL {
            let r = verify(fact, 1, 100, &opts).unwrap();
            assert!(r.is_complete(), "{fact}");
            assert!(r.is_clean(), "{fact}: {:?}", r.violations);
            assert!(r.inconclusive.is_empty());
        }
        assert!(verify(Fact::Transitions, 0, 10, &opts).is_err());
        assert!(verify(Fact::Transitions, 10, 9, &opts).is_err());
    }

    #[test]
    fn inconclusive_is_not_a_violation() {
        let opts = VerifyOptions { budget: 5, ..Default::default() };
        let r = verify_reduction(2, 200, &opts).unwrap();
        assert!(r.is_clean());
        assert!(!r.inconclusive.is_empty());
        for entry in &r.inconclusive {
            assert!(matches!(recheck(Fact::Reduction, &entry.x, 5), Check::Inconclusive(_)));
        }
    }

    #[test]
    fn fact_ids_round_trip() {
        for fact in Fact::ALL {
            assert_eq!(fact.id().parse::<Fact>().unwrap(), fact);
        }
        assert!("no-such-check".parse::<Fact>().is_err());
    }

    #[test]
    fn report_json_shape() {
        let r = verify_transitions(1, 10, &VerifyOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["fact_id"], "transitions");
        assert_eq!(v["range"], serde_json::json!([1, 10]));
        assert_eq!(v["checked"], 10);
        let back: RangeReport = serde_json::from_value(v).unwrap();
        assert!(back.same_outcome(&r));
    }
}
