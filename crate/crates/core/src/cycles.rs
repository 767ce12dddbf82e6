//! Rule-sequence algebra and exhaustive search for short cycles of `T`.
//!
//! Applying a word of `k` rules containing `r2` copies of R2 sends `x` to
//! `(3^r2 * x + A) / 2^k`, where
//!
//! ```text
//! A = sum_{j=1..r2} 3^(r2 - j) * 2^(s_j - 1)
//! ```
//!
//! and `s_1 < ... < s_r2` are the 1-based positions of R2 in the word. A cycle
//! that follows the word must therefore start at `x = A / (2^k - 3^r2)`, which
//! requires `2^k > 3^r2`. That value is only a candidate: the parities met
//! along the way must actually select the word's rules.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Executor};
use crate::facts::{self, Check, Fact, RangeReport, VerifyOptions};
use crate::map::{self, ResidueClass, Rule};
use crate::nat::Nat;

/// Longest rule word [`search_cycles`] will enumerate.
pub const MAX_SEARCH_LEN: u32 = 30;

const SEARCH_BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleSequence {
    rules: Vec<Rule>,
}

impl RuleSequence {
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(RuleSequence { rules })
    }

    /// Decodes the `k` low bits of `bits`, most significant first, with a set
    /// bit meaning R2. Numeric order of `bits` is lexicographic order of words.
    pub fn from_bits(bits: u64, k: u32) -> Result<Self> {
        assert!(k <= 64, "at most 64 rules fit in a u64");
        let rules = (0..k)
            .map(|i| {
                if bits >> (k - 1 - i) & 1 == 1 {
                    Rule::R2
                } else {
                    Rule::R1
                }
            })
            .collect();
        RuleSequence::new(rules)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn k(&self) -> u32 {
        self.rules.len() as u32
    }

    pub fn r1(&self) -> u32 {
        self.k() - self.r2()
    }

    pub fn r2(&self) -> u32 {
        self.rules.iter().filter(|r| **r == Rule::R2).count() as u32
    }

    pub fn rotated(&self, by: usize) -> RuleSequence {
        let mut rules = self.rules.clone();
        let len = rules.len();
        rules.rotate_left(by % len);
        RuleSequence { rules }
    }

    /// Smallest `p` such that the word is its length-`p` prefix repeated.
    pub fn period(&self) -> usize {
        let k = self.rules.len();
        (1..=k)
            .find(|&p| k.is_multiple_of(p) && (p..k).all(|i| self.rules[i] == self.rules[i - p]))
            .unwrap_or(k)
    }

    pub fn prefix(&self, len: usize) -> RuleSequence {
        RuleSequence {
            rules: self.rules[..len].to_vec(),
        }
    }
}

impl fmt::Display for RuleSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// The map `x -> (3^r2 * x + a) / 2^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineForm {
    pub r2: u32,
    pub k: u32,
    pub a: Nat,
}

impl AffineForm {
    pub fn r1(&self) -> u32 {
        self.k - self.r2
    }

    pub fn numerator(&self, x: &Nat) -> BigUint {
        BigUint::from(3u32).pow(self.r2) * x.to_biguint() + self.a.to_biguint()
    }

    /// The image of `x`, if it is an integer.
    pub fn apply(&self, x: &Nat) -> Option<Nat> {
        let num = self.numerator(x);
        let shift = u64::from(self.k);
        let exact = num.trailing_zeros().is_none_or(|tz| tz >= shift);
        exact.then(|| Nat::from_biguint(num >> shift))
    }
}

pub fn affine_form(seq: &RuleSequence) -> AffineForm {
    let mut a = Nat::ZERO;
    for (i, rule) in seq.rules().iter().enumerate() {
        if *rule == Rule::R2 {
            // Position s = i + 1 contributes 2^(s-1), then gets tripled by every later R2.
            a = a.mul_add(3, 0) + Nat::ONE.shl(i as u64);
        }
    }
    AffineForm {
        r2: seq.r2(),
        k: seq.k(),
        a,
    }
}

/// `2^(r1 + r2) > 3^r2`, the exact form of `r1 > r2 * (log2(3) - 1)`.
pub fn length_bound_holds(r1: u32, r2: u32) -> bool {
    BigUint::from(1u32) << (r1 + r2) > BigUint::from(3u32).pow(r2)
}

fn fixed_point_value(form: &AffineForm) -> Option<Nat> {
    if form.k <= 40 {
        // 3^40 * 2^40 < 2^128, so u128 holds every quantity here.
        let pow2 = 1u128 << form.k;
        let pow3 = 3u128.pow(form.r2);
        if pow2 <= pow3 {
            return None;
        }
        let d = pow2 - pow3;
        let a = form.a.to_u64().map(u128::from).unwrap_or_else(|| {
            let big = form.a.to_biguint();
            u128::try_from(big).expect("A < 3^40 * 2^40")
        });
        return (a.is_multiple_of(d) && a / d >= 1).then(|| Nat::from_u128(a / d));
    }
    let pow2 = BigUint::from(1u32) << form.k;
    let pow3 = BigUint::from(3u32).pow(form.r2);
    if pow2 <= pow3 {
        return None;
    }
    let d = pow2 - pow3;
    let a = form.a.to_biguint();
    let x = &a / &d;
    let rem = &a % &d;
    (rem == BigUint::ZERO && x >= BigUint::from(1u32)).then(|| Nat::from_biguint(x))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCandidate {
    pub seq: RuleSequence,
    pub x: Nat,
    /// Simulating `T` from `x` fires exactly `seq` and comes back to `x`.
    pub consistent: bool,
    /// Not a repetition of a shorter consistent word.
    pub simple: bool,
}

impl CycleCandidate {
    /// The values visited from `x`, `k` of them, by following `seq` under `T`.
    pub fn values(&self) -> Vec<Nat> {
        let mut out = Vec::with_capacity(self.seq.rules().len());
        let mut v = self.x.clone();
        for _ in self.seq.rules() {
            out.push(v.clone());
            v = map::step(&v).expect("candidate values are positive").0;
        }
        out
    }

    /// Whether this is the 1-2 cycle entered at 1 or 2, possibly repeated.
    pub fn is_trivial(&self) -> bool {
        self.consistent && (self.x == 1 || self.x == 2)
    }
}

fn follows(seq: &RuleSequence, x: &Nat) -> bool {
    let mut v = x.clone();
    for rule in seq.rules() {
        match map::step(&v) {
            Ok((next, fired)) if fired == *rule => v = next,
            _ => return false,
        }
    }
    v == *x
}

/// The algebraic fixed point of `seq`, with its parity consistency checked.
///
/// Returns `None` when `2^k <= 3^r2`, when the division leaves a remainder, or
/// when the quotient is zero.
pub fn fixed_point(seq: &RuleSequence) -> Option<CycleCandidate> {
    let form = affine_form(seq);
    let x = fixed_point_value(&form)?;
    assert!(length_bound_holds(form.r1(), form.r2));
    let consistent = follows(seq, &x);
    let period = seq.period();
    let simple = !consistent
        || period == seq.rules().len()
        || !fixed_point(&seq.prefix(period)).is_some_and(|c| c.consistent);
    Some(CycleCandidate {
        seq: seq.clone(),
        x,
        consistent,
        simple,
    })
}

/// Every consistent candidate over all words of length `1..=max_len`,
/// ordered by length and then lexicographically with R1 before R2.
pub fn search_cycles(max_len: u32) -> Result<Vec<CycleCandidate>> {
    search_cycles_with(max_len, &Executor::sequential())
}

pub fn search_cycles_with(max_len: u32, executor: &Executor) -> Result<Vec<CycleCandidate>> {
    if max_len > MAX_SEARCH_LEN {
        return Err(Error::SearchTooLong {
            requested: max_len,
            limit: MAX_SEARCH_LEN,
        });
    }
    let mut found = Vec::new();
    for k in 1..=max_len {
        found.extend(search_length(k, executor));
    }
    Ok(found)
}

/// Consistent candidates of length exactly `k`, in lexicographic order.
pub fn search_length(k: u32, executor: &Executor) -> Vec<CycleCandidate> {
    assert!((1..=MAX_SEARCH_LEN).contains(&k));
    let blocks = exec::blocks(0, (1u64 << k) - 1, SEARCH_BLOCK);
    executor
        .map(&blocks, |&(lo, hi)| {
            (lo..=hi)
                .filter_map(|bits| {
                    let seq = RuleSequence::from_bits(bits, k).expect("k >= 1");
                    fixed_point(&seq).filter(|c| c.consistent)
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
}

/// `T(x) != x`, and `T(T(x)) = x` only for `x` in {1, 2}.
pub fn check_no_small_cycle(x: &Nat) -> Check {
    let once = match map::step(x) {
        Ok((v, _)) => v,
        Err(e) => return Check::Violated(e.to_string()),
    };
    if once == *x {
        return Check::Violated(format!("T({x}) = {x}"));
    }
    let twice = map::step(&once).expect("positive").0;
    if twice == *x && !(*x == 1 || *x == 2) {
        return Check::Violated(format!("T(T({x})) = {x}"));
    }
    Check::Holds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallCycleReport {
    pub report: RangeReport,
    /// Every `x` in range with `T(T(x)) = x`.
    pub period_two: Vec<Nat>,
}

pub fn verify_small_cycles(range_max: u64, opts: &VerifyOptions) -> Result<SmallCycleReport> {
    if range_max < 2 {
        return Err(Error::InvalidRange { lo: 1, hi: range_max });
    }
    let report = facts::verify(Fact::NoSmallCycles, 1, range_max, opts)?;
    let blocks = exec::blocks(1, range_max, opts.block.max(1));
    let period_two = opts
        .executor
        .map(&blocks, |&(lo, hi)| {
            (lo..=hi)
                .map(Nat::new)
                .filter(|x| {
                    let once = map::step(x).expect("positive").0;
                    map::step(&once).expect("positive").0 == *x
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
    Ok(SmallCycleReport { report, period_two })
}

/// A class-0 value written as `2^i * q` with `q` odd; `q` is again in class 0
/// and the chain `x, x/2, ..., q` is the only way into `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct C0Chain {
    pub x: Nat,
    pub i: u64,
    pub q: Nat,
}

impl C0Chain {
    /// `x, x/2, ..., q`.
    pub fn values(&self) -> Vec<Nat> {
        (0..=self.i).map(|j| self.x.shr(j)).collect()
    }
}

pub fn c0_chain(x: &Nat) -> Result<C0Chain> {
    if map::residue_class(x)? != ResidueClass::C0 {
        return Err(Error::WrongClass {
            value: x.clone(),
            expected: ResidueClass::C0,
        });
    }
    let i = x.trailing_zeros().expect("x >= 3");
    let q = x.shr(i);
    assert!(q.is_odd() && q.rem_u64(3) == 0, "odd part of a class-0 value is an odd multiple of 3");
    Ok(C0Chain { x: x.clone(), i, q })
}
