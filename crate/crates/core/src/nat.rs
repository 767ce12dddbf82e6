//! Unbounded non-negative integers with a machine-word fast path.
//!
//! Values that fit in a `u64` are stored inline; anything larger is held as a
//! [`BigUint`]. Every constructor normalizes, so two equal values always have
//! the same representation and the derived ordering is the numeric one.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    // Variant order matters: every `Small` is below every `Big`.
    Small(u64),
    Big(BigUint),
}

/// A non-negative integer of unbounded size.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nat(Repr);

impl Nat {
    pub const ZERO: Nat = Nat(Repr::Small(0));
    pub const ONE: Nat = Nat(Repr::Small(1));
    pub const TWO: Nat = Nat(Repr::Small(2));

    pub const fn new(value: u64) -> Self {
        Nat(Repr::Small(value))
    }

    pub fn from_u128(value: u128) -> Self {
        match u64::try_from(value) {
            Ok(v) => Nat::new(v),
            Err(_) => Nat(Repr::Big(BigUint::from(value))),
        }
    }

    pub fn from_biguint(value: BigUint) -> Self {
        match value.to_u64() {
            Some(v) => Nat::new(v),
            None => Nat(Repr::Big(value)),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Small(v) => BigUint::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self.0 {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_even(&self) -> bool {
        match &self.0 {
            Repr::Small(v) => v % 2 == 0,
            Repr::Big(b) => !b.bit(0),
        }
    }

    pub fn is_odd(&self) -> bool {
        !self.is_even()
    }

    /// Remainder modulo a small positive modulus.
    pub fn rem_u64(&self, modulus: u64) -> u64 {
        assert!(modulus > 0, "modulus must be positive");
        match &self.0 {
            Repr::Small(v) => v % modulus,
            Repr::Big(b) => (b % modulus).to_u64().expect("remainder below modulus"),
        }
    }

    /// Number of trailing zero bits; `None` for zero.
    pub fn trailing_zeros(&self) -> Option<u64> {
        match &self.0 {
            Repr::Small(0) => None,
            Repr::Small(v) => Some(u64::from(v.trailing_zeros())),
            Repr::Big(b) => b.trailing_zeros(),
        }
    }

    pub fn bits(&self) -> u64 {
        match &self.0 {
            Repr::Small(v) => u64::from(64 - v.leading_zeros()),
            Repr::Big(b) => b.bits(),
        }
    }

    /// `self * factor + addend`.
    pub fn mul_add(&self, factor: u64, addend: u64) -> Nat {
        if let Repr::Small(v) = self.0 {
            if let Some(r) = v.checked_mul(factor).and_then(|p| p.checked_add(addend)) {
                return Nat::new(r);
            }
            let wide = u128::from(v) * u128::from(factor) + u128::from(addend);
            return Nat::from_u128(wide);
        }
        Nat::from_biguint(self.to_biguint() * factor + addend)
    }

    /// `self - rhs`, or `None` if that would be negative.
    pub fn checked_sub(&self, rhs: u64) -> Option<Nat> {
        match &self.0 {
            Repr::Small(v) => v.checked_sub(rhs).map(Nat::new),
            // Big values exceed u64::MAX, so the difference is non-negative.
            Repr::Big(b) => Some(Nat::from_biguint(b - rhs)),
        }
    }

    /// Floor division by a small positive divisor.
    pub fn div_floor(&self, divisor: u64) -> Nat {
        assert!(divisor > 0, "division by zero");
        match &self.0 {
            Repr::Small(v) => Nat::new(v / divisor),
            Repr::Big(b) => Nat::from_biguint(b / divisor),
        }
    }

    /// Division that only succeeds when `divisor` divides `self`.
    pub fn div_exact(&self, divisor: u64) -> Option<Nat> {
        (self.rem_u64(divisor) == 0).then(|| self.div_floor(divisor))
    }

    pub fn shl(&self, bits: u64) -> Nat {
        if let Repr::Small(v) = self.0 {
            if bits < 64 && (v == 0 || u64::from(v.leading_zeros()) >= bits) {
                return Nat::new(v << bits);
            }
        }
        Nat::from_biguint(self.to_biguint() << bits)
    }

    pub fn shr(&self, bits: u64) -> Nat {
        match &self.0 {
            Repr::Small(v) => Nat::new(if bits >= 64 { 0 } else { v >> bits }),
            Repr::Big(b) => Nat::from_biguint(b >> bits),
        }
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl From<u64> for Nat {
    fn from(value: u64) -> Self {
        Nat::new(value)
    }
}

impl From<u32> for Nat {
    fn from(value: u32) -> Self {
        Nat::new(u64::from(value))
    }
}

impl From<u128> for Nat {
    fn from(value: u128) -> Self {
        Nat::from_u128(value)
    }
}

impl From<BigUint> for Nat {
    fn from(value: BigUint) -> Self {
        Nat::from_biguint(value)
    }
}

impl From<&Nat> for BigUint {
    fn from(value: &Nat) -> Self {
        value.to_biguint()
    }
}

impl PartialEq<u64> for Nat {
    fn eq(&self, other: &u64) -> bool {
        matches!(self.0, Repr::Small(v) if v == *other)
    }
}

impl PartialOrd<u64> for Nat {
    fn partial_cmp(&self, other: &u64) -> Option<Ordering> {
        Some(match self.0 {
            Repr::Small(v) => v.cmp(other),
            Repr::Big(_) => Ordering::Greater,
        })
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => fmt::Display::fmt(v, f),
            Repr::Big(b) => fmt::Display::fmt(b, f),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid natural number literal {0:?}")]
pub struct ParseNatError(String);

impl FromStr for Nat {
    type Err = ParseNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.trim().replace('_', "");
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError(s.to_owned()));
        }
        if let Ok(v) = digits.parse::<u64>() {
            return Ok(Nat::new(v));
        }
        BigUint::from_str(&digits)
            .map(Nat::from_biguint)
            .map_err(|_| ParseNatError(s.to_owned()))
    }
}

// JSON numbers lose precision past 2^53 in many consumers, but u64 round-trips
// through serde_json exactly. Anything wider is written as a decimal string.
impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Repr::Small(v) => serializer.serialize_u64(*v),
            Repr::Big(b) => serializer.serialize_str(&b.to_string()),
        }
    }
}

struct NatVisitor;

impl Visitor<'_> for NatVisitor {
    type Value = Nat;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a non-negative integer or a decimal string")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Nat, E> {
        Ok(Nat::new(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Nat, E> {
        u64::try_from(v)
            .map(Nat::new)
            .map_err(|_| E::custom("negative value"))
    }

    fn visit_u128<E: de::Error>(self, v: u128) -> Result<Nat, E> {
        Ok(Nat::from_u128(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Nat, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(NatVisitor)
    }
}

impl Zero for Nat {
    fn zero() -> Self {
        Nat::ZERO
    }

    fn is_zero(&self) -> bool {
        Nat::is_zero(self)
    }
}

impl std::ops::Add for Nat {
    type Output = Nat;

    fn add(self, rhs: Nat) -> Nat {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(s) = a.checked_add(*b) {
                return Nat::new(s);
            }
        }
        Nat::from_biguint(self.to_biguint() + rhs.to_biguint())
    }
}
