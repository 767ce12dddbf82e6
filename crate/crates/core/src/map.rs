//! The shortcut map `T`, its inverse branches, and the reduced map `T'` on
//! residue class 2 (mod 3).
//!
//! `T(x) = x/2` for even `x` (rule R1) and `T(x) = (3x+1)/2` for odd `x`
//! (rule R2). `T'` contracts every class-1 vertex out of the graph:
//!
//! | rule | condition      | value        |
//! |------|----------------|--------------|
//! | Q1   | `x ≡ 0 (mod 4)` | `x/4`        |
//! | Q2   | `x ≡ 2 (mod 4)` | `(3x+2)/4`   |
//! | Q3   | `x` odd        | `(3x+1)/2`   |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nat::Nat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResidueClass {
    C0,
    C1,
    C2,
}

impl ResidueClass {
    pub fn of_remainder(r: u64) -> Self {
        match r % 3 {
            0 => ResidueClass::C0,
            1 => ResidueClass::C1,
            _ => ResidueClass::C2,
        }
    }

    /// Class of any value, zero included (zero sits in class 0).
    pub fn of(x: &Nat) -> Self {
        Self::of_remainder(x.rem_u64(3))
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ResidueClass::C0 => "[0]",
            ResidueClass::C1 => "[1]",
            ResidueClass::C2 => "[2]",
        };
        f.write_str(s)
    }
}

/// Branch of `T` taken at a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// `x/2`, even input.
    R1,
    /// `(3x+1)/2`, odd input.
    R2,
}

impl Rule {
    pub fn for_parity(x: &Nat) -> Self {
        if x.is_even() {
            Rule::R1
        } else {
            Rule::R2
        }
    }
}

/// Branch of `T'` taken at a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReducedRule {
    /// `x/4`, `x ≡ 0 (mod 4)`.
    Q1,
    /// `(3x+2)/4`, `x ≡ 2 (mod 4)`.
    Q2,
    /// `(3x+1)/2`, `x` odd.
    Q3,
}

impl ReducedRule {
    pub fn for_value(x: &Nat) -> Self {
        match x.rem_u64(4) {
            0 => ReducedRule::Q1,
            2 => ReducedRule::Q2,
            _ => ReducedRule::Q3,
        }
    }

    /// Number of `T` steps one application stands for.
    pub fn t_steps(self) -> u64 {
        match self {
            ReducedRule::Q1 | ReducedRule::Q2 => 2,
            ReducedRule::Q3 => 1,
        }
    }
}

macro_rules! display_as_debug {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(self, f)
            }
        }
    )*};
}
display_as_debug!(Rule, ReducedRule);

fn positive(x: &Nat) -> Result<()> {
    if x.is_zero() {
        Err(Error::Zero)
    } else {
        Ok(())
    }
}

fn in_c2(x: &Nat) -> Result<()> {
    positive(x)?;
    if ResidueClass::of(x) == ResidueClass::C2 {
        Ok(())
    } else {
        Err(Error::WrongClass {
            value: x.clone(),
            expected: ResidueClass::C2,
        })
    }
}

pub fn residue_class(x: &Nat) -> Result<ResidueClass> {
    positive(x)?;
    Ok(ResidueClass::of(x))
}

pub fn step(x: &Nat) -> Result<(Nat, Rule)> {
    positive(x)?;
    Ok(match Rule::for_parity(x) {
        Rule::R1 => (x.shr(1), Rule::R1),
        Rule::R2 => (x.mul_add(3, 1).shr(1), Rule::R2),
    })
}

/// The even predecessor `2x`, which always exists.
pub fn pred_even(x: &Nat) -> Result<Nat> {
    positive(x)?;
    Ok(x.shl(1))
}

/// The odd predecessor `(2x-1)/3`, present exactly when `x` is in class 2.
pub fn pred_odd(x: &Nat) -> Result<Option<Nat>> {
    positive(x)?;
    if ResidueClass::of(x) != ResidueClass::C2 {
        return Ok(None);
    }
    let twice_minus_one = x.shl(1).checked_sub(1).expect("x >= 1");
    Ok(Some(
        twice_minus_one
            .div_exact(3)
            .expect("2x-1 is divisible by 3 for x in class 2"),
    ))
}

/// All `y` with `T(y) = x`, even predecessor first.
pub fn predecessors(x: &Nat) -> Result<Vec<(Nat, Rule)>> {
    let mut out = vec![(pred_even(x)?, Rule::R1)];
    if let Some(odd) = pred_odd(x)? {
        out.push((odd, Rule::R2));
    }
    Ok(out)
}

pub fn reduced_step(x: &Nat) -> Result<(Nat, ReducedRule)> {
    in_c2(x)?;
    let rule = ReducedRule::for_value(x);
    let next = match rule {
        ReducedRule::Q1 => x.shr(2),
        ReducedRule::Q2 => x.mul_add(3, 2).shr(2),
        ReducedRule::Q3 => x.mul_add(3, 1).shr(1),
    };
    Ok((next, rule))
}

/// All `y` in class 2 with `T'(y) = x`, ordered Q1, Q2, Q3.
///
/// A self-loop is reported like any other predecessor: at `x = 2` the Q2
/// inverse is 2 itself.
pub fn reduced_predecessors(x: &Nat) -> Result<Vec<(Nat, ReducedRule)>> {
    in_c2(x)?;
    let mut out = vec![(x.shl(2), ReducedRule::Q1)];

    let q2 = x
        .shl(2)
        .checked_sub(2)
        .and_then(|v| v.div_exact(3))
        .expect("4x-2 is divisible by 3 for x in class 2");
    if q2.rem_u64(4) == 2 && ResidueClass::of(&q2) == ResidueClass::C2 {
        out.push((q2, ReducedRule::Q2));
    }

    let q3 = pred_odd(x)?.expect("x is in class 2");
    if ResidueClass::of(&q3) == ResidueClass::C2 {
        out.push((q3, ReducedRule::Q3));
    }
    Ok(out)
}
