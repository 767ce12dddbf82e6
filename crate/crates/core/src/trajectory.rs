//! Forward orbits under `T` and `T'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, ReducedRule, ResidueClass, Rule};
use crate::nat::Nat;

/// Trajectories keep at most this many values unless told otherwise.
pub const DEFAULT_LENGTH_CAP: usize = 100_000;

/// An orbit segment together with the rule fired at each transition.
///
/// When the orbit is longer than the storage cap, `values` and `rules` hold
/// only the prefix and `truncated` is set; `steps`, `peak` and `last` always
/// describe the whole orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory<R> {
    pub start: Nat,
    pub values: Vec<Nat>,
    pub rules: Vec<R>,
    pub steps: u64,
    pub peak: Nat,
    pub last: Nat,
    pub reached_target: bool,
    pub truncated: bool,
}

pub type TOrbit = Trajectory<Rule>;
pub type ReducedOrbit = Trajectory<ReducedRule>;

impl<R: Copy> Trajectory<R> {
    fn begin(start: &Nat) -> Self {
        Trajectory {
            start: start.clone(),
            values: vec![start.clone()],
            rules: Vec::new(),
            steps: 0,
            peak: start.clone(),
            last: start.clone(),
            reached_target: false,
            truncated: false,
        }
    }

    fn push(&mut self, value: Nat, rule: R, cap: usize) {
        self.steps += 1;
        if value > self.peak {
            self.peak = value.clone();
        }
        if !self.truncated && self.values.len() < cap {
            self.values.push(value.clone());
            self.rules.push(rule);
        } else {
            self.truncated = true;
        }
        self.last = value;
    }
}

fn iterate<R: Copy>(
    x: &Nat,
    budget: u64,
    target: &Nat,
    cap: usize,
    mut next: impl FnMut(&Nat) -> Result<(Nat, R)>,
) -> Result<Trajectory<R>> {
    let mut traj = Trajectory::begin(x);
    let mut current = x.clone();
    while current != *target && traj.steps < budget {
        let (value, rule) = next(&current)?;
        traj.push(value.clone(), rule, cap.max(1));
        current = value;
    }
    traj.reached_target = current == *target;
    Ok(traj)
}

/// Iterates `T` from `x` until `target` is hit or `budget` steps are spent.
pub fn orbit(x: &Nat, budget: u64, target: &Nat) -> Result<TOrbit> {
    orbit_capped(x, budget, target, DEFAULT_LENGTH_CAP)
}

pub fn orbit_capped(x: &Nat, budget: u64, target: &Nat, cap: usize) -> Result<TOrbit> {
    if x.is_zero() {
        return Err(Error::Zero);
    }
    iterate(x, budget, target, cap, map::step)
}

/// Iterates `T'` from `x` until it reaches 2 or `budget` steps are spent.
pub fn reduced_orbit(x: &Nat, budget: u64) -> Result<ReducedOrbit> {
    reduced_orbit_capped(x, budget, DEFAULT_LENGTH_CAP)
}

pub fn reduced_orbit_capped(x: &Nat, budget: u64, cap: usize) -> Result<ReducedOrbit> {
    map::reduced_step(x)?;
    iterate(x, budget, &Nat::TWO, cap, map::reduced_step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    ReachedTarget,
    DroppedBelowFloor,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitStatus {
    pub outcome: Outcome,
    pub steps_used: u64,
}

/// Checks whether the orbit of `x` reaches 1.
///
/// Stops early with [`Outcome::DroppedBelowFloor`] at the first value below
/// `floor`; the caller is responsible for having verified everything below
/// the floor already. Reaching 1 takes precedence over dropping below the
/// floor.
pub fn converges(x: &Nat, budget: u64, floor: &Nat) -> Result<OrbitStatus> {
    if x.is_zero() {
        return Err(Error::Zero);
    }
    let settled = |v: &Nat| {
        if *v == 1 {
            Some(Outcome::ReachedTarget)
        } else if v < floor {
            Some(Outcome::DroppedBelowFloor)
        } else {
            None
        }
    };
    if let Some(outcome) = settled(x) {
        return Ok(OrbitStatus { outcome, steps_used: 0 });
    }

    let mut steps = 0u64;
    let mut current = x.clone();

    // Word-sized loop until the value or the floor leaves u64 range.
    if let (Some(mut v), Some(fl)) = (current.to_u64(), floor.to_u64()) {
        while steps < budget {
            let next = if v % 2 == 0 {
                Some(v / 2)
            } else {
                v.checked_mul(3).and_then(|t| t.checked_add(1)).map(|t| t / 2)
            };
            let Some(next) = next else { break };
            v = next;
            steps += 1;
            if v == 1 {
                return Ok(OrbitStatus { outcome: Outcome::ReachedTarget, steps_used: steps });
            }
            if v < fl {
                return Ok(OrbitStatus { outcome: Outcome::DroppedBelowFloor, steps_used: steps });
            }
        }
        current = Nat::new(v);
    }

    while steps < budget {
        current = map::step(&current)?.0;
        steps += 1;
        if let Some(outcome) = settled(&current) {
            return Ok(OrbitStatus { outcome, steps_used: steps });
        }
    }
    Ok(OrbitStatus { outcome: Outcome::BudgetExhausted, steps_used: steps })
}

/// Checks that the class-2 members of the `T` orbit of `x` (down to 2) are
/// exactly the `T'` orbit of `x`, position by position.
///
/// Running out of budget on either map is reported as
/// [`Error::Inconclusive`], never as a mismatch.
pub fn correspondence(x: &Nat, budget: u64) -> Result<bool> {
    map::reduced_step(x)?;
    let inconclusive = || Error::Inconclusive { start: x.clone(), budget };

    let mut full = x.clone();
    let mut reduced = x.clone();
    let mut full_steps = 0u64;
    let mut reduced_steps = 0u64;
    loop {
        if full != reduced {
            return Ok(false);
        }
        if reduced == 2 {
            return Ok(true);
        }
        if reduced_steps >= budget {
            return Err(inconclusive());
        }
        reduced = map::reduced_step(&reduced)?.0;
        reduced_steps += 1;

        // Advance T to its next class-2 value, or stop at the target.
        loop {
            if full_steps >= budget {
                return Err(inconclusive());
            }
            full = map::step(&full)?.0;
            full_steps += 1;
            if ResidueClass::of(&full) == ResidueClass::C2 {
                break;
            }
        }
    }
}
