//! The shortcut Collatz map `T`, its predecessor structure by residue class
//! mod 3, the reduced map `T'` on class 2, cycle algebra for rule words, and
//! exhaustive range verifiers.
//!
//! Values are [`Nat`]s: unbounded, with a `u64` fast path that escalates on
//! overflow. Range work goes through an [`Executor`], which is rayon-backed
//! when the `parallel` feature is on and sequential otherwise.

pub mod cycles;
pub mod error;
pub mod exec;
pub mod facts;
pub mod map;
pub mod nat;
pub mod sweep;
pub mod trajectory;
pub mod tree;

pub use error::{Error, Result};
pub use exec::Executor;
pub use map::{ReducedRule, ResidueClass, Rule};
pub use nat::Nat;
