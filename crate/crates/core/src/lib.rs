//! Constrained shortest-path reformulations over decision diagrams.
//!
//! The crate is organised bottom-up:
//!
//! * [`dd`] builds, reduces and traverses layered decision diagrams compiled
//!   from recursive (dynamic-programming) models.
//! * [`csp`] solves shortest/longest paths over a diagram subject to
//!   non-negative arc budget rows, by labeling, by the pulse algorithm, by a
//!   flow MILP, and by brute force.
//! * [`milp`] is a small dense simplex / branch-and-bound engine with CPLEX LP
//!   file output, so nothing here needs an external solver.
//! * [`bilevel`] turns a blocking bilevel program into a single-level MILP
//!   through the follower's diagram and its network dual.
//! * [`robust`] solves the robust TSP with time windows by augmenting
//!   per-scenario arrival states until no scenario separates the route.

pub mod bilevel;
pub mod csp;
pub mod dd;
pub mod milp;
pub mod robust;

mod error;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    /// Multiplier that turns this sense into minimization.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }

    /// `true` if `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Min => a < b,
            Sense::Max => a > b,
        }
    }
}

/// Cooperative wall-clock limit checked at iteration boundaries.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn after(limit: Duration) -> Self {
        Deadline(Some(Instant::now() + limit))
    }

    pub fn at(instant: Instant) -> Self {
        Deadline(Some(instant))
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }

    pub fn check(&self) -> Result<()> {
        if self.expired() {
            Err(Error::TimeLimit)
        } else {
            Ok(())
        }
    }
}
