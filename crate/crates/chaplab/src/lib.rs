//! chaplab: a numerical laboratory for the one-dimensional Chaplygin gas.
//!
//! The pressure law `p = p0 - mu^2 / rho` makes both characteristic fields
//! linearly degenerate: classical compression shocks never form, yet smooth
//! initial data can still focus the two *different* characteristic families
//! onto each other. The solution stays bounded while its gradients blow up,
//! and past the first focusing time the density concentrates on a point or
//! a vertical segment while remaining a weak solution in the generalized
//! sense. This crate realizes the exact characteristic-coordinate solution,
//! locates and classifies those singularities, fits the blowup rates, and
//! verifies the weak-form conditions numerically.
//!
//! Modules follow the pipeline:
//!
//! * [`initial_data`] — smooth curve families, scenario library, assumption
//!   validation;
//! * [`charmap`] — the coordinate map, its inverse, the classical solution
//!   and its derivatives;
//! * [`singularity`] — the singular set, fold/cusp classification, blowup
//!   point, envelopes, life span;
//! * [`asymptotics`] — scenario constants, the cubic inversion near the
//!   blowup point, regime classification, rate fitting;
//! * [`weakform`] — weak-solution residuals, excised singular integrals,
//!   contact conditions on the singular line, mass windows;
//! * [`cli`] — the `chaplab` command-line front end;
//! * [`acceptance`] — the self-check suite run by `chaplab report` and the
//!   integration tests.

pub mod acceptance;
pub mod asymptotics;
pub mod charmap;
pub mod cli;
pub mod error;
pub mod initial_data;
pub mod numerics;
pub mod singularity;
pub mod weakform;

pub use error::{Error, Result};
