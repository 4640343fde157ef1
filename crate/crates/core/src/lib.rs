//! Nash equilibria of a preemption Dynkin game in which each player is unsure
//! whether the opponent exists.
//!
//! Everything is built from the one-player value `V` and payoff `g`:
//!
//! - [`model`]: closed forms for the perpetual real option on a GBM.
//! - [`stopping`]: a generic value-iteration solver producing a [`ValueOracle`].
//! - [`regions`]: the belief boundaries `b`, `c` and the region of a `(p, x)` pair.
//! - [`belief`]: the reflected belief process and the stopping intensity it generates.
//! - [`equilibrium`]: the equilibrium strategy pair and values for any priors.
//! - [`engine`]: payoff evaluation, semi-analytic and by path simulation.
//! - [`verify`]: checks turning the equilibrium claims into pass/fail reports.

pub mod belief;
pub mod engine;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod regions;
pub mod stopping;
pub mod verify;

pub use error::{Error, Result};
pub use model::GbmRealOptionModel;
pub use regions::{BeliefPoint, RegionLabel};
pub use stopping::{DiffusionSpec, Discretization, TabulatedOracle, ValueOracle};
