//! Sample-efficient reinforcement learning for finite-horizon MDPs whose
//! optimal action values are linear in a known feature map and whose action
//! sets let every feature direction be played.
//!
//! The crate bundles:
//!
//! - [`geometry`]: regular convex action sets (ball / box / ellipsoid) with
//!   closed-form support values and maximizers;
//! - [`mdp`]: instance types with rewards derived by Bellman inversion, so
//!   `Q*_h(s,a) = ⟨φ(s)+a, θ*_h⟩` holds exactly;
//! - [`envgen`]: a synthetic instance generator plus a certifier for every
//!   assumption the learners rely on;
//! - [`oracle`]: exact optimal values (two independent routes), exact policy
//!   evaluation, Bellman residuals, and optimality gaps;
//! - [`sim`]: the trajectory-learning channel with reproducible batching;
//!   each episode reveals only the visited action sets and the total reward;
//! - [`convex`]: the basis-direction learner for identical convex action
//!   sets within each step;
//! - [`diffr`]: the grid-search learner for per-state ball radii with a
//!   radius-doubling outer loop;
//! - [`harness`]: experiment configs, run records, sweeps, and reports
//!   behind the `ballrl` command-line tool.
//!
//! Start with the `examples/` directory; each example exercises one of the
//! capabilities above end to end.

pub mod convex;
pub mod diffr;
pub mod envgen;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mdp;
pub mod oracle;
pub mod sim;

pub use error::{Error, Result};
