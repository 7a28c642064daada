//! Iterated-elimination learning in anti-coordination network games, and
//! the control policies that steer it to maximum anti-coordination.
//!
//! Players sit on a bipartite graph whose sides are the two player types.
//! Each player starts undecided and repeatedly eliminates dominated
//! actions ([`learning`]). The dynamics can stall with undecided players or
//! settle on profiles where neighbors both play 1; the remaining modules
//! compute controls that fix this:
//!
//! * [`policy`]: static and eventually-constant dynamic policies, their
//!   costs, and exact feasibility checks.
//! * [`vertex_cover`]: the cover-based policy built from König's theorem.
//! * [`greedy`]: cascade-potential greedy selection and its variants.
//! * [`exact`]: exhaustive oracles for small instances.
//! * [`benchmarks`]: star, line and ring networks with closed-form optima.

pub mod benchmarks;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod game;
pub mod greedy;
pub mod learning;
pub mod policy;
pub mod random;
pub(crate) mod sim;
pub mod vertex_cover;

pub use error::{Error, Result};
pub use game::{Action, ActionProfile, Game, Graph, PayoffConstants};
pub use learning::Trajectory;
pub use policy::{Control, CostReport, DynamicPolicy, Policy, Violation};

/// Exact rational used for dynamic costs.
pub type Rational = num_rational::Ratio<u64>;
