//! Multi-species ant colony optimization.
//!
//! Ant species are behavior profiles layered on a common Ant Colony System
//! core:
//!
//! * [`acs`]: the baseline colony (state transition rule, local, inner and
//!   global pheromone updates),
//! * [`pharaoh`]: three cooperating colonies with negative "no-entry"
//!   pheromone and u-turning exploiters,
//! * [`sbsam`]: sensitive ants with a virtual step-back state,
//! * [`mbmp`]: hybrid colony with degree-swap refinement for matrix bandwidth
//!   minimization,
//! * [`dps`]: forward/backward ant routing over a weighted network.
//!
//! Every solver is deterministic for a fixed seed: each ant owns an
//! independent random stream, and pheromone writes made during construction
//! are replayed at the iteration barrier in ant order, so sequential and
//! parallel runs produce identical results.

pub mod acs;
pub mod bench;
pub mod dps;
mod error;
pub mod instances;
pub mod mbmp;
pub mod pharaoh;
pub mod pheromone;
pub mod sbsam;
pub mod stream;

pub use error::{Error, Result};
