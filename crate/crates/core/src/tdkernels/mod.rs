//! Influence coefficients of the retarded layer potentials.

mod blocks;
mod influence;
mod kind;
mod quad;
mod radial;

pub use blocks::{assemble_history, assemble_lag_blocks, decode, KernelCache, KernelHistory, LagBlock};
pub use influence::{influence, influence_at, outside_light_cone, QUAD_REL_TOL};
pub use kind::{PotentialKind, Trace};
