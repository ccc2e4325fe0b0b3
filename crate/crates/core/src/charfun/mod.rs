//! Characteristic functions whose zeros are the characteristic roots of the
//! time-discretised schemes on the unit circle.
//!
//! All symbols drop the common `i pi / 2` prefactor; identity terms are
//! scaled to match (see [`LatticeSums::constant`]).

mod discrete;
mod problems;
mod series;

pub use discrete::{default_truncation, u_coefficient, v_coefficient, DiscreteCircle};
pub use problems::{
    check_recipe, term_symbol, transmission_matrix, CharProblem, CircleModes, FamilyMember, ModeFamily,
};
pub use series::{
    augmented_bm_series, bm_series, bm_zero_limit, check_cut, mode_series, zero_limit, LatticeSums, SeriesControl,
    ZeroLimit, CUT_MARGIN,
};

#[cfg(test)]
mod tests;
