//! Special functions: cylinder functions with a relocated branch cut,
//! Hankel-Bessel products and the time-basis symbol.

mod bessel;
mod hj;
mod scaled;

pub use bessel::{
    bessel_j, bessel_j_deriv, hankel1_cut, hankel1_cut_deriv, CylinderTable, MAX_ORDER,
};
pub use hj::{hj_product, lattice_shift, phi_hat, phi_hat_shifted, HJKind, ModeProducts};
pub use scaled::Scaled;

#[cfg(test)]
mod tests;
