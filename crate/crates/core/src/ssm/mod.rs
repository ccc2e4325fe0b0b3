//! Contour-integral eigensolver for matrix-valued analytic functions and the
//! strip scans that turn characteristic problems into root sets.

mod contour;
mod scan;
mod solver;

pub use contour::{determinant, winding_numbers, ContourBox, Rect};
pub use scan::{
    cut_lines, dedup, default_region, scan_strip, zero_root_modes, Root, RootSet, ScanConfig, StabilityVerdict,
    DEDUP_TOL, VERDICT_TOL,
};
pub use solver::{certify, hankel_candidates, polish, sample, solve_sampled, ssm_solve, Eigenpair, NodeSamples, SsmConfig};

#[cfg(test)]
mod tests;
