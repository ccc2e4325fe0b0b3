//! Closed-form solutions on the unit circle: mode series in frequency,
//! synthesised in time by FFT.

mod mie;
mod synthesis;

pub use mie::{mie_dirichlet_q, mie_transmission, mode_count, static_limit, ModePair};
pub use synthesis::{
    exact_time_history, synthesise, PulseOptions, ReferenceProblem, ReferenceRun, SpectralPulse, WRAPAROUND_TOL,
};
