//! Formulations and the marching-on-in-time solver.

mod formulation;
mod history;
mod incident;
mod mot;

pub use formulation::{Formulation, Materials, Recipe, RhsRow, Term, TermKind};
pub use history::{growth_diagnostic, high_mode_rms, noise_levels, NoiseLevels, GrowthDiagnostic, SolutionHistory, Verdict, GROWTH_THRESHOLD, GROWTH_WINDOW};
pub use incident::{default_t0, incident_trace, IncidentWave};
pub use mot::{assemble_mot, assemble_mot_with, march, single_layer_at, KernelStore, MotOperator, CACHE_ENV};
