//! Run configuration, test-case initialization, diagnostics, study drivers
//! and CSV output.

mod cases;
mod config;
mod csv;
mod diagnostics;
mod study;

pub use cases::{
    init_case, initial_density, initial_distribution, initial_micro, initial_rho, spatial_grid, velocity_model,
    CaseInit,
};
pub use config::{Case, RunConfig, Scheme, VpCorrectorPush};
pub use csv::{emit_all, emit_csv, energy_csv, phase_space_csv, rho_csv};
pub use diagnostics::{
    electric_energy, reconstruct_equilibrium, reconstruct_full, reconstruct_micro_macro, Diagnostics, EnergySample,
    PhaseSpaceSnapshot, Recorder, Snapshot,
};
pub use study::{convergence_study, fit_slope, seed_spread, ConvergenceTable, Reference, SeedSpread};

pub use crate::grid::linf_error;

use crate::error::Result;

/// Runs the scheme named in `config` and returns its diagnostics.
pub fn run(config: &RunConfig) -> Result<Diagnostics> {
    config.validate()?;
    match config.scheme {
        Scheme::MimaPart1 => crate::rte_mima::run_rte(config),
        Scheme::MimaPart2 if config.case == Case::RtePeriodic => crate::rte_mima::run_rte(config),
        Scheme::MimaPart2 => crate::vpbgk::run_vp(config),
        Scheme::MimaGrid => crate::eulerian::run_eulerian(config),
        Scheme::FullPic => crate::baselines::run_full_pic(config),
        Scheme::MomentGuided => crate::baselines::run_moment_guided(config),
        Scheme::DiffusionLimit | Scheme::DriftDiffusionLimit => crate::baselines::run_limit(config),
    }
}
