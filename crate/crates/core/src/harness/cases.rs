use std::f64::consts::PI;

use crate::error::Result;
use crate::grid::{GridField, SpatialGrid};
use crate::particles::ParticleEnsemble;
use crate::velocity::VelocityModel;
use crate::vpbgk::poisson_solve;

use super::config::{Case, RunConfig, Scheme};

/// `lx = 1` for the RTE case, `2 pi / k` for Landau and TSI.
pub fn spatial_grid(config: &RunConfig) -> Result<SpatialGrid> {
    let lx = match config.case {
        Case::RtePeriodic => 1.0,
        Case::Landau | Case::Tsi => 2.0 * PI / config.wave_number,
    };
    SpatialGrid::new(config.nx, lx)
}

pub fn velocity_model(config: &RunConfig) -> Result<VelocityModel> {
    match config.case {
        Case::RtePeriodic => Ok(VelocityModel::flat_rte()),
        Case::Landau | Case::Tsi => VelocityModel::maxwellian_vp(config.v_max),
    }
}

/// `rho_0(x)` of the case.
pub fn initial_density(config: &RunConfig) -> impl Fn(f64) -> f64 {
    let (case, alpha, k) = (config.case, config.alpha, config.wave_number);
    move |x| match case {
        Case::RtePeriodic => 1.0 + (2.0 * PI * (x + 0.5)).cos(),
        Case::Landau | Case::Tsi => 1.0 + alpha * (k * x).cos(),
    }
}

pub fn initial_rho(config: &RunConfig, grid: &SpatialGrid) -> GridField {
    GridField::from_fn(*grid, initial_density(config))
}

/// `g_0(x, v)`: zero except for the two-stream case,
/// `(v^2 - 1) M(v) (1 + alpha cos kx)`.
pub fn initial_micro(config: &RunConfig, model: &VelocityModel) -> impl Fn(f64, f64) -> f64 {
    let (case, alpha, k, model) = (config.case, config.alpha, config.wave_number, *model);
    move |x, v| match case {
        Case::Tsi => (v * v - 1.0) * model.maxwellian(v) * (1.0 + alpha * (k * x).cos()),
        _ => 0.0,
    }
}

/// `f_0 = rho_0 M + g_0`.
pub fn initial_distribution(config: &RunConfig, model: &VelocityModel) -> impl Fn(f64, f64) -> f64 {
    let rho0 = initial_density(config);
    let g0 = initial_micro(config, model);
    let model = *model;
    move |x, v| rho0(x) * model.maxwellian(v) + g0(x, v)
}

/// Initial data of a run.
#[derive(Debug, Clone)]
pub struct CaseInit {
    pub grid: SpatialGrid,
    pub model: VelocityModel,
    pub rho: GridField,
    /// Field of `rho` for the Landau/TSI cases.
    pub e: Option<GridField>,
    /// Markers of `g` for the micro-macro particle schemes.
    pub micro: Option<ParticleEnsemble>,
    /// Markers of `f` for Full-PIC and moment-guided.
    pub full: Option<ParticleEnsemble>,
}

pub fn init_case(config: &RunConfig) -> Result<CaseInit> {
    config.validate()?;
    let grid = spatial_grid(config)?;
    let model = velocity_model(config)?;
    let rho = initial_rho(config, &grid);
    let e = if config.case.has_field() { Some(poisson_solve(&rho)?) } else { None };
    let (mut micro, mut full) = (None, None);
    match config.scheme {
        Scheme::MimaPart1 | Scheme::MimaPart2 => {
            micro = Some(ParticleEnsemble::sample_uniform(
                config.np,
                &grid,
                &model,
                config.seed,
                initial_micro(config, &model),
            ));
        }
        Scheme::FullPic | Scheme::MomentGuided => {
            full = Some(ParticleEnsemble::sample_uniform(
                config.np,
                &grid,
                &model,
                config.seed,
                initial_distribution(config, &model),
            ));
        }
        _ => {}
    }
    Ok(CaseInit { grid, model, rho, e, micro, full })
}
