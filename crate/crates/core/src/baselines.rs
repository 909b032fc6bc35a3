//! Comparison methods: the limit diffusion and drift-diffusion solvers, the
//! Full-PIC particle method and the moment-guided method.

use crate::coeffs::StiffCoeffs;
use crate::error::{Error, Result};
use crate::grid::{centered_dx, second_difference, GridField};
use crate::harness::{self, Diagnostics, Recorder, RunConfig, Scheme};
use crate::linalg::implicit_diffusion_solve;
use crate::particles::{project, weight_scale, wrap, ParticleEnsemble, ProjectionStats};
use crate::spline::{interpolate, moment, SplineOrder};
use crate::velocity::VelocityModel;
use crate::vpbgk::{poisson_solve, upwind_drift_div};

/// Diffusion constant of the RTE limit.
pub const RTE_DIFFUSION: f64 = 1.0 / 3.0;

/// Density (and field, for the drift-diffusion limit) of a limit solver.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub rho: GridField,
    pub e: Option<GridField>,
    pub t: f64,
}

/// `theta`-scheme for `d_t rho = kappa d_xx rho`:
/// `(I - theta dt kappa D2) rho' = (I + (1 - theta) dt kappa D2) rho`.
pub fn diffusion_theta_step(rho: &GridField, dt: f64, kappa: f64, theta: f64) -> Result<GridField> {
    let c = dt * kappa;
    let rhs = if theta == 1.0 { rho.clone() } else { rho.axpy((1.0 - theta) * c, &second_difference(rho)) };
    implicit_diffusion_solve(theta * c, &rhs)
}

/// Crank-Nicolson step of `d_t rho = (1/3) d_xx rho`.
pub fn diffusion_cn_step(rho: &GridField, dt: f64) -> Result<GridField> {
    diffusion_theta_step(rho, dt, RTE_DIFFUSION, 0.5)
}

/// Backward Euler step of `d_t rho = kappa d_xx rho`.
pub fn diffusion_implicit_step(rho: &GridField, dt: f64, kappa: f64) -> Result<GridField> {
    diffusion_theta_step(rho, dt, kappa, 1.0)
}

/// Two-stage Crank-Nicolson step of `d_t rho = d_xx rho - d_x(E rho)`, the
/// form the VP micro-macro scheme takes when the micro part vanishes: a
/// half step with the drift at `t^n`, then a full step with the drift at
/// the half step. Returns `(rho', E')`.
pub fn drift_diffusion_cn_step(rho: &GridField, e: &GridField, dt: f64) -> Result<(GridField, GridField)> {
    let drift = second_difference(rho).axpy(-2.0, &upwind_drift_div(e, rho));
    let rho_h = implicit_diffusion_solve(0.25 * dt, &rho.axpy(0.25 * dt, &drift))?;
    let e_h = poisson_solve(&rho_h)?;
    let drift = second_difference(rho).axpy(-2.0, &upwind_drift_div(&e_h, &rho_h));
    let rho_n = implicit_diffusion_solve(0.5 * dt, &rho.axpy(0.5 * dt, &drift))?;
    rho_n.check_finite("drift-diffusion step")?;
    let e_n = poisson_solve(&rho_n)?;
    Ok((rho_n, e_n))
}

/// Runs `diffusion_limit` (Crank-Nicolson, constant 1/3) or
/// `drift_diffusion_limit`.
pub fn run_limit(config: &RunConfig) -> Result<Diagnostics> {
    config.validate()?;
    let grid = harness::spatial_grid(config)?;
    let mut state = LimitState { rho: harness::initial_rho(config, &grid), e: None, t: 0.0 };
    match config.scheme {
        Scheme::DiffusionLimit => {}
        Scheme::DriftDiffusionLimit => state.e = Some(poisson_solve(&state.rho)?),
        other => return Err(Error::Config(format!("run_limit needs a limit scheme, got {other}"))),
    }
    let mut rec = Recorder::new(config, &state.rho, state.e.as_ref());
    for n in 1..=config.n_steps()? {
        let start = std::time::Instant::now();
        match &state.e {
            None => state.rho = diffusion_cn_step(&state.rho, config.dt)?,
            Some(e) => {
                let (r, e) = drift_diffusion_cn_step(&state.rho, e, config.dt)?;
                state.rho = r;
                state.e = Some(e);
            }
        }
        state.t = n as f64 * config.dt;
        rec.step(n, start.elapsed().as_secs_f64(), &state.rho, state.e.as_ref(), 0);
    }
    let phase = config.phase_space.then(|| {
        let model = harness::velocity_model(config).expect("validated");
        harness::reconstruct_equilibrium(&state.rho, &model, config)
    });
    Ok(rec.finish(state.rho, state.e, phase))
}

/// Particles carrying the whole distribution `f`.
#[derive(Debug, Clone)]
pub struct FullPicState {
    pub f: ParticleEnsemble,
    /// Density deposited from `f`.
    pub rho: GridField,
    pub e: Option<GridField>,
    pub t: f64,
    pub coeffs: StiffCoeffs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleParams {
    pub order: SplineOrder,
    pub model: VelocityModel,
    /// Whether an electric field acts on the particles.
    pub field: bool,
}

fn deposit_density(f: &ParticleEnsemble, rho_like: &GridField, p: &ParticleParams) -> GridField {
    moment(f, rho_like.grid(), |_| 1.0, p.order, &p.model)
}

/// Field of a deposited density; the particle noise in the total charge is
/// removed so the Poisson problem stays compatible.
fn neutral_field(rho: &GridField) -> Result<GridField> {
    let mean = rho.integral() / rho.grid().lx();
    poisson_solve(&rho.map(|r| r - mean + 1.0))
}

impl FullPicState {
    pub fn new(f: ParticleEnsemble, like: &GridField, epsilon: f64, dt: f64, p: &ParticleParams) -> Result<Self> {
        let rho = deposit_density(&f, like, p);
        let e = if p.field { Some(neutral_field(&rho)?) } else { None };
        Ok(Self { f, rho, e, t: 0.0, coeffs: StiffCoeffs::new(epsilon, dt)? })
    }
}

/// Transport by `dt/eps` (velocity kick first, then drift), field solve,
/// then exact relaxation `w' = a w + (1 - a) rho(x_k) M(v_k) s`.
pub fn full_pic_step(state: &mut FullPicState, p: &ParticleParams) -> Result<()> {
    let c = state.coeffs;
    let grid = *state.rho.grid();
    let lx = grid.lx();
    let tau = c.dt / c.epsilon;
    let f = &mut state.f;
    if let Some(e) = &state.e {
        for (x, v) in f.x.iter().zip(f.v.iter_mut()) {
            *v += tau * interpolate(e, *x, p.order);
        }
    }
    for (x, &v) in f.x.iter_mut().zip(&f.v) {
        *x = wrap(*x + tau * v, lx);
    }
    let rho = deposit_density(f, &state.rho, p);
    if p.field {
        state.e = Some(neutral_field(&rho)?);
    }
    if c.one_minus_a != 0.0 {
        let s = weight_scale(&grid, &p.model, f.len());
        for k in 0..f.len() {
            let eq = interpolate(&rho, f.x[k], p.order) * p.model.maxwellian(f.v[k]) * s;
            f.w[k] = c.a * f.w[k] + c.one_minus_a * eq;
        }
    }
    state.rho = deposit_density(f, &state.rho, p);
    state.rho.check_finite("full pic deposit")?;
    state.t += c.dt;
    Ok(())
}

pub fn run_full_pic(config: &RunConfig) -> Result<Diagnostics> {
    config.validate()?;
    if config.scheme != Scheme::FullPic {
        return Err(Error::Config(format!("run_full_pic needs full_pic, got {}", config.scheme)));
    }
    let init = harness::init_case(config)?;
    let p = ParticleParams { order: config.spline_order, model: init.model, field: config.case.has_field() };
    let f = init.full.expect("full particle scheme");
    let mut state = FullPicState::new(f, &init.rho, config.epsilon, config.dt, &p)?;
    let mut rec = Recorder::new(config, &state.rho, state.e.as_ref());
    rec.skip_mass_check();
    for n in 1..=config.n_steps()? {
        let start = std::time::Instant::now();
        full_pic_step(&mut state, &p)?;
        rec.step(n, start.elapsed().as_secs_f64(), &state.rho, state.e.as_ref(), 0);
    }
    let phase = config.phase_space.then(|| harness::reconstruct_full(&state.f, &init.model, config));
    Ok(rec.finish(state.rho, state.e, phase))
}

/// Moment-guided state: particles for `f`, grid values for `rho` and `E`.
#[derive(Debug, Clone)]
pub struct MomentGuidedState {
    pub f: ParticleEnsemble,
    pub rho: GridField,
    pub e: Option<GridField>,
    pub t: f64,
    pub coeffs: StiffCoeffs,
}

/// Push `x += eps (1 - a) v` (and `v += eps (1 - a) E(x)` with a field),
/// then `w' = a w + (1 - a) rho(x_k) M(v_k) s`.
pub fn mg_f_step(
    f: &mut ParticleEnsemble,
    rho: &GridField,
    e: Option<&GridField>,
    coeffs: &StiffCoeffs,
    p: &ParticleParams,
) {
    let grid = rho.grid();
    let lx = grid.lx();
    let push = coeffs.first_order_push();
    if let Some(e) = e {
        for (x, v) in f.x.iter().zip(f.v.iter_mut()) {
            *v += push * interpolate(e, *x, p.order);
        }
    }
    for (x, &v) in f.x.iter_mut().zip(&f.v) {
        *x = wrap(*x + push * v, lx);
    }
    if coeffs.one_minus_a != 0.0 {
        let s = weight_scale(grid, &p.model, f.len());
        for k in 0..f.len() {
            let eq = interpolate(rho, f.x[k], p.order) * p.model.maxwellian(f.v[k]) * s;
            f.w[k] = coeffs.a * f.w[k] + coeffs.one_minus_a * eq;
        }
    }
}

/// Explicit density update
/// `rho' = rho + dt (1 - a) [K D2 rho - div(E rho)] - (dt/eps) a D <v f>`.
pub fn mg_rho_step(
    rho: &GridField,
    flux: &GridField,
    e: Option<&GridField>,
    coeffs: &StiffCoeffs,
    model: &VelocityModel,
) -> GridField {
    let mut src = second_difference(rho).map(|d| d * model.second_moment());
    if let Some(e) = e {
        src = src.axpy(-1.0, &upwind_drift_div(e, rho));
    }
    let out = rho.axpy(coeffs.diff1, &src);
    if coeffs.a == 0.0 {
        return out;
    }
    out.axpy(-coeffs.flux_factor() * coeffs.a, &centered_dx(flux))
}

/// `w_new = beta + (I - Pi)(w - beta)` with `beta_k = rho(x_k) M(v_k) s`.
pub fn mg_match(f: &mut ParticleEnsemble, rho_target: &GridField, p: &ParticleParams) -> ProjectionStats {
    let grid = rho_target.grid();
    let s = weight_scale(grid, &p.model, f.len());
    let beta: Vec<f64> = f
        .x
        .iter()
        .zip(&f.v)
        .map(|(&x, &v)| interpolate(rho_target, x, p.order) * p.model.maxwellian(v) * s)
        .collect();
    f.w.iter_mut().zip(&beta).for_each(|(w, b)| *w -= b);
    let stats = project(f, grid, &p.model);
    f.w.iter_mut().zip(&beta).for_each(|(w, b)| *w += b);
    stats
}

/// One moment-guided step: density update from `t^n` moments, particle
/// step, matching, field solve. Returns the number of flagged cells.
pub fn mg_step(state: &mut MomentGuidedState, p: &ParticleParams) -> Result<usize> {
    let c = state.coeffs;
    let flux = moment(&state.f, state.rho.grid(), |v| v, p.order, &p.model);
    let rho_new = mg_rho_step(&state.rho, &flux, state.e.as_ref(), &c, &p.model);
    rho_new.check_finite("moment-guided density")?;
    mg_f_step(&mut state.f, &state.rho, state.e.as_ref(), &c, p);
    let stats = mg_match(&mut state.f, &rho_new, p);
    state.rho = rho_new;
    if p.field {
        state.e = Some(poisson_solve(&state.rho)?);
    }
    state.t += c.dt;
    Ok(stats.flagged_cells)
}

pub fn run_moment_guided(config: &RunConfig) -> Result<Diagnostics> {
    config.validate()?;
    if config.scheme != Scheme::MomentGuided {
        return Err(Error::Config(format!("run_moment_guided needs moment_guided, got {}", config.scheme)));
    }
    let init = harness::init_case(config)?;
    let p = ParticleParams { order: config.spline_order, model: init.model, field: config.case.has_field() };
    let e = if p.field { Some(poisson_solve(&init.rho)?) } else { None };
    let mut state = MomentGuidedState {
        f: init.full.expect("full particle scheme"),
        rho: init.rho,
        e,
        t: 0.0,
        coeffs: StiffCoeffs::new(config.epsilon, config.dt)?,
    };
    let mut rec = Recorder::new(config, &state.rho, state.e.as_ref());
    for n in 1..=config.n_steps()? {
        let start = std::time::Instant::now();
        let flagged = mg_step(&mut state, &p)?;
        rec.step(n, start.elapsed().as_secs_f64(), &state.rho, state.e.as_ref(), flagged);
    }
    let phase = config.phase_space.then(|| harness::reconstruct_full(&state.f, &init.model, config));
    Ok(rec.finish(state.rho, state.e, phase))
}
