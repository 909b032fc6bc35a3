//! Second-order micro-macro particle scheme for Vlasov-Poisson-BGK, with the
//! spectral Poisson solve and the upwind drift flux.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::coeffs::StiffCoeffs;
use crate::error::{Error, Result};
use crate::grid::{centered_dx, second_difference, GridField};
use crate::harness::{self, Diagnostics, Recorder, RunConfig, Scheme, VpCorrectorPush};
use crate::linalg::{forward_fft, implicit_diffusion_solve, inverse_fft_real, signed_mode, spectral_dx, strip_nyquist};
use crate::particles::{project, weight_scale, wrap, ParticleEnsemble};
use crate::spline::{interpolate, moment, SplineOrder};
use crate::velocity::VelocityModel;

#[derive(Debug, Clone)]
pub struct VPState {
    pub rho: GridField,
    pub e: GridField,
    pub micro: ParticleEnsemble,
    pub t: f64,
    pub coeffs: StiffCoeffs,
}

impl VPState {
    /// Builds the state and its field from `rho`.
    pub fn new(rho: GridField, micro: ParticleEnsemble, epsilon: f64, dt: f64) -> Result<Self> {
        let e = poisson_solve(&rho)?;
        Ok(Self { rho, e, micro, t: 0.0, coeffs: StiffCoeffs::new(epsilon, dt)? })
    }

    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VpParams {
    pub order: SplineOrder,
    pub model: VelocityModel,
    pub corrector: VpCorrectorPush,
}

impl VpParams {
    pub fn new(order: SplineOrder, v_max: f64) -> Result<Self> {
        Ok(Self { order, model: VelocityModel::maxwellian_vp(v_max)?, corrector: VpCorrectorPush::Doubled })
    }
}

/// Tolerance on `sum (rho - 1) dx` accepted by [`poisson_solve`].
pub const POISSON_COMPAT_TOL: f64 = 1e-8;

/// Solves `d_x E = rho - 1` with `sum E dx = 0` by a discrete Fourier
/// antiderivative. The result satisfies `spectral_dx(E) = rho - 1` up to the
/// Nyquist component, which has no real antiderivative and is dropped.
pub fn poisson_solve(rho: &GridField) -> Result<GridField> {
    let integral: f64 = rho.values().iter().map(|r| r - 1.0).sum::<f64>() * rho.grid().dx();
    if integral.abs() > POISSON_COMPAT_TOL {
        return Err(Error::PoissonIncompatible { integral });
    }
    let n = rho.len();
    let lx = rho.grid().lx();
    let src: Vec<f64> = rho.values().iter().map(|r| r - 1.0).collect();
    let mut buf = forward_fft(&src);
    for (m, c) in buf.iter_mut().enumerate() {
        *c = match signed_mode(m, n) {
            Some(0) | None => Complex64::new(0.0, 0.0),
            Some(k) => *c / Complex64::new(0.0, 2.0 * PI * k as f64 / lx),
        };
    }
    let e = GridField::from_values(*rho.grid(), inverse_fft_real(buf))?;
    e.check_finite("poisson solve")?;
    Ok(e)
}

/// Max-norm residual of `d_x E = rho - 1` under the spectral derivative,
/// restricted to the representable modes.
pub fn poisson_residual(rho: &GridField, e: &GridField) -> f64 {
    let target = strip_nyquist(&rho.map(|r| r - 1.0));
    let de = spectral_dx(e);
    let mean = target.integral() / target.grid().lx();
    de.values().iter().zip(target.values()).fold(0.0, |m, (a, b)| m.max((a - (b - mean)).abs()))
}

/// Upwind `d_x (E rho)`:
/// `(E_i+ rho_i + E_i- rho_{i+1} - E_{i-1}+ rho_{i-1} - E_{i-1}- rho_i) / dx`.
pub fn upwind_drift_div(e: &GridField, rho: &GridField) -> GridField {
    let n = rho.len() as isize;
    let dx = rho.grid().dx();
    let flux = |i: isize| {
        let ei = e.periodic(i);
        ei.max(0.0) * rho.periodic(i) + ei.min(0.0) * rho.periodic(i + 1)
    };
    let values = (0..n).map(|i| (flux(i) - flux(i - 1)) / dx).collect();
    GridField::from_values(*rho.grid(), values).expect("same length")
}

/// Weight source `v M d_x rho - d_x <v g> M - v M E rho` at each particle,
/// times the marker volume.
#[allow(clippy::too_many_arguments)]
fn weight_sources(
    rho: &GridField,
    flux: &GridField,
    e: &GridField,
    x: &[f64],
    v: &[f64],
    scale: f64,
    params: &VpParams,
) -> Vec<f64> {
    let drho = centered_dx(rho);
    let dflux = centered_dx(flux);
    x.iter()
        .zip(v)
        .map(|(&xk, &vk)| {
            let m = params.model.maxwellian(vk);
            if m == 0.0 {
                return 0.0;
            }
            let r = interpolate(rho, xk, params.order);
            let ef = interpolate(e, xk, params.order);
            let s = vk * m * interpolate(&drho, xk, params.order)
                - interpolate(&dflux, xk, params.order) * m
                - vk * m * ef * r;
            s * scale
        })
        .collect()
}

/// Half-step state of the VP prediction.
#[derive(Debug, Clone)]
pub struct VpHalfState {
    pub micro: ParticleEnsemble,
    pub rho: GridField,
    pub e: GridField,
    pub flux: GridField,
    pub flagged_cells: usize,
}

/// Prediction on `dt/2`: push `(x, v)`, weight update with sources at the
/// start-of-step phase points, projection, CN half-step for `rho` with the
/// drift term explicit, then the field solve.
pub fn vp_predict(state: &VPState, params: &VpParams) -> Result<VpHalfState> {
    let c = state.coeffs;
    let grid = *state.rho.grid();
    let lx = grid.lx();
    let micro = &state.micro;
    let np = micro.len();

    let w_half = if c.c_pred == 0.0 && c.d_pred == 0.0 {
        vec![0.0; np]
    } else {
        let flux_n = moment(micro, &grid, |v| v, params.order, &params.model);
        let scale = weight_scale(&grid, &params.model, np);
        let src = weight_sources(&state.rho, &flux_n, &state.e, &micro.x, &micro.v, scale, params);
        micro.w.iter().zip(&src).map(|(&w, s)| c.d_pred * w - c.c_pred * s).collect()
    };
    let mut x_half = Vec::with_capacity(np);
    let mut v_half = Vec::with_capacity(np);
    for (&x, &v) in micro.x.iter().zip(&micro.v) {
        x_half.push(wrap(x + c.c_pred * v, lx));
        let kick = if c.c_pred == 0.0 { 0.0 } else { c.c_pred * interpolate(&state.e, x, params.order) };
        v_half.push(v + kick);
    }
    let mut half = ParticleEnsemble { x: x_half, v: v_half, w: w_half };
    let stats = project(&mut half, &grid, &params.model);

    let flux = moment(&half, &grid, |v| v, params.order, &params.model);
    let cp = 0.5 * c.dt * c.one_minus_a;
    let drift = second_difference(&state.rho)
        .axpy(-2.0, &upwind_drift_div(&state.e, &state.rho));
    let rhs = state.rho.axpy(-0.5 * c.flux_factor(), &centered_dx(&flux)).axpy(0.5 * cp, &drift);
    let rho = implicit_diffusion_solve(0.5 * cp, &rhs)?;
    rho.check_finite("vp prediction")?;
    let e = poisson_solve(&rho)?;
    Ok(VpHalfState { micro: half, rho, e, flux, flagged_cells: stats.flagged_cells })
}

/// Correction from `t^n` to `t^{n+1}` with all sources at the half step.
pub fn vp_correct(state: &mut VPState, half: &VpHalfState, params: &VpParams) -> Result<usize> {
    let c = state.coeffs;
    let grid = *state.rho.grid();
    let lx = grid.lx();
    let np = state.micro.len();

    if c.c_corr == 0.0 {
        state.micro.w.iter_mut().for_each(|w| *w *= c.a);
    } else {
        let scale = weight_scale(&grid, &params.model, np);
        let src = weight_sources(&half.rho, &half.flux, &half.e, &half.micro.x, &half.micro.v, scale, params);
        for (w, s) in state.micro.w.iter_mut().zip(&src) {
            *w = c.a * *w - c.c_corr * s;
        }
    }
    let push = match params.corrector {
        VpCorrectorPush::Doubled => 2.0 * c.c_pred,
        VpCorrectorPush::RteStyle => c.c_corr,
    };
    if push != 0.0 {
        let micro = &mut state.micro;
        for k in 0..np {
            micro.x[k] = wrap(micro.x[k] + push * half.micro.v[k], lx);
            micro.v[k] += push * interpolate(&half.e, half.micro.x[k], params.order);
        }
    }

    let drift = second_difference(&state.rho).axpy(-2.0, &upwind_drift_div(&half.e, &half.rho));
    let rhs = state
        .rho
        .axpy(-c.flux_factor(), &centered_dx(&half.flux))
        .axpy(0.5 * c.diff2, &drift);
    state.rho = implicit_diffusion_solve(0.5 * c.diff2, &rhs)?;
    state.rho.check_finite("vp correction")?;
    state.e = poisson_solve(&state.rho)?;
    state.t += c.dt;
    Ok(half.flagged_cells)
}

/// One prediction-correction step; returns the number of flagged cells.
pub fn vp_step(state: &mut VPState, params: &VpParams) -> Result<usize> {
    let half = vp_predict(state, params)?;
    vp_correct(state, &half, params)
}

/// Runs MiMa-Part-2 on the Landau or two-stream case.
pub fn run_vp(config: &RunConfig) -> Result<Diagnostics> {
    config.validate()?;
    if config.scheme != Scheme::MimaPart2 || !config.case.has_field() {
        return Err(Error::Config(format!(
            "run_vp needs mima_part_2 on landau or tsi, got {} on {}",
            config.scheme, config.case
        )));
    }
    let init = harness::init_case(config)?;
    let micro = init.micro.expect("particle scheme");
    let mut state = VPState::new(init.rho, micro, config.epsilon, config.dt)?;
    let params = VpParams { order: config.spline_order, model: init.model, corrector: config.vp_corrector };
    let mut rec = Recorder::new(config, &state.rho, Some(&state.e));
    for n in 1..=config.n_steps()? {
        let start = std::time::Instant::now();
        let flagged = vp_step(&mut state, &params)?;
        rec.step(n, start.elapsed().as_secs_f64(), &state.rho, Some(&state.e), flagged);
    }
    let phase = config
        .phase_space
        .then(|| harness::reconstruct_micro_macro(&state.rho, &state.micro, &init.model, config));
    Ok(rec.finish(state.rho, Some(state.e), phase))
}
