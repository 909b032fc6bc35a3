//! Micro-macro particle schemes for the radiative transfer equation:
//! MiMa-Part-1 (first order) and MiMa-Part-2 (prediction-correction, second
//! order). `rho` lives on the grid, `g` on weighted particles.

use crate::coeffs::StiffCoeffs;
use crate::error::Result;
use crate::grid::{centered_dx, second_difference, GridField};
use crate::harness::{self, Diagnostics, Recorder, RunConfig, Scheme};
use crate::linalg::implicit_diffusion_solve;
use crate::particles::{project, weight_scale, wrap, ParticleEnsemble};
use crate::spline::{deposit_weights, interpolate, moment, SplineOrder};
use crate::velocity::VelocityModel;

#[derive(Debug, Clone)]
pub struct MicroMacroState {
    pub rho: GridField,
    pub micro: ParticleEnsemble,
    pub t: f64,
    pub coeffs: StiffCoeffs,
}

impl MicroMacroState {
    pub fn new(rho: GridField, micro: ParticleEnsemble, epsilon: f64, dt: f64) -> Result<Self> {
        Ok(Self { rho, micro, t: 0.0, coeffs: StiffCoeffs::new(epsilon, dt)? })
    }

    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }
}

/// Discretization knobs shared by both RTE schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RteParams {
    pub order: SplineOrder,
    pub model: VelocityModel,
    /// Explicit flux update in MiMa-Part-1 instead of implicit diffusion.
    pub explicit_macro: bool,
}

impl RteParams {
    pub fn new(order: SplineOrder) -> Self {
        Self { order, model: VelocityModel::flat_rte(), explicit_macro: false }
    }
}

/// Per-particle sources `alpha_k = v_k d_x rho (x_k) s` and
/// `beta_k = -d_x <v g> (x_k) s`, with `s = lx L_v / np`.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroRhs {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Sources at the given evaluation points from grid values of `rho` and
/// of the flux `<v g>`.
pub fn micro_sources(
    rho: &GridField,
    flux: &GridField,
    x: &[f64],
    v: &[f64],
    scale: f64,
    order: SplineOrder,
) -> MicroRhs {
    let drho = centered_dx(rho);
    let dflux = centered_dx(flux);
    let alpha = x.iter().zip(v).map(|(&xk, &vk)| vk * interpolate(&drho, xk, order) * scale).collect();
    let beta = x.iter().map(|&xk| -interpolate(&dflux, xk, order) * scale).collect();
    MicroRhs { alpha, beta }
}

/// [`micro_sources`] with the flux deposited from the state's own particles
/// at their current positions.
pub fn micro_rhs(state: &MicroMacroState, params: &RteParams) -> MicroRhs {
    let grid = state.rho.grid();
    let flux = moment(&state.micro, grid, |v| v, params.order, &params.model);
    let scale = weight_scale(grid, &params.model, state.micro.len());
    micro_sources(&state.rho, &flux, &state.micro.x, &state.micro.v, scale, params.order)
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepInfo {
    pub flagged_cells: usize,
}

/// One MiMa-Part-1 step: push, weight update with sources at the pushed
/// positions, projection, then the macro update.
pub fn mima1_step(state: &mut MicroMacroState, params: &RteParams) -> Result<StepInfo> {
    let c = state.coeffs;
    let grid = *state.rho.grid();
    let lx = grid.lx();
    let push = c.first_order_push();
    let micro = &mut state.micro;
    for (x, &v) in micro.x.iter_mut().zip(&micro.v) {
        *x = wrap(*x + push * v, lx);
    }

    let flux_n = moment(micro, &grid, |v| v, params.order, &params.model);
    let scale = weight_scale(&grid, &params.model, micro.len());
    let MicroRhs { alpha, beta } = micro_sources(&state.rho, &flux_n, &micro.x, &micro.v, scale, params.order);

    let k = params.model.second_moment();
    let h = if params.explicit_macro {
        None
    } else {
        let mut beta_flux = deposit_weights(&micro.x, &micro.v, &beta, &grid, |v| v, params.order);
        let norm = params.model.moment_normalizer();
        let mut h = flux_n;
        for (hi, bi) in h.values_mut().iter_mut().zip(beta_flux.values_mut()) {
            *hi = c.a * *hi - push * norm * *bi;
        }
        Some(h)
    };

    for ((w, a_k), b_k) in micro.w.iter_mut().zip(&alpha).zip(&beta) {
        *w = c.a * *w - push * (a_k + b_k);
    }
    let stats = project(micro, &grid, &params.model);

    let ff = c.flux_factor();
    state.rho = match h {
        Some(h) => {
            let rhs = state.rho.axpy(-ff, &centered_dx(&h));
            implicit_diffusion_solve(c.diff1 * k, &rhs)?
        }
        None => {
            let flux = moment(micro, &grid, |v| v, params.order, &params.model);
            state.rho.axpy(-ff, &centered_dx(&flux))
        }
    };
    state.rho.check_finite("mima1 macro update")?;
    state.t += c.dt;
    Ok(StepInfo { flagged_cells: stats.flagged_cells })
}

/// Prediction output of MiMa-Part-2 at `t^{n+1/2}`.
#[derive(Debug, Clone)]
pub struct HalfState {
    pub micro: ParticleEnsemble,
    pub rho: GridField,
    /// `<v g^{n+1/2}>` on the grid.
    pub flux: GridField,
    pub flagged_cells: usize,
}

/// Prediction on `dt/2`. Sources are evaluated at the start-of-step
/// positions; projection happens here.
pub fn mima2_predict(state: &MicroMacroState, params: &RteParams) -> HalfState {
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
        let src = micro_sources(&state.rho, &flux_n, &micro.x, &micro.v, scale, params.order);
        micro
            .w
            .iter()
            .zip(src.alpha.iter().zip(&src.beta))
            .map(|(&w, (a_k, b_k))| c.d_pred * w - c.c_pred * (a_k + b_k))
            .collect()
    };
    let x_half = micro.x.iter().zip(&micro.v).map(|(&x, &v)| wrap(x + c.c_pred * v, lx)).collect();
    let mut half = ParticleEnsemble { x: x_half, v: micro.v.clone(), w: w_half };
    let stats = project(&mut half, &grid, &params.model);

    let flux = moment(&half, &grid, |v| v, params.order, &params.model);
    let rho = state.rho.axpy(-0.5 * c.flux_factor(), &centered_dx(&flux));
    HalfState { micro: half, rho, flux, flagged_cells: stats.flagged_cells }
}

/// Correction from `t^n` to `t^{n+1}` using the half-step sources and the
/// Crank-Nicolson macro update.
pub fn mima2_correct(state: &mut MicroMacroState, half: &HalfState, params: &RteParams) -> Result<StepInfo> {
    let c = state.coeffs;
    let grid = *state.rho.grid();
    let lx = grid.lx();
    let micro = &mut state.micro;

    if c.c_corr == 0.0 {
        micro.w.iter_mut().for_each(|w| *w *= c.a);
    } else {
        let scale = weight_scale(&grid, &params.model, micro.len());
        let src = micro_sources(&half.rho, &half.flux, &half.micro.x, &micro.v, scale, params.order);
        for ((w, a_k), b_k) in micro.w.iter_mut().zip(&src.alpha).zip(&src.beta) {
            *w = c.a * *w - c.c_corr * (a_k + b_k);
        }
    }
    for (x, &v) in micro.x.iter_mut().zip(&micro.v) {
        *x = wrap(*x + c.c_corr * v, lx);
    }

    let cd = 0.5 * c.diff2 * params.model.second_moment();
    let rhs = state
        .rho
        .axpy(-c.flux_factor(), &centered_dx(&half.flux))
        .axpy(cd, &second_difference(&state.rho));
    state.rho = implicit_diffusion_solve(cd, &rhs)?;
    state.rho.check_finite("mima2 macro update")?;
    state.t += c.dt;
    Ok(StepInfo { flagged_cells: half.flagged_cells })
}

pub fn mima2_step(state: &mut MicroMacroState, params: &RteParams) -> Result<StepInfo> {
    let half = mima2_predict(state, params);
    mima2_correct(state, &half, params)
}

/// Runs MiMa-Part-1 or MiMa-Part-2 on the RTE case described by `config`.
pub fn run_rte(config: &RunConfig) -> Result<Diagnostics> {
    config.validate()?;
    if !matches!(config.scheme, Scheme::MimaPart1 | Scheme::MimaPart2) || config.case.has_field() {
        return Err(crate::Error::Config(format!(
            "run_rte needs mima_part_1 or mima_part_2 on rte_periodic, got {} on {}",
            config.scheme, config.case
        )));
    }
    let init = harness::init_case(config)?;
    let micro = init.micro.expect("particle scheme");
    let mut state = MicroMacroState::new(init.rho, micro, config.epsilon, config.dt)?;
    let params = RteParams {
        order: config.spline_order,
        model: init.model,
        explicit_macro: config.explicit_macro,
    };
    let mut rec = Recorder::new(config, &state.rho, None);
    for n in 1..=config.n_steps()? {
        let start = std::time::Instant::now();
        let info = match config.scheme {
            Scheme::MimaPart1 => mima1_step(&mut state, &params)?,
            _ => mima2_step(&mut state, &params)?,
        };
        rec.step(n, start.elapsed().as_secs_f64(), &state.rho, None, info.flagged_cells);
    }
    let phase = config
        .phase_space
        .then(|| harness::reconstruct_micro_macro(&state.rho, &state.micro, &init.model, config));
    Ok(rec.finish(state.rho, None, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;

    fn state(nx: usize, np: usize, eps: f64, dt: f64, seed: u64) -> MicroMacroState {
        let grid = SpatialGrid::new(nx, 1.0).unwrap();
        let model = VelocityModel::flat_rte();
        let rho = GridField::from_fn(grid, |x| 1.0 + (2.0 * std::f64::consts::PI * x).sin());
        let micro = ParticleEnsemble::sample_uniform(np, &grid, &model, seed, |x, v| 0.3 * v * (x * 5.0).cos());
        MicroMacroState::new(rho, micro, eps, dt).unwrap()
    }

    #[test]
    fn zero_state_has_zero_sources() {
        let grid = SpatialGrid::new(8, 1.0).unwrap();
        let model = VelocityModel::flat_rte();
        let mut micro = ParticleEnsemble::sample_uniform(16, &grid, &model, 3, |_, _| 0.0);
        micro.w.iter_mut().for_each(|w| *w = 0.0);
        let s = MicroMacroState::new(GridField::constant(grid, 2.0), micro, 1.0, 0.1).unwrap();
        let r = micro_rhs(&s, &RteParams::new(SplineOrder::LINEAR));
        assert!(r.alpha.iter().chain(&r.beta).all(|&a| a == 0.0));
    }

    #[test]
    fn alpha_at_node_matches_stencil() {
        let grid = SpatialGrid::new(8, 1.0).unwrap();
        let rho = GridField::from_fn(grid, |x| (2.0 * std::f64::consts::PI * x).sin());
        let flux = GridField::zeros(grid);
        let r = micro_sources(&rho, &flux, &[grid.node(2)], &[0.5], 0.25, SplineOrder::LINEAR);
        let hand = (rho[3] - rho[1]) / (2.0 * grid.dx());
        assert!((r.alpha[0] - 0.5 * hand * 0.25).abs() < 1e-14);
        assert_eq!(r.beta[0], 0.0);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let grid = SpatialGrid::new(8, 1.0).unwrap();
        let model = VelocityModel::flat_rte();
        for scheme in [1, 2] {
            let micro = ParticleEnsemble::sample_uniform(32, &grid, &model, 1, |_, _| 0.0);
            let mut s = MicroMacroState::new(GridField::constant(grid, 1.5), micro, 0.7, 0.01).unwrap();
            let p = RteParams::new(SplineOrder::LINEAR);
            for _ in 0..3 {
                if scheme == 1 {
                    mima1_step(&mut s, &p).unwrap();
                } else {
                    mima2_step(&mut s, &p).unwrap();
                }
            }
            assert!(s.micro.max_abs_weight() < 1e-14);
            assert!(s.rho.values().iter().all(|&r| (r - 1.5).abs() < 1e-14));
        }
    }

    #[test]
    fn mass_is_conserved() {
        let p = RteParams::new(SplineOrder::QUADRATIC);
        for eps in [1.0, 0.1, 1e-4] {
            let mut s = state(16, 200, eps, 0.01, 9);
            let m0 = s.mass();
            for _ in 0..5 {
                mima2_step(&mut s, &p).unwrap();
                assert!((s.mass() - m0).abs() <= 1e-12 * m0.abs());
            }
            let mut s = state(16, 200, eps, 0.01, 9);
            for _ in 0..5 {
                mima1_step(&mut s, &p).unwrap();
                assert!((s.mass() - m0).abs() <= 1e-12 * m0.abs());
            }
        }
    }

    #[test]
    fn half_weights_vanish_in_limit() {
        let s = state(16, 64, 1e-6, 0.01, 2);
        let half = mima2_predict(&s, &RteParams::new(SplineOrder::LINEAR));
        assert!(half.micro.all_weights_zero());
        assert_eq!(half.rho, s.rho);
    }

    #[test]
    fn micro_part_scales_with_epsilon() {
        let p = RteParams::new(SplineOrder::LINEAR);
        let ratios: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&eps| {
                let mut s = state(16, 200, eps, 0.01, 4);
                mima1_step(&mut s, &p).unwrap();
                s.micro.max_abs_weight() / eps
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        assert!(hi < 2.0 * lo && hi < 1.0, "{ratios:?}");
    }
}
