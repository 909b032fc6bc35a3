//! Grid-based micro-macro scheme (MiMa-Grid): `g` on staggered points
//! `(x_{i+1/2}, v_j)`, `rho` and `E` on the nodes `x_i`.

use crate::coeffs::StiffCoeffs;
use crate::error::{Error, Result};
use crate::grid::{second_difference, GridField, SpatialGrid};
use crate::harness::{self, Diagnostics, PhaseSpaceSnapshot, Recorder, RunConfig, Scheme};
use crate::linalg::implicit_diffusion_solve;
use crate::velocity::VelocityModel;
use crate::vpbgk::poisson_solve;

/// `g_{i+1/2, j}` stored row-major (`i * nv + j`) with the midpoint velocity
/// nodes `v_j = v_lo + (j + 1/2) dv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub grid: SpatialGrid,
    pub model: VelocityModel,
    pub nv: usize,
    pub dv: f64,
    pub v: Vec<f64>,
    /// `M(v_j)`.
    pub m: Vec<f64>,
    pub g: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn zeros(grid: SpatialGrid, model: VelocityModel, nv: usize) -> Result<Self> {
        if nv < 2 {
            return Err(Error::Domain(format!("nv must be at least 2, got {nv}")));
        }
        let (lo, _) = model.domain();
        let dv = model.length() / nv as f64;
        let v: Vec<f64> = (0..nv).map(|j| lo + (j as f64 + 0.5) * dv).collect();
        let m = v.iter().map(|&v| model.maxwellian(v)).collect();
        Ok(Self { grid, model, nv, dv, v, m, g: vec![0.0; grid.nx() * nv] })
    }

    /// Samples `g(x_{i+1/2}, v_j)`.
    pub fn from_fn(grid: SpatialGrid, model: VelocityModel, nv: usize, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut p = Self::zeros(grid, model, nv)?;
        for i in 0..grid.nx() {
            let x = grid.midpoint(i);
            for j in 0..nv {
                p.g[i * nv + j] = g(x, p.v[j]);
            }
        }
        Ok(p)
    }

    pub fn nx(&self) -> usize {
        self.grid.nx()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.nv + j]
    }

    /// `nu = 1 / sum_j M_j dv`, so that the discrete `Pi` reproduces `M`.
    pub fn normalizer(&self) -> f64 {
        1.0 / (self.m.iter().sum::<f64>() * self.dv)
    }

    /// Discrete `<v^2 M>`: `nu sum_j v_j^2 M_j dv`.
    pub fn second_moment(&self) -> f64 {
        self.normalizer() * self.v.iter().zip(&self.m).map(|(v, m)| v * v * m).sum::<f64>() * self.dv
    }

    /// `<v h>` at every staggered point, for a row-major array like `g`.
    pub fn flux_of(&self, h: &[f64]) -> Vec<f64> {
        let nu = self.normalizer();
        h.chunks_exact(self.nv)
            .map(|row| nu * row.iter().zip(&self.v).map(|(h, v)| h * v).sum::<f64>() * self.dv)
            .collect()
    }
}

/// Applies the discrete `Pi h = (sum_j h_j dv) nu M_j` to one velocity row.
pub fn apply_pi(row: &[f64], m: &[f64], dv: f64, nu: f64) -> Vec<f64> {
    let mass: f64 = row.iter().sum::<f64>() * dv * nu;
    m.iter().map(|&mj| mass * mj).collect()
}

/// `(I - Pi)` in place on every row.
fn project_rows(h: &mut [f64], p: &PhaseSpaceGrid) {
    let nu = p.normalizer();
    for row in h.chunks_exact_mut(p.nv) {
        let pi = apply_pi(row, &p.m, p.dv, nu);
        row.iter_mut().zip(pi).for_each(|(a, b)| *a -= b);
    }
}

/// Staggered averages `(f_i + f_{i+1}) / 2`.
fn staggered(f: &GridField) -> Vec<f64> {
    (0..f.len() as isize).map(|i| 0.5 * (f.periodic(i) + f.periodic(i + 1))).collect()
}

/// Transport part `v+ D- g + v- D+ g` plus, when a field is present,
/// `E+ D_v- g + E- D_v+ g` with `g = 0` outside the velocity grid.
fn transport(p: &PhaseSpaceGrid, e_stag: Option<&[f64]>) -> Vec<f64> {
    let nx = p.nx();
    let nv = p.nv;
    let dx = p.grid.dx();
    let mut t = vec![0.0; nx * nv];
    for i in 0..nx {
        let im = (i + nx - 1) % nx;
        let ip = (i + 1) % nx;
        for j in 0..nv {
            let v = p.v[j];
            let g = p.at(i, j);
            t[i * nv + j] = if v > 0.0 { v * (g - p.at(im, j)) / dx } else { v * (p.at(ip, j) - g) / dx };
        }
        if let Some(es) = e_stag {
            let e = es[i];
            for j in 0..nv {
                let g = p.at(i, j);
                let d = if e > 0.0 {
                    let below = if j == 0 { 0.0 } else { p.at(i, j - 1) };
                    g - below
                } else {
                    let above = if j + 1 == nv { 0.0 } else { p.at(i, j + 1) };
                    above - g
                };
                t[i * nv + j] += e * d / p.dv;
            }
        }
    }
    t
}

/// Output of the micro step: the new `g` and the `h` term entering the
/// macro flux.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroUpdate {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// `g' = a g - eps (1 - a) [S + (I - Pi) T]`, with the equilibrium source
/// `S = v M (rho_{i+1} - rho_i) / dx - v M E rho` (field term only with `E`)
/// and `h = a g - eps (1 - a) (I - Pi) T`.
pub fn euler_micro_step(p: &PhaseSpaceGrid, rho: &GridField, e: Option<&GridField>, coeffs: &StiffCoeffs) -> MicroUpdate {
    let nx = p.nx();
    let nv = p.nv;
    let dx = p.grid.dx();
    let e_stag = e.map(staggered);
    let rho_stag = staggered(rho);
    let mut t = transport(p, e_stag.as_deref());
    project_rows(&mut t, p);
    let push = coeffs.first_order_push();
    let mut g = vec![0.0; nx * nv];
    let mut h = vec![0.0; nx * nv];
    for i in 0..nx {
        let drho = (rho.periodic(i as isize + 1) - rho[i]) / dx;
        let drift = e_stag.as_ref().map_or(0.0, |es| es[i] * rho_stag[i]);
        for j in 0..nv {
            let idx = i * nv + j;
            let s = p.v[j] * p.m[j] * (drho - drift);
            h[idx] = coeffs.a * p.g[idx] - push * t[idx];
            g[idx] = h[idx] - push * s;
        }
    }
    MicroUpdate { g, h }
}

/// Macro update from the `h` term:
/// `rho' = rho - (dt/eps) div <v h> + dt (1 - a) K [D2 rho' - div(E rho)]`
/// with the diffusion implicit, or explicit in `rho` when `explicit` is set.
pub fn euler_macro_step(
    p: &PhaseSpaceGrid,
    rho: &GridField,
    e: Option<&GridField>,
    h: &[f64],
    coeffs: &StiffCoeffs,
    explicit: bool,
) -> Result<GridField> {
    let nx = p.nx();
    let dx = p.grid.dx();
    let flux = p.flux_of(h);
    let k = p.second_moment();
    let c = coeffs.diff1 * k;
    let ff = coeffs.flux_factor();
    let drift_face: Option<Vec<f64>> = e.map(|e| {
        let es = staggered(e);
        let rs = staggered(rho);
        es.iter().zip(&rs).map(|(a, b)| a * b).collect()
    });
    let mut rhs = rho.clone();
    for i in 0..nx {
        let im = (i + nx - 1) % nx;
        let mut r = -ff * (flux[i] - flux[im]) / dx;
        if let Some(df) = &drift_face {
            r -= c * (df[i] - df[im]) / dx;
        }
        rhs[i] += r;
    }
    let out = if explicit {
        rhs.axpy(c, &second_difference(rho))
    } else {
        implicit_diffusion_solve(c, &rhs)?
    };
    out.check_finite("grid macro update")?;
    Ok(out)
}

/// Runs MiMa-Grid on any case; the field solve is active for Landau/TSI.
pub fn run_eulerian(config: &RunConfig) -> Result<Diagnostics> {
    config.validate()?;
    if config.scheme != Scheme::MimaGrid {
        return Err(Error::Config(format!("run_eulerian needs mima_grid, got {}", config.scheme)));
    }
    let grid = harness::spatial_grid(config)?;
    let model = harness::velocity_model(config)?;
    let coeffs = StiffCoeffs::new(config.epsilon, config.dt)?;
    let mut rho = harness::initial_rho(config, &grid);
    let g0 = harness::initial_micro(config, &model);
    let mut p = PhaseSpaceGrid::from_fn(grid, model, config.nv, g0)?;
    let field = config.case.has_field();
    let mut e = if field { Some(poisson_solve(&rho)?) } else { None };
    let mut rec = Recorder::new(config, &rho, e.as_ref());
    for n in 1..=config.n_steps()? {
        let start = std::time::Instant::now();
        let upd = euler_micro_step(&p, &rho, e.as_ref(), &coeffs);
        rho = euler_macro_step(&p, &rho, e.as_ref(), &upd.h, &coeffs, config.explicit_macro)?;
        p.g = upd.g;
        if field {
            e = Some(poisson_solve(&rho)?);
        }
        rec.step(n, start.elapsed().as_secs_f64(), &rho, e.as_ref(), 0);
    }
    let phase = config.phase_space.then(|| reconstruct(&p, &rho, config.t_end));
    Ok(rec.finish(rho, e, phase))
}

/// `f(x_i, v_j) = rho_i M_j + (g_{i-1/2,j} + g_{i+1/2,j}) / 2`.
pub fn reconstruct(p: &PhaseSpaceGrid, rho: &GridField, t: f64) -> PhaseSpaceSnapshot {
    let nx = p.nx();
    let nv = p.nv;
    let mut f = vec![0.0; nx * nv];
    for i in 0..nx {
        let im = (i + nx - 1) % nx;
        for j in 0..nv {
            f[i * nv + j] = rho[i] * p.m[j] + 0.5 * (p.at(im, j) + p.at(i, j));
        }
    }
    PhaseSpaceSnapshot { t, x: p.grid.nodes().collect(), v: p.v.clone(), f }
}
