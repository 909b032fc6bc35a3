use std::collections::BTreeMap;

use crate::grid::GridField;
use crate::particles::ParticleEnsemble;
use crate::spline::{for_each_node, SplineOrder};
use crate::velocity::VelocityModel;

use super::config::{Case, RunConfig, Scheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub rho: GridField,
}

/// `f(t, x_i, v_j)` stored row-major (`i * v.len() + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub scheme: Scheme,
    pub case: Case,
    /// `(t, sqrt(sum E^2 dx))` at every step, for the field cases.
    pub energy: Vec<EnergySample>,
    /// Requested `rho` snapshots.
    pub snapshots: Vec<Snapshot>,
    pub final_time: f64,
    pub final_rho: GridField,
    pub final_e: Option<GridField>,
    /// Named scalar errors; `mass_drift` is the largest relative change of
    /// `sum rho dx` over one step.
    pub errors: BTreeMap<String, f64>,
    /// Wall-clock seconds of each step.
    pub step_seconds: Vec<f64>,
    pub phase_space: Option<PhaseSpaceSnapshot>,
    /// Projection cells skipped for lack of equilibrium mass, summed over steps.
    pub flagged_cells: usize,
}

impl Diagnostics {
    pub fn mean_step_seconds(&self) -> f64 {
        if self.step_seconds.is_empty() {
            0.0
        } else {
            self.step_seconds.iter().sum::<f64>() / self.step_seconds.len() as f64
        }
    }
}

/// `sqrt(sum_i E_i^2 dx)`.
pub fn electric_energy(e: &GridField) -> f64 {
    (e.values().iter().map(|x| x * x).sum::<f64>() * e.grid().dx()).sqrt()
}

/// Collects diagnostics along a time loop.
pub struct Recorder {
    diag: Diagnostics,
    pending: Vec<f64>,
    dt: f64,
    mass0: f64,
    last_mass: f64,
    check_mass: bool,
}

impl Recorder {
    pub fn new(config: &RunConfig, rho0: &GridField, e0: Option<&GridField>) -> Self {
        let mut pending = config.snapshot_times.clone();
        pending.sort_by(f64::total_cmp);
        let mass0 = rho0.integral();
        let mut rec = Self {
            diag: Diagnostics {
                scheme: config.scheme,
                case: config.case,
                energy: Vec::new(),
                snapshots: Vec::new(),
                final_time: 0.0,
                final_rho: rho0.clone(),
                final_e: e0.cloned(),
                errors: BTreeMap::new(),
                step_seconds: Vec::new(),
                phase_space: None,
                flagged_cells: 0,
            },
            pending,
            dt: config.dt,
            mass0,
            last_mass: mass0,
            check_mass: true,
        };
        rec.diag.errors.insert("mass_drift".into(), 0.0);
        rec.sample(0.0, rho0, e0);
        rec
    }

    /// For methods whose density is not conserved exactly (Full-PIC).
    pub fn skip_mass_check(&mut self) {
        self.check_mass = false;
        self.diag.errors.remove("mass_drift");
    }

    fn sample(&mut self, t: f64, rho: &GridField, e: Option<&GridField>) {
        if let Some(e) = e {
            self.diag.energy.push(EnergySample { t, energy: electric_energy(e) });
        }
        while let Some(&tau) = self.pending.first() {
            if tau <= t + 0.5 * self.dt {
                self.pending.remove(0);
                self.diag.snapshots.push(Snapshot { t, rho: rho.clone() });
            } else {
                break;
            }
        }
    }

    pub fn step(&mut self, n: usize, seconds: f64, rho: &GridField, e: Option<&GridField>, flagged: usize) {
        let t = n as f64 * self.dt;
        self.diag.step_seconds.push(seconds);
        self.diag.flagged_cells += flagged;
        if self.check_mass {
            let m = rho.integral();
            let drift = (m - self.last_mass).abs() / self.mass0.abs().max(f64::MIN_POSITIVE);
            let slot = self.diag.errors.get_mut("mass_drift").expect("inserted");
            *slot = slot.max(drift);
            self.last_mass = m;
        }
        self.diag.final_time = t;
        self.sample(t, rho, e);
    }

    pub fn finish(mut self, rho: GridField, e: Option<GridField>, phase: Option<PhaseSpaceSnapshot>) -> Diagnostics {
        self.diag.final_rho = rho;
        self.diag.final_e = e;
        self.diag.phase_space = phase;
        self.diag
    }
}

fn velocity_nodes(model: &VelocityModel, nv: usize) -> (Vec<f64>, f64) {
    let (lo, _) = model.domain();
    let dv = model.length() / nv as f64;
    ((0..nv).map(|j| lo + (j as f64 + 0.5) * dv).collect(), dv)
}

/// Bins weighted markers onto `(x_i, v_j)` with `B_l` in x and a hat in v.
fn bin_particles(ens: &ParticleEnsemble, rho: &GridField, v: &[f64], dv: f64, order: SplineOrder) -> Vec<f64> {
    let grid = rho.grid();
    let nv = v.len();
    let v0 = v[0];
    let mut f = vec![0.0; grid.nx() * nv];
    let inv = 1.0 / (grid.dx() * dv);
    for k in 0..ens.len() {
        let u = (ens.v[k] - v0) / dv;
        let j0 = u.floor();
        let frac = u - j0;
        let cols: Vec<(isize, f64)> = [(j0 as isize, 1.0 - frac), (j0 as isize + 1, frac)]
            .into_iter()
            .filter(|(j, _)| *j >= 0 && (*j as usize) < nv)
            .collect();
        let w = ens.w[k] * inv;
        for_each_node(grid, ens.x[k], order, |i, s| {
            for &(j, sv) in &cols {
                f[i * nv + j as usize] += w * s * sv;
            }
        });
    }
    f
}

/// `f = rho M + g` on a grid, with `g` binned from the micro markers.
pub fn reconstruct_micro_macro(
    rho: &GridField,
    micro: &ParticleEnsemble,
    model: &VelocityModel,
    config: &RunConfig,
) -> PhaseSpaceSnapshot {
    let (v, dv) = velocity_nodes(model, config.phase_nv);
    let mut f = bin_particles(micro, rho, &v, dv, config.spline_order);
    let nv = v.len();
    for i in 0..rho.len() {
        for j in 0..nv {
            f[i * nv + j] += rho[i] * model.maxwellian(v[j]);
        }
    }
    PhaseSpaceSnapshot { t: config.t_end, x: rho.grid().nodes().collect(), v, f }
}

/// `f` binned from markers carrying the whole distribution.
pub fn reconstruct_full(full: &ParticleEnsemble, model: &VelocityModel, config: &RunConfig) -> PhaseSpaceSnapshot {
    let grid = super::cases::spatial_grid(config).expect("validated");
    let rho = GridField::zeros(grid);
    let (v, dv) = velocity_nodes(model, config.phase_nv);
    let f = bin_particles(full, &rho, &v, dv, config.spline_order);
    PhaseSpaceSnapshot { t: config.t_end, x: grid.nodes().collect(), v, f }
}

/// `f = rho M` for the limit solvers.
pub fn reconstruct_equilibrium(rho: &GridField, model: &VelocityModel, config: &RunConfig) -> PhaseSpaceSnapshot {
    let (v, _) = velocity_nodes(model, config.phase_nv);
    let f = (0..rho.len()).flat_map(|i| v.iter().map(move |&vj| rho[i] * model.maxwellian(vj))).collect();
    PhaseSpaceSnapshot { t: config.t_end, x: rho.grid().nodes().collect(), v, f }
}
