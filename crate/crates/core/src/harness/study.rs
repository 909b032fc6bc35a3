use crate::error::{Error, Result};
use crate::grid::{linf_error, GridField};

use super::config::RunConfig;
use super::run;

/// What the runs of a convergence study are compared against.
#[derive(Debug, Clone)]
pub enum Reference {
    /// The run with the smallest `dt` of the list.
    Finest,
    /// A separate run, e.g. the same scheme at a much smaller `dt` or a
    /// limit solver.
    Run(Box<RunConfig>),
    /// A known density at `t_end`.
    Field(GridField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    /// `(dt, L-infinity error of rho(T))`, in the order of the input list.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log dt`.
    pub slope: f64,
}

/// Least-squares slope of `log y` against `log x` over the pairs with
/// positive `y`.
pub fn fit_slope(rows: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.1 > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn run_at(template: &RunConfig, dt: f64) -> Result<GridField> {
    let config = RunConfig { dt, snapshot_times: Vec::new(), phase_space: false, out: None, ..template.clone() };
    run(&config).map(|d| d.final_rho).map_err(|e| Error::Study { dt, source: Box::new(e) })
}

/// Runs `template` at every `dt` (concurrently, one thread per run) with the
/// template's seed and particle count, and tabulates the error of `rho(T)`.
pub fn convergence_study(template: &RunConfig, dts: &[f64], reference: &Reference) -> Result<ConvergenceTable> {
    let results: Vec<Result<GridField>> = std::thread::scope(|s| {
        let handles: Vec<_> = dts.iter().map(|&dt| s.spawn(move || run_at(template, dt))).collect();
        handles.into_iter().map(|h| h.join().expect("study worker panicked")).collect()
    });
    let fields = results.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = match reference {
        Reference::Field(f) => f.clone(),
        Reference::Run(c) => run(c)?.final_rho,
        Reference::Finest => {
            let (idx, _) = dts
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .ok_or_else(|| Error::Config("empty dt list".into()))?;
            fields[idx].clone()
        }
    };
    let rows = dts
        .iter()
        .zip(&fields)
        .map(|(&dt, f)| Ok((dt, linf_error(f, &reference)?)))
        .collect::<Result<Vec<_>>>()?;
    let slope = fit_slope(&rows);
    Ok(ConvergenceTable { rows, slope })
}

/// Node-wise spread of `rho(T)` across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSpread {
    pub mean: GridField,
    /// Sample standard deviation per node.
    pub std: GridField,
    /// `max_i std_i`.
    pub max_std: f64,
}

impl SeedSpread {
    /// The noise criterion `max std <= 1e-3 max rho`.
    pub fn is_noise_free(&self) -> bool {
        self.max_std <= 1e-3 * self.mean.max_abs()
    }
}

pub fn seed_spread(template: &RunConfig, seeds: &[u64]) -> Result<SeedSpread> {
    if seeds.len() < 2 {
        return Err(Error::Config("seed_spread needs at least two seeds".into()));
    }
    let runs = seeds
        .iter()
        .map(|&seed| run(&RunConfig { seed, ..template.clone() }).map(|d| d.final_rho))
        .collect::<Result<Vec<_>>>()?;
    let n = runs.len() as f64;
    let grid = *runs[0].grid();
    let mean = GridField::from_values(
        grid,
        (0..grid.nx()).map(|i| runs.iter().map(|r| r[i]).sum::<f64>() / n).collect(),
    )?;
    let std = GridField::from_values(
        grid,
        (0..grid.nx())
            .map(|i| (runs.iter().map(|r| (r[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
            .collect(),
    )?;
    let max_std = std.max_abs();
    Ok(SeedSpread { mean, std, max_std })
}
