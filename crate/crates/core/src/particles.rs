use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::velocity::VelocityModel;

/// Weighted markers `(x_k, v_k, w_k)` sampling a distribution on
/// `[0, lx) x V`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticleEnsemble {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn new(x: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() || x.len() != w.len() {
            return Err(Error::Domain(format!(
                "particle arrays differ in length: {} / {} / {}",
                x.len(),
                v.len(),
                w.len()
            )));
        }
        Ok(Self { x, v, w })
    }

    /// Draws `np` markers uniformly in phase space from a seeded xoshiro256++
    /// stream (x first, then v, particle by particle) and sets
    /// `w_k = density(x_k, v_k) lx L_v / np`.
    pub fn sample_uniform(
        np: usize,
        grid: &SpatialGrid,
        model: &VelocityModel,
        seed: u64,
        density: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let (v_lo, v_hi) = model.domain();
        let mut x = Vec::with_capacity(np);
        let mut v = Vec::with_capacity(np);
        for _ in 0..np {
            x.push(rng.gen::<f64>() * grid.lx());
            v.push(v_lo + rng.gen::<f64>() * (v_hi - v_lo));
        }
        let scale = weight_scale(grid, model, np);
        let w = x.iter().zip(&v).map(|(&xk, &vk)| density(xk, vk) * scale).collect();
        Self { x, v, w }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.w.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn all_weights_zero(&self) -> bool {
        self.w.iter().all(|&w| w == 0.0)
    }

    pub fn wrap_positions(&mut self, lx: f64) {
        for x in &mut self.x {
            *x = wrap(*x, lx);
        }
    }

    /// Weight sums per projection cell.
    pub fn cell_sums(&self, grid: &SpatialGrid) -> Vec<f64> {
        let mut sums = vec![0.0; grid.nx()];
        for (&x, &w) in self.x.iter().zip(&self.w) {
            sums[grid.cell_of(x)] += w;
        }
        sums
    }
}

/// `lx L_v / np`, the phase-space volume carried by one marker.
pub fn weight_scale(grid: &SpatialGrid, model: &VelocityModel, np: usize) -> f64 {
    grid.lx() * model.length() / np as f64
}

/// Periodic wrap into `[0, lx)`.
pub fn wrap(x: f64, lx: f64) -> f64 {
    let y = x.rem_euclid(lx);
    // rem_euclid can round up to lx for tiny negative inputs
    if y >= lx {
        0.0
    } else {
        y
    }
}

/// Consuming form of [`ParticleEnsemble::wrap_positions`].
pub fn wrap_positions(mut ensemble: ParticleEnsemble, lx: f64) -> ParticleEnsemble {
    ensemble.wrap_positions(lx);
    ensemble
}

/// Outcome of a projection pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionStats {
    /// Cells holding a nonzero weight sum but no equilibrium mass `sum M(v_k)`;
    /// their weights were left untouched.
    pub flagged_cells: usize,
}

/// Discrete `(I - Pi)` on the weights: in each cell
/// `C_i = [x_i - dx/2, x_i + dx/2)` subtract `M(v_k) * (sum_j w_j) / (sum_j M(v_j))`
/// so that every nonempty cell ends with zero total weight.
pub fn project(ensemble: &mut ParticleEnsemble, grid: &SpatialGrid, model: &VelocityModel) -> ProjectionStats {
    if ensemble.all_weights_zero() {
        return ProjectionStats::default();
    }
    let nx = grid.nx();
    let cells: Vec<usize> = ensemble.x.iter().map(|&x| grid.cell_of(x)).collect();
    let eq: Vec<f64> = ensemble.v.iter().map(|&v| model.maxwellian(v)).collect();
    let mut wsum = vec![0.0; nx];
    let mut msum = vec![0.0; nx];
    for ((&c, &w), &m) in cells.iter().zip(&ensemble.w).zip(&eq) {
        wsum[c] += w;
        msum[c] += m;
    }
    let mut stats = ProjectionStats::default();
    let mut ratio = vec![0.0; nx];
    for i in 0..nx {
        if msum[i] > 0.0 {
            ratio[i] = wsum[i] / msum[i];
        } else if wsum[i] != 0.0 {
            stats.flagged_cells += 1;
        }
    }
    for ((w, &c), &m) in ensemble.w.iter_mut().zip(&cells).zip(&eq) {
        *w -= m * ratio[c];
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_examples() {
        let lx = 2.0;
        assert_eq!(wrap(lx, lx), 0.0);
        assert_eq!(wrap(-0.25 * lx, lx), 0.75 * lx);
        assert!((wrap(2.3 * lx, lx) - 0.3 * lx).abs() < 1e-14);
        assert_eq!(wrap(-1e-18, lx), 0.0);
        let e = ParticleEnsemble::new(vec![-0.5, 4.5], vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(wrap_positions(e, lx).x, vec![1.5, 0.5]);
    }

    #[test]
    fn projection_hand_case() {
        let g = SpatialGrid::new(4, 1.0).unwrap();
        let m = VelocityModel::flat_rte();
        let mut e = ParticleEnsemble::new(vec![0.01, 0.05], vec![0.2, -0.7], vec![3.0, 1.0]).unwrap();
        let stats = project(&mut e, &g, &m);
        assert_eq!(e.w, vec![1.0, -1.0]);
        assert_eq!(stats.flagged_cells, 0);
    }

    #[test]
    fn projection_of_zero_is_zero() {
        let g = SpatialGrid::new(4, 1.0).unwrap();
        let mut e = ParticleEnsemble::new(vec![0.1, 0.6], vec![0.2, -0.7], vec![0.0, 0.0]).unwrap();
        project(&mut e, &g, &VelocityModel::flat_rte());
        assert_eq!(e.w, vec![0.0, 0.0]);
    }

    #[test]
    fn projection_flags_cells_without_equilibrium_mass() {
        let g = SpatialGrid::new(4, 1.0).unwrap();
        let m = VelocityModel::maxwellian_vp(6.0).unwrap();
        // v outside the truncation box: M(v) = 0
        let mut e = ParticleEnsemble::new(vec![0.5], vec![7.0], vec![2.0]).unwrap();
        let stats = project(&mut e, &g, &m);
        assert_eq!(stats.flagged_cells, 1);
        assert_eq!(e.w, vec![2.0]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = SpatialGrid::new(8, 2.0).unwrap();
        let m = VelocityModel::flat_rte();
        let a = ParticleEnsemble::sample_uniform(50, &g, &m, 7, |x, v| x + v);
        let b = ParticleEnsemble::sample_uniform(50, &g, &m, 7, |x, v| x + v);
        assert_eq!(a, b);
        assert!(a.x.iter().all(|&x| (0.0..2.0).contains(&x)));
        assert!(a.v.iter().all(|&v| (-1.0..1.0).contains(&v)));
        let s = weight_scale(&g, &m, 50);
        assert!((a.w[0] - (a.x[0] + a.v[0]) * s).abs() < 1e-15);
    }
}
