use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, lx)` with nodes `x_i = i dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    nx: usize,
    lx: f64,
    dx: f64,
}

impl SpatialGrid {
    pub fn new(nx: usize, lx: f64) -> Result<Self> {
        if nx < 4 {
            return Err(Error::Domain(format!("need at least 4 grid nodes, got {nx}")));
        }
        if !(lx > 0.0 && lx.is_finite()) {
            return Err(Error::Domain(format!("domain length must be positive, got {lx}")));
        }
        Ok(Self { nx, lx, dx: lx / nx as f64 })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Cell midpoint `x_{i+1/2}`.
    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nx).map(|i| self.node(i))
    }

    /// Index of the node whose cell `[x_i - dx/2, x_i + dx/2)` contains `x`.
    pub fn cell_of(&self, x: f64) -> usize {
        let i = (x / self.dx + 0.5).floor() as isize;
        i.rem_euclid(self.nx as isize) as usize
    }

    pub(crate) fn wrap_index(&self, i: isize) -> usize {
        i.rem_euclid(self.nx as isize) as usize
    }
}

/// Scalar field sampled on the nodes of a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { grid, values: vec![0.0; grid.nx()] }
    }

    pub fn constant(grid: SpatialGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.nx()] }
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, values: grid.nodes().map(f).collect() }
    }

    pub fn from_values(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() {
            return Err(Error::GridMismatch(values.len(), grid.nx()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `values[i mod nx]` for any signed index.
    pub fn periodic(&self, i: isize) -> f64 {
        self.values[self.grid.wrap_index(i)]
    }

    /// Rectangle-rule integral `sum_i f_i dx`, exact for trigonometric
    /// polynomials resolved by the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &GridField) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }
}

impl Index<usize> for GridField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for GridField {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Centered difference `(f_{i+1} - f_{i-1}) / (2 dx)` with periodic indices.
pub fn centered_dx(field: &GridField) -> GridField {
    let n = field.len() as isize;
    let inv = 0.5 / field.grid().dx();
    let values = (0..n).map(|i| (field.periodic(i + 1) - field.periodic(i - 1)) * inv).collect();
    GridField { grid: *field.grid(), values }
}

/// Standard second difference `(f_{i+1} - 2 f_i + f_{i-1}) / dx^2`.
pub fn second_difference(field: &GridField) -> GridField {
    let n = field.len() as isize;
    let dx = field.grid().dx();
    let inv = 1.0 / (dx * dx);
    let values = (0..n)
        .map(|i| (field.periodic(i + 1) - 2.0 * field.periodic(i) + field.periodic(i - 1)) * inv)
        .collect();
    GridField { grid: *field.grid(), values }
}

/// Max-norm distance between two fields on the same grid.
pub fn linf_error(a: &GridField, b: &GridField) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(a.len(), b.len()));
    }
    Ok(a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new(3, 1.0).is_err());
        assert!(SpatialGrid::new(8, 0.0).is_err());
        let g = SpatialGrid::new(8, 2.0).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.node(3), 0.75);
    }

    #[test]
    fn cell_assignment_is_half_open() {
        let g = SpatialGrid::new(4, 1.0).unwrap();
        assert_eq!(g.cell_of(0.0), 0);
        assert_eq!(g.cell_of(0.124), 0);
        assert_eq!(g.cell_of(0.125), 1);
        assert_eq!(g.cell_of(0.9), 0);
        assert_eq!(g.cell_of(0.874), 3);
    }

    #[test]
    fn centered_dx_of_constant_is_zero() {
        let g = SpatialGrid::new(8, 1.0).unwrap();
        let d = centered_dx(&GridField::constant(g, 3.5));
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn centered_dx_fourier_mode() {
        let lx = 3.0;
        let g = SpatialGrid::new(32, lx).unwrap();
        let k = 2.0 * PI / lx;
        let d = centered_dx(&GridField::from_fn(g, |x| (k * x).sin()));
        let damp = (k * g.dx()).sin() / (k * g.dx());
        for (i, x) in g.nodes().enumerate() {
            let exact = k * (k * x).cos() * damp;
            assert!((d[i] - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn centered_dx_wraps_at_seam() {
        // f = x_i on 4 nodes of [0, 4): f = (0, 1, 2, 3)
        let g = SpatialGrid::new(4, 4.0).unwrap();
        let d = centered_dx(&GridField::from_fn(g, |x| x));
        assert_eq!(d.values(), &[(1.0 - 3.0) / 2.0, 1.0, 1.0, (0.0 - 2.0) / 2.0]);
    }

    #[test]
    fn linf_error_cases() {
        let g = SpatialGrid::new(4, 1.0).unwrap();
        let a = GridField::from_values(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(linf_error(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b[2] += 0.25;
        assert_eq!(linf_error(&a, &b).unwrap(), 0.25);
        let other = GridField::zeros(SpatialGrid::new(5, 1.0).unwrap());
        assert!(matches!(linf_error(&a, &other), Err(Error::GridMismatch(4, 5))));
    }
}
