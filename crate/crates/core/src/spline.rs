//! Centered B-spline shape functions and the particle/grid transfer built on
//! them.
//!
//! `B_0 = 1/dx` on `|x| < dx/2`, `B_l = B_0 * B_{l-1}`; every `B_l` has unit
//! integral and support `|x| <= (l + 1) dx / 2`. Internally the shapes are
//! evaluated in grid units, `B_l(x) = N_l(x / dx) / dx`.

use crate::error::{Error, Result};
use crate::grid::{GridField, SpatialGrid};
use crate::particles::ParticleEnsemble;
use crate::velocity::VelocityModel;

/// B-spline order, restricted to 0..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SplineOrder(u8);

impl SplineOrder {
    pub const NGP: SplineOrder = SplineOrder(0);
    pub const LINEAR: SplineOrder = SplineOrder(1);
    pub const QUADRATIC: SplineOrder = SplineOrder(2);
    pub const CUBIC: SplineOrder = SplineOrder(3);

    pub fn new(order: usize) -> Result<Self> {
        if order > 3 {
            return Err(Error::Domain(format!("unsupported B-spline order {order}")));
        }
        Ok(Self(order as u8))
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Half-width of the support in grid units.
    pub fn radius(self) -> f64 {
        (self.0 as f64 + 1.0) * 0.5
    }
}

impl Default for SplineOrder {
    fn default() -> Self {
        Self::LINEAR
    }
}

/// Dimensionless cardinal B-spline `N_l(u)`.
pub(crate) fn shape(order: SplineOrder, u: f64) -> f64 {
    let a = u.abs();
    match order.0 {
        0 => {
            if a < 0.5 {
                1.0
            } else {
                0.0
            }
        }
        1 => {
            if a < 1.0 {
                1.0 - a
            } else {
                0.0
            }
        }
        2 => {
            if a < 0.5 {
                0.75 - a * a
            } else if a < 1.5 {
                let t = 1.5 - a;
                0.5 * t * t
            } else {
                0.0
            }
        }
        _ => {
            if a < 1.0 {
                2.0 / 3.0 - a * a + 0.5 * a * a * a
            } else if a < 2.0 {
                let t = 2.0 - a;
                t * t * t / 6.0
            } else {
                0.0
            }
        }
    }
}

/// `B_l(x)` for spacing `dx`.
pub fn bspline(order: usize, x: f64, dx: f64) -> Result<f64> {
    let order = SplineOrder::new(order)?;
    if dx.is_nan() || dx <= 0.0 {
        return Err(Error::Domain(format!("spacing must be positive, got {dx}")));
    }
    Ok(shape(order, x / dx) / dx)
}

/// Visits every node `i` with a nonzero weight `N_l(i - x/dx)` for a position
/// in `[0, lx)`, using minimum-image distances.
///
/// Order 0 assigns the whole weight to the node of the half-open cell
/// containing `x`, which agrees with `B_0` everywhere except on cell faces.
#[inline]
pub(crate) fn for_each_node(grid: &SpatialGrid, x: f64, order: SplineOrder, mut f: impl FnMut(usize, f64)) {
    if order == SplineOrder::NGP {
        f(grid.cell_of(x), 1.0);
        return;
    }
    let u = x / grid.dx();
    let r = order.radius();
    let lo = (u - r).floor() as isize;
    let hi = (u + r).ceil() as isize;
    for i in lo..=hi {
        let w = shape(order, i as f64 - u);
        if w != 0.0 {
            f(grid.wrap_index(i), w);
        }
    }
}

/// `F_i = sum_k w_k B_l(x_i - x_k) psi(v_k)`: the raw particle sum, with no
/// velocity-moment normalizer applied.
pub fn deposit(
    ensemble: &ParticleEnsemble,
    grid: &SpatialGrid,
    psi: impl Fn(f64) -> f64,
    order: SplineOrder,
) -> GridField {
    deposit_weights(&ensemble.x, &ensemble.v, &ensemble.w, grid, psi, order)
}

/// Same as [`deposit`] with an explicit weight array, e.g. a source term
/// carried by the particles.
pub fn deposit_weights(
    x: &[f64],
    v: &[f64],
    w: &[f64],
    grid: &SpatialGrid,
    psi: impl Fn(f64) -> f64,
    order: SplineOrder,
) -> GridField {
    let mut out = GridField::zeros(*grid);
    let inv_dx = 1.0 / grid.dx();
    let vals = out.values_mut();
    for ((&xk, &vk), &wk) in x.iter().zip(v).zip(w) {
        if wk == 0.0 {
            continue;
        }
        let q = wk * psi(vk) * inv_dx;
        for_each_node(grid, xk, order, |i, s| vals[i] += q * s);
    }
    out
}

/// Velocity moment `<psi g>` on the grid: [`deposit`] scaled by the model's
/// moment normalizer (1/2 for the flat model).
pub fn moment(
    ensemble: &ParticleEnsemble,
    grid: &SpatialGrid,
    psi: impl Fn(f64) -> f64,
    order: SplineOrder,
    model: &VelocityModel,
) -> GridField {
    let mut f = deposit(ensemble, grid, psi, order);
    let c = model.moment_normalizer();
    if c != 1.0 {
        f.values_mut().iter_mut().for_each(|v| *v *= c);
    }
    f
}

/// `sum_i field_i B_l(x_i - x) dx`; reproduces constants exactly.
pub fn interpolate(field: &GridField, x: f64, order: SplineOrder) -> f64 {
    let vals = field.values();
    let mut acc = 0.0;
    for_each_node(field.grid(), x, order, |i, s| acc += vals[i] * s);
    acc
}
