//! Periodic constant-stencil tridiagonal solves and FFT helpers.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::GridField;

/// Constant periodic stencil `(A u)_i = sub u_{i-1} + main u_i + sup u_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub sub: f64,
    pub main: f64,
    pub sup: f64,
}

impl Stencil {
    pub fn new(sub: f64, main: f64, sup: f64) -> Self {
        Self { sub, main, sup }
    }

    /// `I - c D2` for the standard second difference on spacing `dx`.
    pub fn implicit_diffusion(c: f64, dx: f64) -> Self {
        let r = c / (dx * dx);
        Self { sub: -r, main: 1.0 + 2.0 * r, sup: -r }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|i| self.sub * u[(i + n - 1) % n] + self.main * u[i] + self.sup * u[(i + 1) % n])
            .collect()
    }

    /// Eigenvalue of the circulant matrix on Fourier mode `m` of `n`.
    pub fn eigenvalue(&self, m: usize, n: usize) -> Complex64 {
        let theta = 2.0 * PI * m as f64 / n as f64;
        Complex64::new(
            self.main + (self.sub + self.sup) * theta.cos(),
            (self.sup - self.sub) * theta.sin(),
        )
    }

    fn scale(&self) -> f64 {
        self.sub.abs() + self.main.abs() + self.sup.abs()
    }
}

const RESIDUAL_TOL: f64 = 1e-10;

/// Solves the periodic tridiagonal system `A u = rhs` for a constant stencil.
///
/// Diagonally dominant stencils use a Thomas sweep with a Sherman-Morrison
/// correction for the corner entries; everything else (or a sweep that misses
/// the residual tolerance) goes through FFT diagonalization of the circulant.
pub fn cyclic_tridiag_solve(stencil: Stencil, rhs: &GridField) -> Result<GridField> {
    let u = cyclic_tridiag_solve_slice(stencil, rhs.values())?;
    GridField::from_values(*rhs.grid(), u)
}

/// Solves `(I - c D2) u = rhs` on the periodic grid of `rhs`.
pub fn implicit_diffusion_solve(c: f64, rhs: &GridField) -> Result<GridField> {
    if c == 0.0 {
        return Ok(rhs.clone());
    }
    cyclic_tridiag_solve(Stencil::implicit_diffusion(c, rhs.grid().dx()), rhs)
}

pub fn cyclic_tridiag_solve_slice(stencil: Stencil, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let singular = Error::Singular { sub: stencil.sub, main: stencil.main, sup: stencil.sup };
    if n < 3 {
        return Err(Error::Domain(format!("periodic tridiagonal system needs n >= 3, got {n}")));
    }
    let tol = 1e-13 * stencil.scale();
    let null_modes: Vec<usize> = (0..n).filter(|&m| stencil.eigenvalue(m, n).norm() <= tol).collect();
    if stencil.scale() == 0.0 {
        return Err(singular);
    }
    let rhs_max = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dominant = stencil.main.abs() >= stencil.sub.abs() + stencil.sup.abs();
    if null_modes.is_empty() && dominant {
        if let Some(u) = sherman_morrison(stencil, rhs) {
            if residual(stencil, &u, rhs) <= RESIDUAL_TOL * rhs_max {
                return Ok(u);
            }
        }
    }
    // Singular stencils are solvable when rhs has no component on the null
    // modes; the solution returned is the one without null-mode content.
    let u = circulant_solve(stencil, rhs, &null_modes);
    if u.iter().all(|v| v.is_finite()) && residual(stencil, &u, rhs) <= RESIDUAL_TOL * rhs_max {
        Ok(u)
    } else {
        Err(singular)
    }
}

fn residual(stencil: Stencil, u: &[f64], rhs: &[f64]) -> f64 {
    stencil.apply(u).iter().zip(rhs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Thomas algorithm on the open tridiagonal part with modified first/last
/// diagonal entries; returns `None` on a vanishing pivot.
fn thomas(sub: f64, diag: &[f64], sup: f64, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut gam = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut bet = diag[0];
    if bet == 0.0 {
        return None;
    }
    u[0] = rhs[0] / bet;
    for j in 1..n {
        gam[j] = sup / bet;
        bet = diag[j] - sub * gam[j];
        if bet == 0.0 {
            return None;
        }
        u[j] = (rhs[j] - sub * u[j - 1]) / bet;
    }
    for j in (0..n - 1).rev() {
        u[j] -= gam[j + 1] * u[j + 1];
    }
    Some(u)
}

fn sherman_morrison(s: Stencil, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    // corners: A[n-1][0] = sup, A[0][n-1] = sub
    let alpha = s.sup;
    let beta = s.sub;
    let gamma = -s.main;
    let mut diag = vec![s.main; n];
    diag[0] = s.main - gamma;
    diag[n - 1] = s.main - alpha * beta / gamma;
    let x = thomas(s.sub, &diag, s.sup, rhs)?;
    let mut corner = vec![0.0; n];
    corner[0] = gamma;
    corner[n - 1] = alpha;
    let z = thomas(s.sub, &diag, s.sup, &corner)?;
    let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if denom == 0.0 {
        return None;
    }
    let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    let u: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect();
    u.iter().all(|v| v.is_finite()).then_some(u)
}

fn circulant_solve(s: Stencil, rhs: &[f64], null_modes: &[usize]) -> Vec<f64> {
    let n = rhs.len();
    let mut buf = forward_fft(rhs);
    for (m, c) in buf.iter_mut().enumerate() {
        if null_modes.contains(&m) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= s.eigenvalue(m, n);
        }
    }
    inverse_fft_real(buf)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT `X_m = sum_j x_j e^{-2 pi i j m / n}`.
pub fn forward_fft(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(&mut buf));
    buf
}

/// Inverse DFT scaled by `1/n`, keeping the real part.
pub fn inverse_fft_real(mut buf: Vec<Complex64>) -> Vec<f64> {
    let n = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Signed wave index of DFT bin `m`; the Nyquist bin of an even grid maps to
/// `None` because a real derivative cannot represent it.
pub fn signed_mode(m: usize, n: usize) -> Option<i64> {
    if 2 * m == n {
        None
    } else if 2 * m < n {
        Some(m as i64)
    } else {
        Some(m as i64 - n as i64)
    }
}

/// Spectral derivative of a periodic field. The Nyquist component (even
/// grids) is annihilated.
pub fn spectral_dx(field: &GridField) -> GridField {
    let n = field.len();
    let lx = field.grid().lx();
    let mut buf = forward_fft(field.values());
    for (m, c) in buf.iter_mut().enumerate() {
        *c = match signed_mode(m, n) {
            Some(k) => *c * Complex64::new(0.0, 2.0 * PI * k as f64 / lx),
            None => Complex64::new(0.0, 0.0),
        };
    }
    GridField::from_values(*field.grid(), inverse_fft_real(buf)).expect("same length")
}

/// The field with its Nyquist component removed (identity on odd grids).
pub fn strip_nyquist(field: &GridField) -> GridField {
    let n = field.len();
    if n % 2 == 1 {
        return field.clone();
    }
    let mut buf = forward_fft(field.values());
    buf[n / 2] = Complex64::new(0.0, 0.0);
    GridField::from_values(*field.grid(), inverse_fft_real(buf)).expect("same length")
}
