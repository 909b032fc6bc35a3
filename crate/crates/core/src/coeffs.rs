use crate::error::{Error, Result};

/// Exponential coefficients of the reformulated micro equation for a given
/// stiffness `epsilon` and time step `dt`.
///
/// With `x = dt / epsilon^2`:
///
/// * `a = exp(-x)`
/// * `b1 = epsilon (1 - a) / dt`
/// * `c_pred = (dt / epsilon) exp(-x / 2) / (1 + a)`, `d_pred = 2a / (1 + a)`
/// * `c_corr = (dt / epsilon) exp(-x / 2)`
/// * `diff1 = dt (1 - a)`, `diff2 = dt (1 - a)^2`
///
/// `1 - a` is always evaluated through `expm1` so that the small-`x` regime
/// keeps full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffCoeffs {
    pub epsilon: f64,
    pub dt: f64,
    pub a: f64,
    pub one_minus_a: f64,
    pub b1: f64,
    pub c_pred: f64,
    pub d_pred: f64,
    pub c_corr: f64,
    pub diff1: f64,
    pub diff2: f64,
}

impl StiffCoeffs {
    pub fn new(epsilon: f64, dt: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        let x = dt / (epsilon * epsilon);
        let a = (-x).exp();
        let one_minus_a = -(-x).exp_m1();
        let b1 = epsilon * one_minus_a / dt;
        let half_decay = (-0.5 * x).exp();
        // dt/epsilon may overflow for absurdly small epsilon, but then the
        // exponential has already underflowed to zero.
        let c_corr = if half_decay == 0.0 { 0.0 } else { dt / epsilon * half_decay };
        Ok(Self {
            epsilon,
            dt,
            a,
            one_minus_a,
            b1,
            c_pred: c_corr / (1.0 + a),
            d_pred: 2.0 * a / (1.0 + a),
            c_corr,
            diff1: dt * one_minus_a,
            diff2: dt * one_minus_a * one_minus_a,
        })
    }

    /// Displacement factor `epsilon (1 - a)` of the first-order characteristics.
    pub fn first_order_push(&self) -> f64 {
        self.epsilon * self.one_minus_a
    }

    /// `dt / epsilon`, the factor in front of the macro flux divergence.
    pub fn flux_factor(&self) -> f64 {
        self.dt / self.epsilon
    }

    /// True when every micro-part coefficient has underflowed to zero, so the
    /// particle weights are identically zero after one step.
    pub fn micro_vanishes(&self) -> bool {
        self.a == 0.0 && self.c_corr == 0.0
    }
}

/// Free-function form of [`StiffCoeffs::new`].
pub fn stiff_coeffs(epsilon: f64, dt: f64) -> Result<StiffCoeffs> {
    StiffCoeffs::new(epsilon, dt)
}
