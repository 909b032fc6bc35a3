use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityKind {
    /// Radiative transfer: `v in [-1, 1]`, `M = 1`, `<h> = (1/2) int h dv`.
    FlatRte,
    /// Vlasov-Poisson-BGK: Gaussian Maxwellian truncated to `[-v_max, v_max]`.
    MaxwellianVp,
}

/// Velocity space, equilibrium and moment convention of a kinetic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityModel {
    kind: VelocityKind,
    v_lo: f64,
    v_hi: f64,
}

impl VelocityModel {
    pub fn flat_rte() -> Self {
        Self { kind: VelocityKind::FlatRte, v_lo: -1.0, v_hi: 1.0 }
    }

    pub fn maxwellian_vp(v_max: f64) -> Result<Self> {
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(Error::Domain(format!("v_max must be positive, got {v_max}")));
        }
        Ok(Self { kind: VelocityKind::MaxwellianVp, v_lo: -v_max, v_hi: v_max })
    }

    pub fn kind(&self) -> VelocityKind {
        self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.v_lo, self.v_hi)
    }

    /// `L_v = |V|`.
    pub fn length(&self) -> f64 {
        self.v_hi - self.v_lo
    }

    /// Factor in front of `int dv` in the definition of `<.>`.
    pub fn moment_normalizer(&self) -> f64 {
        match self.kind {
            VelocityKind::FlatRte => 0.5,
            VelocityKind::MaxwellianVp => 1.0,
        }
    }

    /// Equilibrium `M(v)`. The Gaussian is cut off outside the truncation box.
    pub fn maxwellian(&self, v: f64) -> f64 {
        match self.kind {
            VelocityKind::FlatRte => 1.0,
            VelocityKind::MaxwellianVp => {
                if v.abs() > self.v_hi {
                    0.0
                } else {
                    (-0.5 * v * v).exp() / (2.0 * PI).sqrt()
                }
            }
        }
    }

    /// `<v^2 M>`: 1/3 for the flat model, 1 for the Maxwellian (analytic).
    pub fn second_moment(&self) -> f64 {
        match self.kind {
            VelocityKind::FlatRte => 1.0 / 3.0,
            VelocityKind::MaxwellianVp => 1.0,
        }
    }

    /// `<M>` over the (possibly truncated) velocity domain, by composite Simpson.
    pub fn truncated_mass(&self) -> f64 {
        let n = 4000;
        let h = self.length() / n as f64;
        let mut s = self.maxwellian(self.v_lo) + self.maxwellian(self.v_hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * self.maxwellian(self.v_lo + i as f64 * h);
        }
        self.moment_normalizer() * s * h / 3.0
    }
}
