use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spline::SplineOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    MimaPart1,
    MimaPart2,
    MimaGrid,
    MomentGuided,
    FullPic,
    DiffusionLimit,
    DriftDiffusionLimit,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::MimaPart1,
        Scheme::MimaPart2,
        Scheme::MimaGrid,
        Scheme::MomentGuided,
        Scheme::FullPic,
        Scheme::DiffusionLimit,
        Scheme::DriftDiffusionLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::MimaPart1 => "mima_part_1",
            Scheme::MimaPart2 => "mima_part_2",
            Scheme::MimaGrid => "mima_grid",
            Scheme::MomentGuided => "moment_guided",
            Scheme::FullPic => "full_pic",
            Scheme::DiffusionLimit => "diffusion_limit",
            Scheme::DriftDiffusionLimit => "drift_diffusion_limit",
        }
    }

    pub fn uses_particles(self) -> bool {
        matches!(self, Scheme::MimaPart1 | Scheme::MimaPart2 | Scheme::MomentGuided | Scheme::FullPic)
    }

    pub fn supports(self, case: Case) -> bool {
        match self {
            Scheme::MimaPart1 | Scheme::DiffusionLimit => case == Case::RtePeriodic,
            Scheme::DriftDiffusionLimit => case != Case::RtePeriodic,
            _ => true,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    RtePeriodic,
    Landau,
    Tsi,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::RtePeriodic, Case::Landau, Case::Tsi];

    pub fn name(self) -> &'static str {
        match self {
            Case::RtePeriodic => "rte_periodic",
            Case::Landau => "landau",
            Case::Tsi => "tsi",
        }
    }

    /// Whether the case carries an electric field.
    pub fn has_field(self) -> bool {
        self != Case::RtePeriodic
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown case '{s}'")))
    }
}

/// Characteristic push used by the VP corrector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VpCorrectorPush {
    /// `2 dt e^{-dt/2eps^2} / (eps (1 + a))`, applied to the half-step velocity.
    #[default]
    Doubled,
    /// `dt e^{-dt/2eps^2} / eps`, the coefficient of the RTE corrector.
    RteStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub case: Case,
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub nx: usize,
    /// Velocity nodes of the grid scheme.
    pub nv: usize,
    /// Number of particles.
    pub np: usize,
    pub spline_order: SplineOrder,
    pub v_max: f64,
    pub seed: u64,
    /// Perturbation amplitude of the Landau/TSI data.
    pub alpha: f64,
    pub wave_number: f64,
    /// Explicit macro update for MiMa-Part-1 instead of the implicit one.
    pub explicit_macro: bool,
    pub vp_corrector: VpCorrectorPush,
    pub snapshot_times: Vec<f64>,
    /// Reconstruct `f(T, x, v)` on an `nx x phase_nv` grid at the final time.
    pub phase_space: bool,
    pub phase_nv: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::MimaPart2,
            case: Case::RtePeriodic,
            epsilon: 1.0,
            dt: 1e-2,
            t_end: 0.1,
            nx: 16,
            nv: 32,
            np: 100,
            spline_order: SplineOrder::LINEAR,
            v_max: 6.0,
            seed: 1,
            alpha: 0.05,
            wave_number: 0.5,
            explicit_macro: false,
            vp_corrector: VpCorrectorPush::Doubled,
            snapshot_times: Vec::new(),
            phase_space: false,
            phase_nv: 64,
            out: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{value}' for {key}"))),
    }
}

impl RunConfig {
    /// Sets one field from its textual `key = value` form. Keys accept either
    /// underscores or dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "scheme" => self.scheme = value.parse()?,
            "case" => self.case = value.parse()?,
            "epsilon" => self.epsilon = parse_num(&key, value)?,
            "dt" => self.dt = parse_num(&key, value)?,
            "t_end" => self.t_end = parse_num(&key, value)?,
            "nx" => self.nx = parse_num(&key, value)?,
            "nv" => self.nv = parse_num(&key, value)?,
            "np" => self.np = parse_num(&key, value)?,
            "spline_order" => self.spline_order = SplineOrder::new(parse_num(&key, value)?)?,
            "v_max" => self.v_max = parse_num(&key, value)?,
            "seed" => self.seed = parse_num(&key, value)?,
            "alpha" => self.alpha = parse_num(&key, value)?,
            "wave_number" => self.wave_number = parse_num(&key, value)?,
            "explicit_macro" => self.explicit_macro = parse_bool(&key, value)?,
            "vp_corrector" => {
                self.vp_corrector = match value.trim() {
                    "doubled" => VpCorrectorPush::Doubled,
                    "rte_style" | "rte" => VpCorrectorPush::RteStyle,
                    other => return Err(Error::Config(format!("unknown vp_corrector '{other}'"))),
                }
            }
            "snapshot_times" => {
                self.snapshot_times = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_num(&key, s))
                    .collect::<Result<_>>()?
            }
            "phase_space" => self.phase_space = parse_bool(&key, value)?,
            "phase_nv" => self.phase_nv = parse_num(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`; `t_end` must be a multiple of `dt`.
    pub fn n_steps(&self) -> Result<usize> {
        let r = self.t_end / self.dt;
        let n = r.round();
        if (r - n).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::Config(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("dt", self.dt)?;
        positive("v_max", self.v_max)?;
        positive("wave_number", self.wave_number)?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Config("alpha must be finite".into()));
        }
        if self.nx < 4 {
            return Err(Error::Config(format!("nx must be at least 4, got {}", self.nx)));
        }
        if !self.scheme.supports(self.case) {
            return Err(Error::Config(format!(
                "scheme {} does not apply to case {}",
                self.scheme, self.case
            )));
        }
        if self.scheme.uses_particles() && self.np == 0 {
            return Err(Error::Config("np must be positive".into()));
        }
        if self.scheme == Scheme::MimaGrid && (self.nv < 2 || self.nv % 2 == 1) {
            return Err(Error::Config(format!("nv must be even and at least 2, got {}", self.nv)));
        }
        if self.spline_order == SplineOrder::NGP && self.scheme != Scheme::MimaPart1 && self.scheme.uses_particles() {
            return Err(Error::Config(format!("spline order 0 is only allowed for {}", Scheme::MimaPart1)));
        }
        if self.phase_space && self.phase_nv < 2 {
            return Err(Error::Config("phase_nv must be at least 2".into()));
        }
        if self.snapshot_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("snapshot times must be non-negative".into()));
        }
        self.n_steps()?;
        Ok(())
    }
}
