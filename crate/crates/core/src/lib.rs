//! Asymptotic-preserving micro-macro particle schemes for linear kinetic
//! equations in the diffusion scaling.
//!
//! The distribution is split as `f = rho M + g` with `<g> = 0`; the density
//! `rho` lives on a periodic grid while the kinetic remainder `g` is carried
//! by weighted particles ([`rte_mima`], [`vpbgk`]) or by a staggered
//! phase-space grid ([`eulerian`]). [`baselines`] holds the comparison
//! methods and the limit (drift-)diffusion solvers, [`harness`] the test
//! cases, diagnostics and study drivers.

pub mod baselines;
pub mod coeffs;
pub mod error;
pub mod eulerian;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod particles;
pub mod rte_mima;
pub mod spline;
pub mod velocity;
pub mod vpbgk;

pub use coeffs::{stiff_coeffs, StiffCoeffs};
pub use error::{Error, Result};
pub use grid::{centered_dx, linf_error, second_difference, GridField, SpatialGrid};
pub use harness::{run, Case, Diagnostics, RunConfig, Scheme};
pub use linalg::{cyclic_tridiag_solve, implicit_diffusion_solve, Stencil};
pub use particles::{project, wrap_positions, ParticleEnsemble, ProjectionStats};
pub use spline::{bspline, deposit, interpolate, moment, SplineOrder};
pub use velocity::{VelocityKind, VelocityModel};
