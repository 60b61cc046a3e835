//! Crosswind path planning for pumping-kite (ground-generation) airborne
//! wind energy systems.
//!
//! The reel-out flight path is a Lissajous curve on the sphere of radius
//! equal to the tether length. For each tether length the three curve
//! parameters are chosen to maximize the path-averaged traction power of a
//! quasi-static kite model, subject to a turn-rate (curvature) limit and
//! altitude limits. A sweep over tether lengths, warm-started from one
//! length to the next, is interpolated with cubic splines into a
//! continuous reference for the whole traction phase.
//!
//! - [`geometry`]: path evaluation, derivatives, 3D embedding, curvature.
//! - [`model`]: closed-form tether force and power.
//! - [`optimizer`]: the per-length nonlinear program and its SQP solver.
//! - [`sweep`]: warm-started tether sweep, splines, phase averaging.
//! - [`config`] and [`report`]: JSON run configuration and CSV/JSON/SVG output.

pub mod commands;
pub mod config;
pub mod error;
pub mod geometry;
pub mod model;
pub mod optimizer;
pub mod report;
pub mod spline;
pub mod sweep;

pub use error::{Error, Result};
pub use geometry::{LissajousPath, PathSample, Shape};
pub use model::{Environment, KiteParams, KiteState, PowerBreakdown};
pub use optimizer::{PlanConfig, PlanProblem, PlanSolution};
pub use spline::CubicSpline;

pub use sweep::{ParamSplines, SweepResult};
