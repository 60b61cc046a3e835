//! Tether-length sweep, parameter splines and traction-phase averaging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LissajousPath, Shape};
use crate::model::{self, Environment, KiteParams};
use crate::optimizer::{self, PlanConfig, PlanSolution};
use crate::spline::CubicSpline;

/// Seeds tried when a warm-started solve fails.
pub const FALLBACK_SEEDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Tether lengths, m, strictly increasing.
    pub grid: Vec<f64>,
    pub solutions: Vec<PlanSolution>,
    pub shape: Shape,
    /// Samples per period used by every solve.
    pub grid_n: usize,
    /// Curvature cap shared by every solve, 1/m.
    pub kappa_max: f64,
}

impl SweepResult {
    pub fn total_iterations(&self) -> usize {
        self.solutions.iter().map(|s| s.iterations).sum()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.loyd_ratio).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `r_min, r_min + dr, ...` up to `r_max` (inclusive, with rounding slack).
pub fn tether_grid(r_min: f64, r_max: f64, dr: f64) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
        return Err(Error::InconsistentBounds(format!("need 0 < r_min <= r_max, got {r_min}, {r_max}")));
    }
    if !(dr > 0.0) {
        return Err(Error::InconsistentBounds(format!("dr must be positive, got {dr}")));
    }
    let steps = ((r_max - r_min) / dr + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| r_min + i as f64 * dr).collect())
}

/// How each grid point after the first is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    /// From the previous tether length's solution.
    Warm,
    /// From the best point of the feasibility-filtered seed grid.
    Cold,
}

/// Sweep outcome that may have stopped early.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub result: SweepResult,
    /// Set when a tether length could not be solved; `result` then holds
    /// the lengths solved before it.
    pub failure: Option<Error>,
}

/// Warm-started sweep; fails with [`Error::SweepAborted`] if any length
/// cannot be solved even after the multi-start fallback.
pub fn run_sweep(config: &PlanConfig, r_min: f64, r_max: f64, dr: f64) -> Result<SweepResult> {
    let run = run_sweep_partial(config, &tether_grid(r_min, r_max, dr)?, StartPolicy::Warm);
    match run.failure {
        None => Ok(run.result),
        Some(e) => Err(e),
    }
}

/// Sweep over an explicit grid, keeping whatever was solved before a
/// failure.
pub fn run_sweep_partial(config: &PlanConfig, grid: &[f64], policy: StartPolicy) -> SweepRun {
    let mut result = SweepResult {
        grid: Vec::new(),
        solutions: Vec::new(),
        shape: config.shape,
        grid_n: config.grid_n,
        kappa_max: optimizer::kappa_limit(config.phi_max, &config.kite, &config.env),
    };
    let mut previous: Option<[f64; 3]> = None;

    for &r in grid {
        let solved = solve_at(config, r, previous.filter(|_| policy == StartPolicy::Warm));
        match solved {
            Ok(sol) => {
                previous = Some(sol.params());
                result.grid.push(r);
                result.solutions.push(sol);
            }
            Err(e) => {
                let failure = match e {
                    Error::NoConvergedSolution(_) => Error::SweepAborted { r, completed: result.grid.len() },
                    other => other,
                };
                return SweepRun { result, failure: Some(failure) };
            }
        }
    }
    SweepRun { result, failure: None }
}

/// Solves one tether length from `warm` (or the best grid seed), falling
/// back to a multi-start when that run does not converge.
pub fn solve_at(config: &PlanConfig, r: f64, warm: Option<[f64; 3]>) -> Result<PlanSolution> {
    let problem = optimizer::build_problem(r, config)?;
    let start = match warm {
        Some(x) => Some(x),
        None => optimizer::seed_grid(&problem, 1).first().copied(),
    };
    let mut spent = 0;
    if let Some(x0) = start {
        let sol = optimizer::solve(&problem, x0)?;
        if sol.converged {
            return Ok(sol);
        }
        spent = sol.iterations;
    }
    let seeds = optimizer::seed_grid(&problem, FALLBACK_SEEDS);
    let mut sol = optimizer::multi_start(&problem, &seeds)?;
    sol.iterations += spent;
    Ok(sol)
}

/// Cubic interpolants of the optimal parameters over tether length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSplines {
    pub beta0: CubicSpline,
    pub dbeta: CubicSpline,
    pub dphi: CubicSpline,
    pub shape: Shape,
    pub grid_n: usize,
    pub kappa_max: f64,
}

pub fn fit_splines(sweep: &SweepResult) -> Result<ParamSplines> {
    let column = |i: usize| -> Vec<f64> { sweep.solutions.iter().map(|s| s.params()[i]).collect() };
    if sweep.grid.len() < CubicSpline::MIN_KNOTS {
        return Err(Error::TooFewKnots { needed: CubicSpline::MIN_KNOTS, got: sweep.grid.len() });
    }
    Ok(ParamSplines {
        beta0: CubicSpline::natural(&sweep.grid, &column(0))?,
        dbeta: CubicSpline::natural(&sweep.grid, &column(1))?,
        dphi: CubicSpline::natural(&sweep.grid, &column(2))?,
        shape: sweep.shape,
        grid_n: sweep.grid_n,
        kappa_max: sweep.kappa_max,
    })
}

impl ParamSplines {
    pub fn domain(&self) -> (f64, f64) {
        self.beta0.domain()
    }

    /// `[beta0, dbeta, dphi]` at tether length `r`.
    pub fn params_at(&self, r: f64) -> Result<[f64; 3]> {
        Ok([self.beta0.eval(r)?, self.dbeta.eval(r)?, self.dphi.eval(r)?])
    }

    pub fn path_at(&self, r: f64) -> Result<LissajousPath> {
        let [b0, db, dp] = self.params_at(r)?;
        LissajousPath::new(b0, db, dp, self.shape)
    }

    /// Named splines in a fixed order, for serialization.
    pub fn named(&self) -> [(&'static str, &CubicSpline); 3] {
        [("beta0", &self.beta0), ("dbeta", &self.dbeta), ("dphi", &self.dphi)]
    }
}

/// Average traction power over a reel-out from `r_lo` to `r_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAverage {
    /// W
    pub power: f64,
    /// Worst constraint violation of the interpolated paths, checked on a
    /// 10x finer grid; <= 0 means every interpolated path is flyable.
    pub max_curvature_excess: f64,
}

/// Mean of the path-averaged power over tether length, using paths taken
/// from the splines, by the trapezoidal rule on `n_r` points. A zero-width
/// interval returns the single-length value.
pub fn phase_average(
    splines: &ParamSplines,
    r_lo: f64,
    r_hi: f64,
    env: &Environment,
    kite: &KiteParams,
    n_r: usize,
) -> Result<PhaseAverage> {
    let (lo, hi) = splines.domain();
    for r in [r_lo, r_hi] {
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfDomain { x: r, lo, hi });
        }
    }
    if r_hi < r_lo {
        return Err(Error::InconsistentBounds(format!("r_lo = {r_lo} exceeds r_hi = {r_hi}")));
    }
    if n_r < 4 {
        return Err(Error::InvalidParams(format!("need at least 4 tether-length samples, got {n_r}")));
    }

    let grid_n = splines.grid_n;
    let at = |r: f64| -> Result<(f64, f64)> {
        let path = splines.path_at(r)?;
        let p = model::average_power(&path, r, env, kite, grid_n)?;
        let fine = path.sample_path(r, grid_n * 10)?;
        let excess = fine.iter().map(|s| s.kappa_geo - splines.kappa_max).fold(f64::NEG_INFINITY, f64::max);
        Ok((p, excess))
    };

    if r_hi == r_lo {
        let (power, max_curvature_excess) = at(r_lo)?;
        return Ok(PhaseAverage { power, max_curvature_excess });
    }
    let h = (r_hi - r_lo) / (n_r - 1) as f64;
    let mut sum = 0.0;
    let mut excess = f64::NEG_INFINITY;
    for i in 0..n_r {
        let r = if i == n_r - 1 { r_hi } else { r_lo + i as f64 * h };
        let (p, e) = at(r)?;
        let w = if i == 0 || i == n_r - 1 { 0.5 } else { 1.0 };
        sum += w * p;
        excess = excess.max(e);
    }
    Ok(PhaseAverage { power: sum * h / (r_hi - r_lo), max_curvature_excess: excess })
}
