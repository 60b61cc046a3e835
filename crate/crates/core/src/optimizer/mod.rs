//! Per-tether-length path planning.
//!
//! For a fixed tether length the decision vector is `x = [beta0, dbeta,
//! dphi]`. The objective is the path-averaged optimal power (maximized),
//! subject to
//!
//! - geodesic curvature at every grid sample at most `kappa_max`,
//! - the top of the path below `beta_max` and the bottom above `beta_min`
//!   (altitude limits mapped onto elevation),
//! - box bounds on the three parameters,
//! - optionally, tether force and generator power caps at every sample.

pub mod sqp;

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, LissajousPath, Shape};
use crate::model::{self, Environment, KiteParams};

pub use sqp::{SqpOptions, SqpStatus};

/// Tolerance (natural units) for labelling a constraint active.
pub const ACTIVE_TOL: f64 = 1e-5;
/// Samples per period used for quadrature and the curvature grid.
pub const DEFAULT_GRID_N: usize = 360;
/// Smallest admissible half-range for either angle.
pub const MIN_RANGE: f64 = 0.5 * std::f64::consts::PI / 180.0;

/// Maximum geodesic curvature flyable with roll at most `phi_max`.
pub fn kappa_limit(phi_max: f64, kite: &KiteParams, env: &Environment) -> f64 {
    env.air_density * kite.area * kite.c_lift * phi_max.sin() / (2.0 * kite.mass)
}

/// Elevation band `[beta_min, beta_max]` that keeps the kite between the
/// two altitudes on a tether of length `r` (`h = r sin(beta)`).
pub fn beta_limits(r: f64, h_min: f64, h_max: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    if !(h_min > 0.0 && h_max > h_min) {
        return Err(Error::InconsistentBounds(format!("need 0 < h_min < h_max, got {h_min}, {h_max}")));
    }
    if h_min >= r {
        return Err(Error::NoFeasibleElevation { r, h_min });
    }
    Ok(((h_min / r).asin(), (h_max / r).min(1.0).asin()))
}

/// Box bounds on `[beta0, dbeta, dphi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

/// Optional overrides of the default box, radians.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundOverrides {
    pub beta0: Option<(f64, f64)>,
    pub dbeta: Option<(f64, f64)>,
    pub dphi: Option<(f64, f64)>,
}

/// Everything needed to build a problem at any tether length.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanConfig {
    pub kite: KiteParams,
    pub env: Environment,
    /// Largest roll angle, radians.
    pub phi_max: f64,
    /// m
    pub h_min: f64,
    /// m
    pub h_max: f64,
    pub shape: Shape,
    pub grid_n: usize,
    pub bounds: BoundOverrides,
    pub f_tether_max: Option<f64>,
    pub p_rated: Option<f64>,
    pub solver: SqpOptions,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            kite: KiteParams::REFERENCE,
            env: Environment::REFERENCE,
            phi_max: 30f64.to_radians(),
            h_min: 30.0,
            h_max: 150.0,
            shape: Shape::ELLIPSE,
            grid_n: DEFAULT_GRID_N,
            bounds: BoundOverrides::default(),
            f_tether_max: None,
            p_rated: None,
            solver: SqpOptions::default(),
        }
    }
}

/// One tether length's constrained planning instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanProblem {
    pub r: f64,
    pub shape: Shape,
    /// 1/m; `f64::INFINITY` drops the curvature rows.
    pub kappa_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub bounds: Bounds,
    pub grid_n: usize,
    pub env: Environment,
    pub kite: KiteParams,
    pub f_tether_max: Option<f64>,
    pub p_rated: Option<f64>,
    pub solver: SqpOptions,
}

pub fn build_problem(r: f64, config: &PlanConfig) -> Result<PlanProblem> {
    config.kite.validate()?;
    config.env.validate()?;
    if !(config.phi_max > 0.0 && config.phi_max < FRAC_PI_2) {
        return Err(Error::InvalidParams(format!("phi_max must lie in (0, pi/2), got {}", config.phi_max)));
    }
    if config.grid_n < 8 {
        return Err(Error::InvalidParams(format!("grid_n must be at least 8, got {}", config.grid_n)));
    }
    let (beta_min, beta_max) = beta_limits(r, config.h_min, config.h_max)?;
    let o = &config.bounds;
    let (b0_lo, b0_hi) = o.beta0.unwrap_or((beta_min, FRAC_PI_2));
    let (db_lo, db_hi) = o.dbeta.unwrap_or((MIN_RANGE, FRAC_PI_4));
    let (dp_lo, dp_hi) = o.dphi.unwrap_or((MIN_RANGE, FRAC_PI_2));
    let bounds = Bounds { lower: [b0_lo, db_lo, dp_lo], upper: [b0_hi, db_hi, dp_hi] };
    if bounds.lower.iter().zip(&bounds.upper).any(|(l, u)| !(l <= u)) {
        return Err(Error::InconsistentBounds(format!("lower bounds exceed upper bounds: {bounds:?}")));
    }
    if db_lo <= 0.0 || dp_lo <= 0.0 {
        return Err(Error::InconsistentBounds("range lower bounds must be strictly positive".into()));
    }
    if beta_min + db_lo > beta_max {
        return Err(Error::InconsistentBounds(format!(
            "beta_min + dbeta_min = {} exceeds beta_max = {beta_max}",
            beta_min + db_lo
        )));
    }
    Ok(PlanProblem {
        r,
        shape: config.shape,
        kappa_max: kappa_limit(config.phi_max, &config.kite, &config.env),
        beta_min,
        beta_max,
        bounds,
        grid_n: config.grid_n,
        env: config.env,
        kite: config.kite,
        f_tether_max: config.f_tether_max,
        p_rated: config.p_rated,
        solver: config.solver,
    })
}

/// Kinds of inequality rows, in the order they appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Curvature,
    Ceiling,
    Floor,
    TetherForce,
    RatedPower,
    Beta0Lower,
    Beta0Upper,
    DbetaLower,
    DbetaUpper,
    DphiLower,
    DphiUpper,
}

impl ConstraintKind {
    pub fn label(&self) -> &'static str {
        match self {
            ConstraintKind::Curvature => "curvature",
            ConstraintKind::Ceiling => "ceiling",
            ConstraintKind::Floor => "floor",
            ConstraintKind::TetherForce => "tether_force",
            ConstraintKind::RatedPower => "rated_power",
            ConstraintKind::Beta0Lower => "beta0_lower",
            ConstraintKind::Beta0Upper => "beta0_upper",
            ConstraintKind::DbetaLower => "dbeta_lower",
            ConstraintKind::DbetaUpper => "dbeta_upper",
            ConstraintKind::DphiLower => "dphi_lower",
            ConstraintKind::DphiUpper => "dphi_upper",
        }
    }
}

/// Constraint values in natural units; feasible when every entry is <= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintValues {
    /// `kappa_geo(s_i) - kappa_max`, 1/m. Empty when uncapped.
    pub curvature: Vec<f64>,
    /// `beta0 + dbeta - beta_max`, rad.
    pub ceiling: f64,
    /// `beta_min - (beta0 - dbeta)`, rad.
    pub floor: f64,
    /// `F_tether(s_i) - f_tether_max`, N.
    pub tether_force: Option<Vec<f64>>,
    /// `P_opt(s_i) - p_rated`, W.
    pub rated_power: Option<Vec<f64>>,
}

impl ConstraintValues {
    pub fn max_curvature_excess(&self) -> f64 {
        self.curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest positive constraint value in natural units.
    pub fn max_violation(&self) -> f64 {
        let mut worst = self.ceiling.max(self.floor).max(0.0);
        worst = worst.max(self.max_curvature_excess());
        for extra in [&self.tether_force, &self.rated_power].into_iter().flatten() {
            worst = worst.max(extra.iter().copied().fold(0.0, f64::max));
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Average power, W.
    pub objective: f64,
    pub constraints: ConstraintValues,
    pub max_kappa: f64,
}

/// Objective and constraints at `x` on the problem's grid.
pub fn evaluate(problem: &PlanProblem, x: [f64; 3]) -> Evaluation {
    evaluate_on(problem, x, problem.grid_n)
}

/// Same as [`evaluate`] but on a grid of `grid_n` samples.
pub fn evaluate_on(problem: &PlanProblem, x: [f64; 3], grid_n: usize) -> Evaluation {
    let path = LissajousPath::unchecked(x, problem.shape);
    let (env, kite) = (&problem.env, &problem.kite);
    let mut total = 0.0;
    let mut max_kappa: f64 = 0.0;
    let capped = problem.kappa_max.is_finite();
    let mut curvature = Vec::with_capacity(if capped { grid_n } else { 0 });
    let mut force = problem.f_tether_max.map(|_| Vec::with_capacity(grid_n));
    let mut power = problem.p_rated.map(|_| Vec::with_capacity(grid_n));

    for s in geometry::grid(problem.shape, grid_n) {
        let (beta, phi) = path.eval(s);
        let kappa = geometry::curvature_from(beta, phi, &path.derivatives(s), problem.r)
            .map(|k| k.geodesic)
            // stationary points only occur with zero ranges; treat as an
            // unflyable cusp
            .unwrap_or(f64::INFINITY);
        max_kappa = max_kappa.max(kappa);
        let roll = model::roll_angle_saturated(kappa, kite, env);
        let p = model::optimal_power(beta, phi, roll, env, kite);
        total += p;
        if capped {
            curvature.push(kappa - problem.kappa_max);
        }
        if let (Some(rows), Some(cap)) = (force.as_mut(), problem.f_tether_max) {
            rows.push(model::optimal_tether_force(beta, phi, roll, env, kite) - cap);
        }
        if let (Some(rows), Some(cap)) = (power.as_mut(), problem.p_rated) {
            rows.push(p - cap);
        }
    }

    let [beta0, dbeta, _] = x;
    Evaluation {
        objective: total / grid_n as f64,
        constraints: ConstraintValues {
            curvature,
            ceiling: beta0 + dbeta - problem.beta_max,
            floor: problem.beta_min - (beta0 - dbeta),
            tether_force: force,
            rated_power: power,
        },
        max_kappa,
    }
}

/// Scaled NLP seen by the SQP: minimize `-P_avg / P_loyd`, rows divided by
/// their natural scale.
struct ScaledNlp<'a> {
    problem: &'a PlanProblem,
    loyd: f64,
}

impl ScaledNlp<'_> {
    fn new(problem: &PlanProblem) -> ScaledNlp<'_> {
        ScaledNlp { problem, loyd: model::loyd_power(&problem.env, &problem.kite) }
    }
}

impl sqp::Nlp for ScaledNlp<'_> {
    fn lower(&self) -> &[f64] {
        &self.problem.bounds.lower
    }

    fn upper(&self) -> &[f64] {
        &self.problem.bounds.upper
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let p = self.problem;
        let ev = evaluate(p, [x[0], x[1], x[2]]);
        let c = ev.constraints;
        let mut rows = Vec::with_capacity(c.curvature.len() + 2);
        rows.extend(c.curvature.iter().map(|g| g / p.kappa_max));
        rows.push(c.ceiling);
        rows.push(c.floor);
        if let (Some(vals), Some(cap)) = (&c.tether_force, p.f_tether_max) {
            rows.extend(vals.iter().map(|g| g / cap));
        }
        if let (Some(vals), Some(cap)) = (&c.rated_power, p.p_rated) {
            rows.extend(vals.iter().map(|g| g / cap));
        }
        (-ev.objective / self.loyd, rows)
    }
}

/// Gradient of the scaled objective `-P_avg / P_loyd` exactly as the solver
/// computes it (central differences, relative step from the options).
pub fn objective_gradient(problem: &PlanProblem, x: [f64; 3]) -> [f64; 3] {
    let nlp = ScaledNlp::new(problem);
    let (g, _) = sqp::finite_differences(&nlp, &x, problem.solver.fd_step);
    [g[0], g[1], g[2]]
}

/// Scaled objective used by the solver.
pub fn scaled_objective(problem: &PlanProblem, x: [f64; 3]) -> f64 {
    -evaluate(problem, x).objective / model::loyd_power(&problem.env, &problem.kite)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    pub r: f64,
    pub path: LissajousPath,
    /// W
    pub p_avg: f64,
    /// W
    pub p_loyd: f64,
    pub loyd_ratio: f64,
    pub max_kappa_on_grid: f64,
    /// Largest constraint violation on the problem grid, natural units.
    pub max_violation: f64,
    pub active_constraints: BTreeSet<ConstraintKind>,
    pub iterations: usize,
    pub converged: bool,
    pub start_feasible: bool,
}

impl PlanSolution {
    pub fn params(&self) -> [f64; 3] {
        self.path.params()
    }

    pub fn active_labels(&self) -> Vec<&'static str> {
        self.active_constraints.iter().map(|k| k.label()).collect()
    }
}

fn active_set(problem: &PlanProblem, x: [f64; 3], c: &ConstraintValues) -> BTreeSet<ConstraintKind> {
    let mut set = BTreeSet::new();
    let near = |v: f64| v >= -ACTIVE_TOL;
    if !c.curvature.is_empty() && near(c.max_curvature_excess()) {
        set.insert(ConstraintKind::Curvature);
    }
    if near(c.ceiling) {
        set.insert(ConstraintKind::Ceiling);
    }
    if near(c.floor) {
        set.insert(ConstraintKind::Floor);
    }
    // force and power rows are compared relative to their caps
    if let (Some(rows), Some(cap)) = (&c.tether_force, problem.f_tether_max) {
        if rows.iter().any(|v| near(v / cap)) {
            set.insert(ConstraintKind::TetherForce);
        }
    }
    if let (Some(rows), Some(cap)) = (&c.rated_power, problem.p_rated) {
        if rows.iter().any(|v| near(v / cap)) {
            set.insert(ConstraintKind::RatedPower);
        }
    }
    let b = &problem.bounds;
    let kinds = [
        (ConstraintKind::Beta0Lower, ConstraintKind::Beta0Upper),
        (ConstraintKind::DbetaLower, ConstraintKind::DbetaUpper),
        (ConstraintKind::DphiLower, ConstraintKind::DphiUpper),
    ];
    for (i, (lo, hi)) in kinds.into_iter().enumerate() {
        if x[i] - b.lower[i] <= ACTIVE_TOL {
            set.insert(lo);
        }
        if b.upper[i] - x[i] <= ACTIVE_TOL {
            set.insert(hi);
        }
    }
    set
}

fn is_feasible(c: &ConstraintValues, tol: f64) -> bool {
    c.max_violation() <= tol
}

/// Packs a decision vector into a reported solution.
pub fn summarize(problem: &PlanProblem, x: [f64; 3], iterations: usize, converged: bool, start_feasible: bool) -> PlanSolution {
    let ev = evaluate(problem, x);
    let p_loyd = model::loyd_power(&problem.env, &problem.kite);
    PlanSolution {
        r: problem.r,
        path: LissajousPath::unchecked(x, problem.shape),
        p_avg: ev.objective,
        p_loyd,
        loyd_ratio: ev.objective / p_loyd,
        max_kappa_on_grid: ev.max_kappa,
        max_violation: ev.constraints.max_violation(),
        active_constraints: active_set(problem, x, &ev.constraints),
        iterations,
        converged,
        start_feasible,
    }
}

/// Solves the problem from `x0`. The start need not be feasible.
///
/// A run that stops before meeting the KKT tolerances still returns its
/// last iterate with `converged = false`.
pub fn solve(problem: &PlanProblem, x0: [f64; 3]) -> Result<PlanSolution> {
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidPath(format!("non-finite start {x0:?}")));
    }
    let start_feasible = is_feasible(&evaluate(problem, x0).constraints, problem.solver.tol_feasibility);
    let nlp = ScaledNlp::new(problem);
    let res = sqp::minimize(&nlp, &x0, &problem.solver);
    let x = [res.x[0], res.x[1], res.x[2]];
    Ok(summarize(problem, x, res.iterations, res.converged(), start_feasible))
}

/// Deterministic seeds: the best `count` strictly feasible points of a
/// coarse grid over the box, ordered by objective (best first).
pub fn seed_grid(problem: &PlanProblem, count: usize) -> Vec<[f64; 3]> {
    const PER_AXIS: usize = 12;
    let b = &problem.bounds;
    let axis = |i: usize| -> Vec<f64> {
        (0..PER_AXIS)
            .map(|k| b.lower[i] + (b.upper[i] - b.lower[i]) * k as f64 / (PER_AXIS - 1) as f64)
            .collect()
    };
    let (dbetas, dphis) = (axis(1), axis(2));
    // beta0 is laid out relative to the floor so every column has feasible
    // candidates; the box still applies
    let mut scored: Vec<(f64, [f64; 3])> = Vec::new();
    for &db in &dbetas {
        let lo = (problem.beta_min + db).max(b.lower[0]);
        let hi = (problem.beta_max - db).min(b.upper[0]);
        if hi < lo {
            continue;
        }
        for k in 0..PER_AXIS {
            let b0 = lo + (hi - lo) * k as f64 / (PER_AXIS - 1) as f64;
            for &dp in &dphis {
                let x = [b0, db, dp];
                let ev = evaluate(problem, x);
                if is_feasible(&ev.constraints, 0.0) {
                    scored.push((ev.objective, x));
                }
            }
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.into_iter().take(count).map(|(_, x)| x).collect()
}

/// Solves from every seed and keeps the best converged result (ties broken
/// by seed order). With no seeds given, [`seed_grid`] supplies five.
pub fn multi_start(problem: &PlanProblem, seeds: &[[f64; 3]]) -> Result<PlanSolution> {
    let generated;
    let seeds = if seeds.is_empty() {
        generated = seed_grid(problem, 5);
        &generated[..]
    } else {
        seeds
    };
    let mut best: Option<PlanSolution> = None;
    let mut iterations = 0;
    for &seed in seeds {
        let sol = solve(problem, seed)?;
        iterations += sol.iterations;
        if !sol.converged {
            continue;
        }
        if best.as_ref().is_none_or(|b| sol.p_avg > b.p_avg) {
            best = Some(sol);
        }
    }
    let mut best = best.ok_or(Error::NoConvergedSolution(seeds.len()))?;
    best.iterations = iterations;
    Ok(best)
}

/// Largest constraint violation (natural units) of `x` on a grid `factor`
/// times finer than the problem's.
pub fn verify_fine(problem: &PlanProblem, x: [f64; 3], factor: usize) -> f64 {
    evaluate_on(problem, x, problem.grid_n * factor).constraints.max_violation()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kappa_limit_examples() {
        let (kite, env) = (KiteParams::REFERENCE, Environment::REFERENCE);
        let k = kappa_limit(30f64.to_radians(), &kite, &env);
        assert_relative_eq!(k, 0.1029, epsilon = 1e-12);
        assert_relative_eq!(1.0 / k, 9.72, epsilon = 0.01);
        assert!(kappa_limit(1e-12, &kite, &env) < 1e-12);
        let heavy = KiteParams { mass: 2.0, ..kite };
        assert_relative_eq!(kappa_limit(0.5, &heavy, &env), 0.5 * kappa_limit(0.5, &kite, &env));
    }

    #[test]
    fn beta_limit_examples() {
        let (lo, hi) = beta_limits(100.0, 30.0, 150.0).unwrap();
        assert_relative_eq!(lo, 0.304_692_654, epsilon = 1e-8);
        assert_relative_eq!(lo.to_degrees(), 17.46, epsilon = 0.01);
        assert_eq!(hi, FRAC_PI_2);
        let (lo, hi) = beta_limits(200.0, 30.0, 150.0).unwrap();
        assert_relative_eq!(lo, 0.150_568, epsilon = 1e-5);
        assert_relative_eq!(hi, 0.848_062, epsilon = 1e-5);
        assert!(matches!(beta_limits(25.0, 30.0, 150.0), Err(Error::NoFeasibleElevation { .. })));
        assert!(beta_limits(100.0, 50.0, 40.0).is_err());
    }

    #[test]
    fn build_problem_defaults() {
        let p = build_problem(100.0, &PlanConfig::default()).unwrap();
        assert_relative_eq!(p.kappa_max, 0.1029, epsilon = 1e-12);
        assert_relative_eq!(p.beta_min.to_degrees(), 17.46, epsilon = 0.01);
        assert_eq!(p.bounds.lower, [p.beta_min, MIN_RANGE, MIN_RANGE]);
        assert_eq!(p.bounds.upper, [FRAC_PI_2, FRAC_PI_4, FRAC_PI_2]);
        let eight = build_problem(100.0, &PlanConfig { shape: Shape::FIGURE_EIGHT, ..PlanConfig::default() }).unwrap();
        assert_eq!(eight.shape, Shape::FIGURE_EIGHT);
        assert_eq!(PlanProblem { shape: Shape::ELLIPSE, ..eight }, p);
    }

    #[test]
    fn build_problem_errors() {
        assert!(matches!(build_problem(25.0, &PlanConfig::default()), Err(Error::NoFeasibleElevation { .. })));
        // floor and ceiling pinch the band shut
        let tight = PlanConfig { h_min: 30.0, h_max: 30.2, ..PlanConfig::default() };
        assert!(matches!(build_problem(100.0, &tight), Err(Error::InconsistentBounds(_))));
    }

    #[test]
    fn floor_is_zero_on_its_boundary() {
        let p = build_problem(100.0, &PlanConfig::default()).unwrap();
        let x = [p.beta_min + MIN_RANGE, MIN_RANGE, MIN_RANGE];
        let ev = evaluate(&p, x);
        assert!(ev.constraints.floor.abs() < 1e-15);
        // half-degree ranges at 100 m: turn radius below a metre
        assert!(ev.constraints.max_curvature_excess() > 5.0 * p.kappa_max);
    }

    #[test]
    fn seeds_are_feasible_and_ordered() {
        let p = build_problem(150.0, &PlanConfig::default()).unwrap();
        let seeds = seed_grid(&p, 5);
        assert_eq!(seeds.len(), 5);
        let objs: Vec<f64> = seeds.iter().map(|x| evaluate(&p, *x).objective).collect();
        assert!(objs.windows(2).all(|w| w[0] >= w[1]));
        for x in seeds {
            assert!(evaluate(&p, x).constraints.max_violation() <= 0.0);
        }
    }

    #[test]
    fn uncapped_problem_has_no_curvature_rows() {
        let mut p = build_problem(150.0, &PlanConfig::default()).unwrap();
        p.kappa_max = f64::INFINITY;
        let ev = evaluate(&p, [0.5, 0.1, 0.2]);
        assert!(ev.constraints.curvature.is_empty());
        assert!(ev.max_kappa > 0.0);
    }
}
