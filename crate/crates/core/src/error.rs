use thiserror::Error;

/// Errors raised by the path, power-model, optimization and sweep layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid path parameters: {0}")]
    InvalidPath(String),

    #[error("degenerate path: stationary point at s = {s}")]
    DegeneratePath { s: f64 },

    #[error("sphere radius must be positive, got {0}")]
    InvalidRadius(f64),

    #[error("invalid kite or environment parameters: {0}")]
    InvalidParams(String),

    /// The kite cannot generate the lateral acceleration the turn requires.
    #[error("curvature {kappa} 1/m is not flyable{}", fmt_at(*s))]
    CurvatureInfeasible { kappa: f64, s: Option<f64> },

    #[error("kite overruns the wind radially (cos(beta)cos(phi) - f = {margin})")]
    RadialOverrun { margin: f64 },

    #[error("tangential speed ratio undefined or negative at this position (discriminant {discriminant}, lambda {lambda})")]
    PositionInfeasible { discriminant: f64, lambda: f64 },

    #[error("minimum altitude {h_min} m is not reachable with a {r} m tether")]
    NoFeasibleElevation { r: f64, h_min: f64 },

    #[error("inconsistent bounds: {0}")]
    InconsistentBounds(String),

    #[error("none of the {0} starts converged")]
    NoConvergedSolution(usize),

    #[error("sweep aborted at r = {r} m after {completed} converged tether lengths")]
    SweepAborted { r: f64, completed: usize },

    #[error("need at least {needed} knots, got {got}")]
    TooFewKnots { needed: usize, got: usize },

    #[error("{x} lies outside the interpolation domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
}

fn fmt_at(s: Option<f64>) -> String {
    match s {
        Some(s) => format!(" at s = {s:.6}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
