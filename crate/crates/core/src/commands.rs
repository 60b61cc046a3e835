//! The four command-line operations, independent of argument parsing.
//!
//! Each command writes its files under `<out>/<shape>/` and returns the
//! report it printed. Errors carry the process exit code: 1 for usage and
//! configuration problems, 2 when the request is physically infeasible, 3
//! when the solver does not converge.

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, Format, RunConfig};
use crate::error::Error;
use crate::geometry::LissajousPath;
use crate::model;
use crate::optimizer;
use crate::report::{self, Cell, OutputRecord, Table};
use crate::sweep::{self, StartPolicy};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Plan(#[from] Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Config(_) | CommandError::Io { .. } | CommandError::Usage(_) => 1,
            CommandError::Plan(e) => match e {
                Error::CurvatureInfeasible { .. }
                | Error::RadialOverrun { .. }
                | Error::PositionInfeasible { .. }
                | Error::NoFeasibleElevation { .. }
                | Error::InvalidPath(_)
                | Error::DegeneratePath { .. } => 2,
                Error::NoConvergedSolution(_) | Error::SweepAborted { .. } => 3,
                Error::InvalidRadius(_)
                | Error::InvalidParams(_)
                | Error::InconsistentBounds(_)
                | Error::TooFewKnots { .. }
                | Error::OutOfDomain { .. } => 1,
            },
        }
    }
}

pub type CommandResult<T> = std::result::Result<T, CommandError>;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Score a given path (angles in degrees) at tether length `r`.
    Evaluate { beta0_deg: f64, dbeta_deg: f64, dphi_deg: f64, r: f64 },
    /// Optimal path at one tether length.
    Optimize { r: f64 },
    /// Sweep over the configured tether lengths.
    Sweep { plots: bool },
    /// Mean traction power over `[r_lo, r_hi]` from the sweep splines;
    /// unset ends default to the sweep range.
    PhaseAverage { r_lo: Option<f64>, r_hi: Option<f64>, n_r: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Evaluate { .. } => "evaluate",
            Command::Optimize { .. } => "optimize",
            Command::Sweep { .. } => "sweep",
            Command::PhaseAverage { .. } => "phase_average",
        }
    }
}

/// Everything a command needs besides its own arguments.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    /// Root output directory; files go to its `<shape>` subdirectory.
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Invocation {
    pub fn new(config: RunConfig) -> Self {
        let out_dir = PathBuf::from(&config.output.directory);
        let formats = config.output.formats.clone();
        Invocation { config, out_dir, formats }
    }

    pub fn shape_dir(&self) -> PathBuf {
        self.out_dir.join(self.config.shape.as_str())
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    /// Report text for the terminal: JSON when only JSON was requested.
    pub fn render(&self, formats: &[Format]) -> String {
        if formats == [Format::Json] { self.table.to_json() } else { self.table.to_csv() }
    }
}

fn write(path: &Path, body: &str, files: &mut Vec<PathBuf>) -> CommandResult<()> {
    std::fs::write(path, body).map_err(|source| CommandError::Io { path: path.to_path_buf(), source })?;
    files.push(path.to_path_buf());
    Ok(())
}

fn prepare(dir: &Path) -> CommandResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CommandError::Io { path: dir.to_path_buf(), source })
}

fn write_table(inv: &Invocation, stem: &str, table: &Table, files: &mut Vec<PathBuf>) -> CommandResult<()> {
    let dir = inv.shape_dir();
    prepare(&dir)?;
    if inv.wants(Format::Csv) {
        write(&dir.join(format!("{stem}.csv")), &table.to_csv(), files)?;
    }
    if inv.wants(Format::Json) {
        write(&dir.join(format!("{stem}.json")), &table.to_json(), files)?;
    }
    Ok(())
}

pub fn run(cmd: &Command, inv: &Invocation) -> CommandResult<Outcome> {
    match *cmd {
        Command::Evaluate { beta0_deg, dbeta_deg, dphi_deg, r } => evaluate(inv, [beta0_deg, dbeta_deg, dphi_deg], r),
        Command::Optimize { r } => optimize(inv, r),
        Command::Sweep { plots } => run_sweep(inv, plots),
        Command::PhaseAverage { r_lo, r_hi, n_r } => phase_average(inv, r_lo, r_hi, n_r),
    }
}

pub const EVALUATE_COLUMNS: [&str; 12] = [
    "r_m",
    "beta0_rad",
    "dbeta_rad",
    "dphi_rad",
    "p_avg_w",
    "p_loyd_w",
    "loyd_ratio",
    "max_kappa_geo",
    "kappa_max",
    "max_roll_rad",
    "min_beta_rad",
    "max_beta_rad",
];

/// Scores a path. A sample turning harder than the curvature limit is
/// reported as [`Error::CurvatureInfeasible`] at the worst `s`.
pub fn evaluate_table(config: &RunConfig, params_deg: [f64; 3], r: f64) -> CommandResult<Table> {
    let [b0, db, dp] = params_deg.map(f64::to_radians);
    let plan = config.plan_config();
    let path = LissajousPath::new(b0, db, dp, plan.shape)?;
    let samples = path.sample_path(r, plan.grid_n)?;
    let kappa_max = optimizer::kappa_limit(plan.phi_max, &plan.kite, &plan.env);
    let worst = samples.iter().max_by(|a, b| a.kappa_geo.total_cmp(&b.kappa_geo)).expect("non-empty grid");
    if worst.kappa_geo > kappa_max {
        return Err(Error::CurvatureInfeasible { kappa: worst.kappa_geo, s: Some(worst.s) }.into());
    }
    let p_avg = model::average_power(&path, r, &plan.env, &plan.kite, plan.grid_n)?;
    let p_loyd = model::loyd_power(&plan.env, &plan.kite);
    let max_roll = model::roll_angle(worst.kappa_geo, &plan.kite, &plan.env)?;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.beta), hi.max(s.beta)));

    let mut t = Table::new(&EVALUATE_COLUMNS);
    t.push(
        [r, b0, db, dp, p_avg, p_loyd, p_avg / p_loyd, worst.kappa_geo, kappa_max, max_roll, lo, hi]
            .into_iter()
            .map(Cell::Real)
            .collect(),
    );
    Ok(t)
}

fn evaluate(inv: &Invocation, params_deg: [f64; 3], r: f64) -> CommandResult<Outcome> {
    let table = evaluate_table(&inv.config, params_deg, r)?;
    let mut files = Vec::new();
    write_table(inv, "evaluate", &table, &mut files)?;
    Ok(Outcome { table, files })
}

pub fn optimize_record(config: &RunConfig, r: f64) -> CommandResult<OutputRecord> {
    let sol = sweep::solve_at(&config.plan_config(), r, None)?;
    Ok(OutputRecord::from_solution(&sol))
}

fn optimize(inv: &Invocation, r: f64) -> CommandResult<Outcome> {
    let table = report::records_table(&[optimize_record(&inv.config, r)?]);
    let mut files = Vec::new();
    write_table(inv, "optimize", &table, &mut files)?;
    Ok(Outcome { table, files })
}

/// Writes `sweep.csv`, `splines.json` and, on request, `sweep.json` and the
/// plots. A failed sweep still writes the rows solved before the failure.
fn run_sweep(inv: &Invocation, plots: bool) -> CommandResult<Outcome> {
    let c = &inv.config;
    let grid = sweep::tether_grid(c.sweep.r_min, c.sweep.r_max, c.sweep.dr)?;
    let run = sweep::run_sweep_partial(&c.plan_config(), &grid, StartPolicy::Warm);
    let dir = inv.shape_dir();
    prepare(&dir)?;

    let table = report::sweep_table(&run.result);
    let mut files = Vec::new();
    write(&dir.join("sweep.csv"), &table.to_csv(), &mut files)?;
    if inv.wants(Format::Json) {
        let body = format!("{}\n", serde_json::to_string_pretty(&table.json_rows()).expect("json"));
        write(&dir.join("sweep.json"), &body, &mut files)?;
    }
    let splines = sweep::fit_splines(&run.result).ok();
    if let Some(sp) = &splines {
        write(&dir.join("splines.json"), &report::splines_json(sp), &mut files)?;
    }
    if plots && !run.result.is_empty() {
        let written = report::svg::write_plots(&dir, &run.result, splines.as_ref())
            .map_err(|source| CommandError::Io { path: dir.clone(), source })?;
        files.extend(written);
    }
    match run.failure {
        Some(e) => Err(e.into()),
        None => Ok(Outcome { table, files }),
    }
}

pub const PHASE_COLUMNS: [&str; 8] =
    ["r_lo_m", "r_hi_m", "n_r", "p_phase_w", "p_loyd_w", "loyd_ratio", "max_curvature_excess", "sweep_iterations"];

pub fn phase_average_table(config: &RunConfig, r_lo: Option<f64>, r_hi: Option<f64>, n_r: usize) -> CommandResult<Table> {
    let plan = config.plan_config();
    let result = sweep::run_sweep(&plan, config.sweep.r_min, config.sweep.r_max, config.sweep.dr)?;
    let splines = sweep::fit_splines(&result)?;
    let (lo, hi) = splines.domain();
    let (r_lo, r_hi) = (r_lo.unwrap_or(lo), r_hi.unwrap_or(hi));
    let avg = sweep::phase_average(&splines, r_lo, r_hi, &plan.env, &plan.kite, n_r)?;
    let p_loyd = model::loyd_power(&plan.env, &plan.kite);
    let mut t = Table::new(&PHASE_COLUMNS);
    t.push(vec![
        Cell::Real(r_lo),
        Cell::Real(r_hi),
        Cell::Int(n_r),
        Cell::Real(avg.power),
        Cell::Real(p_loyd),
        Cell::Real(avg.power / p_loyd),
        Cell::Real(avg.max_curvature_excess),
        Cell::Int(result.total_iterations()),
    ]);
    Ok(t)
}

fn phase_average(inv: &Invocation, r_lo: Option<f64>, r_hi: Option<f64>, n_r: usize) -> CommandResult<Outcome> {
    let table = phase_average_table(&inv.config, r_lo, r_hi, n_r)?;
    let mut files = Vec::new();
    write_table(inv, "phase_average", &table, &mut files)?;
    Ok(Outcome { table, files })
}
