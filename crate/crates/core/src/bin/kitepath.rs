use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kitepath::commands::{self, Command, CommandError, Invocation};
use kitepath::config::{self, Format, RunConfig, ShapeName};

#[derive(Parser)]
#[command(name = "kitepath", version, about = "Crosswind kite path planner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration; omitted fields take reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    shape: Option<ShapeArg>,
    /// Output directory (overrides the config).
    #[arg(long, global = true, env = "KITEPATH_OUT")]
    out: Option<PathBuf>,
    /// Output format (overrides the config).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Score a given path at one tether length.
    Evaluate {
        /// Tether length, m.
        #[arg(long)]
        r: f64,
        /// Mean elevation.
        #[arg(long = "beta0-deg")]
        beta0_deg: f64,
        /// Elevation amplitude.
        #[arg(long = "dbeta-deg")]
        dbeta_deg: f64,
        /// Azimuth amplitude.
        #[arg(long = "dphi-deg")]
        dphi_deg: f64,
    },
    /// Optimal path at one tether length.
    Optimize {
        /// Tether length, m.
        #[arg(long)]
        r: f64,
    },
    /// Warm-started sweep over the configured tether lengths.
    Sweep {
        /// Also write SVG plots.
        #[arg(long)]
        plots: bool,
    },
    /// Mean power over a reel-out interval from the sweep splines.
    PhaseAverage {
        /// Start of reel-out, m [default: sweep start].
        #[arg(long = "r-lo")]
        r_lo: Option<f64>,
        /// End of reel-out, m [default: sweep end].
        #[arg(long = "r-hi")]
        r_hi: Option<f64>,
        /// Tether lengths in the trapezoid rule.
        #[arg(long = "n-r", default_value_t = 21)]
        n_r: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Ellipse,
    Eight,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, CommandError> {
    let Some(path) = path else { return Ok(RunConfig::reference()) };
    let text = std::fs::read_to_string(path).map_err(|e| CommandError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(config::parse_config(&text)?)
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let mut cfg = load(cli.config.as_ref())?;
    if let Some(shape) = cli.shape {
        cfg.shape = match shape {
            ShapeArg::Ellipse => ShapeName::Ellipse,
            ShapeArg::Eight => ShapeName::Eight,
        };
    }
    let mut inv = Invocation::new(cfg);
    if let Some(out) = cli.out {
        inv.out_dir = out;
    }
    if let Some(f) = cli.format {
        inv.formats = vec![match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }];
    }
    let cmd = match cli.command {
        Cmd::Evaluate { r, beta0_deg, dbeta_deg, dphi_deg } => Command::Evaluate { beta0_deg, dbeta_deg, dphi_deg, r },
        Cmd::Optimize { r } => Command::Optimize { r },
        Cmd::Sweep { plots } => Command::Sweep { plots },
        Cmd::PhaseAverage { r_lo, r_hi, n_r } => Command::PhaseAverage { r_lo, r_hi, n_r },
    };
    let outcome = commands::run(&cmd, &inv)?;
    print!("{}", outcome.render(&inv.formats));
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
