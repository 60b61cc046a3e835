//! Writes the sweep plots as SVG into a directory (default `plots`).

use kitepath::optimizer::PlanConfig;
use kitepath::report::svg;
use kitepath::sweep;

fn main() {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "plots".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let result = sweep::run_sweep(&PlanConfig::default(), 100.0, 200.0, 5.0).unwrap();
    let splines = sweep::fit_splines(&result).unwrap();
    for file in svg::write_plots(&dir, &result, Some(&splines)).unwrap() {
        println!("wrote {}", file.display());
    }
}
