//! Warm-started sweep over tether length, printed as the CSV table the
//! command line tool writes.

use kitepath::optimizer::PlanConfig;
use kitepath::{report, sweep};

fn main() {
    let result = sweep::run_sweep(&PlanConfig::default(), 100.0, 200.0, 5.0).unwrap();
    print!("{}", report::sweep_table(&result).to_csv());
    eprintln!("{} SQP iterations in total", result.total_iterations());
}
