//! Reads a JSON run configuration and solves the tether length it names,
//! or the reference configuration if no file is given.

use kitepath::config::{parse_config, RunConfig};
use kitepath::sweep;

fn main() {
    let config = match std::env::args().nth(1) {
        Some(path) => match parse_config(&std::fs::read_to_string(&path).unwrap()) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{path}: {e}");
                std::process::exit(1);
            }
        },
        None => RunConfig::reference(),
    };
    println!("{}", config.to_json());
    let plan = config.plan_config();
    let r = 0.5 * (config.sweep.r_min + config.sweep.r_max);
    let sol = sweep::solve_at(&plan, r, None).unwrap();
    println!("at r = {r} m: {:.1} W, {:.4} of Loyd", sol.p_avg, sol.loyd_ratio);
}
