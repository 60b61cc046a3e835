//! Local solves from several seeds versus the best-of multi-start.

use kitepath::optimizer::{self, PlanConfig};
use kitepath::Shape;

fn main() {
    let config = PlanConfig { shape: Shape::FIGURE_EIGHT, ..PlanConfig::default() };
    let problem = optimizer::build_problem(120.0, &config).unwrap();
    let seeds = optimizer::seed_grid(&problem, 5);
    for x0 in &seeds {
        let sol = optimizer::solve(&problem, *x0).unwrap();
        println!(
            "seed [{:.3}, {:.3}, {:.3}] -> ratio {:.5}, converged {}, {} iterations",
            x0[0], x0[1], x0[2], sol.loyd_ratio, sol.converged, sol.iterations
        );
    }
    let best = optimizer::multi_start(&problem, &seeds).unwrap();
    println!("best ratio {:.5}, active {:?}", best.loyd_ratio, best.active_labels());
}
