//! Optimal path at one tether length, with the constraints that bind.

use kitepath::optimizer::{self, PlanConfig};
use kitepath::sweep;

fn main() {
    let r: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(150.0);
    let config = PlanConfig::default();
    let sol = sweep::solve_at(&config, r, None).unwrap();
    let [b0, db, dp] = sol.params();
    println!("r = {r} m, shape {}", sol.path.shape.label());
    println!("beta0 {:.3} deg, dbeta {:.3} deg, dphi {:.3} deg", b0.to_degrees(), db.to_degrees(), dp.to_degrees());
    println!("P = {:.1} W ({:.4} of Loyd)", sol.p_avg, sol.loyd_ratio);
    println!("active: {:?}, {} iterations", sol.active_labels(), sol.iterations);

    let problem = optimizer::build_problem(r, &config).unwrap();
    println!("worst violation on a 10x grid: {:.2e}", optimizer::verify_fine(&problem, sol.params(), 10));
}
