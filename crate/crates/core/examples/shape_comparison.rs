//! Ellipse against figure-eight across the tether range.

use kitepath::optimizer::PlanConfig;
use kitepath::{sweep, Shape};

fn main() {
    let run = |shape| sweep::run_sweep(&PlanConfig { shape, ..PlanConfig::default() }, 100.0, 200.0, 10.0).unwrap();
    let (ellipse, eight) = (run(Shape::ELLIPSE), run(Shape::FIGURE_EIGHT));
    println!("{:>6} {:>9} {:>9}  eight active", "r m", "ellipse", "eight");
    for (a, b) in ellipse.solutions.iter().zip(&eight.solutions) {
        println!("{:>6.0} {:>9.4} {:>9.4}  {}", a.r, a.loyd_ratio, b.loyd_ratio, b.active_labels().join(";"));
    }
}
