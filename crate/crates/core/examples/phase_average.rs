//! Interpolates a sweep with cubic splines and averages power over a
//! reel-out from 120 m to 180 m.

use kitepath::model::{self, Environment, KiteParams};
use kitepath::optimizer::PlanConfig;
use kitepath::sweep;

fn main() {
    let config = PlanConfig::default();
    let result = sweep::run_sweep(&config, 100.0, 200.0, 5.0).unwrap();
    let splines = sweep::fit_splines(&result).unwrap();

    for r in [122.5, 147.5, 172.5] {
        let [b0, db, dp] = splines.params_at(r).unwrap();
        println!(
            "r {r:>6.1}: beta0 {:.3}, dbeta {:.3}, dphi {:.3} deg",
            b0.to_degrees(),
            db.to_degrees(),
            dp.to_degrees()
        );
    }

    let (env, kite) = (Environment::REFERENCE, KiteParams::REFERENCE);
    let avg = sweep::phase_average(&splines, 120.0, 180.0, &env, &kite, 21).unwrap();
    let loyd = model::loyd_power(&env, &kite);
    println!("reel-out average {:.1} W ({:.4} of Loyd)", avg.power, avg.power / loyd);
    println!("worst curvature excess of interpolated paths {:.4} 1/m", avg.max_curvature_excess);
}
