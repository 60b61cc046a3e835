//! Point-mass power model: Loyd's bound, the reel-out optimum and the
//! cost of flying away from the wind.

use kitepath::model::{self, Environment, KiteParams, KiteState};

fn main() {
    let env = Environment::REFERENCE;
    let kite = KiteParams::REFERENCE;
    println!("Loyd power: {:.1} W", model::loyd_power(&env, &kite));

    println!("{:>8} {:>8} {:>8} {:>10} {:>10}", "beta", "phi", "f_opt", "P_opt W", "F N");
    for (beta_deg, phi_deg) in [(0.0, 0.0), (20.0, 0.0), (20.0, 20.0), (35.0, 30.0)] {
        let (beta, phi) = (f64::to_radians(beta_deg), f64::to_radians(phi_deg));
        let f = model::reel_out_optimum(beta, phi);
        let state = KiteState { beta, phi_az: phi, chi: 0.0, reel_factor: f, phi_roll: 0.0 };
        let p = model::instantaneous_power(&state, &env, &kite).unwrap();
        println!(
            "{beta_deg:>8.1} {phi_deg:>8.1} {f:>8.4} {:>10.1} {:>10.1}",
            p.instantaneous_power, p.tether_force
        );
    }

    println!("\nroll angle needed to turn at a given geodesic curvature:");
    for kappa in [0.02, 0.05, 0.1] {
        let roll = model::roll_angle(kappa, &kite, &env).unwrap();
        println!("  kappa {kappa:.2} 1/m -> {:.1} deg", roll.to_degrees());
    }
}
