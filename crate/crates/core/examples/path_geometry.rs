//! Samples a figure-eight path on the tether sphere and reports its
//! curvature and heading.

use kitepath::LissajousPath;

fn main() {
    let r = 150.0;
    let path = LissajousPath::figure_eight(0.29, 0.09, 0.31).unwrap();
    println!("{:>7} {:>8} {:>8} {:>8} {:>10} {:>10}", "s", "beta", "phi", "chi", "kappa", "kappa_geo");
    for p in path.sample_path(r, 16).unwrap() {
        println!(
            "{:>7.3} {:>8.2} {:>8.2} {:>8.1} {:>10.5} {:>10.5}",
            p.s,
            p.beta.to_degrees(),
            p.phi_az.to_degrees(),
            p.chi.to_degrees(),
            p.kappa_total,
            p.kappa_geo
        );
    }
    let peak = path.sample_path(r, 3600).unwrap().iter().map(|p| p.kappa_geo).fold(0.0, f64::max);
    println!("peak geodesic curvature {peak:.5} 1/m, radius of turn {:.1} m", 1.0 / peak);
}
