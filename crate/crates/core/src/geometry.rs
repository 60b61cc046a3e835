//! Lissajous reference paths on the downwind spherical quadrant.
//!
//! A path is parametrized by an angle `s` as
//!
//! ```text
//! beta(s) = beta0 + dbeta * sin((n_beta / n_phi) * s)
//! phi(s)  = dphi * cos(s)
//! ```
//!
//! and embedded on a sphere of radius `r` (the tether length). Curvature is
//! computed from the closed-form first and second derivatives of the 3D
//! embedding; the geodesic part is what the kite has to produce by rolling.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this magnitude a derivative is treated as zero.
const STATIONARY_EPS: f64 = 1e-12;

/// Lobe structure of a Lissajous path: `n_beta` elevation cycles per
/// `n_phi` azimuth cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub n_beta: u32,
    pub n_phi: u32,
}

impl Shape {
    pub const ELLIPSE: Shape = Shape { n_beta: 1, n_phi: 1 };
    pub const FIGURE_EIGHT: Shape = Shape { n_beta: 2, n_phi: 1 };

    pub fn new(n_beta: u32, n_phi: u32) -> Result<Self> {
        if n_beta == 0 || n_phi == 0 {
            return Err(Error::InvalidPath(format!(
                "cycle counts must be positive, got {n_beta}:{n_phi}"
            )));
        }
        let g = gcd(n_beta, n_phi);
        Ok(Shape { n_beta: n_beta / g, n_phi: n_phi / g })
    }

    /// Relative cycle rate `n_beta / n_phi`.
    pub fn ratio(&self) -> f64 {
        f64::from(self.n_beta) / f64::from(self.n_phi)
    }

    /// Length of one closed period in `s`.
    pub fn period(&self) -> f64 {
        TAU * f64::from(self.n_phi)
    }

    pub fn label(&self) -> String {
        match (self.n_beta, self.n_phi) {
            (1, 1) => "ellipse".to_string(),
            (2, 1) => "eight".to_string(),
            (b, p) => format!("lissajous-{b}-{p}"),
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A closed Lissajous path in the (azimuth, elevation) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LissajousPath {
    /// Central elevation, radians.
    pub beta0: f64,
    /// Elevation half-range, radians.
    pub dbeta: f64,
    /// Azimuth half-range, radians.
    pub dphi: f64,
    pub shape: Shape,
}

/// First and second derivatives of the path angles with respect to `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDerivatives {
    pub dbeta_ds: f64,
    pub dphi_ds: f64,
    pub d2beta_ds2: f64,
    pub d2phi_ds2: f64,
}

/// Total and geodesic curvature of the embedded path, in 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    pub total: f64,
    pub geodesic: f64,
}

/// Fully evaluated point of a path on a sphere of given radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub s: f64,
    pub beta: f64,
    pub phi_az: f64,
    pub dbeta_ds: f64,
    pub dphi_ds: f64,
    pub d2beta_ds2: f64,
    pub d2phi_ds2: f64,
    /// Heading relative to the elevation direction, in (-pi, pi].
    pub chi: f64,
    pub kappa_total: f64,
    pub kappa_geo: f64,
}

impl LissajousPath {
    /// Builds a path, checking that it is non-degenerate and stays inside
    /// the quadrant `beta in [0, pi/2]`, `|phi| <= pi/2`.
    pub fn new(beta0: f64, dbeta: f64, dphi: f64, shape: Shape) -> Result<Self> {
        let path = LissajousPath { beta0, dbeta, dphi, shape };
        path.validate()?;
        Ok(path)
    }

    pub fn ellipse(beta0: f64, dbeta: f64, dphi: f64) -> Result<Self> {
        Self::new(beta0, dbeta, dphi, Shape::ELLIPSE)
    }

    pub fn figure_eight(beta0: f64, dbeta: f64, dphi: f64) -> Result<Self> {
        Self::new(beta0, dbeta, dphi, Shape::FIGURE_EIGHT)
    }

    /// Optimizer iterates may step outside the quadrant; the formulas stay
    /// well defined there.
    pub(crate) fn unchecked(params: [f64; 3], shape: Shape) -> Self {
        LissajousPath { beta0: params[0], dbeta: params[1], dphi: params[2], shape }
    }

    pub fn validate(&self) -> Result<()> {
        let LissajousPath { beta0, dbeta, dphi, shape } = *self;
        if ![beta0, dbeta, dphi].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPath("non-finite parameter".into()));
        }
        if dbeta <= 0.0 || dphi <= 0.0 {
            return Err(Error::InvalidPath(format!(
                "ranges must be strictly positive (dbeta = {dbeta}, dphi = {dphi})"
            )));
        }
        // small slack so that optimizer output sitting on a bound validates
        let slack = 1e-12;
        if beta0 - dbeta < -slack || beta0 + dbeta > FRAC_PI_2 + slack {
            return Err(Error::InvalidPath(format!(
                "elevation band [{}, {}] leaves [0, pi/2]",
                beta0 - dbeta,
                beta0 + dbeta
            )));
        }
        if dphi > FRAC_PI_2 + slack {
            return Err(Error::InvalidPath(format!("azimuth half-range {dphi} exceeds pi/2")));
        }
        if shape.n_beta == 0 || shape.n_phi == 0 {
            return Err(Error::InvalidPath("cycle counts must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> [f64; 3] {
        [self.beta0, self.dbeta, self.dphi]
    }

    /// Elevation and azimuth at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let k = self.shape.ratio();
        (self.beta0 + self.dbeta * (k * s).sin(), self.dphi * s.cos())
    }

    pub fn derivatives(&self, s: f64) -> PathDerivatives {
        let k = self.shape.ratio();
        let (sin_ks, cos_ks) = (k * s).sin_cos();
        let (sin_s, cos_s) = s.sin_cos();
        PathDerivatives {
            dbeta_ds: self.dbeta * k * cos_ks,
            dphi_ds: -self.dphi * sin_s,
            d2beta_ds2: -self.dbeta * k * k * sin_ks,
            d2phi_ds2: -self.dphi * cos_s,
        }
    }

    /// Direction of travel measured from the elevation unit vector, via
    /// `atan2(dphi/ds, dbeta/ds)`.
    pub fn heading(&self, s: f64) -> Result<f64> {
        let d = self.derivatives(s);
        heading_from(d.dphi_ds, d.dbeta_ds, s)
    }

    pub fn embed(&self, s: f64, r: f64) -> Result<Vector3<f64>> {
        check_radius(r)?;
        let (beta, phi) = self.eval(s);
        Ok(embed_angles(beta, phi, r))
    }

    pub fn curvature(&self, s: f64, r: f64) -> Result<Curvature> {
        check_radius(r)?;
        let (beta, phi) = self.eval(s);
        curvature_from(beta, phi, &self.derivatives(s), r).ok_or(Error::DegeneratePath { s })
    }

    pub fn sample(&self, s: f64, r: f64) -> Result<PathSample> {
        check_radius(r)?;
        let (beta, phi_az) = self.eval(s);
        let d = self.derivatives(s);
        let chi = heading_from(d.dphi_ds, d.dbeta_ds, s)?;
        let kappa = curvature_from(beta, phi_az, &d, r).ok_or(Error::DegeneratePath { s })?;
        Ok(PathSample {
            s,
            beta,
            phi_az,
            dbeta_ds: d.dbeta_ds,
            dphi_ds: d.dphi_ds,
            d2beta_ds2: d.d2beta_ds2,
            d2phi_ds2: d.d2phi_ds2,
            chi,
            kappa_total: kappa.total,
            kappa_geo: kappa.geodesic,
        })
    }

    /// `n` samples on the uniform grid `s_i = period * i / n` over one
    /// closed period.
    pub fn sample_path(&self, r: f64, n: usize) -> Result<Vec<PathSample>> {
        check_radius(r)?;
        if n < 8 {
            return Err(Error::InvalidPath(format!("need at least 8 samples, got {n}")));
        }
        grid(self.shape, n).map(|s| self.sample(s, r)).collect()
    }
}

/// Uniform parameter grid over one period of `shape`.
pub fn grid(shape: Shape, n: usize) -> impl Iterator<Item = f64> {
    let period = shape.period();
    (0..n).map(move |i| period * i as f64 / n as f64)
}

/// Cartesian point `r (cos b cos p, cos b sin p, sin b)`.
pub fn embed_angles(beta: f64, phi: f64, r: f64) -> Vector3<f64> {
    let (sb, cb) = beta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(cb * cp, cb * sp, sb) * r
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRadius(r))
    }
}

fn heading_from(dphi: f64, dbeta: f64, s: f64) -> Result<f64> {
    if dphi.abs() < STATIONARY_EPS && dbeta.abs() < STATIONARY_EPS {
        return Err(Error::DegeneratePath { s });
    }
    let chi = dphi.atan2(dbeta);
    Ok(if chi <= -PI { PI } else { chi })
}

/// Curvature of the spherical embedding via `|p' x p''| / |p'|^3`.
/// Returns `None` at stationary points.
pub(crate) fn curvature_from(beta: f64, phi: f64, d: &PathDerivatives, r: f64) -> Option<Curvature> {
    let (sb, cb) = beta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (b1, p1, b2, p2) = (d.dbeta_ds, d.dphi_ds, d.d2beta_ds2, d.d2phi_ds2);
    let q = b1 * b1 + p1 * p1;

    // r cancels in the ratio; work on the unit sphere and rescale.
    let dp = Vector3::new(-sb * cp * b1 - cb * sp * p1, -sb * sp * b1 + cb * cp * p1, cb * b1);
    let ddp = Vector3::new(
        -cb * cp * q + 2.0 * sb * sp * b1 * p1 - sb * cp * b2 - cb * sp * p2,
        -cb * sp * q - 2.0 * sb * cp * b1 * p1 - sb * sp * b2 + cb * cp * p2,
        -sb * b1 * b1 + cb * b2,
    );
    let speed = dp.norm();
    if speed < STATIONARY_EPS {
        return None;
    }
    let total = dp.cross(&ddp).norm() / (speed * speed * speed) / r;
    let normal = 1.0 / r;
    // rounding can push the argument a hair below zero on great circles
    let geodesic = (total * total - normal * normal).max(0.0).sqrt();
    Some(Curvature { total, geodesic })
}
