//! Quasi-static crosswind power model.
//!
//! Gravity and inertia are neglected, so the aerodynamic force balances the
//! tether force and the apparent wind splits into radial and tangential
//! parts in the same proportion as drag and (rolled) lift. Everything then
//! follows in closed form from the position on the sphere, the roll angle
//! and the reel-out factor `f = v_reel / v_wind`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LissajousPath;

/// Physical kite constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KiteParams {
    /// kg
    pub mass: f64,
    /// Projected wing area, m^2.
    pub area: f64,
    pub c_lift: f64,
    pub c_drag: f64,
}

impl KiteParams {
    /// Small-scale rigid-wing prototype used as the reference case.
    pub const REFERENCE: KiteParams = KiteParams { mass: 1.0, area: 0.28, c_lift: 1.2, c_drag: 0.12 };

    pub fn validate(&self) -> Result<()> {
        let fields = [("mass", self.mass), ("area", self.area), ("c_lift", self.c_lift), ("c_drag", self.c_drag)];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("kite.{name} must be positive, got {v}")));
            }
        }
        if self.c_lift <= self.c_drag {
            return Err(Error::InvalidParams("kite.c_lift must exceed kite.c_drag".into()));
        }
        Ok(())
    }

    pub fn glide_ratio(&self) -> f64 {
        self.c_lift / self.c_drag
    }
}

impl Default for KiteParams {
    fn default() -> Self {
        Self::REFERENCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// kg/m^3
    pub air_density: f64,
    /// Horizontal wind speed at the kite, m/s.
    pub wind_speed: f64,
}

impl Environment {
    pub const REFERENCE: Environment = Environment { air_density: 1.225, wind_speed: 10.0 };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("air_density", self.air_density), ("wind_speed", self.wind_speed)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("environment.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `rho * A / 2` for a wing of the given area.
    fn dynamic_factor(&self, area: f64) -> f64 {
        0.5 * self.air_density * area
    }
}

impl Default for Environment {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// Instantaneous kite state on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KiteState {
    /// Elevation, radians.
    pub beta: f64,
    /// Azimuth from the wind direction, radians.
    pub phi_az: f64,
    /// Heading relative to the elevation direction, radians.
    pub chi: f64,
    /// Radial kite speed over wind speed.
    pub reel_factor: f64,
    pub phi_roll: f64,
}

impl KiteState {
    /// `cos(beta) cos(phi)`: the wind component along the tether.
    pub fn radial_wind_factor(&self) -> f64 {
        self.beta.cos() * self.phi_az.cos()
    }

    fn radial_margin(&self) -> Result<f64> {
        let margin = self.radial_wind_factor() - self.reel_factor;
        if margin > 0.0 {
            Ok(margin)
        } else {
            Err(Error::RadialOverrun { margin })
        }
    }
}

/// Tether force and power at one state, with the apparent-wind quantities
/// that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown {
    /// N
    pub tether_force: f64,
    /// W
    pub instantaneous_power: f64,
    /// m/s
    pub apparent_speed: f64,
    pub resultant_coeff: f64,
    /// Radial apparent wind component, m/s.
    pub apparent_radial: f64,
    /// Tangential apparent wind component, m/s.
    pub apparent_tangential: f64,
}

/// Ideal traction power of a massless kite flying exactly crosswind.
pub fn loyd_power(env: &Environment, kite: &KiteParams) -> f64 {
    let ge = kite.glide_ratio();
    env.dynamic_factor(kite.area) * kite.c_lift * env.wind_speed.powi(3) * (4.0 / 27.0) * ge * ge
}

/// Roll angle that turns the kite along a path of geodesic curvature
/// `kappa_geo`.
///
/// The turning-lift acceleration `F_lift sin(phi) / m` must equal the
/// required lateral acceleration `v_k^2 kappa` (kappa = 1/R0). With
/// `v_k ~ v_a` the speed cancels and `sin(phi) = m kappa / (rho A c_L / 2)`.
pub fn roll_angle(kappa_geo: f64, kite: &KiteParams, env: &Environment) -> Result<f64> {
    let arg = roll_sine(kappa_geo, kite, env);
    if arg > 1.0 || arg.is_nan() {
        return Err(Error::CurvatureInfeasible { kappa: kappa_geo, s: None });
    }
    Ok(arg.asin())
}

/// Same as [`roll_angle`] but saturating at pi/2, for use inside the
/// optimizer where iterates may transiently violate the curvature cap.
pub fn roll_angle_saturated(kappa_geo: f64, kite: &KiteParams, env: &Environment) -> f64 {
    roll_sine(kappa_geo, kite, env).clamp(0.0, 1.0).asin()
}

fn roll_sine(kappa_geo: f64, kite: &KiteParams, env: &Environment) -> f64 {
    kite.mass * kappa_geo / (env.dynamic_factor(kite.area) * kite.c_lift)
}

/// `c_R = sqrt((c_L cos phi_roll)^2 + c_D^2)`.
pub fn resultant_coeff(phi_roll: f64, kite: &KiteParams) -> f64 {
    (kite.c_lift * phi_roll.cos()).hypot(kite.c_drag)
}

/// Effective glide ratio `c_L cos(phi_roll) / c_D`.
fn rolled_glide_ratio(phi_roll: f64, kite: &KiteParams) -> f64 {
    kite.c_lift * phi_roll.cos() / kite.c_drag
}

/// `c_R (1 + G^2)`, the coefficient shared by force and power.
fn force_coeff(phi_roll: f64, kite: &KiteParams) -> f64 {
    let g = rolled_glide_ratio(phi_roll, kite);
    resultant_coeff(phi_roll, kite) * (1.0 + g * g)
}

pub fn apparent_speed(state: &KiteState, env: &Environment, kite: &KiteParams) -> Result<f64> {
    let margin = state.radial_margin()?;
    let g = rolled_glide_ratio(state.phi_roll, kite);
    Ok(env.wind_speed * margin * (1.0 + g * g).sqrt())
}

/// Tangential kite speed over wind speed.
///
/// Solves `lambda^2 - 2 a lambda + (1 - b^2) - G^2 (b - f)^2 = 0` for its
/// non-negative root, with `a = -sin b cos p cos chi + sin p sin chi`,
/// `b = cos(beta) cos(phi)` and `G` the rolled glide ratio.
pub fn lambda_ratio(state: &KiteState, kite: &KiteParams) -> Result<f64> {
    let (sb, cb) = state.beta.sin_cos();
    let (sp, cp) = state.phi_az.sin_cos();
    let (sc, cc) = state.chi.sin_cos();
    let a = -sb * cp * cc + sp * sc;
    let b = cb * cp;
    let g = rolled_glide_ratio(state.phi_roll, kite);
    let discriminant = a * a + b * b - 1.0 + g * g * (b - state.reel_factor).powi(2);
    if discriminant < 0.0 {
        return Err(Error::PositionInfeasible { discriminant, lambda: f64::NAN });
    }
    let lambda = a + discriminant.sqrt();
    if lambda < 0.0 {
        return Err(Error::PositionInfeasible { discriminant, lambda });
    }
    Ok(lambda)
}

/// Power-maximizing reel-out factor, `cos(beta) cos(phi) / 3`.
pub fn reel_out_optimum(beta: f64, phi_az: f64) -> f64 {
    beta.cos() * phi_az.cos() / 3.0
}

pub fn tether_force(state: &KiteState, env: &Environment, kite: &KiteParams) -> Result<f64> {
    let margin = state.radial_margin()?;
    Ok(env.dynamic_factor(kite.area)
        * force_coeff(state.phi_roll, kite)
        * margin
        * margin
        * env.wind_speed
        * env.wind_speed)
}

/// Tether force times reel-out speed, with the apparent-wind breakdown.
pub fn instantaneous_power(state: &KiteState, env: &Environment, kite: &KiteParams) -> Result<PowerBreakdown> {
    let margin = state.radial_margin()?;
    let g = rolled_glide_ratio(state.phi_roll, kite);
    let tether_force = tether_force(state, env, kite)?;
    let apparent_radial = env.wind_speed * margin;
    Ok(PowerBreakdown {
        tether_force,
        instantaneous_power: tether_force * state.reel_factor * env.wind_speed,
        apparent_speed: apparent_radial * (1.0 + g * g).sqrt(),
        resultant_coeff: resultant_coeff(state.phi_roll, kite),
        apparent_radial,
        apparent_tangential: apparent_radial * g,
    })
}

/// Instantaneous power at the optimal reel-out factor.
pub fn optimal_power(beta: f64, phi_az: f64, phi_roll: f64, env: &Environment, kite: &KiteParams) -> f64 {
    let cosines = beta.cos() * phi_az.cos();
    env.dynamic_factor(kite.area)
        * force_coeff(phi_roll, kite)
        * (4.0 / 27.0)
        * cosines.powi(3)
        * env.wind_speed.powi(3)
}

/// Tether force at the optimal reel-out factor.
pub fn optimal_tether_force(beta: f64, phi_az: f64, phi_roll: f64, env: &Environment, kite: &KiteParams) -> f64 {
    let cosines = beta.cos() * phi_az.cos();
    env.dynamic_factor(kite.area) * force_coeff(phi_roll, kite) * (4.0 / 9.0) * cosines * cosines * env.wind_speed * env.wind_speed
}

/// Mean of the optimal instantaneous power over one closed period of the
/// path (trapezoidal rule on `n` uniform samples, which is exact for the
/// periodic grid's constants and spectrally accurate for smooth paths).
///
/// Fails with [`Error::CurvatureInfeasible`] at the first sample whose turn
/// cannot be flown.
pub fn average_power(path: &LissajousPath, r: f64, env: &Environment, kite: &KiteParams, n: usize) -> Result<f64> {
    let samples = path.sample_path(r, n)?;
    let mut total = 0.0;
    for smp in &samples {
        let roll = roll_angle(smp.kappa_geo, kite, env)
            .map_err(|_| Error::CurvatureInfeasible { kappa: smp.kappa_geo, s: Some(smp.s) })?;
        total += optimal_power(smp.beta, smp.phi_az, roll, env, kite);
    }
    Ok(total / n as f64)
}
