//! JSON run configuration.
//!
//! Every section and field is optional; omitted values take the reference
//! kite and site parameters, an elliptical path and a 100 m to 200 m sweep
//! in 5 m steps. Angles are given in degrees here and converted to radians
//! on the way into the library. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "kite": { "mass": 1.0, "area": 0.28, "c_lift": 1.2, "c_drag": 0.12 },
//!   "environment": { "air_density": 1.225, "wind_speed": 10.0 },
//!   "constraints": { "phi_max_deg": 30.0, "h_min": 30.0, "h_max": 150.0 },
//!   "shape": "ellipse",
//!   "grid_n": 360,
//!   "sweep": { "r_min": 100.0, "r_max": 200.0, "dr": 5.0 },
//!   "bounds": { "dbeta_deg": [0.5, 45.0] },
//!   "limits": { "f_tether_max": 900.0, "p_rated": null },
//!   "output": { "directory": "out", "formats": ["csv", "json"] }
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Shape;
use crate::model::{Environment, KiteParams};
use crate::optimizer::{BoundOverrides, PlanConfig, SqpOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot parse config at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    /// Dotted path of the offending field.
    pub fn field(&self) -> &str {
        match self {
            ConfigError::Parse { path, .. } => path,
            ConfigError::Validation { field, .. } => field,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeName {
    #[default]
    Ellipse,
    Eight,
}

impl ShapeName {
    pub fn shape(self) -> Shape {
        match self {
            ShapeName::Ellipse => Shape::ELLIPSE,
            ShapeName::Eight => Shape::FIGURE_EIGHT,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeName::Ellipse => "ellipse",
            ShapeName::Eight => "eight",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KiteSection {
    pub mass: f64,
    pub area: f64,
    pub c_lift: f64,
    pub c_drag: f64,
}

impl Default for KiteSection {
    fn default() -> Self {
        let k = KiteParams::REFERENCE;
        KiteSection { mass: k.mass, area: k.area, c_lift: k.c_lift, c_drag: k.c_drag }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    pub air_density: f64,
    pub wind_speed: f64,
}

impl Default for EnvironmentSection {
    fn default() -> Self {
        let e = Environment::REFERENCE;
        EnvironmentSection { air_density: e.air_density, wind_speed: e.wind_speed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSection {
    pub phi_max_deg: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for ConstraintSection {
    fn default() -> Self {
        ConstraintSection { phi_max_deg: 30.0, h_min: 30.0, h_max: 150.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub r_min: f64,
    pub r_max: f64,
    pub dr: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { r_min: 100.0, r_max: 200.0, dr: 5.0 }
    }
}

/// Optional `[lo, hi]` overrides of the decision-variable box, degrees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0_deg: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dbeta_deg: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dphi_deg: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    /// N
    pub f_tether_max: Option<f64>,
    /// W
    pub p_rated: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: "out".to_string(), formats: vec![Format::Csv] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kite: KiteSection,
    pub environment: EnvironmentSection,
    pub constraints: ConstraintSection,
    pub shape: ShapeName,
    pub grid_n: usize,
    pub sweep: SweepSection,
    pub bounds: BoundsSection,
    pub limits: LimitsSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kite: KiteSection::default(),
            environment: EnvironmentSection::default(),
            constraints: ConstraintSection::default(),
            shape: ShapeName::default(),
            grid_n: crate::optimizer::DEFAULT_GRID_N,
            sweep: SweepSection::default(),
            bounds: BoundsSection::default(),
            limits: LimitsSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| ConfigError::Parse { path: ".".into(), message: e.to_string() })?;
    config.validate()?;
    Ok(config)
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field: field.to_string(), message: message.into() }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Configuration with every default applied.
    pub fn reference() -> RunConfig {
        RunConfig::default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let k = &self.kite;
        positive("kite.mass", k.mass)?;
        positive("kite.area", k.area)?;
        positive("kite.c_lift", k.c_lift)?;
        positive("kite.c_drag", k.c_drag)?;
        if k.c_lift <= k.c_drag {
            return Err(invalid("kite.c_lift", "must exceed kite.c_drag"));
        }
        positive("environment.air_density", self.environment.air_density)?;
        positive("environment.wind_speed", self.environment.wind_speed)?;
        let c = &self.constraints;
        positive("constraints.phi_max_deg", c.phi_max_deg)?;
        if c.phi_max_deg >= 90.0 {
            return Err(invalid("constraints.phi_max_deg", "must be below 90"));
        }
        positive("constraints.h_min", c.h_min)?;
        positive("constraints.h_max", c.h_max)?;
        if c.h_max <= c.h_min {
            return Err(invalid("constraints.h_max", "must exceed constraints.h_min"));
        }
        if self.grid_n < 8 {
            return Err(invalid("grid_n", format!("must be at least 8, got {}", self.grid_n)));
        }
        let s = &self.sweep;
        positive("sweep.r_min", s.r_min)?;
        positive("sweep.r_max", s.r_max)?;
        positive("sweep.dr", s.dr)?;
        if s.r_max < s.r_min {
            return Err(invalid("sweep.r_max", "must not be below sweep.r_min"));
        }
        for (name, b) in [
            ("bounds.beta0_deg", self.bounds.beta0_deg),
            ("bounds.dbeta_deg", self.bounds.dbeta_deg),
            ("bounds.dphi_deg", self.bounds.dphi_deg),
        ] {
            if let Some([lo, hi]) = b {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid(name, format!("need lo <= hi, got [{lo}, {hi}]")));
                }
            }
        }
        for (name, lo) in [("bounds.dbeta_deg", self.bounds.dbeta_deg), ("bounds.dphi_deg", self.bounds.dphi_deg)] {
            if let Some([lo, _]) = lo {
                positive(name, lo)?;
            }
        }
        if let Some(f) = self.limits.f_tether_max {
            positive("limits.f_tether_max", f)?;
        }
        if let Some(p) = self.limits.p_rated {
            positive("limits.p_rated", p)?;
        }
        Ok(())
    }

    pub fn kite(&self) -> KiteParams {
        let k = &self.kite;
        KiteParams { mass: k.mass, area: k.area, c_lift: k.c_lift, c_drag: k.c_drag }
    }

    pub fn env(&self) -> Environment {
        Environment { air_density: self.environment.air_density, wind_speed: self.environment.wind_speed }
    }

    /// Library-side planning configuration (radians).
    pub fn plan_config(&self) -> PlanConfig {
        let rad = |b: Option<[f64; 2]>| b.map(|[lo, hi]| (lo.to_radians(), hi.to_radians()));
        PlanConfig {
            kite: self.kite(),
            env: self.env(),
            phi_max: self.constraints.phi_max_deg.to_radians(),
            h_min: self.constraints.h_min,
            h_max: self.constraints.h_max,
            shape: self.shape.shape(),
            grid_n: self.grid_n,
            bounds: BoundOverrides {
                beta0: rad(self.bounds.beta0_deg),
                dbeta: rad(self.bounds.dbeta_deg),
                dphi: rad(self.bounds.dphi_deg),
            },
            f_tether_max: self.limits.f_tether_max,
            p_rated: self.limits.p_rated,
            solver: SqpOptions::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_reference_defaults() {
        let c = parse_config("{}").unwrap();
        assert_eq!(c, RunConfig::reference());
        assert_eq!(c.kite(), KiteParams::REFERENCE);
        assert_eq!(c.env(), Environment::REFERENCE);
        assert_eq!(c.shape, ShapeName::Ellipse);
        assert_eq!(c.grid_n, 360);
        assert_eq!((c.sweep.r_min, c.sweep.r_max, c.sweep.dr), (100.0, 200.0, 5.0));
        assert_eq!(c.plan_config(), PlanConfig::default());
    }

    #[test]
    fn negative_wind_is_rejected_by_field() {
        let err = parse_config(r#"{"environment": {"wind_speed": -3}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { .. }));
        assert_eq!(err.field(), "environment.wind_speed");
    }

    #[test]
    fn unknown_shape_is_rejected() {
        let err = parse_config(r#"{"shape": "circle"}"#).unwrap_err();
        assert_eq!(err.field(), "shape");
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let err = parse_config(r#"{"kite": {"mass": 1, "span": 2}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
        assert_eq!(err.field(), "kite.span");
        assert!(parse_config(r#"{"colour": "red"}"#).is_err());
        let err = parse_config(r#"{"sweep": {"dr": "five"}}"#).unwrap_err();
        assert_eq!(err.field(), "sweep.dr");
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let c = parse_config(r#"{"kite": {"mass": 2.5}, "shape": "eight", "limits": {"p_rated": 2000}}"#).unwrap();
        assert_eq!(c.kite.mass, 2.5);
        assert_eq!(c.kite.area, 0.28);
        assert_eq!(c.plan_config().shape, Shape::FIGURE_EIGHT);
        assert_eq!(c.plan_config().p_rated, Some(2000.0));
    }

    #[test]
    fn bound_overrides_convert_to_radians() {
        let c = parse_config(r#"{"bounds": {"dphi_deg": [1.0, 60.0]}}"#).unwrap();
        let (lo, hi) = c.plan_config().bounds.dphi.unwrap();
        assert!((lo - 1f64.to_radians()).abs() < 1e-15);
        assert!((hi - 60f64.to_radians()).abs() < 1e-15);
        assert!(parse_config(r#"{"bounds": {"dphi_deg": [60.0, 1.0]}}"#).is_err());
    }

    #[test]
    fn trailing_garbage_is_a_parse_error() {
        assert!(matches!(parse_config("{} {"), Err(ConfigError::Parse { .. })));
    }
}
