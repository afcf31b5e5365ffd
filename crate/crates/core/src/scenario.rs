//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! dt = 0.1                        # optional, s
//! atmosphere = "standard"         # or "vacuum"
//! angle_grid = { start = 30.0, stop = 80.0, step = 1.0 }   # or a list of degrees
//!
//! [rocket]
//! preset = "dlsrr30"              # optional; fields below override it
//! burn_time = 30.0
//! drag_table = "dlsrr30"          # bundled name or [[mach, cd], ...]
//!
//! [projectile]
//! preset = "europrojectile"       # or "hpv"
//!
//! [launch]
//! release_altitude = 12000.0
//! release_speed = 500.0
//! firing_angle = 54.0             # omit to search `angle_grid`
//!
//! [apogee]                        # optional: start `impact` from this state
//! altitude = 93000.0
//! speed = 1239.0
//! downrange = 0.0
//!
//! [thermal]                       # optional
//! correlation = "klein"
//! [[thermal.stations]]
//! kind = "cone"
//! y = 0.03
//!
//! [sweep]                         # optional: cross product for `sweep`
//! release_altitude = [12000.0, 16000.0]
//! release_speed = [500.0, 600.0]
//! burn_time = [30.0, 50.0]
//! ```
//!
//! Without a preset every rocket and projectile field is required. Unknown
//! keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atmosphere::{AirModel, StandardAtmosphere, Vacuum};
use crate::error::{Error, Result};
use crate::flight::{validate_angle, LaunchCondition, DEFAULT_DT};
use crate::thermal::{
    CaloricallyPerfect, NoseGeometry, ReynoldsModel, StagnationCorrelation, StationKind, ThermalConfig,
    ThermalConstants, ThermalStation,
};
use crate::vehicle::{DragTable, ProjectileSpec, RocketSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtmosphereChoice {
    #[default]
    Standard,
    Vacuum,
}

impl AtmosphereChoice {
    pub fn model(self) -> &'static dyn AirModel {
        static STANDARD: StandardAtmosphere = StandardAtmosphere;
        static VACUUM: Vacuum = Vacuum { temperature: 288.15 };
        match self {
            AtmosphereChoice::Standard => &STANDARD,
            AtmosphereChoice::Vacuum => &VACUUM,
        }
    }
}

/// Release conditions; the firing angle is optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchSpec {
    pub release_altitude: f64,
    pub release_speed: f64,
    pub firing_angle: Option<f64>,
}

impl LaunchSpec {
    pub fn with_angle(&self, firing_angle: f64) -> LaunchCondition {
        LaunchCondition { release_altitude: self.release_altitude, release_speed: self.release_speed, firing_angle }
    }
}

/// A stated apogee state to start a descent from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApogeeSpec {
    pub altitude: f64,
    pub speed: f64,
    pub downrange: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSettings {
    pub correlation: StagnationCorrelation,
    pub reynolds: ReynoldsModel,
    pub cp_air: f64,
    pub stations: Vec<ThermalStation>,
    pub wall_areal_density: f64,
    pub wall_cp: f64,
    pub initial_temperature: f64,
    pub tip_inclination: f64,
    pub min_length: f64,
}

impl Default for ThermalSettings {
    fn default() -> Self {
        let cfg = ThermalConfig::default();
        ThermalSettings {
            correlation: StagnationCorrelation::default(),
            reynolds: ReynoldsModel::default(),
            cp_air: CaloricallyPerfect::default().cp,
            stations: cfg.stations,
            wall_areal_density: cfg.wall_areal_density,
            wall_cp: cfg.wall_cp,
            initial_temperature: cfg.initial_temperature,
            tip_inclination: cfg.nose.tip_inclination,
            min_length: cfg.nose.min_length,
        }
    }
}

impl ThermalSettings {
    /// Thermal configuration for `rocket`'s nose.
    pub fn config(&self, rocket: &RocketSpec) -> ThermalConfig {
        ThermalConfig {
            constants: ThermalConstants {
                correlation: self.correlation,
                reynolds: self.reynolds,
                enthalpy: std::sync::Arc::new(CaloricallyPerfect { cp: self.cp_air }),
                ..ThermalConstants::default()
            },
            nose: NoseGeometry {
                length: rocket.nose_length,
                tip_inclination: self.tip_inclination,
                min_length: self.min_length,
            },
            nose_radius: rocket.nose_radius,
            stations: self.stations.clone(),
            wall_areal_density: self.wall_areal_density,
            wall_cp: self.wall_cp,
            initial_temperature: self.initial_temperature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub release_altitude: Vec<f64>,
    pub release_speed: Vec<f64>,
    pub burn_time: Vec<f64>,
}

impl SweepGrid {
    /// Every (release altitude, release speed, burn time) combination.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &h in &self.release_altitude {
            for &v in &self.release_speed {
                for &tb in &self.burn_time {
                    out.push((h, v, tb));
                }
            }
        }
        out
    }
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub dt: f64,
    pub atmosphere: AtmosphereChoice,
    pub angle_grid: Vec<f64>,
    pub rocket: RocketSpec,
    pub projectile: ProjectileSpec,
    pub launch: LaunchSpec,
    pub apogee: Option<ApogeeSpec>,
    pub thermal: ThermalSettings,
    pub sweep: Option<SweepGrid>,
}

impl Scenario {
    /// True when no firing angle is given and the angle grid will be searched.
    pub fn needs_optimization(&self) -> bool {
        self.launch.firing_angle.is_none()
    }

    pub fn air(&self) -> &'static dyn AirModel {
        self.atmosphere.model()
    }

    pub fn thermal_config(&self) -> ThermalConfig {
        self.thermal.config(&self.rocket)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation("dt", format!("{} s must be > 0", self.dt)));
        }
        self.rocket.validate()?;
        self.projectile.validate()?;
        let probe = self.launch.with_angle(self.launch.firing_angle.unwrap_or(45.0));
        probe.validate()?;
        validate_grid("angle_grid", &self.angle_grid)?;
        if let Some(a) = &self.apogee {
            if !(a.altitude > 0.0) {
                return Err(Error::validation("apogee.altitude", format!("{} m must be > 0", a.altitude)));
            }
            if !(a.speed >= 0.0) {
                return Err(Error::validation("apogee.speed", format!("{} must be >= 0", a.speed)));
            }
        }
        self.thermal_config().validate()?;
        if let Some(s) = &self.sweep {
            for (name, values) in [
                ("sweep.release_altitude", &s.release_altitude),
                ("sweep.release_speed", &s.release_speed),
                ("sweep.burn_time", &s.burn_time),
            ] {
                if values.is_empty() {
                    return Err(Error::validation(name, "must not be empty"));
                }
            }
            for &tb in &s.burn_time {
                if !(tb > 0.0) {
                    return Err(Error::validation("sweep.burn_time", format!("{tb} must be > 0")));
                }
            }
            for &h in &s.release_altitude {
                LaunchCondition { release_altitude: h, ..probe }.validate()?;
            }
            for &v in &s.release_speed {
                LaunchCondition { release_speed: v, ..probe }.validate()?;
            }
        }
        Ok(())
    }

    /// Serializes to a scenario document that parses back to `self`.
    pub fn emit(&self) -> String {
        let raw = RawScenario::from(self);
        toml::to_string(&raw).expect("scenario serializes")
    }
}

fn validate_grid(field: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation(field, "must not be empty"));
    }
    for &a in grid {
        validate_angle(field, a)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(field, "must be strictly increasing"));
    }
    Ok(())
}

/// 30 to 80 degrees in 1 degree steps.
pub fn default_angle_grid() -> Vec<f64> {
    (30..=80).map(f64::from).collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        Error::Parse { line, message: e.message().trim().to_string() }
    })?;
    let scenario = raw.resolve()?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawDragTable {
    Named(String),
    Knots(Vec<[f64; 2]>),
}

impl RawDragTable {
    fn resolve(&self) -> Result<DragTable> {
        match self {
            RawDragTable::Named(name) => DragTable::bundled(name),
            RawDragTable::Knots(knots) => DragTable::try_from(knots.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawAngleGrid {
    List(Vec<f64>),
    Range(RawRange),
}

impl RawAngleGrid {
    fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            RawAngleGrid::List(v) => Ok(v.clone()),
            RawAngleGrid::Range(RawRange { start, stop, step }) => {
                if !(*step > 0.0) {
                    return Err(Error::validation("angle_grid.step", format!("{step} must be > 0")));
                }
                let n = ((stop - start) / step + 1e-9).floor();
                if !(n >= 0.0) {
                    return Err(Error::validation("angle_grid", "stop must not be below start"));
                }
                Ok((0..=n as usize).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRocket {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    propellant_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaust_velocity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    burn_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nose_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nose_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    body_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    drag_table: Option<RawDragTable>,
}

fn pick(field: &str, given: Option<f64>, preset: Option<f64>) -> Result<f64> {
    given.or(preset).ok_or_else(|| Error::MissingField(field.to_string()))
}

impl RawRocket {
    fn resolve(&self) -> Result<RocketSpec> {
        let base = match self.preset.as_deref() {
            None => None,
            Some("dlsrr30") => Some(RocketSpec::baseline(f64::NAN)),
            Some(other) => {
                return Err(Error::validation("rocket.preset", format!("unknown preset `{other}` (expected dlsrr30)")))
            }
        };
        let b = base.as_ref();
        let drag_table = match (&self.drag_table, b) {
            (Some(t), _) => t.resolve()?,
            (None, Some(b)) => b.drag_table.clone(),
            (None, None) => return Err(Error::MissingField("rocket.drag_table".into())),
        };
        Ok(RocketSpec {
            total_mass: pick("rocket.total_mass", self.total_mass, b.map(|b| b.total_mass))?,
            diameter: pick("rocket.diameter", self.diameter, b.map(|b| b.diameter))?,
            propellant_fraction: pick(
                "rocket.propellant_fraction",
                self.propellant_fraction,
                b.map(|b| b.propellant_fraction),
            )?,
            exhaust_velocity: pick("rocket.exhaust_velocity", self.exhaust_velocity, b.map(|b| b.exhaust_velocity))?,
            burn_time: pick("rocket.burn_time", self.burn_time, None)?,
            nose_radius: pick("rocket.nose_radius", self.nose_radius, b.map(|b| b.nose_radius))?,
            nose_length: pick("rocket.nose_length", self.nose_length, b.map(|b| b.nose_length))?,
            body_length: pick("rocket.body_length", self.body_length, b.map(|b| b.body_length))?,
            drag_table,
        })
    }
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProjectile {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    drag_table: Option<RawDragTable>,
}

impl RawProjectile {
    fn resolve(&self) -> Result<ProjectileSpec> {
        let base = match self.preset.as_deref() {
            None => None,
            Some("hpv") => Some(ProjectileSpec::hpv()),
            Some("europrojectile") => Some(ProjectileSpec::europrojectile()),
            Some(other) => {
                return Err(Error::validation(
                    "projectile.preset",
                    format!("unknown preset `{other}` (expected hpv or europrojectile)"),
                ))
            }
        };
        let b = base.as_ref();
        let drag_table = match (&self.drag_table, b) {
            (Some(t), _) => t.resolve()?,
            (None, Some(b)) => b.drag_table.clone(),
            (None, None) => return Err(Error::MissingField("projectile.drag_table".into())),
        };
        Ok(ProjectileSpec {
            mass: pick("projectile.mass", self.mass, b.map(|b| b.mass))?,
            diameter: pick("projectile.diameter", self.diameter, b.map(|b| b.diameter))?,
            drag_table,
        })
    }
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaunch {
    #[serde(skip_serializing_if = "Option::is_none")]
    release_altitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    release_speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    firing_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawApogee {
    altitude: Option<f64>,
    speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    downrange: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStation {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    emissivity: Option<f64>,
}

impl RawStation {
    fn resolve(&self) -> Result<ThermalStation> {
        let mut station = match self.kind.as_str() {
            "stagnation" => ThermalStation::stagnation(),
            "cone" => ThermalStation::cone(self.y.ok_or_else(|| Error::MissingField("thermal.stations.y".into()))?),
            "cylinder_base" => {
                let mut s = ThermalStation::cylinder_base();
                if let Some(x) = self.x {
                    s.kind = StationKind::CylinderBase { x };
                }
                s
            }
            other => {
                return Err(Error::validation(
                    "thermal.stations.kind",
                    format!("`{other}` is not one of stagnation, cone, cylinder_base"),
                ))
            }
        };
        if self.y.is_some() && self.kind != "cone" {
            return Err(Error::validation("thermal.stations.y", "only cone stations take y"));
        }
        if self.x.is_some() && self.kind != "cylinder_base" {
            return Err(Error::validation("thermal.stations.x", "only cylinder_base stations take x"));
        }
        if let Some(e) = self.emissivity {
            station.emissivity = e;
        }
        Ok(station)
    }
}

impl From<&ThermalStation> for RawStation {
    fn from(s: &ThermalStation) -> Self {
        let (kind, y, x) = match s.kind {
            StationKind::Stagnation => ("stagnation", None, None),
            StationKind::Cone { y } => ("cone", Some(y), None),
            StationKind::CylinderBase { x } => ("cylinder_base", None, Some(x)),
        };
        RawStation { kind: kind.into(), y, x, emissivity: Some(s.emissivity) }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermal {
    #[serde(skip_serializing_if = "Option::is_none")]
    correlation: Option<StagnationCorrelation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reynolds: Option<ReynoldsModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cp_air: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_areal_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_cp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tip_inclination: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stations: Option<Vec<RawStation>>,
}

impl RawThermal {
    fn resolve(&self) -> Result<ThermalSettings> {
        let d = ThermalSettings::default();
        Ok(ThermalSettings {
            correlation: self.correlation.unwrap_or(d.correlation),
            reynolds: self.reynolds.unwrap_or(d.reynolds),
            cp_air: self.cp_air.unwrap_or(d.cp_air),
            stations: match &self.stations {
                Some(list) => list.iter().map(RawStation::resolve).collect::<Result<_>>()?,
                None => d.stations,
            },
            wall_areal_density: self.wall_areal_density.unwrap_or(d.wall_areal_density),
            wall_cp: self.wall_cp.unwrap_or(d.wall_cp),
            initial_temperature: self.initial_temperature.unwrap_or(d.initial_temperature),
            tip_inclination: self.tip_inclination.unwrap_or(d.tip_inclination),
            min_length: self.min_length.unwrap_or(d.min_length),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    release_altitude: Option<Vec<f64>>,
    release_speed: Option<Vec<f64>>,
    burn_time: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    atmosphere: Option<AtmosphereChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    angle_grid: Option<RawAngleGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rocket: Option<RawRocket>,
    #[serde(skip_serializing_if = "Option::is_none")]
    projectile: Option<RawProjectile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    launch: Option<RawLaunch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    apogee: Option<RawApogee>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thermal: Option<RawThermal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
}

impl RawScenario {
    fn resolve(&self) -> Result<Scenario> {
        let rocket = self.rocket.as_ref().ok_or_else(|| Error::MissingField("rocket".into()))?.resolve()?;
        let projectile = match &self.projectile {
            Some(p) => p.resolve()?,
            None => ProjectileSpec::europrojectile(),
        };
        let launch = self.launch.clone().unwrap_or_default();
        let launch = LaunchSpec {
            release_altitude: pick("launch.release_altitude", launch.release_altitude, None)?,
            release_speed: pick("launch.release_speed", launch.release_speed, None)?,
            firing_angle: launch.firing_angle,
        };
        let apogee = match &self.apogee {
            None => None,
            Some(a) => Some(ApogeeSpec {
                altitude: pick("apogee.altitude", a.altitude, None)?,
                speed: pick("apogee.speed", a.speed, None)?,
                downrange: a.downrange.unwrap_or(0.0),
            }),
        };
        let sweep = self.sweep.as_ref().map(|s| SweepGrid {
            release_altitude: s.release_altitude.clone().unwrap_or_else(|| vec![launch.release_altitude]),
            release_speed: s.release_speed.clone().unwrap_or_else(|| vec![launch.release_speed]),
            burn_time: s.burn_time.clone().unwrap_or_else(|| vec![rocket.burn_time]),
        });
        Ok(Scenario {
            dt: self.dt.unwrap_or(DEFAULT_DT),
            atmosphere: self.atmosphere.unwrap_or_default(),
            angle_grid: match &self.angle_grid {
                Some(g) => g.resolve()?,
                None => default_angle_grid(),
            },
            rocket,
            projectile,
            launch,
            apogee,
            thermal: self.thermal.clone().unwrap_or_default().resolve()?,
            sweep,
        })
    }
}

impl From<&Scenario> for RawScenario {
    fn from(s: &Scenario) -> Self {
        let knots = |t: &DragTable| RawDragTable::Knots(t.clone().into());
        let r = &s.rocket;
        let th = &s.thermal;
        RawScenario {
            dt: Some(s.dt),
            atmosphere: Some(s.atmosphere),
            angle_grid: Some(RawAngleGrid::List(s.angle_grid.clone())),
            rocket: Some(RawRocket {
                preset: None,
                total_mass: Some(r.total_mass),
                diameter: Some(r.diameter),
                propellant_fraction: Some(r.propellant_fraction),
                exhaust_velocity: Some(r.exhaust_velocity),
                burn_time: Some(r.burn_time),
                nose_radius: Some(r.nose_radius),
                nose_length: Some(r.nose_length),
                body_length: Some(r.body_length),
                drag_table: Some(knots(&r.drag_table)),
            }),
            projectile: Some(RawProjectile {
                preset: None,
                mass: Some(s.projectile.mass),
                diameter: Some(s.projectile.diameter),
                drag_table: Some(knots(&s.projectile.drag_table)),
            }),
            launch: Some(RawLaunch {
                release_altitude: Some(s.launch.release_altitude),
                release_speed: Some(s.launch.release_speed),
                firing_angle: s.launch.firing_angle,
            }),
            apogee: s.apogee.map(|a| RawApogee {
                altitude: Some(a.altitude),
                speed: Some(a.speed),
                downrange: Some(a.downrange),
            }),
            thermal: Some(RawThermal {
                correlation: Some(th.correlation),
                reynolds: Some(th.reynolds),
                cp_air: Some(th.cp_air),
                wall_areal_density: Some(th.wall_areal_density),
                wall_cp: Some(th.wall_cp),
                initial_temperature: Some(th.initial_temperature),
                tip_inclination: Some(th.tip_inclination),
                min_length: Some(th.min_length),
                stations: Some(th.stations.iter().map(RawStation::from).collect()),
            }),
            sweep: s.sweep.as_ref().map(|g| RawSweep {
                release_altitude: Some(g.release_altitude.clone()),
                release_speed: Some(g.release_speed.clone()),
                burn_time: Some(g.burn_time.clone()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[rocket]
total_mass = 300.0
diameter = 0.30
propellant_fraction = 0.5
exhaust_velocity = 2100.0
burn_time = 30.0
nose_radius = 0.02
nose_length = 1.0
body_length = 3.3
drag_table = "dlsrr30"

[launch]
release_altitude = 12000.0
release_speed = 500.0
"#;

    #[test]
    fn minimal_document_is_baseline() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.rocket, RocketSpec::baseline(30.0));
        assert_eq!(s.dt, 0.1);
        assert!(s.needs_optimization());
        assert_eq!(s.angle_grid.len(), 51);
        assert_eq!(s.angle_grid[0], 30.0);
        assert_eq!(s.projectile, ProjectileSpec::europrojectile());
    }

    #[test]
    fn preset_with_override() {
        let s = parse_scenario(
            "[rocket]\npreset = \"dlsrr30\"\nburn_time = 50.0\nexhaust_velocity = 2600.0\n\
             [projectile]\npreset = \"hpv\"\n[launch]\nrelease_altitude = 16000.0\nrelease_speed = 600.0\nfiring_angle = 59.0\n",
        )
        .unwrap();
        assert_eq!(s.rocket.exhaust_velocity, 2600.0);
        assert_eq!(s.rocket.burn_time, 50.0);
        assert_eq!(s.projectile, ProjectileSpec::hpv());
        assert_eq!(s.launch.firing_angle, Some(59.0));
    }

    #[test]
    fn rejects_bad_fraction() {
        let text = MINIMAL.replace("propellant_fraction = 0.5", "propellant_fraction = 1.2");
        assert!(matches!(parse_scenario(&text), Err(Error::Validation { .. })));
    }

    #[test]
    fn names_missing_field() {
        let text = MINIMAL.replace("exhaust_velocity = 2100.0\n", "");
        match parse_scenario(&text) {
            Err(Error::MissingField(f)) => assert_eq!(f, "rocket.exhaust_velocity"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_has_line_number() {
        let text = MINIMAL.replace("[launch]\n", "[launch]\nwind = 3.0\n");
        match parse_scenario(&text) {
            Err(Error::Parse { line: Some(line), message }) => {
                assert_eq!(line, 14, "{message}");
                assert!(message.contains("wind"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_line_number() {
        let text = format!("{MINIMAL}\n[thermal\n");
        match parse_scenario(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, Some(17)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn angle_grid_forms() {
        let text = format!("angle_grid = {{ start = 50.0, stop = 60.0, step = 2.5 }}\n{MINIMAL}");
        assert_eq!(parse_scenario(&text).unwrap().angle_grid, [50.0, 52.5, 55.0, 57.5, 60.0]);
        let text = format!("angle_grid = [45.0]\n{MINIMAL}");
        assert_eq!(parse_scenario(&text).unwrap().angle_grid, [45.0]);
        let text = format!("angle_grid = [50.0, 45.0]\n{MINIMAL}");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn thermal_and_sweep_sections() {
        let text = format!(
            "{MINIMAL}\n[thermal]\ncorrelation = \"detra\"\n[[thermal.stations]]\nkind = \"cone\"\ny = 0.2\n\
             [sweep]\nburn_time = [30.0, 80.0]\n"
        );
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.thermal.correlation, StagnationCorrelation::Detra);
        assert_eq!(s.thermal.stations, [ThermalStation::cone(0.2)]);
        let sweep = s.sweep.unwrap();
        assert_eq!(sweep.points(), [(12000.0, 500.0, 30.0), (12000.0, 500.0, 80.0)]);
    }

    #[test]
    fn round_trip() {
        let text = format!(
            "{MINIMAL}\n[apogee]\naltitude = 93000.0\nspeed = 1239.0\n[sweep]\nrelease_speed = [500.0, 600.0]\n"
        );
        let s = parse_scenario(&text).unwrap();
        let back = parse_scenario(&s.emit()).unwrap();
        assert_eq!(back, s);
        let mut fixed = s.clone();
        fixed.launch.firing_angle = Some(61.0);
        fixed.atmosphere = AtmosphereChoice::Vacuum;
        assert_eq!(parse_scenario(&fixed.emit()).unwrap(), fixed);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn round_trip_arbitrary(
                mass in 50.0..1000.0f64, fp in 0.0..0.9f64, tb in 1.0..120.0f64,
                h0 in 0.0..30_000.0f64, v0 in 0.0..1000.0f64, angle in proptest::option::of(1.0..89.0f64),
                dt in 0.001..1.0f64,
            ) {
                let mut s = parse_scenario(MINIMAL).unwrap();
                s.rocket.total_mass = mass;
                s.rocket.propellant_fraction = fp;
                s.rocket.burn_time = tb;
                s.launch = LaunchSpec { release_altitude: h0, release_speed: v0, firing_angle: angle };
                s.dt = dt;
                prop_assert_eq!(parse_scenario(&s.emit()).unwrap(), s);
            }
        }
    }
}
