//! Aerodynamic heating along an ascent: laminar stagnation-point flux,
//! turbulent flux on the nose cone and cylinder, radiative-equilibrium wall
//! temperatures, and the heat-sink temperature rise of the rocket body.

mod series;
mod solve;

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::atmosphere::AtmosphereState;
use crate::error::{Error, Result};

pub use series::{
    analyze, heat_sink_march, HeatSinkResult, StationKind, StationSummary, ThermalConfig, ThermalRow, ThermalSeries,
    ThermalStation, ThermalSummary,
};
pub use solve::{equilibrium_wall_temperature, BRACKET_CEILING};

/// Stefan-Boltzmann constant, W/(m^2 K^4).
pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;
/// Turbulent flux coefficient for the cylinder.
pub const CYLINDER_COEFFICIENT: f64 = 0.68;
/// Turbulent flux coefficient for the nose cone.
pub const CONE_COEFFICIENT: f64 = 0.88;
/// Specific heat of the aluminium body: 73 J/g over 80 K.
pub const ALUMINIUM_CP: f64 = 73_000.0 / 80.0;
/// 5 mm of aluminium, kg/m^2.
pub const BODY_AREAL_DENSITY: f64 = 13.5;

/// Specific enthalpy of air as a function of temperature.
pub trait EnthalpyModel: Debug + Send + Sync {
    fn enthalpy(&self, temperature: f64) -> f64;
    fn temperature(&self, enthalpy: f64) -> f64;
}

/// `h = cp T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaloricallyPerfect {
    pub cp: f64,
}

impl Default for CaloricallyPerfect {
    fn default() -> Self {
        CaloricallyPerfect { cp: 1005.0 }
    }
}

impl EnthalpyModel for CaloricallyPerfect {
    fn enthalpy(&self, temperature: f64) -> f64 {
        self.cp * temperature
    }

    fn temperature(&self, enthalpy: f64) -> f64 {
        enthalpy / self.cp
    }
}

/// Air enthalpy under the default calorically perfect model, J/kg.
pub fn air_enthalpy(temperature: f64) -> f64 {
    CaloricallyPerfect::default().enthalpy(temperature)
}

/// Stagnation-point heating constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StagnationCorrelation {
    /// 1.83e-4, the highest of the four.
    #[default]
    Klein,
    /// Sutton and Graves, 1.74e-4.
    Sutton,
    /// 1.63e-4.
    Chapman,
    /// Detra and Hidalgo, 1.45e-4 times (v in km/s)^0.15.
    Detra,
}

impl StagnationCorrelation {
    pub fn coefficient(self, v: f64) -> f64 {
        match self {
            StagnationCorrelation::Klein => 1.83e-4,
            StagnationCorrelation::Sutton => 1.74e-4,
            StagnationCorrelation::Chapman => 1.63e-4,
            StagnationCorrelation::Detra => 1.45e-4 * (v / 1000.0).powf(0.15),
        }
    }
}

impl std::str::FromStr for StagnationCorrelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "klein" => Ok(StagnationCorrelation::Klein),
            "sutton" => Ok(StagnationCorrelation::Sutton),
            "chapman" => Ok(StagnationCorrelation::Chapman),
            "detra" => Ok(StagnationCorrelation::Detra),
            other => Err(Error::validation("qk", format!("`{other}` is not one of klein, sutton, chapman, detra"))),
        }
    }
}

/// How the Reynolds number is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReynoldsModel {
    /// `70e6 rho v[km/s] x`, the viscosity law frozen at 240 K.
    #[default]
    Linearized,
    /// `rho v x / mu(T_a)` with the power-law viscosity at local temperature.
    Viscosity,
}

#[derive(Debug, Clone)]
pub struct ThermalConstants {
    pub correlation: StagnationCorrelation,
    pub sigma: f64,
    pub prandtl: f64,
    pub gamma: f64,
    pub recovery_stagnation: f64,
    pub recovery_turbulent: f64,
    pub mu_ref: f64,
    pub t_ref: f64,
    pub mu_exponent: f64,
    pub reynolds: ReynoldsModel,
    pub enthalpy: Arc<dyn EnthalpyModel>,
}

impl Default for ThermalConstants {
    fn default() -> Self {
        ThermalConstants {
            correlation: StagnationCorrelation::Klein,
            sigma: STEFAN_BOLTZMANN,
            prandtl: 0.71,
            gamma: 1.4,
            recovery_stagnation: 1.0,
            recovery_turbulent: 0.9,
            mu_ref: 1.7e-5,
            t_ref: 240.0,
            mu_exponent: 0.7,
            reynolds: ReynoldsModel::Linearized,
            enthalpy: Arc::new(CaloricallyPerfect::default()),
        }
    }
}

impl ThermalConstants {
    pub fn with_correlation(correlation: StagnationCorrelation) -> Self {
        ThermalConstants { correlation, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma", self.sigma),
            ("prandtl", self.prandtl),
            ("gamma", self.gamma),
            ("mu_ref", self.mu_ref),
            ("t_ref", self.t_ref),
            ("mu_exponent", self.mu_exponent),
        ] {
            if !(v > 0.0) {
                return Err(Error::validation(format!("thermal.{name}"), format!("{v} must be > 0")));
            }
        }
        for (name, v) in
            [("recovery_stagnation", self.recovery_stagnation), ("recovery_turbulent", self.recovery_turbulent)]
        {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(format!("thermal.{name}"), format!("{v} must be in (0, 1]")));
            }
        }
        Ok(())
    }

    /// Air viscosity at `temperature`, kg/(m s).
    pub fn viscosity(&self, temperature: f64) -> f64 {
        self.mu_ref * (temperature / self.t_ref).powf(self.mu_exponent)
    }
}

/// Adiabatic-wall enthalpy and recovery temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovery {
    pub enthalpy: f64,
    pub temperature: f64,
}

pub fn recovery_conditions(atm: &AtmosphereState, v: f64, recovery_factor: f64, model: &dyn EnthalpyModel) -> Recovery {
    let enthalpy = model.enthalpy(atm.temperature) + recovery_factor * v * v / 2.0;
    Recovery { enthalpy, temperature: model.temperature(enthalpy) }
}

/// The ideal-gas shortcut `T_a (1 + r_f (gamma - 1)/2 M^2)`.
pub fn crude_recovery_temperature(t_a: f64, mach: f64, recovery_factor: f64, gamma: f64) -> f64 {
    t_a * (1.0 + (gamma - 1.0) / 2.0 * recovery_factor * mach * mach)
}

/// Net stagnation-point flux: laminar convection minus wall radiation, W/m^2.
pub fn stagnation_flux(
    atm: &AtmosphereState,
    v: f64,
    nose_radius: f64,
    t_w: f64,
    emissivity: f64,
    consts: &ThermalConstants,
) -> Result<f64> {
    if !(nose_radius > 0.0) {
        return Err(Error::domain("nose_radius", nose_radius, "must be > 0 m"));
    }
    let radiated = emissivity * consts.sigma * t_w.powi(4);
    if v == 0.0 || atm.density == 0.0 {
        return Ok(-radiated);
    }
    let h = &*consts.enthalpy;
    let h_a = h.enthalpy(atm.temperature);
    let h_aw = recovery_conditions(atm, v, consts.recovery_stagnation, h).enthalpy;
    let h_w = h.enthalpy(t_w);
    let convective = consts.correlation.coefficient(v) * (atm.density / nose_radius).sqrt() * v.powi(3) * (h_aw - h_w)
        / (h_aw - h_a);
    Ok(convective - radiated)
}

/// `70e6 rho v[km/s] x`.
pub fn reynolds(rho: f64, v: f64, x: f64) -> f64 {
    70e6 * rho * (v / 1000.0) * x
}

/// Reynolds number at distance `x` under the model selected in `consts`.
pub fn reynolds_at(atm: &AtmosphereState, v: f64, x: f64, consts: &ThermalConstants) -> f64 {
    match consts.reynolds {
        ReynoldsModel::Linearized => reynolds(atm.density, v, x),
        ReynoldsModel::Viscosity => atm.density * v * x / consts.viscosity(atm.temperature),
    }
}

/// `2.28 [ln Re - 1.7 ln(T*/T_a)]^-2.45 / (T*/T_a)`.
pub fn skin_friction(re: f64, t_star_ratio: f64) -> Result<f64> {
    Ok(2.28 * friction_factor(re, t_star_ratio)?)
}

fn friction_factor(re: f64, t_star_ratio: f64) -> Result<f64> {
    if !(t_star_ratio > 0.0) {
        return Err(Error::domain("T*/T_a", t_star_ratio, "must be > 0"));
    }
    if !(re > 0.0) {
        return Err(Error::domain("Re", re, "must be > 0"));
    }
    let bracket = re.ln() - 1.7 * t_star_ratio.ln();
    if !(bracket > 0.0) {
        return Err(Error::domain(
            "Re",
            re,
            format!("ln Re - 1.7 ln(T*/T_a) = {bracket:.3} must be > 0 for the skin-friction correlation"),
        ));
    }
    Ok(bracket.powf(-2.45) / t_star_ratio)
}

/// Stanton number from skin friction via the Reynolds analogy.
pub fn stanton(cf: f64, prandtl: f64) -> f64 {
    let half = cf / 2.0;
    half / (1.0 + 13.0 * (prandtl.powf(2.0 / 3.0) - 1.0) * half.sqrt())
}

/// Turbulent convective flux with coefficient `coefficient`, before any
/// pressure factor or radiation.
fn turbulent_convective(
    atm: &AtmosphereState,
    v: f64,
    x: f64,
    t_w: f64,
    coefficient: f64,
    consts: &ThermalConstants,
) -> Result<f64> {
    if v == 0.0 || atm.density == 0.0 {
        return Ok(0.0);
    }
    let h = &*consts.enthalpy;
    let h_a = h.enthalpy(atm.temperature);
    let h_aw = recovery_conditions(atm, v, consts.recovery_turbulent, h).enthalpy;
    let h_w = h.enthalpy(t_w);
    let h_star = 0.22 * h_aw + 0.5 * h_w + 0.28 * h_a;
    let ratio = h.temperature(h_star) / atm.temperature;
    let re = reynolds_at(atm, v, x, consts);
    Ok(coefficient * friction_factor(re, ratio)? * atm.density * v.powi(3) * (h_aw - h_w) / (h_aw - h_a))
}

/// Turbulent flux into the cylinder at distance `x` from the nose tip, W/m^2.
/// No radiation: the body is a heat sink.
pub fn turbulent_flux_cylinder(
    atm: &AtmosphereState,
    v: f64,
    x: f64,
    t_w: f64,
    consts: &ThermalConstants,
) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("x", x, "must be > 0 m"));
    }
    turbulent_convective(atm, v, x, t_w, CYLINDER_COEFFICIENT, consts)
}

/// Nose-cone shape used to place cone stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoseGeometry {
    /// m
    pub length: f64,
    /// Surface inclination at the tip, rad; falls linearly to zero at the base.
    pub tip_inclination: f64,
    /// Shortest running length used in the Reynolds number, m.
    pub min_length: f64,
}

impl Default for NoseGeometry {
    fn default() -> Self {
        NoseGeometry { length: 1.0, tip_inclination: 0.3, min_length: 0.03 }
    }
}

impl NoseGeometry {
    /// Inclination of the surface at distance `y` from the tip, rad.
    pub fn inclination(&self, y: f64) -> f64 {
        self.tip_inclination * (1.0 - y / self.length)
    }
}

/// Pressure amplification `1 + 6e-6 sin^2(theta) v^2` on an inclined surface.
pub fn pressure_factor(theta: f64, v: f64) -> f64 {
    1.0 + 6e-6 * theta.sin().powi(2) * v * v
}

/// Net flux at cone station `y`: amplified turbulent convection minus wall
/// radiation, W/m^2.
pub fn cone_flux(
    atm: &AtmosphereState,
    v: f64,
    y: f64,
    t_w: f64,
    emissivity: f64,
    consts: &ThermalConstants,
    nose: &NoseGeometry,
) -> Result<f64> {
    if !(0.0..=nose.length).contains(&y) {
        return Err(Error::domain("Y", y, format!("must be in [0, {}] m", nose.length)));
    }
    let convective = turbulent_convective(atm, v, y.max(nose.min_length), t_w, CONE_COEFFICIENT, consts)?;
    Ok(pressure_factor(nose.inclination(y), v) * convective - emissivity * consts.sigma * t_w.powi(4))
}
