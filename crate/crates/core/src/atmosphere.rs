//! Ambient air properties versus geometric altitude.
//!
//! From sea level to 86 km this is the layered US Standard Atmosphere 1976:
//! geometric altitude is converted to geopotential altitude and the seven
//! temperature-gradient layers are integrated hydrostatically.
//!
//! Above 86 km the standard switches to a kinetic formulation. Here density is
//! instead extended as `rho(86 km) * exp(-(h - 86 km) / H_s)` with
//! `H_s = 5735.3 m`, the least-squares fit (through the 86 km anchor) of the
//! published 86–120 km densities. Temperature is held at its 86 km value and
//! pressure follows from the ideal gas law. This keeps density continuous and
//! strictly decreasing up to the 140 km ceiling.

use crate::error::{Error, Result};

/// Ratio of specific heats for air.
pub const GAMMA: f64 = 1.4;
/// Specific gas constant used for the speed of sound, J/(kg K).
pub const R_SPECIFIC: f64 = 287.05;
/// Highest altitude served by [`sample`], m.
pub const MAX_ALTITUDE: f64 = 140_000.0;

/// Boundary between the layered model and the exponential extension, m.
pub const LAYERED_CEILING: f64 = 86_000.0;
/// Density scale height above [`LAYERED_CEILING`], m.
pub const UPPER_SCALE_HEIGHT: f64 = 5735.3;

const EARTH_RADIUS: f64 = 6_356_766.0;
const G0: f64 = 9.80665;
// R* / M0 of the 1976 standard, J/(kg K).
const R_STANDARD: f64 = 8.31432 / 0.028_964_4;
const SEA_LEVEL_PRESSURE: f64 = 101_325.0;

/// (geopotential base altitude m, base temperature K, lapse rate K/m)
const LAYERS: [(f64, f64, f64); 8] = [
    (0.0, 288.15, -0.0065),
    (11_000.0, 216.65, 0.0),
    (20_000.0, 216.65, 0.001),
    (32_000.0, 228.65, 0.0028),
    (47_000.0, 270.65, 0.0),
    (51_000.0, 270.65, -0.0028),
    (71_000.0, 214.65, -0.002),
    (84_852.0, 186.946, 0.0),
];

/// Ambient conditions at one altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereState {
    pub altitude: f64,
    pub temperature: f64,
    pub pressure: f64,
    pub density: f64,
    pub speed_of_sound: f64,
}

/// Anything that can report ambient conditions along a trajectory.
pub trait AirModel: Sync {
    fn sample(&self, altitude: f64) -> Result<AtmosphereState>;
}

/// The standard atmosphere described in the module docs.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardAtmosphere;

impl AirModel for StandardAtmosphere {
    fn sample(&self, altitude: f64) -> Result<AtmosphereState> {
        sample(altitude)
    }
}

/// Zero density at every altitude with a fixed temperature; used to check the
/// integrators against closed-form ballistics.
#[derive(Debug, Clone, Copy)]
pub struct Vacuum {
    pub temperature: f64,
}

impl Default for Vacuum {
    fn default() -> Self {
        Vacuum { temperature: 288.15 }
    }
}

impl AirModel for Vacuum {
    fn sample(&self, altitude: f64) -> Result<AtmosphereState> {
        Ok(AtmosphereState {
            altitude,
            temperature: self.temperature,
            pressure: 0.0,
            density: 0.0,
            speed_of_sound: speed_of_sound(self.temperature)?,
        })
    }
}

pub fn speed_of_sound(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain("temperature", temperature, "must be > 0 K"));
    }
    Ok((GAMMA * R_SPECIFIC * temperature).sqrt())
}

struct LayerBase {
    height: f64,
    temperature: f64,
    lapse: f64,
    pressure: f64,
}

fn layer_bases() -> [LayerBase; 8] {
    let mut pressure = SEA_LEVEL_PRESSURE;
    std::array::from_fn(|i| {
        let (height, temperature, lapse) = LAYERS[i];
        if i > 0 {
            let (h_prev, t_prev, l_prev) = LAYERS[i - 1];
            pressure = layer_pressure(pressure, t_prev, l_prev, height - h_prev);
        }
        LayerBase { height, temperature, lapse, pressure }
    })
}

fn layer_pressure(base_pressure: f64, base_temperature: f64, lapse: f64, dh: f64) -> f64 {
    if lapse == 0.0 {
        base_pressure * (-G0 * dh / (R_STANDARD * base_temperature)).exp()
    } else {
        let t = base_temperature + lapse * dh;
        base_pressure * (t / base_temperature).powf(-G0 / (R_STANDARD * lapse))
    }
}

/// (temperature, pressure, density) of the layered model at geometric altitude `z`.
fn layered(z: f64) -> (f64, f64, f64) {
    thread_local! {
        static BASES: [LayerBase; 8] = layer_bases();
    }
    let h = EARTH_RADIUS * z / (EARTH_RADIUS + z);
    BASES.with(|bases| {
        let layer = bases.iter().rev().find(|b| b.height <= h).unwrap_or(&bases[0]);
        let dh = h - layer.height;
        let t = layer.temperature + layer.lapse * dh;
        let p = layer_pressure(layer.pressure, layer.temperature, layer.lapse, dh);
        (t, p, p / (R_STANDARD * t))
    })
}

/// Ambient conditions at a geometric altitude in `[0, 140 km]`.
pub fn sample(altitude: f64) -> Result<AtmosphereState> {
    if !(altitude >= 0.0) {
        return Err(Error::domain("altitude", altitude, "must be >= 0 m"));
    }
    if altitude > MAX_ALTITUDE {
        return Err(Error::domain("altitude", altitude, format!("must be <= {MAX_ALTITUDE} m")));
    }
    let (temperature, pressure, density) = if altitude <= LAYERED_CEILING {
        layered(altitude)
    } else {
        let (t, _, rho_top) = layered(LAYERED_CEILING);
        let rho = rho_top * (-(altitude - LAYERED_CEILING) / UPPER_SCALE_HEIGHT).exp();
        (t, rho * R_STANDARD * t, rho)
    };
    Ok(AtmosphereState { altitude, temperature, pressure, density, speed_of_sound: speed_of_sound(temperature)? })
}
