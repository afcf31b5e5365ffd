//! Time-stepped flight: powered ascent to apogee, ballistic warhead descent
//! to impact, loss accounting, and firing-angle search.
//!
//! Both integrators are forward Euler: velocity is advanced with the
//! acceleration at the start of the step and position with the velocity at
//! the start of the step. Gravity is constant and the frame is flat.

mod ascent;
mod descent;
mod optimize;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atmosphere::{AirModel, AtmosphereState, MAX_ALTITUDE};
use crate::error::{Error, Result};
use crate::format::sig;
use crate::vehicle::{DragTable, RocketSpec};

pub use ascent::{integrate_ascent, integrate_ascent_in, AscentResult};
pub use descent::{integrate_descent, integrate_descent_in, ImpactResult};
pub use optimize::{optimize_firing_angle, optimize_firing_angle_in, AngleOutcome, FiringSolution};

/// Standard gravity, m/s^2.
pub const G: f64 = 9.80665;
/// Default integration step, s.
pub const DEFAULT_DT: f64 = 0.1;
/// Simulated time after which an integration is declared divergent, s.
pub const TIME_LIMIT: f64 = 1200.0;
/// Highest allowed release altitude, m.
pub const MAX_RELEASE_ALTITUDE: f64 = 30_000.0;

/// Kinematic and mass state at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightState {
    pub t: f64,
    /// Downrange distance from the release point, m.
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub mass: f64,
}

impl FlightState {
    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

/// Where and how the rocket leaves the carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchCondition {
    pub release_altitude: f64,
    pub release_speed: f64,
    /// Degrees above horizontal.
    pub firing_angle: f64,
}

impl LaunchCondition {
    pub fn validate(&self) -> Result<()> {
        let h = self.release_altitude;
        if !(0.0..=MAX_RELEASE_ALTITUDE).contains(&h) {
            return Err(Error::validation(
                "launch.release_altitude",
                format!("{h} m must be in [0, {MAX_RELEASE_ALTITUDE}]"),
            ));
        }
        let v = self.release_speed;
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::validation("launch.release_speed", format!("{v} must be >= 0")));
        }
        validate_angle("launch.firing_angle", self.firing_angle)
    }
}

pub(crate) fn validate_angle(field: &str, angle: f64) -> Result<()> {
    if angle > 0.0 && angle < 90.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{angle} deg must be in (0, 90)")))
    }
}

/// One step of a trajectory: the state plus the ambient conditions and the
/// forces evaluated at it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub state: FlightState,
    pub mach: f64,
    pub rho: f64,
    pub t_a: f64,
    /// Drag magnitude, N.
    pub drag: f64,
    /// Thrust magnitude, N.
    pub thrust: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectorySeries {
    pub dt: f64,
    pub records: Vec<TrajectoryRecord>,
}

pub const TRAJECTORY_HEADER: [&str; 11] = ["t", "x", "y", "vx", "vy", "mass", "mach", "rho", "T_a", "F_d", "F_t"];

impl TrajectorySeries {
    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse { line: None, message: format!("writing trajectory CSV: {e}") };
        w.write_record(TRAJECTORY_HEADER).map_err(err)?;
        for r in &self.records {
            let s = &r.state;
            let row = [s.t, s.x, s.y, s.vx, s.vy, s.mass, r.mach, r.rho, r.t_a, r.drag, r.thrust];
            w.write_record(row.iter().map(|&v| sig(v, 6))).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<trajectory csv>", e))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }
}

/// Thrust at time `t`, N: constant mass flow times exhaust velocity while
/// burning, zero afterwards.
pub fn thrust(spec: &RocketSpec, t: f64) -> f64 {
    if (0.0..=spec.burn_time).contains(&t) {
        spec.mass_flow() * spec.exhaust_velocity
    } else {
        0.0
    }
}

/// Propellant mass flow at time `t`, kg/s.
pub fn mass_flow(spec: &RocketSpec, t: f64) -> f64 {
    if (0.0..=spec.burn_time).contains(&t) {
        spec.mass_flow()
    } else {
        0.0
    }
}

/// Drag magnitude `C_d(M) rho v^2 A / 2`, N. The caller applies it against
/// the velocity.
pub fn drag_force(state: &FlightState, area: f64, table: &DragTable, atm: &AtmosphereState) -> f64 {
    let v = state.speed();
    if v == 0.0 || atm.density == 0.0 {
        return 0.0;
    }
    table.cd(v / atm.speed_of_sound) * atm.density * v * v * area / 2.0
}

/// Ambient conditions for the integrators. Above the atmosphere ceiling the
/// air is treated as vacuum at the ceiling temperature.
pub(crate) fn ambient(air: &dyn AirModel, y: f64) -> Result<AtmosphereState> {
    if y > MAX_ALTITUDE {
        let top = air.sample(MAX_ALTITUDE)?;
        Ok(AtmosphereState { altitude: y, pressure: 0.0, density: 0.0, ..top })
    } else {
        air.sample(y)
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("dt", format!("{dt} s must be > 0")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atmosphere;

    #[test]
    fn thrust_examples() {
        let r80 = RocketSpec::baseline(80.0);
        assert_eq!(thrust(&r80, 0.0), 3937.5);
        assert_eq!(thrust(&r80, 80.0), 3937.5);
        assert_eq!(thrust(&r80, 80.1), 0.0);
        assert_eq!(thrust(&RocketSpec::baseline(30.0), 10.0), 10_500.0);
        assert_eq!(mass_flow(&r80, 40.0), 1.875);
    }

    #[test]
    fn drag_examples() {
        let table = DragTable::bundled("dlsrr30").unwrap();
        let atm = atmosphere::sample(0.0).unwrap();
        let area = RocketSpec::baseline(30.0).area();
        let mut s = FlightState { t: 0.0, x: 0.0, y: 0.0, vx: atm.speed_of_sound, vy: 0.0, mass: 300.0 };
        let f = drag_force(&s, area, &table, &atm);
        assert!((f - 1906.0).abs() < 2.0, "{f}");
        let dense = AtmosphereState { density: 2.0 * atm.density, ..atm };
        assert_eq!(drag_force(&s, area, &table, &dense), 2.0 * f);
        s.vx = 0.0;
        assert_eq!(drag_force(&s, area, &table, &atm), 0.0);
    }

    #[test]
    fn launch_validation() {
        let ok = LaunchCondition { release_altitude: 12_000.0, release_speed: 500.0, firing_angle: 60.0 };
        ok.validate().unwrap();
        for bad in [
            LaunchCondition { release_altitude: 31_000.0, ..ok },
            LaunchCondition { release_speed: -1.0, ..ok },
            LaunchCondition { firing_angle: 90.0, ..ok },
            LaunchCondition { firing_angle: 0.0, ..ok },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
