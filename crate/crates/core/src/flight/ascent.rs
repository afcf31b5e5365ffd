use serde::{Deserialize, Serialize};

use super::{
    ambient, check_dt, drag_force, FlightState, LaunchCondition, TrajectoryRecord, TrajectorySeries, G, TIME_LIMIT,
};
use crate::atmosphere::{AirModel, StandardAtmosphere};
use crate::error::{Error, Result};
use crate::vehicle::RocketSpec;

/// Powered ascent from release to apogee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentResult {
    /// Interpolated apogee state; `x` is the apogee downrange distance.
    pub apogee: FlightState,
    pub release_altitude: f64,
    pub release_speed: f64,
    /// Integrated drag deceleration up to apogee, m/s.
    pub drag_loss: f64,
    /// Velocity deficit closing the energy balance between release and apogee, m/s.
    pub gravity_loss: f64,
    /// Integrated thrust acceleration, m/s.
    pub velocity_gain: f64,
    pub series: TrajectorySeries,
}

impl AscentResult {
    pub fn apogee_altitude(&self) -> f64 {
        self.apogee.y
    }

    /// Horizontal speed at apogee, m/s.
    pub fn apogee_speed(&self) -> f64 {
        self.apogee.vx
    }

    pub fn apogee_downrange(&self) -> f64 {
        self.apogee.x
    }

    pub fn time_to_apogee(&self) -> f64 {
        self.apogee.t
    }

    /// Speed needed at release height to reach the apogee state ballistically
    /// without losses.
    pub fn apogee_energy_speed(&self) -> f64 {
        (2.0 * G * (self.apogee.y - self.release_altitude) + self.apogee.vx.powi(2)).sqrt()
    }
}

/// [`integrate_ascent_in`] through the standard atmosphere.
pub fn integrate_ascent(spec: &RocketSpec, launch: &LaunchCondition, dt: f64) -> Result<AscentResult> {
    integrate_ascent_in(&StandardAtmosphere, spec, launch, dt)
}

/// Integrates the ascent until the vertical velocity reaches zero.
///
/// Thrust is `mdot * v_e` while burning (pro-rated over a final partial
/// step). The acceleration over a step uses the mass at the end of the step.
pub fn integrate_ascent_in(
    air: &dyn AirModel,
    spec: &RocketSpec,
    launch: &LaunchCondition,
    dt: f64,
) -> Result<AscentResult> {
    check_dt(dt)?;
    spec.validate()?;
    launch.validate()?;

    let area = spec.area();
    let mdot = spec.mass_flow();
    let angle = launch.firing_angle.to_radians();
    let mut heading = (angle.cos(), angle.sin());
    let mut s = FlightState {
        t: 0.0,
        x: 0.0,
        y: launch.release_altitude,
        vx: launch.release_speed * heading.0,
        vy: launch.release_speed * heading.1,
        mass: spec.total_mass,
    };
    let mut records = Vec::new();
    let mut drag_loss = 0.0;
    let mut velocity_gain = 0.0;

    for step in 1_u64.. {
        if s.t > TIME_LIMIT {
            return Err(Error::Divergence { t: s.t, limit: TIME_LIMIT });
        }
        let atm = ambient(air, s.y)?;
        let v = s.speed();
        if v > 0.0 {
            heading = (s.vx / v, s.vy / v);
        }
        let drag = drag_force(&s, area, &spec.drag_table, &atm);
        let remaining = spec.burn_time - s.t;
        let burn_dt = if remaining <= 1e-9 * dt { 0.0 } else { remaining.min(dt) };
        let burned = mdot * burn_dt;
        let thrust = burned * spec.exhaust_velocity / dt;
        let mass = s.mass - burned;

        records.push(TrajectoryRecord {
            state: s,
            mach: v / atm.speed_of_sound,
            rho: atm.density,
            t_a: atm.temperature,
            drag,
            thrust,
        });

        let accel = (thrust - drag) / mass;
        let next = FlightState {
            t: step as f64 * dt,
            x: s.x + s.vx * dt,
            y: s.y + s.vy * dt,
            vx: s.vx + (accel * heading.0) * dt,
            vy: s.vy + (accel * heading.1 - G) * dt,
            mass,
        };
        let d_drag = drag / mass * dt;
        let d_gain = thrust / mass * dt;

        if next.vy <= 0.0 {
            let f = if s.vy > 0.0 { s.vy / (s.vy - next.vy) } else { 0.0 };
            drag_loss += f * d_drag;
            velocity_gain += f * d_gain;
            let apogee = FlightState {
                t: s.t + f * dt,
                x: s.x + f * (next.x - s.x),
                y: s.y + f * (next.y - s.y),
                vx: s.vx + f * (next.vx - s.vx),
                vy: 0.0,
                mass: s.mass + f * (next.mass - s.mass),
            };
            let atm = ambient(air, apogee.y)?;
            records.push(TrajectoryRecord {
                state: apogee,
                mach: apogee.speed() / atm.speed_of_sound,
                rho: atm.density,
                t_a: atm.temperature,
                drag: drag_force(&apogee, area, &spec.drag_table, &atm),
                thrust: if apogee.t < spec.burn_time { thrust } else { 0.0 },
            });
            let mut result = AscentResult {
                apogee,
                release_altitude: launch.release_altitude,
                release_speed: launch.release_speed,
                drag_loss,
                gravity_loss: 0.0,
                velocity_gain,
                series: TrajectorySeries { dt, records },
            };
            result.gravity_loss = launch.release_speed + velocity_gain - drag_loss - result.apogee_energy_speed();
            return Ok(result);
        }
        if next.y < 0.0 {
            return Err(Error::GroundImpactBeforeApogee { t: next.t, x: next.x });
        }
        drag_loss += d_drag;
        velocity_gain += d_gain;
        s = next;
    }
    unreachable!("step counter exhausted")
}
