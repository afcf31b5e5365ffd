use serde::{Deserialize, Serialize};

use super::{ambient, check_dt, drag_force, FlightState, TrajectoryRecord, TrajectorySeries, G, TIME_LIMIT};
use crate::atmosphere::{AirModel, StandardAtmosphere};
use crate::error::{Error, Result};
use crate::vehicle::ProjectileSpec;

/// Ballistic warhead flight from apogee to the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactResult {
    /// Interpolated state at y = 0; `t` is the time since apogee.
    pub impact: FlightState,
    /// Speed the warhead would reach without drag minus the impact speed, m/s.
    pub descent_drag_loss: f64,
    /// Integrated drag deceleration over the descent, m/s.
    pub drag_integral: f64,
    pub series: TrajectorySeries,
}

impl ImpactResult {
    /// Downrange distance from the rocket's release point, m.
    pub fn range_from_release(&self) -> f64 {
        self.impact.x
    }

    pub fn impact_speed(&self) -> f64 {
        self.impact.speed()
    }

    pub fn descent_time(&self) -> f64 {
        self.impact.t
    }
}

/// [`integrate_descent_in`] through the standard atmosphere.
pub fn integrate_descent(proj: &ProjectileSpec, apogee: &FlightState, dt: f64) -> Result<ImpactResult> {
    integrate_descent_in(&StandardAtmosphere, proj, apogee, dt)
}

/// Integrates the warhead from `apogee` (vertical velocity zero) until it
/// reaches the ground. Downrange distance continues from `apogee.x`.
pub fn integrate_descent_in(
    air: &dyn AirModel,
    proj: &ProjectileSpec,
    apogee: &FlightState,
    dt: f64,
) -> Result<ImpactResult> {
    check_dt(dt)?;
    proj.validate()?;
    if apogee.vy != 0.0 {
        return Err(Error::validation("apogee.vy", format!("{} must be 0", apogee.vy)));
    }
    if !(apogee.y > 0.0) {
        return Err(Error::validation("apogee.y", format!("{} must be > 0", apogee.y)));
    }

    let area = proj.area();
    let mass = proj.mass;
    let mut heading = if apogee.vx < 0.0 { (-1.0, 0.0) } else { (1.0, 0.0) };
    let mut s = FlightState { t: 0.0, mass, ..*apogee };
    let mut records = Vec::new();
    let mut drag_integral = 0.0;

    for step in 1_u64.. {
        if s.t > TIME_LIMIT {
            return Err(Error::Divergence { t: s.t, limit: TIME_LIMIT });
        }
        let atm = ambient(air, s.y)?;
        let v = s.speed();
        if v > 0.0 {
            heading = (s.vx / v, s.vy / v);
        }
        let drag = drag_force(&s, area, &proj.drag_table, &atm);
        records.push(TrajectoryRecord {
            state: s,
            mach: v / atm.speed_of_sound,
            rho: atm.density,
            t_a: atm.temperature,
            drag,
            thrust: 0.0,
        });

        let accel = -drag / mass;
        let next = FlightState {
            t: step as f64 * dt,
            x: s.x + s.vx * dt,
            y: s.y + s.vy * dt,
            vx: s.vx + accel * heading.0 * dt,
            vy: s.vy + (accel * heading.1 - G) * dt,
            mass,
        };
        let d_drag = drag / mass * dt;

        if next.y <= 0.0 {
            let f = s.y / (s.y - next.y);
            drag_integral += f * d_drag;
            let impact = FlightState {
                t: s.t + f * dt,
                x: s.x + f * (next.x - s.x),
                y: 0.0,
                vx: s.vx + f * (next.vx - s.vx),
                vy: s.vy + f * (next.vy - s.vy),
                mass,
            };
            let atm = ambient(air, 0.0)?;
            records.push(TrajectoryRecord {
                state: impact,
                mach: impact.speed() / atm.speed_of_sound,
                rho: atm.density,
                t_a: atm.temperature,
                drag: drag_force(&impact, area, &proj.drag_table, &atm),
                thrust: 0.0,
            });
            let ideal = (apogee.vx * apogee.vx + 2.0 * G * apogee.y).sqrt();
            return Ok(ImpactResult {
                impact,
                descent_drag_loss: ideal - impact.speed(),
                drag_integral,
                series: TrajectorySeries { dt, records },
            });
        }
        drag_integral += d_drag;
        s = next;
    }
    unreachable!("step counter exhausted")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atmosphere::Vacuum;

    fn apogee(h: f64, vx: f64) -> FlightState {
        FlightState { t: 0.0, x: 0.0, y: h, vx, vy: 0.0, mass: 150.0 }
    }

    #[test]
    fn hpv_example() {
        let r = integrate_descent(&ProjectileSpec::hpv(), &apogee(93_000.0, 1239.0), 0.1).unwrap();
        assert!((r.impact_speed() / 1252.0 - 1.0).abs() < 0.02, "{}", r.impact_speed());
        assert!((r.descent_drag_loss / 580.0 - 1.0).abs() < 0.02, "{}", r.descent_drag_loss);
    }

    #[test]
    fn europrojectile_example() {
        let r = integrate_descent(&ProjectileSpec::europrojectile(), &apogee(93_000.0, 1239.0), 0.1).unwrap();
        assert!((r.impact_speed() / 1555.0 - 1.0).abs() < 0.02, "{}", r.impact_speed());
        assert!((r.descent_drag_loss - 277.0).abs() < 15.0, "{}", r.descent_drag_loss);
    }

    #[test]
    fn vacuum_drop_matches_energy() {
        let (h, vx) = (50_000.0, 800.0);
        let exact = (vx * vx + 2.0 * G * h).sqrt();
        let r = integrate_descent_in(&Vacuum::default(), &ProjectileSpec::hpv(), &apogee(h, vx), 0.01).unwrap();
        assert!((r.impact_speed() / exact - 1.0).abs() < 1e-3);
        assert_eq!(r.drag_integral, 0.0);
    }

    #[test]
    fn impact_at_ground_and_range_continues() {
        let mut a = apogee(80_000.0, 1200.0);
        a.x = 120_000.0;
        let r = integrate_descent(&ProjectileSpec::europrojectile(), &a, 0.1).unwrap();
        assert_eq!(r.impact.y, 0.0);
        assert!(r.range_from_release() > a.x);
        assert!(r.series.records.iter().all(|rec| rec.state.y >= 0.0));
    }

    #[test]
    fn requires_apogee_state() {
        let mut a = apogee(80_000.0, 1200.0);
        a.vy = -3.0;
        assert!(integrate_descent(&ProjectileSpec::hpv(), &a, 0.1).is_err());
        assert!(integrate_descent(&ProjectileSpec::hpv(), &apogee(0.0, 1000.0), 0.1).is_err());
    }
}
