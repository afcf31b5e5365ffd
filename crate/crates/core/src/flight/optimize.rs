use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate_ascent_in, integrate_descent_in, validate_angle, LaunchCondition};
use crate::atmosphere::{AirModel, StandardAtmosphere};
use crate::error::{Error, Result};
use crate::vehicle::{ProjectileSpec, RocketSpec};

/// Range achieved at one trial angle, or why the trial failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleOutcome {
    pub angle: f64,
    pub range: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringSolution {
    pub best_angle: f64,
    pub best_range: f64,
    pub table: Vec<AngleOutcome>,
}

/// Flies ascent and warhead descent for each angle of `angle_grid` and picks
/// the longest warhead range. Ties go to the smaller angle; failed trials are
/// recorded in the table and skipped.
pub fn optimize_firing_angle(
    spec: &RocketSpec,
    release_altitude: f64,
    release_speed: f64,
    projectile: &ProjectileSpec,
    dt: f64,
    angle_grid: &[f64],
) -> Result<FiringSolution> {
    optimize_firing_angle_in(&StandardAtmosphere, spec, release_altitude, release_speed, projectile, dt, angle_grid)
}

pub fn optimize_firing_angle_in(
    air: &dyn AirModel,
    spec: &RocketSpec,
    release_altitude: f64,
    release_speed: f64,
    projectile: &ProjectileSpec,
    dt: f64,
    angle_grid: &[f64],
) -> Result<FiringSolution> {
    if angle_grid.is_empty() {
        return Err(Error::validation("angle_grid", "must not be empty"));
    }
    for &a in angle_grid {
        validate_angle("angle_grid", a)?;
    }
    if angle_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("angle_grid", "must be strictly increasing"));
    }

    let table: Vec<AngleOutcome> = angle_grid
        .par_iter()
        .map(|&angle| {
            let launch = LaunchCondition { release_altitude, release_speed, firing_angle: angle };
            let range = integrate_ascent_in(air, spec, &launch, dt)
                .and_then(|up| integrate_descent_in(air, projectile, &up.apogee, dt))
                .map(|down| down.range_from_release())
                .map_err(|e| e.to_string());
            AngleOutcome { angle, range }
        })
        .collect();

    let mut best: Option<(f64, f64)> = None;
    for outcome in &table {
        if let Ok(range) = outcome.range {
            if best.is_none_or(|(_, r)| range > r) {
                best = Some((outcome.angle, range));
            }
        }
    }
    match best {
        Some((best_angle, best_range)) => Ok(FiringSolution { best_angle, best_range, table }),
        None => {
            let reasons: Vec<String> =
                table.iter().filter_map(|o| o.range.as_ref().err().map(|e| format!("{} deg: {e}", o.angle))).collect();
            Err(Error::Optimization(reasons.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flight::{integrate_ascent, integrate_descent};

    #[test]
    fn single_angle_grid() {
        let spec = RocketSpec::baseline(30.0);
        let proj = ProjectileSpec::europrojectile();
        let sol = optimize_firing_angle(&spec, 12_000.0, 500.0, &proj, 0.1, &[45.0]).unwrap();
        assert_eq!(sol.best_angle, 45.0);
        let launch = LaunchCondition { release_altitude: 12_000.0, release_speed: 500.0, firing_angle: 45.0 };
        let up = integrate_ascent(&spec, &launch, 0.1).unwrap();
        let down = integrate_descent(&proj, &up.apogee, 0.1).unwrap();
        assert_eq!(sol.best_range, down.range_from_release());
    }

    #[test]
    fn best_is_maximum_of_table() {
        let spec = RocketSpec::baseline(50.0);
        let grid: Vec<f64> = (50..=65).map(f64::from).collect();
        let sol = optimize_firing_angle(&spec, 16_000.0, 600.0, &ProjectileSpec::europrojectile(), 0.1, &grid).unwrap();
        let max = sol.table.iter().filter_map(|o| o.range.clone().ok()).fold(f64::MIN, f64::max);
        assert_eq!(sol.best_range, max);
        assert!(sol.best_angle > 50.0 && sol.best_angle < 65.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let spec = RocketSpec::baseline(30.0);
        let p = ProjectileSpec::hpv();
        assert!(optimize_firing_angle(&spec, 12_000.0, 500.0, &p, 0.1, &[]).is_err());
        assert!(optimize_firing_angle(&spec, 12_000.0, 500.0, &p, 0.1, &[50.0, 40.0]).is_err());
        assert!(optimize_firing_angle(&spec, 12_000.0, 500.0, &p, 0.1, &[0.0, 40.0]).is_err());
    }

    #[test]
    fn all_failed_is_an_error() {
        let spec = RocketSpec::baseline(30.0);
        let r = optimize_firing_angle(&spec, 40_000.0, 500.0, &ProjectileSpec::hpv(), 0.1, &[45.0]);
        assert!(matches!(r, Err(Error::Optimization(_))));
    }
}
