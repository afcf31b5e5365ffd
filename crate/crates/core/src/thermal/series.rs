use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cone_flux, equilibrium_wall_temperature, stagnation_flux, turbulent_flux_cylinder};
use super::{NoseGeometry, ThermalConstants, ALUMINIUM_CP, BODY_AREAL_DENSITY};
use crate::atmosphere::{speed_of_sound, AtmosphereState, R_SPECIFIC};
use crate::error::{Error, Result};
use crate::flight::{TrajectoryRecord, TrajectorySeries};
use crate::format::sig;
use crate::vehicle::RocketSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StationKind {
    /// Nose tip; radiative shield.
    Stagnation,
    /// Nose-cone point `y` metres from the tip; radiative shield.
    Cone { y: f64 },
    /// Cylinder `x` metres from the tip; heat sink.
    CylinderBase { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalStation {
    #[serde(flatten)]
    pub kind: StationKind,
    pub emissivity: f64,
}

impl ThermalStation {
    pub fn stagnation() -> Self {
        ThermalStation { kind: StationKind::Stagnation, emissivity: 0.6 }
    }

    pub fn cone(y: f64) -> Self {
        ThermalStation { kind: StationKind::Cone { y }, emissivity: 0.75 }
    }

    pub fn cylinder_base() -> Self {
        ThermalStation { kind: StationKind::CylinderBase { x: 1.0 }, emissivity: 0.0 }
    }

    /// Column name in the thermal CSV.
    pub fn label(&self) -> String {
        match self.kind {
            StationKind::Stagnation => "T_stag".to_string(),
            StationKind::Cone { y } => format!("T_cone_Y{y:.2}"),
            StationKind::CylinderBase { .. } => "T_cyl_base".to_string(),
        }
    }

    pub fn validate(&self, nose: &NoseGeometry) -> Result<()> {
        let e = self.emissivity;
        match self.kind {
            StationKind::CylinderBase { x } => {
                if !(x > 0.0) {
                    return Err(Error::validation("station.x", format!("{x} m must be > 0")));
                }
            }
            StationKind::Cone { y } => {
                if !(0.0..=nose.length).contains(&y) {
                    return Err(Error::validation("station.y", format!("{y} m must be in [0, {}]", nose.length)));
                }
                check_emissivity(e)?;
            }
            StationKind::Stagnation => check_emissivity(e)?,
        }
        Ok(())
    }
}

fn check_emissivity(e: f64) -> Result<()> {
    if e > 0.0 && e <= 1.0 {
        Ok(())
    } else {
        Err(Error::validation("station.emissivity", format!("{e} must be in (0, 1]")))
    }
}

#[derive(Debug, Clone)]
pub struct ThermalConfig {
    pub constants: ThermalConstants,
    pub nose: NoseGeometry,
    pub nose_radius: f64,
    pub stations: Vec<ThermalStation>,
    /// kg/m^2
    pub wall_areal_density: f64,
    /// J/(kg K)
    pub wall_cp: f64,
    /// K
    pub initial_temperature: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            constants: ThermalConstants::default(),
            nose: NoseGeometry::default(),
            nose_radius: 0.02,
            stations: vec![
                ThermalStation::stagnation(),
                ThermalStation::cone(0.03),
                ThermalStation::cone(0.10),
                ThermalStation::cone(0.30),
                ThermalStation::cylinder_base(),
            ],
            wall_areal_density: BODY_AREAL_DENSITY,
            wall_cp: ALUMINIUM_CP,
            initial_temperature: 293.15,
        }
    }
}

impl ThermalConfig {
    /// Default stations with the rocket's nose radius and length.
    pub fn for_rocket(spec: &RocketSpec) -> Self {
        let defaults = ThermalConfig::default();
        ThermalConfig {
            nose_radius: spec.nose_radius,
            nose: NoseGeometry { length: spec.nose_length, ..defaults.nose },
            ..defaults
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        for (name, v) in [
            ("nose_radius", self.nose_radius),
            ("nose_length", self.nose.length),
            ("wall_areal_density", self.wall_areal_density),
            ("wall_cp", self.wall_cp),
            ("initial_temperature", self.initial_temperature),
            ("min_length", self.nose.min_length),
        ] {
            if !(v > 0.0) {
                return Err(Error::validation(format!("thermal.{name}"), format!("{v} must be > 0")));
            }
        }
        for s in &self.stations {
            s.validate(&self.nose)?;
        }
        let cylinders = self.stations.iter().filter(|s| matches!(s.kind, StationKind::CylinderBase { .. })).count();
        if cylinders > 1 {
            return Err(Error::validation("thermal.stations", "at most one cylinder station"));
        }
        Ok(())
    }
}

fn ambient_of(r: &TrajectoryRecord) -> Result<AtmosphereState> {
    Ok(AtmosphereState {
        altitude: r.state.y,
        temperature: r.t_a,
        pressure: r.rho * R_SPECIFIC * r.t_a,
        density: r.rho,
        speed_of_sound: speed_of_sound(r.t_a)?,
    })
}

/// One step of the heat-sink march: wall temperature and absorbed flux at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatSinkStep {
    pub t: f64,
    pub temperature: f64,
    pub flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSinkResult {
    pub history: Vec<HeatSinkStep>,
    /// Time at which the march stopped (burnout), s.
    pub end_time: f64,
    pub final_temperature: f64,
    /// Absorbed energy per unit area, J/m^2.
    pub energy: f64,
}

/// Marches the cylinder wall temperature through the powered part of
/// `series`: each step adds `flux dt / (areal density cp_wall)`.
pub fn heat_sink_march(
    series: &TrajectorySeries,
    areal_density: f64,
    cp_wall: f64,
    t_initial: f64,
    x: f64,
    consts: &ThermalConstants,
) -> Result<HeatSinkResult> {
    if !(areal_density > 0.0) {
        return Err(Error::validation("wall_areal_density", format!("{areal_density} must be > 0")));
    }
    if !(cp_wall > 0.0) {
        return Err(Error::validation("wall_cp", format!("{cp_wall} must be > 0")));
    }
    let capacity = areal_density * cp_wall;
    let mut temperature = t_initial;
    let mut energy = 0.0;
    let mut history = Vec::new();
    let mut end_time = series.records.first().map_or(0.0, |r| r.state.t);
    for pair in series.records.windows(2) {
        let (rec, next) = (&pair[0], &pair[1]);
        if rec.thrust <= 0.0 {
            break;
        }
        let step = next.state.t - rec.state.t;
        let flux = turbulent_flux_cylinder(&ambient_of(rec)?, rec.state.speed(), x, temperature, consts)?;
        history.push(HeatSinkStep { t: rec.state.t, temperature, flux });
        temperature += flux * step / capacity;
        energy += flux * step;
        end_time = next.state.t;
    }
    Ok(HeatSinkResult { history, end_time, final_temperature: temperature, energy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalRow {
    pub t: f64,
    /// One wall temperature per station, K.
    pub temperatures: Vec<f64>,
    /// Flux absorbed by the cylinder, W/m^2.
    pub q_cyl: Option<f64>,
}

/// Wall temperature histories over the powered ascent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSeries {
    pub stations: Vec<ThermalStation>,
    pub rows: Vec<ThermalRow>,
    pub cylinder: Option<HeatSinkResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSummary {
    pub label: String,
    pub max_temperature: f64,
    pub time_of_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSummary {
    pub stations: Vec<StationSummary>,
    pub cylinder_final_temperature: Option<f64>,
    pub cylinder_energy: Option<f64>,
}

impl ThermalSeries {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(self.stations.iter().map(ThermalStation::label));
        if self.cylinder.is_some() {
            h.push("q_cyl".to_string());
        }
        h
    }

    pub fn summary(&self) -> ThermalSummary {
        let stations = self
            .stations
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let (time_of_max, max_temperature) = self
                    .rows
                    .iter()
                    .map(|r| (r.t, r.temperatures[i]))
                    .fold((0.0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
                StationSummary { label: s.label(), max_temperature, time_of_max }
            })
            .collect();
        ThermalSummary {
            stations,
            cylinder_final_temperature: self.cylinder.as_ref().map(|c| c.final_temperature),
            cylinder_energy: self.cylinder.as_ref().map(|c| c.energy),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse { line: None, message: format!("writing thermal CSV: {e}") };
        w.write_record(self.header()).map_err(err)?;
        for row in &self.rows {
            let mut fields = vec![sig(row.t, 6)];
            fields.extend(row.temperatures.iter().map(|&t| sig(t, 6)));
            if let Some(q) = row.q_cyl {
                fields.push(sig(q, 6));
            }
            w.write_record(fields).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<thermal csv>", e))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }
}

/// Solves every station along the powered part of an ascent, up to and
/// including the burnout record. Radiative stations are solved for
/// equilibrium at each record independently; the cylinder is marched.
pub fn analyze(series: &TrajectorySeries, cfg: &ThermalConfig) -> Result<ThermalSeries> {
    cfg.validate()?;
    let records = &series.records;
    if records.is_empty() {
        return Err(Error::validation("series", "trajectory has no records"));
    }
    let cutoff = records.iter().position(|r| r.thrust <= 0.0).unwrap_or(records.len() - 1);
    let powered = &records[..=cutoff];

    let cylinder_x = cfg.stations.iter().find_map(|s| match s.kind {
        StationKind::CylinderBase { x } => Some(x),
        _ => None,
    });
    let consts = &cfg.constants;
    let cylinder = cylinder_x
        .map(|x| heat_sink_march(series, cfg.wall_areal_density, cfg.wall_cp, cfg.initial_temperature, x, consts))
        .transpose()?;

    let rows = powered
        .par_iter()
        .enumerate()
        .map(|(k, rec)| {
            let atm = ambient_of(rec)?;
            let v = rec.state.speed();
            let mut q_cyl = None;
            let mut temperatures = Vec::with_capacity(cfg.stations.len());
            for station in &cfg.stations {
                let e = station.emissivity;
                let t = match station.kind {
                    StationKind::Stagnation => equilibrium_wall_temperature(
                        |t_w| stagnation_flux(&atm, v, cfg.nose_radius, t_w, e, consts),
                        atm.temperature,
                    )?,
                    StationKind::Cone { y } => equilibrium_wall_temperature(
                        |t_w| cone_flux(&atm, v, y, t_w, e, consts, &cfg.nose),
                        atm.temperature,
                    )?,
                    StationKind::CylinderBase { x } => {
                        let march = cylinder.as_ref().expect("cylinder marched");
                        let (t, q) = match march.history.get(k) {
                            Some(step) => (step.temperature, step.flux),
                            None => {
                                let t = march.final_temperature;
                                (t, turbulent_flux_cylinder(&atm, v, x, t, consts)?)
                            }
                        };
                        q_cyl = Some(q);
                        t
                    }
                };
                temperatures.push(t);
            }
            Ok(ThermalRow { t: rec.state.t, temperatures, q_cyl })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ThermalSeries { stations: cfg.stations.clone(), rows, cylinder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flight::{integrate_ascent, FlightState, LaunchCondition};

    fn ascent(h0: f64, v0: f64, tb: f64, angle: f64) -> TrajectorySeries {
        let l = LaunchCondition { release_altitude: h0, release_speed: v0, firing_angle: angle };
        integrate_ascent(&RocketSpec::baseline(tb), &l, 0.1).unwrap().series
    }

    #[test]
    fn zero_flux_keeps_initial_temperature() {
        let rec = TrajectoryRecord {
            state: FlightState { t: 0.0, x: 0.0, y: 0.0, vx: 0.0, vy: 0.0, mass: 300.0 },
            mach: 0.0,
            rho: 1.225,
            t_a: 288.15,
            drag: 0.0,
            thrust: 1.0,
        };
        let mut second = rec;
        second.state.t = 0.1;
        let series = TrajectorySeries { dt: 0.1, records: vec![rec, second] };
        let r = heat_sink_march(&series, 13.5, 912.5, 293.15, 1.0, &ThermalConstants::default()).unwrap();
        assert_eq!(r.final_temperature, 293.15);
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn table_corner_12km_30s() {
        let s = ascent(12_000.0, 500.0, 30.0, 54.0);
        let r = heat_sink_march(&s, 13.5, 912.5, 293.15, 1.0, &ThermalConstants::default()).unwrap();
        assert!((r.end_time - 30.0).abs() < 1e-6);
        assert!(r.energy < 9.9e5);
        assert!(r.final_temperature > 293.15);
    }

    #[test]
    fn stations_and_residuals() {
        let s = ascent(12_000.0, 500.0, 30.0, 54.0);
        let cfg = ThermalConfig::for_rocket(&RocketSpec::baseline(30.0));
        let th = analyze(&s, &cfg).unwrap();
        assert_eq!(th.header(), ["t", "T_stag", "T_cone_Y0.03", "T_cone_Y0.10", "T_cone_Y0.30", "T_cyl_base", "q_cyl"]);
        let last = th.rows.last().unwrap();
        assert!((last.t - 30.0).abs() < 1e-6);
        for (row, rec) in th.rows.iter().zip(&s.records) {
            let atm = ambient_of(rec).unwrap();
            for t in &row.temperatures[..4] {
                assert!(*t >= atm.temperature);
            }
            // cone temperatures fall with distance from the tip
            assert!(row.temperatures[1] >= row.temperatures[2] && row.temperatures[2] >= row.temperatures[3]);
            let q = stagnation_flux(&atm, rec.state.speed(), 0.02, row.temperatures[0], 0.6, &cfg.constants).unwrap();
            assert!(q.abs() < 1.0 || row.temperatures[0] == atm.temperature);
        }
        let summary = th.summary();
        assert!(summary.stations[0].max_temperature < 1473.15);
        assert_eq!(summary.cylinder_final_temperature, Some(th.cylinder.as_ref().unwrap().final_temperature));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ThermalConfig::default();
        cfg.stations.push(ThermalStation::cylinder_base());
        assert!(cfg.validate().is_err());
        let mut cfg = ThermalConfig::default();
        cfg.stations[1].emissivity = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ThermalConfig::default();
        cfg.stations.push(ThermalStation::cone(2.0));
        assert!(cfg.validate().is_err());
    }
}
