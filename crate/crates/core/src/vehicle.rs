//! Vehicle and warhead descriptions, drag tables, propellant data, and the
//! closed-form performance relations used around the integrators.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear drag coefficient versus Mach number.
///
/// Outside the knot range the end values are held (no extrapolation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct DragTable {
    knots: Vec<(f64, f64)>,
}

impl DragTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::validation("drag_table", "needs at least 2 knots"));
        }
        for (i, &(mach, cd)) in knots.iter().enumerate() {
            if !mach.is_finite() || mach < 0.0 {
                return Err(Error::validation("drag_table", format!("knot {i}: Mach {mach} must be finite and >= 0")));
            }
            if !(cd > 0.0) || !cd.is_finite() {
                return Err(Error::validation("drag_table", format!("knot {i}: drag coefficient {cd} must be > 0")));
            }
        }
        if let Some(w) = knots.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::validation(
                "drag_table",
                format!("Mach values must be strictly increasing ({} then {})", w[0].0, w[1].0),
            ));
        }
        Ok(DragTable { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Drag coefficient at `mach`; clamped to the end knots outside the table.
    pub fn cd(&self, mach: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if mach <= first.0 {
            return first.1;
        }
        if mach >= last.0 {
            return last.1;
        }
        // First knot strictly above `mach`; exists because mach < last.0.
        let hi = self.knots.partition_point(|&(m, _)| m <= mach);
        let (m0, c0) = self.knots[hi - 1];
        let (m1, c1) = self.knots[hi];
        if mach == m0 {
            return c0;
        }
        c0 + (c1 - c0) * (mach - m0) / (m1 - m0)
    }

    /// Reads a `mach,cd` CSV table with optional `#` comment lines.
    pub fn from_csv(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            mach: f64,
            cd: f64,
        }
        let cleaned = blank_comments(text);
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(cleaned.as_bytes());
        let mut knots = Vec::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| csv_parse_error(&cleaned, &e))?;
            knots.push((row.mach, row.cd));
        }
        DragTable::new(knots)
    }

    /// One of the bundled tables: `dlsrr30`, `hpv`, or `europrojectile`.
    pub fn bundled(name: &str) -> Result<Self> {
        let text = match name {
            "dlsrr30" => include_str!("../data/drag/dlsrr30.csv"),
            "hpv" => include_str!("../data/drag/hpv.csv"),
            "europrojectile" => include_str!("../data/drag/europrojectile.csv"),
            other => {
                return Err(Error::validation(
                    "drag_table",
                    format!("unknown bundled table `{other}` (expected dlsrr30, hpv, europrojectile)"),
                ))
            }
        };
        DragTable::from_csv(text)
    }
}

impl TryFrom<Vec<[f64; 2]>> for DragTable {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        DragTable::new(pairs.into_iter().map(|[m, c]| (m, c)).collect())
    }
}

impl From<DragTable> for Vec<[f64; 2]> {
    fn from(table: DragTable) -> Self {
        table.knots.into_iter().map(|(m, c)| [m, c]).collect()
    }
}

/// Drag coefficient lookup (see [`DragTable::cd`]).
pub fn cd_lookup(table: &DragTable, mach: f64) -> f64 {
    table.cd(mach)
}

// Comment lines are blanked rather than skipped by the reader so that
// reported line numbers match the file.
pub(crate) fn blank_comments(text: &str) -> String {
    text.lines().map(|l| if l.trim_start().starts_with('#') { "" } else { l }).collect::<Vec<_>>().join("\n")
}

// Record positions point at the blank lines preceding a record, so those are
// stepped over before counting newlines.
pub(crate) fn line_at(text: &str, pos: Option<&csv::Position>) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut byte = (pos?.byte() as usize).min(bytes.len());
    while byte < bytes.len() && matches!(bytes[byte], b'\n' | b'\r') {
        byte += 1;
    }
    Some(bytes[..byte].iter().filter(|&&b| b == b'\n').count() + 1)
}

pub(crate) fn csv_parse_error(text: &str, e: &csv::Error) -> Error {
    Error::Parse { line: line_at(text, e.position()), message: e.to_string() }
}

/// The launched rocket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocketSpec {
    /// Initial mass including propellant and payload, kg.
    pub total_mass: f64,
    pub diameter: f64,
    pub propellant_fraction: f64,
    pub exhaust_velocity: f64,
    pub burn_time: f64,
    pub nose_radius: f64,
    pub nose_length: f64,
    pub body_length: f64,
    pub drag_table: DragTable,
}

impl RocketSpec {
    /// The 30 cm, 300 kg baseline rocket with the given burn time.
    pub fn baseline(burn_time: f64) -> Self {
        RocketSpec {
            total_mass: 300.0,
            diameter: 0.30,
            propellant_fraction: 0.5,
            exhaust_velocity: 2100.0,
            burn_time,
            nose_radius: 0.02,
            nose_length: 1.0,
            body_length: 3.3,
            drag_table: DragTable::bundled("dlsrr30").expect("bundled table is valid"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("rocket.total_mass", self.total_mass)?;
        positive("rocket.diameter", self.diameter)?;
        positive("rocket.exhaust_velocity", self.exhaust_velocity)?;
        positive("rocket.burn_time", self.burn_time)?;
        positive("rocket.nose_radius", self.nose_radius)?;
        positive("rocket.nose_length", self.nose_length)?;
        positive("rocket.body_length", self.body_length)?;
        let f = self.propellant_fraction;
        if !(0.0..1.0).contains(&f) {
            return Err(Error::validation("rocket.propellant_fraction", format!("{f} must be in [0, 1)")));
        }
        Ok(())
    }

    /// Frontal area, m^2.
    pub fn area(&self) -> f64 {
        PI / 4.0 * self.diameter * self.diameter
    }

    /// Propellant mass flow while burning, kg/s.
    pub fn mass_flow(&self) -> f64 {
        self.total_mass * self.propellant_fraction / self.burn_time
    }

    /// Mass after all propellant is gone, kg.
    pub fn burnout_mass(&self) -> f64 {
        self.total_mass * (1.0 - self.propellant_fraction)
    }
}

/// A warhead released at apogee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectileSpec {
    pub mass: f64,
    pub diameter: f64,
    pub drag_table: DragTable,
}

impl ProjectileSpec {
    /// 11.4 kg, 7.83 cm hypervelocity projectile.
    pub fn hpv() -> Self {
        ProjectileSpec {
            mass: 11.4,
            diameter: 0.0783,
            drag_table: DragTable::bundled("hpv").expect("bundled table is valid"),
        }
    }

    /// 16.5 kg, 7.5 cm tungsten long-rod projectile.
    pub fn europrojectile() -> Self {
        ProjectileSpec {
            mass: 16.5,
            diameter: 0.075,
            drag_table: DragTable::bundled("europrojectile").expect("bundled table is valid"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("projectile.mass", self.mass)?;
        positive("projectile.diameter", self.diameter)
    }

    pub fn area(&self) -> f64 {
        PI / 4.0 * self.diameter * self.diameter
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{value} must be > 0")))
    }
}

/// Ideal velocity gain `-v_e ln(1 - f_p)`.
pub fn tsiolkovsky_gain(exhaust_velocity: f64, propellant_fraction: f64) -> Result<f64> {
    if !(exhaust_velocity > 0.0) {
        return Err(Error::domain("exhaust_velocity", exhaust_velocity, "must be > 0"));
    }
    if !(0.0..1.0).contains(&propellant_fraction) {
        return Err(Error::domain("propellant_fraction", propellant_fraction, "must be in [0, 1)"));
    }
    Ok(-exhaust_velocity * (1.0 - propellant_fraction).ln())
}

/// Volume coefficients (times d^3) of the long-rod projectile: conical
/// frustum tail, cylindrical body, and LV-Haack nose.
pub const EURO_TAIL_VOLUME: f64 = 1.43;
pub const EURO_BODY_VOLUME: f64 = 1.62;
pub const EURO_NOSE_VOLUME: f64 = 0.50;
pub const EURO_TOTAL_VOLUME: f64 = 3.55;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuroprojectileVolumes {
    pub tail: f64,
    pub body: f64,
    pub nose: f64,
}

impl EuroprojectileVolumes {
    pub fn for_caliber(d: f64) -> Self {
        let d3 = d * d * d;
        EuroprojectileVolumes { tail: EURO_TAIL_VOLUME * d3, body: EURO_BODY_VOLUME * d3, nose: EURO_NOSE_VOLUME * d3 }
    }

    pub fn total(&self) -> f64 {
        self.tail + self.body + self.nose
    }
}

/// Mass of the long-rod projectile of caliber `d` and mean density `density`.
pub fn europrojectile_mass(d: f64, density: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::domain("caliber", d, "must be >= 0"));
    }
    if !(density > 0.0) {
        return Err(Error::domain("density", density, "must be > 0"));
    }
    Ok(EURO_TOTAL_VOLUME * d * d * d * density)
}

/// One row of the propellant data file. Burn-rate fields are `None` where the
/// data is not available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropellantRecord {
    pub name: String,
    /// K
    pub flame_temperature: f64,
    /// m/s
    pub exhaust_velocity: f64,
    /// mm/s at `reference_pressure`
    pub burn_rate_ref: Option<f64>,
    /// atm
    pub reference_pressure: Option<f64>,
    pub exponent: Option<f64>,
}

impl PropellantRecord {
    fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("propellant `{}` {f}", self.name);
        if let Some(r) = self.burn_rate_ref {
            if !(r > 0.0) {
                return Err(Error::validation(field("burn_rate"), format!("{r} must be > 0")));
            }
        }
        if let Some(p) = self.reference_pressure {
            if !(p > 0.0) {
                return Err(Error::validation(field("reference_pressure"), format!("{p} must be > 0")));
            }
        }
        if let Some(n) = self.exponent {
            if !(0.0..=1.0).contains(&n) {
                return Err(Error::validation(field("exponent"), format!("{n} must be in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Steady burn rate `r_b0 (P / P_0)^n` in mm/s at chamber pressure `pressure` (atm).
pub fn burn_rate(record: &PropellantRecord, pressure: f64) -> Result<f64> {
    if !(pressure > 0.0) {
        return Err(Error::domain("pressure", pressure, "must be > 0 atm"));
    }
    match (record.burn_rate_ref, record.reference_pressure, record.exponent) {
        (Some(r0), Some(p0), Some(n)) => {
            if pressure == p0 {
                Ok(r0)
            } else {
                Ok(r0 * (pressure / p0).powf(n))
            }
        }
        _ => Err(Error::UnsupportedRecord(record.name.clone())),
    }
}

/// Parses the propellant data format: CSV with a header row, `#` comment
/// lines, and `NA` for unavailable values.
pub fn parse_propellants(text: &str) -> Result<Vec<PropellantRecord>> {
    #[derive(Deserialize)]
    struct Row {
        name: String,
        flame_temperature_k: f64,
        exhaust_velocity_m_s: f64,
        burn_rate_mm_s: String,
        reference_pressure_atm: String,
        exponent: String,
    }
    fn optional(field: &str, raw: &str, line: Option<usize>) -> Result<Option<f64>> {
        let raw = raw.trim();
        if raw.eq_ignore_ascii_case("NA") || raw.is_empty() {
            return Ok(None);
        }
        raw.parse()
            .map(Some)
            .map_err(|_| Error::Parse { line, message: format!("{field}: `{raw}` is neither a number nor NA") })
    }

    let cleaned = blank_comments(text);
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(cleaned.as_bytes());
    let mut records = Vec::new();
    let mut raw = csv::StringRecord::new();
    let headers = reader.headers().map_err(|e| csv_parse_error(&cleaned, &e))?.clone();
    while reader.read_record(&mut raw).map_err(|e| csv_parse_error(&cleaned, &e))? {
        let line = line_at(&cleaned, raw.position());
        let row: Row = raw.deserialize(Some(&headers)).map_err(|e| csv_parse_error(&cleaned, &e))?;
        let record = PropellantRecord {
            name: row.name,
            flame_temperature: row.flame_temperature_k,
            exhaust_velocity: row.exhaust_velocity_m_s,
            burn_rate_ref: optional("burn_rate_mm_s", &row.burn_rate_mm_s, line)?,
            reference_pressure: optional("reference_pressure_atm", &row.reference_pressure_atm, line)?,
            exponent: optional("exponent", &row.exponent, line)?,
        };
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

pub fn load_propellants(path: &Path) -> Result<Vec<PropellantRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_propellants(&text)
}

/// The propellant table shipped with the crate.
pub fn bundled_propellants() -> Vec<PropellantRecord> {
    parse_propellants(include_str!("../data/propellants.csv")).expect("bundled propellants parse")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn find<'a>(records: &'a [PropellantRecord], prefix: &str) -> &'a PropellantRecord {
        records.iter().find(|r| r.name.starts_with(prefix)).unwrap()
    }

    #[test]
    fn cd_examples() {
        let t = DragTable::bundled("dlsrr30").unwrap();
        assert_eq!(t.cd(1.0), 0.380);
        assert_relative_eq!(t.cd(1.125), 0.406, epsilon = 1e-12);
        assert_eq!(t.cd(12.0), 0.131);
        assert_eq!(t.cd(0.0), 0.265);
    }

    #[test]
    fn cd_exact_at_every_bundled_knot() {
        for name in ["dlsrr30", "hpv", "europrojectile"] {
            let t = DragTable::bundled(name).unwrap();
            for &(m, c) in t.knots() {
                assert_eq!(t.cd(m), c, "{name} at Mach {m}");
            }
        }
    }

    #[test]
    fn drag_table_validation() {
        assert!(DragTable::new(vec![(1.0, 0.2)]).is_err());
        assert!(DragTable::new(vec![(1.0, 0.2), (1.0, 0.3)]).is_err());
        assert!(DragTable::new(vec![(1.0, 0.2), (0.5, 0.3)]).is_err());
        assert!(DragTable::new(vec![(0.5, 0.2), (1.0, 0.0)]).is_err());
        assert!(DragTable::bundled("nope").is_err());
        assert!(DragTable::from_csv("mach,cd\n1,0.2\n2,x\n").is_err());
    }

    #[test]
    fn tsiolkovsky_examples() {
        let v = tsiolkovsky_gain(2100.0, 0.5).unwrap();
        assert!((v - 1455.6).abs() < 0.1);
        // tabulated 1457 with up to 2 m/s of stated roundoff
        assert!((v - 1457.0).abs() <= 2.0);
        assert_eq!(tsiolkovsky_gain(2100.0, 0.0).unwrap(), 0.0);
        assert!((tsiolkovsky_gain(2600.0, 0.5).unwrap() - 1802.2).abs() < 0.05);
        assert!(tsiolkovsky_gain(2100.0, 1.0).is_err());
        assert!(tsiolkovsky_gain(0.0, 0.5).is_err());
    }

    #[test]
    fn europrojectile_examples() {
        assert!((europrojectile_mass(0.075, 11_000.0).unwrap() - 16.5).abs() < 0.1);
        assert_eq!(europrojectile_mass(0.0, 11_000.0).unwrap(), 0.0);
        assert_relative_eq!(europrojectile_mass(0.10, 11_000.0).unwrap(), 39.05, epsilon = 1e-9);
        let v = EuroprojectileVolumes::for_caliber(1.0);
        assert_relative_eq!(v.total(), EURO_TOTAL_VOLUME, epsilon = 1e-12);
    }

    #[test]
    fn europrojectile_volumes_match_geometry() {
        // frustum h = 2.5d, radii 0.5d and 0.35d; body h = 4.2d, r = 0.35d;
        // LV-Haack nose 0.56 pi L R^2 with L = 9d - 2.5d - 4.2d
        let tail = PI / 3.0 * 2.5 * (0.25 + 0.5 * 0.35 + 0.35 * 0.35);
        let body = PI * 4.2 * 0.35 * 0.35;
        let nose = 0.56 * PI * (9.0 - 2.5 - 4.2) * 0.35 * 0.35;
        assert!((tail - EURO_TAIL_VOLUME).abs() < 0.01);
        assert!((body - EURO_BODY_VOLUME).abs() < 0.01);
        assert!((nose - EURO_NOSE_VOLUME).abs() < 0.01);
        assert_relative_eq!(tail + body + nose, EURO_TOTAL_VOLUME, max_relative = 0.005);
    }

    #[test]
    fn burn_rate_examples() {
        let records = bundled_propellants();
        let ap = find(&records, "70% AP");
        assert_eq!(burn_rate(ap, 40.0).unwrap(), 6.5);
        assert!((burn_rate(ap, 80.0).unwrap() - 8.29).abs() < 0.01);
        let an = find(&records, "20% binder, 72% AN");
        assert_relative_eq!(burn_rate(an, 10.0).unwrap(), 1.0, epsilon = 1e-12);
        let na = find(&records, "Nitrocellulose 9%");
        assert!(matches!(burn_rate(na, 40.0), Err(Error::UnsupportedRecord(_))));
        assert!(burn_rate(ap, 0.0).is_err());
    }

    #[test]
    fn propellant_file_keeps_missing_values_absent() {
        let records = bundled_propellants();
        assert_eq!(records.len(), 20);
        let na = find(&records, "20% binder, 68% AN");
        assert_eq!(na.burn_rate_ref, None);
        assert_eq!(na.exponent, None);
        assert_eq!(na.exhaust_velocity, 2240.0);
    }

    #[test]
    fn propellant_file_errors() {
        let header = "name,flame_temperature_k,exhaust_velocity_m_s,burn_rate_mm_s,reference_pressure_atm,exponent\n";
        let bad_number = format!("{header}# comment\nfoo,1500,2100,fast,40,0.5\n");
        match parse_propellants(&bad_number) {
            Err(Error::Parse { line: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let bad_exponent = format!("{header}foo,1500,2100,2.0,40,1.5\n");
        assert!(matches!(parse_propellants(&bad_exponent), Err(Error::Validation { .. })));
        let added = format!("{header}custom,1700,2200,2.5,50,0.4\n");
        let rec = &parse_propellants(&added).unwrap()[0];
        assert_eq!(burn_rate(rec, 50.0).unwrap(), 2.5);
    }

    #[test]
    fn rocket_baseline_is_valid() {
        let r = RocketSpec::baseline(30.0);
        r.validate().unwrap();
        assert_relative_eq!(r.area(), 0.070_685_83, max_relative = 1e-6);
        assert_eq!(r.burnout_mass(), 150.0);
        let mut bad = r.clone();
        bad.propellant_fraction = 1.2;
        assert!(bad.validate().is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cd_bounded_by_bracketing_knots(mach in 0.0..10.0f64) {
                let t = DragTable::bundled("dlsrr30").unwrap();
                let k = t.knots();
                let cd = t.cd(mach);
                if mach <= k[0].0 || mach >= k[k.len() - 1].0 {
                    prop_assert!(cd == k[0].1 || cd == k[k.len() - 1].1);
                } else {
                    let i = k.iter().position(|&(m, _)| m > mach).unwrap();
                    let (lo, hi) = (k[i - 1].1.min(k[i].1), k[i - 1].1.max(k[i].1));
                    prop_assert!(cd >= lo - 1e-15 && cd <= hi + 1e-15);
                }
            }

            #[test]
            fn gain_increasing_in_fraction(f1 in 0.0..0.95f64, df in 1e-6..0.04f64, ve in 100.0..5000.0f64) {
                let a = tsiolkovsky_gain(ve, f1).unwrap();
                let b = tsiolkovsky_gain(ve, f1 + df).unwrap();
                prop_assert!(b > a);
            }

            #[test]
            fn gain_linear_in_exhaust_velocity(f in 0.0..0.95f64, ve in 100.0..5000.0f64, k in 0.1..10.0f64) {
                let a = tsiolkovsky_gain(ve, f).unwrap();
                let b = tsiolkovsky_gain(k * ve, f).unwrap();
                prop_assert!((b - k * a).abs() <= 1e-9 * b.abs().max(1.0));
            }

            #[test]
            fn burn_rate_at_reference(r0 in 0.1..20.0f64, p0 in 1.0..100.0f64, n in 0.0..=1.0f64) {
                let rec = PropellantRecord {
                    name: "x".into(),
                    flame_temperature: 1500.0,
                    exhaust_velocity: 2100.0,
                    burn_rate_ref: Some(r0),
                    reference_pressure: Some(p0),
                    exponent: Some(n),
                };
                prop_assert_eq!(burn_rate(&rec, p0).unwrap(), r0);
            }
        }
    }
}
