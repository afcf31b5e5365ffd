use crate::error::{Error, Result};

/// Upper end of the wall-temperature search, K.
pub const BRACKET_CEILING: f64 = 4000.0;

const MAX_ITERATIONS: usize = 200;
const FLUX_TOLERANCE: f64 = 1.0;
const TEMPERATURE_TOLERANCE: f64 = 1e-9;

/// Wall temperature at which the net flux `flux(T_w)` vanishes, found by
/// bisection on `[t_a, 4000 K]`.
///
/// Returns `t_a` when the wall is not heated at ambient temperature. Bisection
/// runs until the net flux is within 1 W/m^2 of zero.
pub fn equilibrium_wall_temperature(mut flux: impl FnMut(f64) -> Result<f64>, t_a: f64) -> Result<f64> {
    if !(t_a > 0.0) || t_a >= BRACKET_CEILING {
        return Err(Error::domain("T_a", t_a, format!("must be in (0, {BRACKET_CEILING}) K")));
    }
    if flux(t_a)? <= 0.0 {
        return Ok(t_a);
    }
    let top = flux(BRACKET_CEILING)?;
    if top > 0.0 {
        return Err(Error::OutOfBracket { flux: top, upper: BRACKET_CEILING });
    }
    let (mut lo, mut hi) = (t_a, BRACKET_CEILING);
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let f = flux(mid)?;
        if f.abs() < FLUX_TOLERANCE || hi - lo < TEMPERATURE_TOLERANCE {
            return Ok(mid);
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
