//! Meteorological equations used to derive ET0, VAP, and VAD.

use crate::error::{Error, Result};

/// Saturation vapor pressure in kPa at `temp_c` degrees Celsius.
///
/// Liquid branch for temperatures above 0, ice branch at or below 0. The
/// branches agree exactly at 0 where both exponents vanish.
pub fn saturation_vapor_pressure(temp_c: f64) -> Result<f64> {
    if !temp_c.is_finite() || !(-90.0..=60.0).contains(&temp_c) {
        return Err(Error::OutOfRange(format!("temperature {temp_c} C")));
    }
    let e = if temp_c > 0.0 {
        0.6108 * (17.27 * temp_c / (temp_c + 237.3)).exp()
    } else {
        0.6108 * (21.87 * temp_c / (temp_c + 265.5)).exp()
    };
    Ok(e)
}

/// Actual vapor pressure and vapor pressure deficit (both kPa) from
/// temperature and relative humidity as a fraction in [0, 1].
pub fn actual_vapor_pressure_and_deficit(temp_c: f64, rh: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&rh) {
        return Err(Error::InvalidHumidity(rh));
    }
    let e_s = saturation_vapor_pressure(temp_c)?;
    let vap = e_s * rh;
    Ok((vap, e_s - vap))
}

/// Reference evapotranspiration in mm/day.
///
/// * `delta` — slope of the saturation vapor pressure curve, kPa/C
/// * `rn` — net radiation at the surface, MJ/m^2/day
/// * `g` — soil heat flux density, MJ/m^2/day
/// * `temp_c` — mean air temperature at 2 m, C
/// * `u2` — wind speed at 2 m, m/s
/// * `e_s`, `e_a` — saturation and actual vapor pressure, kPa
/// * `gamma` — psychrometric constant, kPa/C
#[allow(clippy::too_many_arguments)]
pub fn reference_et0(
    delta: f64,
    rn: f64,
    g: f64,
    temp_c: f64,
    u2: f64,
    e_s: f64,
    e_a: f64,
    gamma: f64,
) -> Result<f64> {
    for (name, v) in [
        ("delta", delta),
        ("rn", rn),
        ("g", g),
        ("temp", temp_c),
        ("u2", u2),
        ("e_s", e_s),
        ("e_a", e_a),
        ("gamma", gamma),
    ] {
        if !v.is_finite() {
            return Err(Error::OutOfRange(format!("{name} = {v}")));
        }
    }
    if temp_c <= -273.0 {
        return Err(Error::OutOfRange(format!("temperature {temp_c} C")));
    }
    let denom = delta + gamma * (1.0 + 0.34 * u2);
    if denom <= 0.0 {
        return Err(Error::NonPositiveDenominator(denom));
    }
    let numer = 0.408 * delta * (rn - g) + gamma * (900.0 / (temp_c + 273.0)) * u2 * (e_s - e_a);
    Ok(numer / denom)
}

/// Slope of the saturation vapor pressure curve at `temp_c`, kPa/C.
pub fn svp_slope(temp_c: f64) -> Result<f64> {
    let e_s = 0.6108 * (17.27 * temp_c / (temp_c + 237.3)).exp();
    if !temp_c.is_finite() || temp_c <= -237.3 {
        return Err(Error::OutOfRange(format!("temperature {temp_c} C")));
    }
    Ok(4098.0 * e_s / (temp_c + 237.3).powi(2))
}

/// Psychrometric constant from surface pressure in kPa.
pub fn psychrometric_constant(pressure_kpa: f64) -> f64 {
    0.000665 * pressure_kpa
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_agree_exactly_at_zero() {
        let liquid = 0.6108 * (17.27 * 0.0 / 237.3f64).exp();
        let ice = 0.6108 * (21.87 * 0.0 / 265.5f64).exp();
        assert_eq!(liquid, ice);
        assert_eq!(saturation_vapor_pressure(0.0).unwrap(), 0.6108);
    }

    #[test]
    fn matches_high_precision_reference_values() {
        // frozen from an independent high-precision evaluation
        assert!((saturation_vapor_pressure(25.0).unwrap() - 3.1677777175068475).abs() < 1e-12);
        assert!((saturation_vapor_pressure(-10.0).unwrap() - 0.25951146545454886).abs() < 1e-12);
    }

    #[test]
    fn rejects_implausible_temperature() {
        assert!(saturation_vapor_pressure(-120.0).is_err());
        assert!(saturation_vapor_pressure(80.0).is_err());
        assert!(saturation_vapor_pressure(f64::NAN).is_err());
    }

    #[test]
    fn saturated_air_has_zero_deficit() {
        let (vap, vad) = actual_vapor_pressure_and_deficit(25.0, 1.0).unwrap();
        assert_eq!(vad, 0.0);
        assert!((vap - 3.1677777175068475).abs() < 1e-12);
    }

    #[test]
    fn dry_air_has_zero_vapor_pressure() {
        let (vap, vad) = actual_vapor_pressure_and_deficit(10.0, 0.0).unwrap();
        assert_eq!(vap, 0.0);
        assert_eq!(vad, saturation_vapor_pressure(10.0).unwrap());
    }

    #[test]
    fn partial_humidity_splits_saturation_pressure() {
        let (vap, vad) = actual_vapor_pressure_and_deficit(25.0, 0.6).unwrap();
        assert!((vap - 1.9006666305041085).abs() < 1e-12);
        assert!((vad - 1.267111087002739).abs() < 1e-12);
    }

    #[test]
    fn humidity_outside_unit_interval_is_rejected() {
        assert!(actual_vapor_pressure_and_deficit(20.0, -0.1).is_err());
        assert!(actual_vapor_pressure_and_deficit(20.0, 1.1).is_err());
    }

    #[test]
    fn et0_vanishes_without_radiation_or_wind() {
        assert_eq!(reference_et0(0.12, 5.0, 5.0, 20.0, 0.0, 2.0, 1.0, 0.066).unwrap(), 0.0);
    }

    #[test]
    fn et0_vanishes_at_saturation_with_balanced_radiation() {
        assert_eq!(reference_et0(0.12, 3.0, 3.0, 20.0, 2.0, 1.5, 1.5, 0.066).unwrap(), 0.0);
    }

    #[test]
    fn et0_matches_frozen_reference_vector() {
        // frozen from an independent high-precision evaluation
        let et0 = reference_et0(0.189, 13.28, 0.14, 16.9, 2.078, 1.997, 1.409, 0.0666).unwrap();
        assert!((et0 - 4.1826127312126685).abs() < 1e-12, "et0 = {et0}");
    }

    #[test]
    fn et0_rejects_nonpositive_denominator() {
        assert!(reference_et0(-0.2, 5.0, 0.0, 20.0, 0.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn svp_slope_matches_frozen_value() {
        assert!((svp_slope(16.9).unwrap() - 0.12211265844598749).abs() < 1e-12);
    }
}
