//! Power-unit conversions. All internal math is in linear watts (per Hz).

/// `x` dBm (per Hz) to watts (per Hz).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}
