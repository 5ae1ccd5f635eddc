//! Decibel conversions. Everything inside the crate is linear (mW for powers);
//! dB and dBm only appear at configuration and reporting boundaries.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Returns `-inf` for a zero ratio.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}
