//! Decibel conversions. Everything inside the engine is linear SI; these are
//! only used at configuration and reporting boundaries.

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Hexagonal-grid inter-site distance (m) to the equivalent BS intensity (per m²).
pub fn isd_to_intensity(isd_m: f64) -> f64 {
    2.0 / (3f64.sqrt() * isd_m * isd_m)
}

pub fn intensity_to_isd(intensity: f64) -> f64 {
    (2.0 / (3f64.sqrt() * intensity)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uma_isd_matches_intensity() {
        let lambda = isd_to_intensity(500.0);
        assert!((lambda - 4.62e-6).abs() < 0.005e-6, "{lambda}");
    }

    proptest! {
        #[test]
        fn db_round_trip(x in -200.0f64..200.0) {
            let back = linear_to_db(db_to_linear(x));
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn linear_round_trip(x in 1e-20f64..1e20) {
            let back = db_to_linear(linear_to_db(x));
            prop_assert!(((back - x) / x).abs() <= 1e-12);
        }

        #[test]
        fn isd_round_trip(isd in 1.0f64..5000.0) {
            let back = intensity_to_isd(isd_to_intensity(isd));
            prop_assert!(((back - isd) / isd).abs() < 1e-12);
        }
    }
}
