//! Decibel conversions, centralized so every module shares one convention.
//!
//! Power ratios use `10·log₁₀`, amplitude ratios use `20·log₁₀`. Absolute
//! dBm values are referenced to one milliwatt.

/// Power ratio from dB: `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Power ratio to dB: `10·log₁₀(x)`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Amplitude factor from a dB power attenuation: `10^(-dB/20)`.
pub fn attenuation_db_to_amplitude(db: f64) -> f64 {
    10f64.powf(-db / 20.0)
}

/// Absolute power from dBm: `10^((dBm-30)/10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-12);
        assert!((linear_to_db(100.0) - 20.0).abs() < 1e-12);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        // 148.1 dB path loss as an amplitude factor.
        assert!((attenuation_db_to_amplitude(148.1) - 3.936e-8).abs() < 1e-11);
    }
}
