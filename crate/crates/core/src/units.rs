//! Physical constants and the unit conversions used at the boundaries of the
//! crate. All internal spectral bookkeeping is in angular frequency \[rad/s\];
//! ordinary-frequency (Hz) and wavelength (m) values appear only here and in
//! detector bandwidth parameters.

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s), exact by SI definition.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant (J·s), exact by 2019 SI definition.
pub const PLANCK_CONSTANT: f64 = 6.626_070_15e-34;

/// Convert a vacuum wavelength \[m\] to angular frequency \[rad/s\], ω = 2πc/λ.
pub fn wavelength_to_angular_frequency(lambda_m: f64) -> Result<f64> {
    if !lambda_m.is_finite() || lambda_m <= 0.0 {
        return Err(Error::Domain(format!(
            "wavelength must be finite and positive, got {lambda_m}"
        )));
    }
    Ok(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda_m)
}

/// Convert an angular frequency \[rad/s\] back to a vacuum wavelength \[m\].
pub fn angular_frequency_to_wavelength(omega: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::Domain(format!(
            "angular frequency must be finite and positive, got {omega}"
        )));
    }
    Ok(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega)
}

/// First-order conversion of a wavelength bandwidth to an ordinary-frequency
/// bandwidth \[Hz\]: Δν = c·Δλ/λ². Both lengths in metres.
pub fn bandwidth_to_ordinary_frequency(delta_lambda_m: f64, lambda_center_m: f64) -> Result<f64> {
    if !lambda_center_m.is_finite() || lambda_center_m <= 0.0 {
        return Err(Error::Domain(format!(
            "center wavelength must be finite and positive, got {lambda_center_m}"
        )));
    }
    if !delta_lambda_m.is_finite() || delta_lambda_m < 0.0 {
        return Err(Error::Domain(format!(
            "wavelength bandwidth must be finite and non-negative, got {delta_lambda_m}"
        )));
    }
    Ok(SPEED_OF_LIGHT * delta_lambda_m / (lambda_center_m * lambda_center_m))
}

/// Ordinary frequency \[Hz\] to angular frequency \[rad/s\].
pub fn hz_to_angular(nu: f64) -> f64 {
    2.0 * std::f64::consts::PI * nu
}

/// Angular frequency \[rad/s\] to ordinary frequency \[Hz\].
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI)
}
