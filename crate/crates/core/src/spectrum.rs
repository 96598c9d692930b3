//! Down-conversion spectral amplitudes g(ω).
//!
//! The down-converted spectrum is symmetric about the degeneracy point and
//! carries a constant spectral phase under perfect phase matching, so the
//! default models are real:
//!
//! * [`gaussian_spectrum`] — Gaussian amplitude, the default model;
//! * [`sinc_phasematch_spectrum`] — sinc of a quadratic detuning, the
//!   collinear degenerate phase-matching shape;
//! * [`flattop_spectrum`] — rectangular amplitude for analytic tests.
//!
//! All constructors peak-normalize to 1 at the degeneracy point.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

/// Complex spectral amplitude sampled on a [`FrequencyGrid`], peak magnitude 1.
#[derive(Debug, Clone)]
pub struct SpectralAmplitude {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl SpectralAmplitude {
    /// Wrap raw per-bin values, normalizing the peak magnitude to 1.
    pub fn from_values(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Domain("non-finite spectral amplitude".into()));
        }
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::Domain("all-zero spectral amplitude".into()));
        }
        let values = values.into_iter().map(|v| v / peak).collect();
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest |offset from ω₀| among bins with non-negligible amplitude.
    /// Used by shaping defaults to locate the occupied band.
    pub fn support_half_width(&self) -> f64 {
        let floor = 1e-12;
        let mut half = 0.0f64;
        for (k, v) in self.values.iter().enumerate() {
            if v.norm() > floor {
                half = half.max(self.grid.offset(k).abs());
            }
        }
        half
    }
}

/// Real Gaussian amplitude centered at ω₀ whose *intensity* |g|² has the
/// given full width at half maximum \[rad/s\].
pub fn gaussian_spectrum(grid: &FrequencyGrid, fwhm: f64) -> Result<SpectralAmplitude> {
    if !fwhm.is_finite() || fwhm <= 0.0 || fwhm >= grid.span() / 2.0 {
        return Err(Error::Config(format!(
            "gaussian intensity FWHM must lie in (0, span/2) = (0, {:.6e}), got {fwhm:.6e}",
            grid.span() / 2.0
        )));
    }
    // |g|² = exp(−4 ln2 x²/FWHM²) ⇒ amplitude exponent is half of that.
    let ln2 = std::f64::consts::LN_2;
    let values = (0..grid.len())
        .map(|k| {
            let x = grid.offset(k);
            Complex64::new((-2.0 * ln2 * x * x / (fwhm * fwhm)).exp(), 0.0)
        })
        .collect();
    SpectralAmplitude::from_values(grid.clone(), values)
}

/// sinc(x) = sin(x)/x with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Half-power point of sinc²: the root of sinc²(x) = 1/2 on (0, π),
/// found by bisection. x ≈ 1.3915573782515.
fn sinc_half_power_point() -> Result<f64> {
    let f = |x: f64| sinc(x) * sinc(x) - 0.5;
    let (mut lo, mut hi) = (1e-12, std::f64::consts::PI);
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return Err(Error::Internal(
            "sinc half-power root not bracketed on (0, π)".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Phase-matching amplitude sinc(κ(ω−ω₀)²) with κ calibrated so the
/// intensity FWHM equals `delta_dc` \[rad/s\]. Constant (zero) phase holds
/// across the main lobe; the weak side lobes change sign.
pub fn sinc_phasematch_spectrum(grid: &FrequencyGrid, delta_dc: f64) -> Result<SpectralAmplitude> {
    if !delta_dc.is_finite() || delta_dc <= 0.0 || delta_dc >= grid.span() / 2.0 {
        return Err(Error::Config(format!(
            "sinc intensity FWHM must lie in (0, span/2) = (0, {:.6e}), got {delta_dc:.6e}",
            grid.span() / 2.0
        )));
    }
    // |g|²(x) = sinc²(κx²) falls to 1/2 at κx² = x_h, so the intensity
    // FWHM is 2·sqrt(x_h/κ); solve for κ.
    let x_h = sinc_half_power_point()?;
    let half = delta_dc / 2.0;
    let kappa = x_h / (half * half);
    let values = (0..grid.len())
        .map(|k| {
            let x = grid.offset(k);
            Complex64::new(sinc(kappa * x * x), 0.0)
        })
        .collect();
    SpectralAmplitude::from_values(grid.clone(), values)
}

/// Rectangular amplitude: 1 for |ω − ω₀| ≤ `half_width`, 0 outside.
pub fn flattop_spectrum(grid: &FrequencyGrid, half_width: f64) -> Result<SpectralAmplitude> {
    if !half_width.is_finite() || half_width <= 0.0 || half_width >= grid.span() / 2.0 {
        return Err(Error::Config(format!(
            "flat-top half width must lie in (0, span/2) = (0, {:.6e}), got {half_width:.6e}",
            grid.span() / 2.0
        )));
    }
    let values = (0..grid.len())
        .map(|k| {
            if grid.offset(k).abs() <= half_width {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    SpectralAmplitude::from_values(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> FrequencyGrid {
        let span = 2.0 * std::f64::consts::PI * 65.6e12;
        FrequencyGrid::new(1.7703e15, span, 4096).unwrap()
    }

    #[test]
    fn gaussian_peaks_at_center() {
        let g = grid();
        let s = gaussian_spectrum(&g, 2.0 * std::f64::consts::PI * 8.2e12).unwrap();
        assert_eq!(s.values()[g.len() / 2], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn gaussian_intensity_half_maximum_at_half_fwhm() {
        let g = grid();
        let fwhm = 2.0 * std::f64::consts::PI * 8.2e12;
        let s = gaussian_spectrum(&g, fwhm).unwrap();
        // Evaluate |g|² at the bin closest to ω₀ + fwhm/2, then compare the
        // analytic value there (grid points rarely land exactly on fwhm/2).
        let k = (0..g.len())
            .min_by(|&a, &b| {
                let da = (g.offset(a) - fwhm / 2.0).abs();
                let db = (g.offset(b) - fwhm / 2.0).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let x = g.offset(k);
        let expected = (-4.0 * std::f64::consts::LN_2 * x * x / (fwhm * fwhm)).exp();
        assert_relative_eq!(s.values()[k].norm_sqr(), expected, max_relative = 1e-12);
        // And the analytic intensity at exactly ±fwhm/2 is 1/2.
        let at_half = (-4.0 * std::f64::consts::LN_2 * (fwhm / 2.0).powi(2) / (fwhm * fwhm)).exp();
        assert_relative_eq!(at_half, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn gaussian_is_mirror_symmetric() {
        let g = grid();
        let s = gaussian_spectrum(&g, 2.0 * std::f64::consts::PI * 8.2e12).unwrap();
        for k in 1..g.len() {
            let m = g.mirror_index(k);
            assert_relative_eq!(
                s.values()[k].re,
                s.values()[m].re,
                max_relative = 1e-12,
                epsilon = 1e-300
            );
        }
    }

    #[test]
    fn gaussian_bandwidth_guard() {
        let g = grid();
        assert!(matches!(
            gaussian_spectrum(&g, g.span()),
            Err(Error::Config(_))
        ));
        assert!(matches!(gaussian_spectrum(&g, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn sinc_peaks_at_center_and_calibrates_fwhm() {
        let g = grid();
        let target = 2.0 * std::f64::consts::PI * 8.2e12;
        let s = sinc_phasematch_spectrum(&g, target).unwrap();
        assert_eq!(s.values()[g.len() / 2], Complex64::new(1.0, 0.0));

        // Measure the intensity FWHM on the grid by linear interpolation.
        let intens: Vec<f64> = s.values().iter().map(|v| v.norm_sqr()).collect();
        let n2 = g.len() / 2;
        let mut right = 0.0;
        for k in n2..g.len() - 1 {
            if intens[k] >= 0.5 && intens[k + 1] < 0.5 {
                let frac = (intens[k] - 0.5) / (intens[k] - intens[k + 1]);
                right = g.offset(k) + frac * g.spacing();
                break;
            }
        }
        let measured = 2.0 * right;
        assert_relative_eq!(measured, target, max_relative = 1e-3);
    }

    #[test]
    fn sinc_is_even_in_detuning() {
        let g = grid();
        let s = sinc_phasematch_spectrum(&g, 2.0 * std::f64::consts::PI * 8.2e12).unwrap();
        for k in 1..g.len() {
            let m = g.mirror_index(k);
            assert_relative_eq!(
                s.values()[k].re,
                s.values()[m].re,
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn flattop_support() {
        let g = grid();
        let b = 500.5 * g.spacing();
        let s = flattop_spectrum(&g, b).unwrap();
        for k in 0..g.len() {
            let inside = g.offset(k).abs() <= b;
            assert_eq!(s.values()[k].re, if inside { 1.0 } else { 0.0 });
        }
        assert_relative_eq!(s.support_half_width(), 500.0 * g.spacing());
    }
}
