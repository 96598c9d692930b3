//! The two-photon wavefunction.
//!
//! The relative-time amplitude G(t) is the inverse Fourier transform of the
//! filtered pair spectrum,
//!
//! ```text
//! G(t) = (1/2π) ∫ g(ω) Φ(ω) e^{i(ω−ω₀)t} dω
//! ```
//!
//! in the baseband (carrier-removed) convention: the e^{iω₀t} factor is
//! dropped so the time step only needs to resolve the bandwidth, not the
//! optical frequency. The full wavefunction factorizes into a pump-bandwidth
//! envelope over t_s + t_i and G over t_s − t_i,
//!
//! ```text
//! ψ(t_s, t_i) = exp(−δ_p²(t_s+t_i)²/32) · G(t_s − t_i),
//! ```
//!
//! and is never materialized on a 2-D grid: the envelope scale (µs at a MHz
//! pump bandwidth) and the correlation scale (~100 fs) differ by seven
//! orders of magnitude, so the product structure is kept symbolic.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mask::PairFilter;
use crate::spectrum::SpectralAmplitude;

/// Relative-time biphoton amplitude G on a [`TimeGrid`], stored peak-
/// normalized together with the peak magnitude it was divided by.
#[derive(Debug, Clone)]
pub struct TimeAmplitude {
    time_grid: TimeGrid,
    values: Vec<Complex64>,
    peak: f64,
}

impl TimeAmplitude {
    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    /// Peak-normalized samples (max |G| = 1).
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// |G| at the peak before normalization.
    pub fn raw_peak(&self) -> f64 {
        self.peak
    }

    /// Linearly interpolate the (normalized) amplitude at time `t`.
    pub fn interpolate(&self, t: f64) -> Result<Complex64> {
        let tg = &self.time_grid;
        if !t.is_finite() || t < tg.min() || t > tg.max() {
            return Err(Error::Range(format!(
                "time {t:e} outside the sampled axis [{:e}, {:e}]",
                tg.min(),
                tg.max()
            )));
        }
        let pos = (t - tg.min()) / tg.spacing();
        let j = (pos.floor() as usize).min(tg.len() - 2);
        let frac = pos - j as f64;
        Ok(self.values[j] * (1.0 - frac) + self.values[j + 1] * frac)
    }

    /// Write as three-column text: t \[s\], Re G, Im G (normalized values).
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# t_s re_g im_g")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e}",
                self.time_grid.point(j),
                v.re,
                v.im
            )?;
        }
        Ok(())
    }
}

fn check_same_grid(spectrum: &SpectralAmplitude, filter: &PairFilter) -> Result<()> {
    if spectrum.grid() != filter.grid() {
        return Err(Error::Usage(
            "spectrum and pair filter are sampled on different grids".into(),
        ));
    }
    Ok(())
}

/// Compute G(t) on the conjugate time grid of the spectrum by FFT.
///
/// Centered convention: bin N/2 of the result is t = 0, and the spectral
/// product is taken about ω₀, so the output is the baseband envelope.
pub fn relative_wavefunction(
    spectrum: &SpectralAmplitude,
    filter: &PairFilter,
) -> Result<TimeAmplitude> {
    check_same_grid(spectrum, filter)?;
    let grid = spectrum.grid();
    let n = grid.len();
    let half = n / 2;

    // Product spectrum, rotated so the ω₀ bin comes first (ifftshift).
    let mut buf: Vec<Complex64> = (0..n)
        .map(|m| {
            let k = (m + half) % n;
            spectrum.values()[k] * filter.values()[k]
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    // Rotate back so index N/2 is t = 0 and scale the Riemann sum.
    let scale = grid.spacing() / (2.0 * std::f64::consts::PI);
    let values: Vec<Complex64> = (0..n).map(|j| buf[(j + half) % n] * scale).collect();

    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let normalized = if peak > 0.0 {
        values.into_iter().map(|v| v / peak).collect()
    } else {
        values
    };
    Ok(TimeAmplitude {
        time_grid: grid.conjugate_time_grid(),
        values: normalized,
        peak,
    })
}

/// Brute-force transform oracle: direct Riemann-sum quadrature of
/// (1/2π)∫ g(ω)Φ(ω) e^{i(ω−ω₀)t} dω at arbitrary times. Shares no code
/// with the FFT path of [`relative_wavefunction`].
pub fn oracle_dft(
    spectrum: &SpectralAmplitude,
    filter: &PairFilter,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    check_same_grid(spectrum, filter)?;
    let grid = spectrum.grid();
    let scale = grid.spacing() / (2.0 * std::f64::consts::PI);
    let product: Vec<Complex64> = spectrum
        .values()
        .iter()
        .zip(filter.values())
        .map(|(g, f)| g * f)
        .collect();
    Ok(times
        .iter()
        .map(|&t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in product.iter().enumerate() {
                let (s, co) = (grid.offset(k) * t).sin_cos();
                acc += c * Complex64::new(co, s);
            }
            acc * scale
        })
        .collect())
}

/// Pump-envelope × relative-amplitude factorization of ψ(t_s, t_i).
#[derive(Debug, Clone)]
pub struct TwoPhotonWavefunction {
    relative: TimeAmplitude,
    pump_bandwidth: f64,
}

impl TwoPhotonWavefunction {
    /// `pump_bandwidth` is δ_p in rad/s (an ordinary-frequency FWHM times 2π).
    pub fn new(relative: TimeAmplitude, pump_bandwidth: f64) -> Result<Self> {
        if !pump_bandwidth.is_finite() || pump_bandwidth < 0.0 {
            return Err(Error::Domain(format!(
                "pump bandwidth must be finite and non-negative, got {pump_bandwidth}"
            )));
        }
        Ok(Self {
            relative,
            pump_bandwidth,
        })
    }

    pub fn relative(&self) -> &TimeAmplitude {
        &self.relative
    }

    pub fn pump_bandwidth(&self) -> f64 {
        self.pump_bandwidth
    }

    /// Joint detection density |ψ(t_s, t_i)|², relative to the peak of |G|².
    pub fn density(&self, t_signal: f64, t_idler: f64) -> Result<f64> {
        let sum = t_signal + t_idler;
        let envelope = (-self.pump_bandwidth.powi(2) * sum * sum / 32.0).exp();
        let g = self.relative.interpolate(t_signal - t_idler)?;
        Ok((envelope * g.norm()).powi(2))
    }
}

/// Result policy for [`correlation_fwhm`]: peaks tied within this relative
/// tolerance count as one multimodal family.
const PEAK_TIE_TOLERANCE: f64 = 1e-9;

/// Full width at half maximum of |G(t)|², by linear interpolation between
/// samples. Several global peaks tied within 1e−9 relative make the width
/// ill-defined; the error then carries each lobe's own FWHM.
pub fn correlation_fwhm(amplitude: &TimeAmplitude) -> Result<f64> {
    let intensity: Vec<f64> = amplitude.values().iter().map(|v| v.norm_sqr()).collect();
    let n = intensity.len();
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::Domain("all-zero amplitude".into()));
    }

    // Local maxima tied with the global peak.
    let mut tied: Vec<usize> = Vec::new();
    for j in 1..n - 1 {
        let v = intensity[j];
        if v >= intensity[j - 1] && v > intensity[j + 1] && v >= peak * (1.0 - PEAK_TIE_TOLERANCE) {
            tied.push(j);
        }
    }
    if tied.is_empty() {
        // Peak sits on the boundary; treat it as unique.
        let j = intensity
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(j, _)| j)
            .unwrap();
        tied.push(j);
    }

    if tied.len() > 1 {
        let lobe_fwhms = tied
            .iter()
            .map(|&j| lobe_width(amplitude.time_grid(), &intensity, j))
            .collect::<Result<Vec<_>>>()?;
        return Err(Error::Multimodal { lobe_fwhms });
    }
    lobe_width(amplitude.time_grid(), &intensity, tied[0])
}

/// FWHM of the lobe around sample `peak_idx`, at half of that lobe's own peak.
fn lobe_width(tg: &TimeGrid, intensity: &[f64], peak_idx: usize) -> Result<f64> {
    let half = intensity[peak_idx] / 2.0;
    let n = intensity.len();

    let mut left = None;
    for j in (1..=peak_idx).rev() {
        if intensity[j] >= half && intensity[j - 1] < half {
            let frac = (intensity[j] - half) / (intensity[j] - intensity[j - 1]);
            left = Some(tg.point(j) - frac * tg.spacing());
            break;
        }
    }
    let mut right = None;
    for j in peak_idx..n - 1 {
        if intensity[j] >= half && intensity[j + 1] < half {
            let frac = (intensity[j] - half) / (intensity[j] - intensity[j + 1]);
            right = Some(tg.point(j) + frac * tg.spacing());
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::Range(
            "half-maximum crossing runs off the sampled time axis".into(),
        )),
    }
}
