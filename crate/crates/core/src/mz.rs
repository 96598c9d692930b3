//! Mach-Zehnder two-photon interference.
//!
//! The coincidence rate as a function of the retardation τ between the
//! interferometer arms is
//!
//! ```text
//! R(τ) ∝ |∫ g(ω)(cos(ω₀τ) + cos((ω−ω₀)τ)) dω|²
//! ```
//!
//! for a spectrum symmetric about ω₀. At small τ this reduces to
//! |cos(ω₀τ) + 1|², the square of the single-photon fringe pattern; once the
//! bandwidth term has decayed the rate oscillates as cos²(ω₀τ), period
//! 2π/ω_p, with undiminished contrast. The single-photon (IR) reference
//! trace follows the standard power-spectrum interference law
//! I(τ) ∝ ∫|g(ω)|²(1 + cos(ωτ)) dω. Scans normalize each trace to its own
//! maximum.

use std::io::Write;

use crate::error::{Error, Result};
use crate::spectrum::SpectralAmplitude;

/// Which arm of a scan a trace describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Biphoton,
    SinglePhoton,
}

/// A normalized interference trace over strictly increasing retardations.
#[derive(Debug, Clone)]
pub struct InterferenceTrace {
    kind: TraceKind,
    /// Fringe period of this trace: 2π/ω_p for the biphoton rate, 2π/ω₀ for
    /// the single-photon intensity.
    fringe_period: f64,
    retardations: Vec<f64>,
    values: Vec<f64>,
}

impl InterferenceTrace {
    pub fn new(
        kind: TraceKind,
        fringe_period: f64,
        retardations: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if retardations.len() != values.len() || retardations.len() < 2 {
            return Err(Error::Usage(format!(
                "trace needs matching retardation/value lists of length >= 2, got {}/{}",
                retardations.len(),
                values.len()
            )));
        }
        if !retardations.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Usage(
                "retardations must be strictly increasing".into(),
            ));
        }
        if !fringe_period.is_finite() || fringe_period <= 0.0 {
            return Err(Error::Usage(format!(
                "fringe period must be positive, got {fringe_period}"
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Usage(
                "trace values must be non-negative and finite".into(),
            ));
        }
        let peak = values.iter().copied().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::Usage(
                "trace values must have a positive maximum".into(),
            ));
        }
        let values = values.into_iter().map(|v| v / peak).collect();
        Ok(Self {
            kind,
            fringe_period,
            retardations,
            values,
        })
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn fringe_period(&self) -> f64 {
        self.fringe_period
    }

    pub fn retardations(&self) -> &[f64] {
        &self.retardations
    }

    /// Values normalized to max 1.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn interpolate(&self, tau: f64) -> f64 {
        let r = &self.retardations;
        match r.binary_search_by(|x| x.partial_cmp(&tau).unwrap()) {
            Ok(j) => self.values[j],
            Err(0) => self.values[0],
            Err(j) if j >= r.len() => self.values[r.len() - 1],
            Err(j) => {
                let frac = (tau - r[j - 1]) / (r[j] - r[j - 1]);
                self.values[j - 1] * (1.0 - frac) + self.values[j] * frac
            }
        }
    }
}

fn require_real_symmetric(spectrum: &SpectralAmplitude) -> Result<()> {
    let g = spectrum.grid();
    let v = spectrum.values();
    let tol = 1e-12;
    for k in 0..g.len() {
        if v[k].im.abs() > tol {
            return Err(Error::Usage(
                "spectrum must be real: the biphoton rate formula assumes a \
                 constant spectral phase"
                    .into(),
            ));
        }
        let m = g.mirror_index(k);
        if (v[k].re - v[m].re).abs() > tol {
            return Err(Error::Usage(
                "spectrum must be symmetric about the degeneracy point: the \
                 biphoton rate formula assumes g(ω) = g(ω_p − ω)"
                    .into(),
            ));
        }
    }
    Ok(())
}

/// Unnormalized biphoton coincidence rate at retardation `tau` \[s\].
pub fn biphoton_rate(spectrum: &SpectralAmplitude, tau: f64) -> Result<f64> {
    require_real_symmetric(spectrum)?;
    Ok(biphoton_rate_unchecked(spectrum, tau))
}

fn biphoton_rate_unchecked(spectrum: &SpectralAmplitude, tau: f64) -> f64 {
    let g = spectrum.grid();
    let carrier = (g.center() * tau).cos();
    let mut acc = 0.0;
    for (k, v) in spectrum.values().iter().enumerate() {
        acc += v.re * (carrier + (g.offset(k) * tau).cos());
    }
    let integral = acc * g.spacing();
    integral * integral
}

/// Unnormalized single-photon (IR) interference intensity at `tau` \[s\]:
/// ∫|g|²(1 + cos(ωτ))dω.
pub fn ir_interference(spectrum: &SpectralAmplitude, tau: f64) -> f64 {
    let g = spectrum.grid();
    let mut acc = 0.0;
    for (k, v) in spectrum.values().iter().enumerate() {
        acc += v.norm_sqr() * (1.0 + (g.point(k) * tau).cos());
    }
    acc * g.spacing()
}

/// Fringe visibility (max − min)/(max + min) over a retardation window.
///
/// The window must contain at least one full fringe period of the trace.
/// Native samples are used when they resolve the fringe at 32 points per
/// period or better; coarser traces are linearly resampled to that density.
pub fn visibility(trace: &InterferenceTrace, window_center: f64, window_width: f64) -> Result<f64> {
    if !window_width.is_finite() || window_width <= 0.0 {
        return Err(Error::Usage(format!(
            "window width must be positive, got {window_width}"
        )));
    }
    let lo = (window_center - window_width / 2.0).max(trace.retardations[0]);
    let hi = (window_center + window_width / 2.0)
        .min(*trace.retardations.last().expect("non-empty trace"));
    let period = trace.fringe_period;
    if hi - lo < period {
        return Err(Error::Usage(format!(
            "window [{lo:e}, {hi:e}] spans less than one fringe period {period:e}"
        )));
    }

    let native: Vec<f64> = trace
        .retardations
        .iter()
        .zip(&trace.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, v)| *v)
        .collect();
    let native_spacing = (hi - lo) / native.len().max(1) as f64;

    let samples = if !native.is_empty() && native_spacing <= period / 32.0 {
        native
    } else {
        let n = ((hi - lo) / period * 32.0).ceil() as usize + 1;
        (0..n)
            .map(|j| trace.interpolate(lo + (hi - lo) * j as f64 / (n - 1) as f64))
            .collect()
    };

    let max = samples.iter().copied().fold(f64::MIN, f64::max);
    let min = samples.iter().copied().fold(f64::MAX, f64::min);
    if max + min <= 0.0 {
        return Ok(0.0);
    }
    Ok((max - min) / (max + min))
}

/// Scan specification: retardations τ₀ + [start, stop] in steps of `step`,
/// fine enough to resolve the biphoton fringe (≥ 8 samples per 2π/ω_p).
#[derive(Debug, Clone)]
pub struct MzScanSpec {
    spectrum: SpectralAmplitude,
    start: f64,
    stop: f64,
    step: f64,
    offset: f64,
}

impl MzScanSpec {
    pub fn new(
        spectrum: SpectralAmplitude,
        start: f64,
        stop: f64,
        step: f64,
        offset: f64,
    ) -> Result<Self> {
        require_real_symmetric(&spectrum)?;
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::Config(format!(
                "scan step must be positive, got {step}"
            )));
        }
        if !start.is_finite() || !stop.is_finite() || stop <= start {
            return Err(Error::Config(format!(
                "scan range [{start}, {stop}] is empty"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::Config("non-finite retardation offset".into()));
        }
        let fringe = 2.0 * std::f64::consts::PI / spectrum.grid().pump_frequency();
        if step > fringe / 8.0 {
            return Err(Error::Config(format!(
                "scan step {step:e} undersamples the biphoton fringe: need <= {:e} \
                 (8 samples per period)",
                fringe / 8.0
            )));
        }
        Ok(Self {
            spectrum,
            start,
            stop,
            step,
            offset,
        })
    }

    pub fn spectrum(&self) -> &SpectralAmplitude {
        &self.spectrum
    }

    /// Absolute retardations visited by the scan.
    pub fn retardations(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step).round() as usize + 1;
        (0..n)
            .map(|j| self.offset + self.start + j as f64 * self.step)
            .collect()
    }
}

/// Run the scan: evaluate both traces over τ₀ + range and normalize each to
/// its own maximum.
pub fn mz_scan(spec: &MzScanSpec) -> Result<(InterferenceTrace, InterferenceTrace)> {
    let taus = spec.retardations();
    let bi_raw: Vec<f64> = taus
        .iter()
        .map(|&t| biphoton_rate_unchecked(&spec.spectrum, t))
        .collect();
    let ir_raw: Vec<f64> = taus
        .iter()
        .map(|&t| ir_interference(&spec.spectrum, t))
        .collect();
    let w0 = spec.spectrum.grid().center();
    let bi = InterferenceTrace::new(
        TraceKind::Biphoton,
        2.0 * std::f64::consts::PI / (2.0 * w0),
        taus.clone(),
        bi_raw,
    )?;
    let ir = InterferenceTrace::new(
        TraceKind::SinglePhoton,
        2.0 * std::f64::consts::PI / w0,
        taus,
        ir_raw,
    )?;
    Ok((bi, ir))
}

/// Write both traces as CSV: tau_s, biphoton_rate_rel, ir_intensity_rel.
pub fn write_scan_csv<W: Write>(
    mut out: W,
    biphoton: &InterferenceTrace,
    single: &InterferenceTrace,
) -> Result<()> {
    if biphoton.retardations() != single.retardations() {
        return Err(Error::Usage(
            "traces were not scanned over the same retardations".into(),
        ));
    }
    writeln!(out, "tau_s,biphoton_rate_rel,ir_intensity_rel")?;
    for ((t, b), i) in biphoton
        .retardations()
        .iter()
        .zip(biphoton.values())
        .zip(single.values())
    {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", t, b, i)?;
    }
    Ok(())
}
