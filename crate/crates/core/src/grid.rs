//! Discrete frequency/time sampling lattice shared by all other modules.
//!
//! A [`FrequencyGrid`] is a uniform angular-frequency axis centered on the
//! degeneracy point ω₀ = ω_p/2, with points ω₀ + (k − N/2)·Δω for
//! k = 0..N−1. Keeping the grid mirror-symmetric about ω₀ makes the map
//! ω ↦ ω_p − ω an exact index permutation, so the pair filter
//! Φ_s(ω)Φ_i(ω_p − ω) never needs interpolation. The single unpaired edge
//! bin (k = 0) mirrors onto itself modulo the span, the usual discrete
//! half-bin convention; spectra are required to vanish there in practice by
//! the aliasing guards on their bandwidth.

use crate::error::{Error, Result};

/// Uniform angular-frequency axis centered on the degeneracy point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    center: f64,
    spacing: f64,
    count: usize,
}

impl FrequencyGrid {
    /// Build a grid of `count` points covering `span` rad/s around `center`,
    /// Δω = span/count. `count` must be even and ≥ 8.
    pub fn new(center: f64, span: f64, count: usize) -> Result<Self> {
        if !center.is_finite() || center <= 0.0 {
            return Err(Error::Config(format!(
                "grid center must be finite and positive, got {center}"
            )));
        }
        if !span.is_finite() || span <= 0.0 {
            return Err(Error::Config(format!(
                "grid span must be finite and positive, got {span}"
            )));
        }
        if count < 8 || !count.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid size must be even and at least 8, got {count}"
            )));
        }
        if span / 2.0 >= center {
            return Err(Error::Config(format!(
                "grid span {span} reaches non-positive frequencies around center {center}"
            )));
        }
        Ok(Self {
            center,
            spacing: span / count as f64,
            count,
        })
    }

    /// Degeneracy point ω₀ \[rad/s\].
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Bin spacing Δω \[rad/s\].
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of points N.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total covered span N·Δω \[rad/s\].
    pub fn span(&self) -> f64 {
        self.spacing * self.count as f64
    }

    /// Pump frequency ω_p = 2ω₀ \[rad/s\].
    pub fn pump_frequency(&self) -> f64 {
        2.0 * self.center
    }

    /// Absolute frequency of bin `k`: ω₀ + (k − N/2)·Δω.
    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k < self.count);
        self.center + self.offset(k)
    }

    /// Baseband offset of bin `k` from the center: (k − N/2)·Δω.
    pub fn offset(&self, k: usize) -> f64 {
        (k as isize - (self.count / 2) as isize) as f64 * self.spacing
    }

    /// Iterator over all absolute frequencies.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }

    /// Index of the bin at ω_p − ω_k. Exact for every k ≥ 1; the edge bin
    /// k = 0 maps onto itself modulo the span.
    pub fn mirror_index(&self, k: usize) -> usize {
        debug_assert!(k < self.count);
        (self.count - k) % self.count
    }

    /// Conjugate time-axis spacing Δt = 2π/(N·Δω).
    pub fn time_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.count as f64 * self.spacing)
    }

    /// The conjugate time grid: N points spaced Δt = 2π/(N·Δω), t = 0 at
    /// index N/2.
    pub fn conjugate_time_grid(&self) -> TimeGrid {
        TimeGrid {
            spacing: self.time_spacing(),
            count: self.count,
        }
    }
}

/// Uniform time axis conjugate to a [`FrequencyGrid`], centered on t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    spacing: f64,
    count: usize,
}

impl TimeGrid {
    /// Spacing Δt \[s\].
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of sample `j`: (j − N/2)·Δt. Sample N/2 is exactly t = 0.
    pub fn point(&self, j: usize) -> f64 {
        debug_assert!(j < self.count);
        (j as isize - (self.count / 2) as isize) as f64 * self.spacing
    }

    /// Earliest sampled time.
    pub fn min(&self) -> f64 {
        self.point(0)
    }

    /// Latest sampled time.
    pub fn max(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.point(j))
    }
}
