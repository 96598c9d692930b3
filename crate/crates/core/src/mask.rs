//! Physical SLM phase masks M(ω) and the effective two-photon pair filter
//! Φ(ω) = Φ_s(ω)Φ_i(ω_p − ω).
//!
//! Both photons of a pair traverse the same physical mask, so Φ_s and Φ_i
//! are one function sampled in the two half-bands. For the pair labelled by
//! its signal frequency ω ≥ ω₀ the joint phase is m(ω) + m(ω_p − ω),
//! evaluated by exact index mirroring. The lower half-band of the filter is
//! the Hermitian extension of the upper half, value(ω) = conj(value(ω_p−ω)),
//! which keeps the relative-time axis oriented as signal-minus-idler: the
//! opposite-slope delay mask composes to exp(−i(ω−ω₀)T) across the whole
//! band and shifts the relative-time amplitude to t = +T (signal delayed).
//! Step masks with joint phase in {0, π} are unaffected by the extension
//! since −π ≡ π.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

/// Real spectral phase per grid point \[rad\], as programmed on the SLM.
#[derive(Debug, Clone)]
pub struct PhaseMask {
    grid: FrequencyGrid,
    phase: Vec<f64>,
}

impl PhaseMask {
    /// All-zero (transparent) mask.
    pub fn zero(grid: &FrequencyGrid) -> Self {
        Self {
            grid: grid.clone(),
            phase: vec![0.0; grid.len()],
        }
    }

    /// Wrap explicit per-bin phases.
    pub fn from_phases(grid: &FrequencyGrid, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.len() {
            return Err(Error::Usage(format!(
                "{} phases for a grid of {} points",
                phase.len(),
                grid.len()
            )));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("non-finite mask phase".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            phase,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn phases(&self) -> &[f64] {
        &self.phase
    }

    /// Write as two-column text: angular frequency \[rad/s\] and phase \[rad\].
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# omega_rad_per_s phase_rad")?;
        for (k, p) in self.phase.iter().enumerate() {
            writeln!(out, "{:.16e} {:.16e}", self.grid.point(k), p)?;
        }
        Ok(())
    }

    /// Read the two-column text format back. The frequency column must
    /// reproduce `grid` exactly, bin for bin.
    pub fn read_text<R: BufRead>(grid: &FrequencyGrid, input: R) -> Result<Self> {
        let mut phase = Vec::with_capacity(grid.len());
        let mut row = 0usize;
        for line in input.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cols = trimmed.split_whitespace();
            let (w, p) = match (cols.next(), cols.next(), cols.next()) {
                (Some(w), Some(p), None) => (w, p),
                _ => {
                    return Err(Error::Parse(format!(
                        "expected two columns, got {trimmed:?}"
                    )))
                }
            };
            let w: f64 = w
                .parse()
                .map_err(|e| Error::Parse(format!("bad frequency {w:?}: {e}")))?;
            let p: f64 = p
                .parse()
                .map_err(|e| Error::Parse(format!("bad phase {p:?}: {e}")))?;
            if row >= grid.len() {
                return Err(Error::GridMismatch(format!(
                    "more than {} rows for the expected grid",
                    grid.len()
                )));
            }
            if w != grid.point(row) {
                return Err(Error::GridMismatch(format!(
                    "row {row}: frequency {w:e} does not match grid point {:e}",
                    grid.point(row)
                )));
            }
            phase.push(p);
            row += 1;
        }
        if row != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} rows for a grid of {} points",
                row,
                grid.len()
            )));
        }
        Self::from_phases(grid, phase)
    }
}

/// Unit-modulus two-photon spectral filter Φ(ω).
#[derive(Debug, Clone)]
pub struct PairFilter {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl PairFilter {
    /// Unity (no-op) filter.
    pub fn unity(grid: &FrequencyGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(1.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Linear spectral phases of opposite slope on the two half-bands:
/// −(T/2)·|ω − ω₀|, i.e. slope −T/2 on the signal half (ω > ω₀) and +T/2 on
/// the idler half. Delays the signal relative to the idler by `delay` \[s\].
pub fn opposite_linear(grid: &FrequencyGrid, delay: f64) -> Result<PhaseMask> {
    if !delay.is_finite() {
        return Err(Error::Domain("non-finite delay".into()));
    }
    // Sampling guard: the largest phase excursion (|T|/2 at span/2 from the
    // center) must stay below N·π.
    let excursion = delay.abs() / 2.0 * grid.span() / 2.0;
    if excursion >= grid.len() as f64 * PI {
        return Err(Error::Config(format!(
            "delay {delay:e} s drives the mask excursion {excursion:.3e} rad past N·π"
        )));
    }
    let phase = (0..grid.len())
        .map(|k| -(delay / 2.0) * grid.offset(k).abs())
        .collect();
    PhaseMask::from_phases(grid, phase)
}

/// Phase step of π: zero below `omega_step` \[rad/s\], π above it.
pub fn pi_step(grid: &FrequencyGrid, omega_step: f64) -> Result<PhaseMask> {
    let lo = grid.point(0);
    let hi = grid.point(grid.len() - 1);
    if !omega_step.is_finite() || omega_step < lo || omega_step > hi {
        return Err(Error::Config(format!(
            "step position {omega_step:e} outside the grid [{lo:e}, {hi:e}]"
        )));
    }
    let phase = (0..grid.len())
        .map(|k| if grid.point(k) > omega_step { PI } else { 0.0 })
        .collect();
    PhaseMask::from_phases(grid, phase)
}

/// Compose the effective pair filter of a single physical mask.
///
/// Upper half-band: value = exp(i·[m(ω) + m(ω_p−ω)]) by exact index
/// mirroring; lower half-band: the Hermitian extension (see module docs).
pub fn compose_pair_filter(mask: &PhaseMask) -> PairFilter {
    let grid = mask.grid().clone();
    let n = grid.len();
    let phases = mask.phases();
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    for k in n / 2..n {
        let m = grid.mirror_index(k);
        let joint = phases[k] + phases[m];
        let v = Complex64::from_polar(1.0, joint);
        values[k] = v;
        if m != k {
            values[m] = v.conj();
        }
    }
    // Unpaired edge bin: mirrors onto itself modulo the span; treat it as
    // lower-half.
    values[0] = Complex64::from_polar(1.0, 2.0 * phases[0]).conj();
    PairFilter { grid, values }
}

/// Model a finite spatial light modulator: partition the grid into
/// `pixels` contiguous blocks, replace each block's phase by its mean, and
/// snap the mean to the nearest of `levels` uniformly spaced values in
/// [0, 2π).
pub fn slm_quantize(mask: &PhaseMask, pixels: usize, levels: usize) -> Result<PhaseMask> {
    let n = mask.grid().len();
    if pixels == 0 || pixels > n {
        return Err(Error::Config(format!(
            "pixel count must lie in 1..={n}, got {pixels}"
        )));
    }
    if levels < 2 {
        return Err(Error::Config(format!(
            "at least 2 phase levels required, got {levels}"
        )));
    }
    let tau = 2.0 * PI;
    let mut phase = vec![0.0; n];
    for p in 0..pixels {
        let start = p * n / pixels;
        let end = (p + 1) * n / pixels;
        let mean = mask.phases()[start..end].iter().sum::<f64>() / (end - start) as f64;
        let wrapped = mean.rem_euclid(tau);
        let level = (wrapped * levels as f64 / tau).round() as usize % levels;
        let snapped = level as f64 * tau / levels as f64;
        phase[start..end].fill(snapped);
    }
    PhaseMask::from_phases(mask.grid(), phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(1.7703e15, 2.0 * PI * 65.6e12, 256).unwrap()
    }

    #[test]
    fn zero_delay_mask_is_flat_and_composes_to_unity() {
        let g = grid();
        let m = opposite_linear(&g, 0.0).unwrap();
        assert!(m.phases().iter().all(|&p| p == 0.0));
        let f = compose_pair_filter(&m);
        for v in f.values() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn opposite_linear_is_even_with_negative_slope_magnitude() {
        let g = grid();
        let t = 300e-15;
        let m = opposite_linear(&g, t).unwrap();
        for k in 1..g.len() {
            let mirror = g.mirror_index(k);
            assert_relative_eq!(m.phases()[k], m.phases()[mirror], max_relative = 1e-14);
            assert_relative_eq!(
                m.phases()[k],
                -(t / 2.0) * g.offset(k).abs(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn opposite_linear_composes_to_a_pure_delay_filter() {
        let g = grid();
        let t = 300e-15;
        let f = compose_pair_filter(&opposite_linear(&g, t).unwrap());
        for k in 0..g.len() {
            let expected = Complex64::from_polar(1.0, -g.offset(k) * t);
            let d = (f.values()[k] - expected).norm();
            assert!(d < 1e-12, "bin {k}: |Δ| = {d:e}");
        }
    }

    #[test]
    fn excursion_guard_rejects_huge_delays() {
        let g = grid();
        assert!(matches!(opposite_linear(&g, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn pi_step_phases() {
        let g = grid();
        let step = g.center() + 10.25 * g.spacing();
        let m = pi_step(&g, step).unwrap();
        for k in 0..g.len() {
            let expected = if g.point(k) > step { PI } else { 0.0 };
            assert_eq!(m.phases()[k], expected);
        }
    }

    #[test]
    fn pi_step_outside_grid_rejected() {
        let g = grid();
        assert!(matches!(
            pi_step(&g, g.point(g.len() - 1) + g.spacing()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn pair_filter_is_unit_modulus_and_hermitian_mirrored() {
        let g = grid();
        let m = pi_step(&g, g.center() + 20.5 * g.spacing()).unwrap();
        let f = compose_pair_filter(&m);
        for k in 1..g.len() {
            let mirror = g.mirror_index(k);
            assert_relative_eq!(f.values()[k].norm(), 1.0, epsilon = 1e-14);
            let d = (f.values()[k] - f.values()[mirror].conj()).norm();
            assert!(d < 1e-14);
        }
    }

    #[test]
    fn pi_step_filter_is_real_pm_one() {
        let g = grid();
        let m = pi_step(&g, g.center() + 20.5 * g.spacing()).unwrap();
        let f = compose_pair_filter(&m);
        // Paired bins only; the unpaired edge bin k = 0 mirrors onto itself.
        for k in 1..g.len() {
            let v = f.values()[k];
            assert!(v.im.abs() < 1e-15);
            let inner = g.offset(k).abs() < 20.5 * g.spacing();
            assert_relative_eq!(v.re, if inner { 1.0 } else { -1.0 }, epsilon = 1e-12);
        }
    }

    #[test]
    fn delay_filters_form_a_group_under_composition() {
        let g = grid();
        let (t1, t2) = (120e-15, -75e-15);
        let f1 = compose_pair_filter(&opposite_linear(&g, t1).unwrap());
        let f2 = compose_pair_filter(&opposite_linear(&g, t2).unwrap());
        let f12 = compose_pair_filter(&opposite_linear(&g, t1 + t2).unwrap());
        for k in 0..g.len() {
            let d = (f1.values()[k] * f2.values()[k] - f12.values()[k]).norm();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn composition_ignores_two_pi_jumps() {
        let g = grid();
        let base = opposite_linear(&g, 50e-15).unwrap();
        let mut shifted = base.phases().to_vec();
        for (k, p) in shifted.iter_mut().enumerate() {
            if k % 3 == 0 {
                *p += 2.0 * PI;
            }
        }
        let fa = compose_pair_filter(&base);
        let fb = compose_pair_filter(&PhaseMask::from_phases(&g, shifted).unwrap());
        for k in 0..g.len() {
            assert!((fa.values()[k] - fb.values()[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn quantize_two_levels_snaps_to_zero_or_pi() {
        let g = grid();
        let m = opposite_linear(&g, 80e-15).unwrap();
        let q = slm_quantize(&m, 32, 2).unwrap();
        for p in q.phases() {
            assert!(*p == 0.0 || (*p - PI).abs() < 1e-15);
        }
    }

    #[test]
    fn quantize_identity_limit() {
        let g = grid();
        let m = opposite_linear(&g, 10e-15).unwrap();
        let q = slm_quantize(&m, g.len(), 1 << 24).unwrap();
        let tau = 2.0 * PI;
        for k in 0..g.len() {
            let a = m.phases()[k].rem_euclid(tau);
            let b = q.phases()[k].rem_euclid(tau);
            let mut d = (a - b).abs();
            d = d.min(tau - d);
            assert!(d <= tau / (1 << 24) as f64 + 1e-12);
        }
    }

    #[test]
    fn quantize_keeps_constant_masks() {
        let g = grid();
        let m = PhaseMask::from_phases(&g, vec![PI; g.len()]).unwrap();
        let q = slm_quantize(&m, 7, 2).unwrap();
        assert!(q.phases().iter().all(|&p| (p - PI).abs() < 1e-15));
    }

    #[test]
    fn quantize_rejects_bad_shapes() {
        let g = grid();
        let m = PhaseMask::zero(&g);
        assert!(matches!(
            slm_quantize(&m, g.len() + 1, 2),
            Err(Error::Config(_))
        ));
        assert!(matches!(slm_quantize(&m, 4, 1), Err(Error::Config(_))));
    }

    #[test]
    fn mask_text_round_trip() {
        let g = grid();
        let m = opposite_linear(&g, 137e-15).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = PhaseMask::read_text(&g, buf.as_slice()).unwrap();
        assert_eq!(m.phases(), back.phases());
    }

    #[test]
    fn mask_import_rejects_wrong_grid() {
        let g = grid();
        let m = PhaseMask::zero(&g);
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let other = FrequencyGrid::new(1.7703e15, 2.0 * PI * 30e12, 256).unwrap();
        assert!(matches!(
            PhaseMask::read_text(&other, buf.as_slice()),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn mask_import_rejects_malformed_rows() {
        let g = grid();
        let three = format!("{:.16e} 0.0 0.0\n", g.point(0));
        assert!(matches!(
            PhaseMask::read_text(&g, three.as_bytes()),
            Err(Error::Parse(_))
        ));
        let bad_float = format!("{:.16e} not-a-phase\n", g.point(0));
        assert!(matches!(
            PhaseMask::read_text(&g, bad_float.as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            PhaseMask::read_text(&g, b"".as_slice()),
            Err(Error::GridMismatch(_))
        ));
    }
}
