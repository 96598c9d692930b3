//! Sum-frequency generation as an ultrafast coincidence detector.
//!
//! Flux bound, spectral photon density, the three-term SFG rate
//! decomposition, the coincidence-regime verdict, delay scans of the
//! relative-time amplitude, and a seeded photon-counting model with dark
//! counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use std::io::Write;

use crate::error::{Error, Result};
use crate::units::{PLANCK_CONSTANT, SPEED_OF_LIGHT};
use crate::wavefunction::TimeAmplitude;

/// Phase-matching bandwidths of the up-conversion stage, all in Hz:
/// `delta_lf` for the low-frequency inputs, `delta_uc` for the up-converted
/// field, `input_bandwidth` Δ of the incident light, `delta_dc` of the
/// down-conversion source, and `pump_bandwidth` δ_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfgDetectorSpec {
    pub delta_lf: f64,
    pub delta_uc: f64,
    pub input_bandwidth: f64,
    pub delta_dc: f64,
    pub pump_bandwidth: f64,
}

impl SfgDetectorSpec {
    pub fn new(
        delta_lf: f64,
        delta_uc: f64,
        input_bandwidth: f64,
        delta_dc: f64,
        pump_bandwidth: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("delta_lf", delta_lf),
            ("delta_uc", delta_uc),
            ("input_bandwidth", input_bandwidth),
            ("delta_dc", delta_dc),
            ("pump_bandwidth", pump_bandwidth),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self {
            delta_lf,
            delta_uc,
            input_bandwidth,
            delta_dc,
            pump_bandwidth,
        })
    }

    /// Identical crystals for down- and up-conversion: Δ_LF = Δ = Δ_DC.
    pub fn matched_crystals(delta_dc: f64, delta_uc: f64, pump_bandwidth: f64) -> Result<Self> {
        Self::new(delta_dc, delta_uc, delta_dc, delta_dc, pump_bandwidth)
    }
}

/// Photon flux together with its spectral photon density n = Φ/Δ_DC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxState {
    pub flux: f64,
    pub density: f64,
    pub wavelength: f64,
}

impl FluxState {
    pub fn from_flux(flux: f64, delta_dc: f64, wavelength: f64) -> Result<Self> {
        let density = spectral_photon_density(flux, delta_dc)?;
        if !wavelength.is_finite() || wavelength <= 0.0 {
            return Err(Error::Domain(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self {
            flux,
            density,
            wavelength,
        })
    }

    /// Build from an optical power \[W\] via the photon energy hc/λ.
    pub fn from_power(power: f64, delta_dc: f64, wavelength: f64) -> Result<Self> {
        if !power.is_finite() || power < 0.0 {
            return Err(Error::Domain(format!(
                "power must be finite and non-negative, got {power}"
            )));
        }
        if !wavelength.is_finite() || wavelength <= 0.0 {
            return Err(Error::Domain(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        let flux = power * wavelength / (PLANCK_CONSTANT * SPEED_OF_LIGHT);
        Self::from_flux(flux, delta_dc, wavelength)
    }

    pub fn power(&self) -> f64 {
        flux_to_power(self.flux, self.wavelength).expect("validated at construction")
    }
}

/// Maximal flux at which down-converted light still arrives as separated
/// pairs: Φ_max ≈ Δ_DC, read as photons/s.
pub fn max_pair_flux(delta_dc: f64) -> Result<f64> {
    if !delta_dc.is_finite() || delta_dc < 0.0 {
        return Err(Error::Domain(format!(
            "bandwidth must be finite and non-negative, got {delta_dc}"
        )));
    }
    Ok(delta_dc)
}

/// Mean spectral photon density n = Φ/Δ_DC (dimensionless).
pub fn spectral_photon_density(flux: f64, delta_dc: f64) -> Result<f64> {
    if !delta_dc.is_finite() || delta_dc <= 0.0 {
        return Err(Error::Domain(format!(
            "bandwidth must be positive, got {delta_dc}"
        )));
    }
    if !flux.is_finite() || flux < 0.0 {
        return Err(Error::Domain(format!(
            "flux must be finite and non-negative, got {flux}"
        )));
    }
    Ok(flux / delta_dc)
}

/// Optical power \[W\] carried by `flux` photons/s at wavelength λ: Φ·hc/λ.
pub fn flux_to_power(flux: f64, wavelength: f64) -> Result<f64> {
    if !wavelength.is_finite() || wavelength <= 0.0 {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    if !flux.is_finite() || flux < 0.0 {
        return Err(Error::Domain(format!(
            "flux must be finite and non-negative, got {flux}"
        )));
    }
    Ok(flux * PLANCK_CONSTANT * SPEED_OF_LIGHT / wavelength)
}

/// The three contributions to the SFG rate, in relative rate units with no
/// overall proportionality constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfgRateTerms {
    /// δ_UC·n² — the coherent narrowband term.
    pub coherent: f64,
    /// Δ_DC·n² — thermal bunching of non-partner photons.
    pub thermal: f64,
    /// Δ_DC·n — up-conversion of entangled partners; dominates at n ≪ 1.
    pub entangled: f64,
}

/// Evaluate the rate decomposition R ∝ δ_UC·n² + Δ_DC·n² + Δ_DC·n.
pub fn sfg_rate_terms(density: f64, delta_uc: f64, delta_dc: f64) -> Result<SfgRateTerms> {
    for (name, v) in [
        ("density", density),
        ("delta_uc", delta_uc),
        ("delta_dc", delta_dc),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    Ok(SfgRateTerms {
        coherent: delta_uc * density * density,
        thermal: delta_dc * density * density,
        entangled: delta_dc * density,
    })
}

/// Whether the SFG stage acts as a coincidence detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RegimeVerdict {
    /// Neither condition set holds.
    NotCoincidence,
    /// Coincidence detection for entangled pairs only: Δ_LF ≥ Δ, δ_UC > δ_p,
    /// n < 1.
    EntangledPairCoincidence,
    /// Coincidence detection for arbitrary light: Δ_LF ≥ Δ and δ_UC > 2Δ.
    UniversalCoincidence,
}

/// One tested inequality and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub satisfied: bool,
}

/// Verdict plus the named conditions that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub verdict: RegimeVerdict,
    pub conditions: Vec<ConditionCheck>,
}

/// Classify the detector. Inequalities are applied exactly as written:
/// equality fails the strict ones.
pub fn coincidence_regime(spec: &SfgDetectorSpec, density: f64) -> Result<RegimeReport> {
    if !density.is_finite() || density < 0.0 {
        return Err(Error::Domain(format!(
            "density must be finite and non-negative, got {density}"
        )));
    }
    let input_within_lf = spec.delta_lf >= spec.input_bandwidth;
    let uc_covers_full_band = spec.delta_uc > 2.0 * spec.input_bandwidth;
    let uc_covers_pump = spec.delta_uc > spec.pump_bandwidth;
    let below_pair_flux = density < 1.0;

    let verdict = if input_within_lf && uc_covers_full_band {
        RegimeVerdict::UniversalCoincidence
    } else if input_within_lf && uc_covers_pump && below_pair_flux {
        RegimeVerdict::EntangledPairCoincidence
    } else {
        RegimeVerdict::NotCoincidence
    };
    Ok(RegimeReport {
        verdict,
        conditions: vec![
            ConditionCheck {
                name: "delta_lf >= input_bandwidth",
                satisfied: input_within_lf,
            },
            ConditionCheck {
                name: "delta_uc > 2*input_bandwidth",
                satisfied: uc_covers_full_band,
            },
            ConditionCheck {
                name: "delta_uc > pump_bandwidth",
                satisfied: uc_covers_pump,
            },
            ConditionCheck {
                name: "density < 1",
                satisfied: below_pair_flux,
            },
        ],
    })
}

/// Normalized SFG delay scan: r(τ) = |G(τ)|²/max|G|², linearly interpolated
/// between time samples.
pub fn delay_scan(amplitude: &TimeAmplitude, delays: &[f64]) -> Result<Vec<f64>> {
    delays
        .iter()
        .map(|&tau| Ok(amplitude.interpolate(tau)?.norm_sqr()))
        .collect()
}

/// Local maxima of a scanned rate trace at or above `threshold` (relative to
/// the trace maximum). Returns (index, value) pairs.
pub fn scan_lobes(rates: &[f64], threshold: f64) -> Vec<(usize, f64)> {
    let peak = rates.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Vec::new();
    }
    let floor = threshold * peak;
    let n = rates.len();
    let mut lobes = Vec::new();
    for j in 1..n.saturating_sub(1) {
        if rates[j] >= floor && rates[j] > rates[j - 1] && rates[j] >= rates[j + 1] {
            lobes.push((j, rates[j]));
        }
    }
    lobes
}

/// Poisson counting model: peak calibration rate, detector dark rate,
/// integration time and the seed of the per-call generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountModel {
    pub peak_rate: f64,
    pub dark_rate: f64,
    pub integration_time: f64,
    pub seed: u64,
}

impl CountModel {
    pub fn new(peak_rate: f64, dark_rate: f64, integration_time: f64, seed: u64) -> Result<Self> {
        for (name, v) in [("peak_rate", peak_rate), ("dark_rate", dark_rate)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !integration_time.is_finite() || integration_time <= 0.0 {
            return Err(Error::Domain(format!(
                "integration time must be positive, got {integration_time}"
            )));
        }
        Ok(Self {
            peak_rate,
            dark_rate,
            integration_time,
            seed,
        })
    }
}

/// One integration window: raw Poisson counts and the dark-subtracted rate
/// estimate (raw − dark·T)/T in counts/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSample {
    pub raw: u64,
    pub dark_subtracted_rate: f64,
}

/// Draw Poisson counts for each rate \[counts/s\] over the model's integration
/// time, dark counts included, then report the dark-subtracted estimate.
/// One generator per call, seeded from the model: fixed seed, fixed output.
pub fn simulate_counts(rates: &[f64], model: &CountModel) -> Result<Vec<CountSample>> {
    if let Some(bad) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::Domain(format!(
            "count rates must be finite and non-negative, got {bad}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let dark_mean = model.dark_rate * model.integration_time;
    rates
        .iter()
        .map(|&rate| {
            let mean = (rate + model.dark_rate) * model.integration_time;
            let raw = if mean > 0.0 {
                let poisson = Poisson::new(mean)
                    .map_err(|e| Error::Domain(format!("invalid Poisson mean {mean}: {e}")))?;
                poisson.sample(&mut rng) as u64
            } else {
                0
            };
            Ok(CountSample {
                raw,
                dark_subtracted_rate: (raw as f64 - dark_mean) / model.integration_time,
            })
        })
        .collect()
}

/// Write a delay scan as CSV: delay_s, rate_rel, counts_raw,
/// counts_dark_subtracted.
pub fn write_scan_csv<W: Write>(
    mut out: W,
    delays: &[f64],
    rates: &[f64],
    counts: &[CountSample],
) -> Result<()> {
    if delays.len() != rates.len() || delays.len() != counts.len() {
        return Err(Error::Usage(format!(
            "column lengths differ: {} delays, {} rates, {} counts",
            delays.len(),
            rates.len(),
            counts.len()
        )));
    }
    writeln!(out, "delay_s,rate_rel,counts_raw,counts_dark_subtracted")?;
    for ((d, r), c) in delays.iter().zip(rates).zip(counts) {
        writeln!(
            out,
            "{:.16e},{:.16e},{},{:.16e}",
            d, r, c.raw, c.dark_subtracted_rate
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use crate::mask::PairFilter;
    use crate::spectrum::gaussian_spectrum;
    use crate::wavefunction::relative_wavefunction;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn flux_bound_is_the_identity_on_bandwidth() {
        assert_eq!(max_pair_flux(8.2e12).unwrap(), 8.2e12);
        assert_eq!(max_pair_flux(0.0).unwrap(), 0.0);
        assert_eq!(max_pair_flux(1e12).unwrap(), 1e12);
        assert!(matches!(max_pair_flux(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn photon_density_examples() {
        assert_relative_eq!(
            spectral_photon_density(8.2e12, 8.2e12).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        // 0.25 µW at 1064 nm is 1.339e12 photons/s.
        let flux = 0.25e-6 * 1.064e-6 / (PLANCK_CONSTANT * SPEED_OF_LIGHT);
        assert_relative_eq!(flux, 1.339_075_006_966_360_8e12, max_relative = 1e-12);
        let n = spectral_photon_density(flux, 8.2e12).unwrap();
        assert_relative_eq!(n, 0.163, max_relative = 0.01);
        assert_eq!(spectral_photon_density(0.0, 5.0).unwrap(), 0.0);
        assert!(matches!(
            spectral_photon_density(1.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn flux_to_power_examples() {
        // Photon energy at 1064 nm is 1.8670e-19 J.
        let p = flux_to_power(8.2e12, 1.064e-6).unwrap();
        assert_relative_eq!(p, 1.5e-6, max_relative = 0.03);
        assert_eq!(flux_to_power(0.0, 1.064e-6).unwrap(), 0.0);
        let p13 = flux_to_power(1e13, 1.064e-6).unwrap();
        assert_relative_eq!(p13, 1.866_960_392_057_263_6e-6, max_relative = 1e-12);
        assert!(matches!(flux_to_power(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn flux_state_round_trip() {
        let fs = FluxState::from_power(0.25e-6, 8.2e12, 1.064e-6).unwrap();
        assert_relative_eq!(fs.power(), 0.25e-6, max_relative = 1e-12);
        assert_relative_eq!(fs.density, 0.16330183011784888, max_relative = 1e-12);
    }

    #[test]
    fn rate_terms_paper_point() {
        let t = sfg_rate_terms(0.16, 1.06e11, 8.2e12).unwrap();
        assert_relative_eq!(t.coherent, 2.7136e9, max_relative = 1e-12);
        assert_relative_eq!(t.thermal, 2.0992e11, max_relative = 1e-12);
        assert_relative_eq!(t.entangled, 1.312e12, max_relative = 1e-12);
        assert!(t.entangled > t.thermal);
        assert_relative_eq!(t.entangled / t.thermal, 1.0 / 0.16, max_relative = 1e-12);
    }

    #[test]
    fn rate_terms_cross_at_unit_density() {
        let t = sfg_rate_terms(1.0, 1.06e11, 8.2e12).unwrap();
        assert_eq!(t.thermal, t.entangled);
        let t2 = sfg_rate_terms(2.0, 1.06e11, 8.2e12).unwrap();
        assert!(t2.thermal > t2.entangled);
    }

    #[test]
    fn regime_paper_setup_is_entangled_pair_coincidence() {
        let spec = SfgDetectorSpec::matched_crystals(8.2e12, 1.06e11, 5e6).unwrap();
        let report = coincidence_regime(&spec, 0.16).unwrap();
        assert_eq!(report.verdict, RegimeVerdict::EntangledPairCoincidence);
        let by_name = |n: &str| {
            report
                .conditions
                .iter()
                .find(|c| c.name == n)
                .unwrap()
                .satisfied
        };
        assert!(by_name("delta_lf >= input_bandwidth"));
        assert!(!by_name("delta_uc > 2*input_bandwidth"));
        assert!(by_name("delta_uc > pump_bandwidth"));
        assert!(by_name("density < 1"));
    }

    #[test]
    fn regime_universal_and_none() {
        let spec = SfgDetectorSpec::matched_crystals(8.2e12, 3.0 * 8.2e12, 5e6).unwrap();
        assert_eq!(
            coincidence_regime(&spec, 0.5).unwrap().verdict,
            RegimeVerdict::UniversalCoincidence
        );
        let spec = SfgDetectorSpec::matched_crystals(8.2e12, 1e6, 5e6).unwrap();
        assert_eq!(
            coincidence_regime(&spec, 0.5).unwrap().verdict,
            RegimeVerdict::NotCoincidence
        );
    }

    #[test]
    fn regime_is_monotone_in_delta_uc() {
        let mut last = RegimeVerdict::NotCoincidence;
        for duc in [1e5, 1e7, 1e11, 1.7e13, 1e14] {
            let spec = SfgDetectorSpec::matched_crystals(8.2e12, duc, 5e6).unwrap();
            let v = coincidence_regime(&spec, 0.16).unwrap().verdict;
            assert!(v >= last, "verdict demoted when delta_uc rose to {duc:e}");
            last = v;
        }
        assert_eq!(last, RegimeVerdict::UniversalCoincidence);
    }

    #[test]
    fn delay_scan_is_normalized_and_even_for_unshaped_input() {
        let span = 2.0 * PI * 65.6e12;
        let g = FrequencyGrid::new(1.7703491e15, span, 1024).unwrap();
        let s = gaussian_spectrum(&g, 2.0 * PI * 8.2e12).unwrap();
        let amp = relative_wavefunction(&s, &PairFilter::unity(&g)).unwrap();
        let delays: Vec<f64> = (-120..=120).map(|m| m as f64 * 5e-15).collect();
        let rates = delay_scan(&amp, &delays).unwrap();
        let m = rates.len() / 2;
        assert_relative_eq!(rates[m], 1.0, max_relative = 1e-12);
        for (j, r) in rates.iter().enumerate() {
            assert!((0.0..=1.0 + 1e-12).contains(r));
            let mirror = rates[rates.len() - 1 - j];
            assert_relative_eq!(*r, mirror, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn delay_outside_grid_is_a_range_error() {
        let g = FrequencyGrid::new(1.7703491e15, 2.0 * PI * 65.6e12, 64).unwrap();
        let s = gaussian_spectrum(&g, 2.0 * PI * 8.2e12).unwrap();
        let amp = relative_wavefunction(&s, &PairFilter::unity(&g)).unwrap();
        let beyond = amp.time_grid().max() * 2.0;
        assert!(matches!(delay_scan(&amp, &[beyond]), Err(Error::Range(_))));
    }

    #[test]
    fn counts_are_deterministic_for_a_fixed_seed() {
        let model = CountModel::new(1000.0, 50.0, 10.0, 42).unwrap();
        let rates = vec![0.0, 250.0, 1000.0];
        let a = simulate_counts(&rates, &model).unwrap();
        let b = simulate_counts(&rates, &model).unwrap();
        assert_eq!(a, b);
        let other = CountModel { seed: 43, ..model };
        let c = simulate_counts(&rates, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dark_only_counts_average_to_dark_times_t() {
        // Mean over 10^4 seeds of Poisson(500): within 5% of 500, and the
        // dark-subtracted estimate averages to ~0.
        let mut sum_raw = 0.0;
        let mut sum_est = 0.0;
        let n = 10_000;
        for seed in 0..n {
            let model = CountModel::new(0.0, 50.0, 10.0, seed).unwrap();
            let s = simulate_counts(&[0.0], &model).unwrap()[0];
            sum_raw += s.raw as f64;
            sum_est += s.dark_subtracted_rate;
        }
        let mean_raw = sum_raw / n as f64;
        assert!((mean_raw - 500.0).abs() < 0.05 * 500.0, "mean {mean_raw}");
        assert!((sum_est / n as f64).abs() < 1.0);
    }

    #[test]
    fn zero_dark_means_match_rate_times_t() {
        let mut sum = 0.0;
        let n = 2_000;
        for seed in 0..n {
            let model = CountModel::new(400.0, 0.0, 10.0, seed).unwrap();
            sum += simulate_counts(&[400.0], &model).unwrap()[0].raw as f64;
        }
        let mean = sum / n as f64;
        // 3 standard errors of Poisson(4000) over 2000 draws.
        let se = (4000.0f64 / n as f64).sqrt();
        assert!((mean - 4000.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn negative_rate_rejected() {
        let model = CountModel::new(10.0, 50.0, 10.0, 1).unwrap();
        assert!(matches!(
            simulate_counts(&[-1.0], &model),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn csv_shape() {
        let model = CountModel::new(100.0, 50.0, 10.0, 7).unwrap();
        let delays = vec![-5e-15, 0.0, 5e-15];
        let rates = vec![0.5, 1.0, 0.5];
        let counts = simulate_counts(
            &rates
                .iter()
                .map(|r| r * model.peak_rate)
                .collect::<Vec<_>>(),
            &model,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &delays, &rates, &counts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "delay_s,rate_rel,counts_raw,counts_dark_subtracted"
        );
        assert_eq!(lines[1].split(',').count(), 4);
    }
}
