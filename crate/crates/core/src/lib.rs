//! Spectral-phase shaping of entangled photon pairs.
//!
//! Broadband down-conversion of a narrowband pump produces photon pairs
//! whose joint spectrum is coherent, so the two-photon wavefunction can be
//! shaped by spectral-phase masks exactly like a classical ultrashort
//! pulse. This crate models that chain end to end:
//!
//! * [`grid`]/[`units`] — the shared frequency/time lattice and unit
//!   conversions;
//! * [`spectrum`] — down-conversion spectral amplitudes g(ω);
//! * [`mask`] — SLM phase masks and the effective pair filter
//!   Φ_s(ω)Φ_i(ω_p−ω);
//! * [`wavefunction`] — the relative-time amplitude G(t) by inverse FFT,
//!   the factorized two-photon density, and a brute-force transform oracle;
//! * [`sfg`] — sum-frequency generation as an ultrafast coincidence
//!   detector: flux bounds, rate decomposition, regime classification,
//!   delay scans, photon counting;
//! * [`mz`] — Mach-Zehnder two-photon interference and fringe visibility.

pub mod error;
pub mod grid;
pub mod mask;
pub mod mz;
pub mod sfg;
pub mod spectrum;
pub mod units;
pub mod wavefunction;

pub use error::{Error, Result};
pub use grid::{FrequencyGrid, TimeGrid};
pub use mask::{
    compose_pair_filter, opposite_linear, pi_step, slm_quantize, PairFilter, PhaseMask,
};
pub use mz::{
    biphoton_rate, ir_interference, mz_scan, visibility, InterferenceTrace, MzScanSpec, TraceKind,
};
pub use sfg::{
    coincidence_regime, delay_scan, flux_to_power, max_pair_flux, sfg_rate_terms, simulate_counts,
    spectral_photon_density, CountModel, CountSample, FluxState, RegimeReport, RegimeVerdict,
    SfgDetectorSpec, SfgRateTerms,
};
pub use spectrum::{
    flattop_spectrum, gaussian_spectrum, sinc_phasematch_spectrum, SpectralAmplitude,
};
pub use units::{
    angular_frequency_to_wavelength, bandwidth_to_ordinary_frequency,
    wavelength_to_angular_frequency, PLANCK_CONSTANT, SPEED_OF_LIGHT,
};
pub use wavefunction::{
    correlation_fwhm, oracle_dft, relative_wavefunction, TimeAmplitude, TwoPhotonWavefunction,
};
