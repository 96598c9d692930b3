//! Experiment configuration: a TOML document with one section per subsystem.
//!
//! Every field has a default so the empty document runs the reference
//! operating point: a Gaussian spectrum of 31 nm around 1064 nm, a 5 MHz
//! pump at 532 nm, 0.1 nm up-conversion bandwidth, 163 µm constant
//! retardation, 50 s⁻¹ dark counts and 10 s integrations. Unknown keys are
//! rejected. Wavelength-denominated inputs are converted to angular
//! frequency at this boundary so the rest of the pipeline sees rad/s only.

use serde::{Deserialize, Serialize};

use biphoton::units::hz_to_angular;
use biphoton::{
    bandwidth_to_ordinary_frequency, compose_pair_filter, flattop_spectrum, gaussian_spectrum,
    opposite_linear, pi_step, sinc_phasematch_spectrum, slm_quantize,
    wavelength_to_angular_frequency, CountModel, FluxState, FrequencyGrid, PairFilter, PhaseMask,
    SfgDetectorSpec, SpectralAmplitude,
};

/// Configuration/validation failures, with the offending field named.
#[derive(Debug)]
pub enum ConfigError {
    Unreadable(String),
    Syntax(String),
    UnknownKey(String),
    Constraint { field: String, message: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Unreadable(m) => write!(f, "unreadable: {m}"),
            ConfigError::Syntax(m) => write!(f, "syntax: {m}"),
            ConfigError::UnknownKey(m) => write!(f, "unknown key: {m}"),
            ConfigError::Constraint { field, message } => {
                write!(f, "constraint: {field}: {message}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn constraint(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Constraint {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumModel {
    Gaussian,
    Sinc,
    Flattop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub model: SpectrumModel,
    pub center_wavelength_nm: f64,
    /// Full bandwidth as a wavelength spread; 31 nm when neither bandwidth
    /// field is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_nm: Option<f64>,
    /// Full bandwidth as an ordinary frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            model: SpectrumModel::Gaussian,
            center_wavelength_nm: 1064.0,
            bandwidth_nm: None,
            bandwidth_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub bandwidth_hz: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self { bandwidth_hz: 5e6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub points: usize,
    /// Grid span as a multiple of the spectrum bandwidth.
    pub span_factor: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: 4096,
            span_factor: 32.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    None,
    OppositeLinear,
    PiStep,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskConfig {
    pub kind: MaskKind,
    /// Signal-minus-idler delay for `opposite_linear` \[fs\].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_fs: Option<f64>,
    /// Step position for `pi_step` as an ordinary-frequency offset above the
    /// degeneracy point \[Hz\]; defaults to the midpoint of the signal band
    /// (a quarter of the full bandwidth).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_offset_hz: Option<f64>,
    /// Two-column mask file for `file`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Optional SLM pixelation applied to whatever mask is built.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pixels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            kind: MaskKind::None,
            delay_fs: None,
            step_offset_hz: None,
            path: None,
            pixels: None,
            levels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Phase-matched input bandwidth Δ_LF \[Hz\]; defaults to Δ_DC
    /// (identical crystals).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_lf_hz: Option<f64>,
    /// Up-converted phase-matched bandwidth δ_UC \[Hz\]; defaults to 0.1 nm
    /// at the up-converted wavelength.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_uc_hz: Option<f64>,
    /// Incident-light bandwidth Δ \[Hz\]; defaults to Δ_DC.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_bandwidth_hz: Option<f64>,
    /// Down-conversion bandwidth Δ_DC \[Hz\]; defaults to the spectrum
    /// bandwidth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_dc_hz: Option<f64>,
    /// Operating flux, as optical power \[W\]. Mutually exclusive with
    /// `flux_per_s`; 0.25 µW when neither is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_per_s: Option<f64>,
    /// Relative weights of the coherent, thermal and entangled rate terms.
    pub term_weights: [f64; 3],
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            delta_lf_hz: None,
            delta_uc_hz: None,
            input_bandwidth_hz: None,
            delta_dc_hz: None,
            power_w: None,
            flux_per_s: None,
            term_weights: [1.0, 1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Delay-scan range and step \[fs\].
    pub start_fs: f64,
    pub stop_fs: f64,
    pub step_fs: f64,
    /// Mach-Zehnder retardation range and step \[fs\], relative to the
    /// constant offset.
    pub mz_start_fs: f64,
    pub mz_stop_fs: f64,
    pub mz_step_fs: f64,
    /// Constant retardation offset [µm of path], 163 µm of Calcite.
    pub retardation_offset_um: f64,
    /// Visibility window for the Mach-Zehnder summary \[fs\], relative to the
    /// constant offset.
    pub window_center_fs: f64,
    pub window_width_fs: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            start_fs: -600.0,
            stop_fs: 600.0,
            step_fs: 5.0,
            mz_start_fs: 0.0,
            mz_stop_fs: 100.0,
            mz_step_fs: 0.0277,
            retardation_offset_um: 163.0,
            window_center_fs: 50.0,
            window_width_fs: 35.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountsConfig {
    pub peak_rate_hz: f64,
    pub dark_rate_hz: f64,
    pub integration_s: f64,
    pub seed: u64,
}

impl Default for CountsConfig {
    fn default() -> Self {
        Self {
            peak_rate_hz: 1000.0,
            dark_rate_hz: 50.0,
            integration_s: 10.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub spectrum: SpectrumConfig,
    pub pump: PumpConfig,
    pub grid: GridConfig,
    pub mask: MaskConfig,
    pub detector: DetectorConfig,
    pub scan: ScanConfig,
    pub counts: CountsConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            ConfigError::UnknownKey(msg.replace('\n', " "))
        } else {
            ConfigError::Syntax(msg.replace('\n', " "))
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Serialize back to TOML; reparsing yields an equal config.
pub fn serialize_config(config: &ExperimentConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, v: f64| -> Result<(), ConfigError> {
            if !v.is_finite() || v <= 0.0 {
                Err(constraint(field, format!("must be positive (got {v})")))
            } else {
                Ok(())
            }
        };
        let non_negative = |field: &str, v: f64| -> Result<(), ConfigError> {
            if !v.is_finite() || v < 0.0 {
                Err(constraint(field, format!("must be non-negative (got {v})")))
            } else {
                Ok(())
            }
        };

        positive(
            "spectrum.center_wavelength_nm",
            self.spectrum.center_wavelength_nm,
        )?;
        if self.spectrum.bandwidth_nm.is_some() && self.spectrum.bandwidth_hz.is_some() {
            return Err(constraint(
                "spectrum.bandwidth_nm",
                "give the bandwidth in nm or Hz, not both",
            ));
        }
        if let Some(b) = self.spectrum.bandwidth_nm {
            positive("spectrum.bandwidth_nm", b)?;
        }
        if let Some(b) = self.spectrum.bandwidth_hz {
            positive("spectrum.bandwidth_hz", b)?;
        }
        positive("pump.bandwidth_hz", self.pump.bandwidth_hz)?;

        if self.grid.points < 8 || !self.grid.points.is_multiple_of(2) {
            return Err(constraint(
                "grid.points",
                format!("must be even and at least 8 (got {})", self.grid.points),
            ));
        }
        positive("grid.span_factor", self.grid.span_factor)?;

        match self.mask.kind {
            MaskKind::OppositeLinear => {
                let d = self.mask.delay_fs.ok_or_else(|| {
                    constraint("mask.delay_fs", "required for kind = \"opposite_linear\"")
                })?;
                if !d.is_finite() {
                    return Err(constraint("mask.delay_fs", "must be finite"));
                }
            }
            MaskKind::File => {
                if self.mask.path.is_none() {
                    return Err(constraint("mask.path", "required for kind = \"file\""));
                }
            }
            MaskKind::PiStep | MaskKind::None => {}
        }
        if let Some(o) = self.mask.step_offset_hz {
            positive("mask.step_offset_hz", o)?;
        }
        match (self.mask.pixels, self.mask.levels) {
            (None, None) => {}
            (Some(p), Some(l)) => {
                if p == 0 || p > self.grid.points {
                    return Err(constraint(
                        "mask.pixels",
                        format!("must lie in 1..={} (got {p})", self.grid.points),
                    ));
                }
                if l < 2 {
                    return Err(constraint("mask.levels", format!("must be >= 2 (got {l})")));
                }
            }
            _ => {
                return Err(constraint(
                    "mask.pixels",
                    "pixels and levels must be given together",
                ));
            }
        }

        for (name, v) in [
            ("detector.delta_lf_hz", self.detector.delta_lf_hz),
            ("detector.delta_uc_hz", self.detector.delta_uc_hz),
            (
                "detector.input_bandwidth_hz",
                self.detector.input_bandwidth_hz,
            ),
            ("detector.delta_dc_hz", self.detector.delta_dc_hz),
        ] {
            if let Some(v) = v {
                non_negative(name, v)?;
            }
        }
        if self.detector.power_w.is_some() && self.detector.flux_per_s.is_some() {
            return Err(constraint(
                "detector.power_w",
                "give the operating point as power or flux, not both",
            ));
        }
        if let Some(p) = self.detector.power_w {
            non_negative("detector.power_w", p)?;
        }
        if let Some(f) = self.detector.flux_per_s {
            non_negative("detector.flux_per_s", f)?;
        }
        for w in self.detector.term_weights {
            non_negative("detector.term_weights", w)?;
        }

        positive("scan.step_fs", self.scan.step_fs)?;
        let ordered = |field: &str, start: f64, stop: f64| -> Result<(), ConfigError> {
            if !start.is_finite() || !stop.is_finite() || stop <= start {
                Err(constraint(
                    field,
                    format!("must exceed the range start (got {stop} <= {start})"),
                ))
            } else {
                Ok(())
            }
        };
        ordered("scan.stop_fs", self.scan.start_fs, self.scan.stop_fs)?;
        positive("scan.mz_step_fs", self.scan.mz_step_fs)?;
        ordered(
            "scan.mz_stop_fs",
            self.scan.mz_start_fs,
            self.scan.mz_stop_fs,
        )?;
        non_negative(
            "scan.retardation_offset_um",
            self.scan.retardation_offset_um,
        )?;
        positive("scan.window_width_fs", self.scan.window_width_fs)?;

        non_negative("counts.peak_rate_hz", self.counts.peak_rate_hz)?;
        non_negative("counts.dark_rate_hz", self.counts.dark_rate_hz)?;
        positive("counts.integration_s", self.counts.integration_s)?;
        Ok(())
    }

    pub fn center_angular_frequency(&self) -> Result<f64, ConfigError> {
        wavelength_to_angular_frequency(self.spectrum.center_wavelength_nm * 1e-9)
            .map_err(|e| constraint("spectrum.center_wavelength_nm", e.to_string()))
    }

    /// Full spectrum bandwidth as an ordinary frequency \[Hz\].
    pub fn bandwidth_hz(&self) -> Result<f64, ConfigError> {
        if let Some(hz) = self.spectrum.bandwidth_hz {
            return Ok(hz);
        }
        let nm = self.spectrum.bandwidth_nm.unwrap_or(31.0);
        bandwidth_to_ordinary_frequency(nm * 1e-9, self.spectrum.center_wavelength_nm * 1e-9)
            .map_err(|e| constraint("spectrum.bandwidth_nm", e.to_string()))
    }

    pub fn build_grid(&self) -> Result<FrequencyGrid, ConfigError> {
        let center = self.center_angular_frequency()?;
        let bw = hz_to_angular(self.bandwidth_hz()?);
        FrequencyGrid::new(center, self.grid.span_factor * bw, self.grid.points)
            .map_err(|e| constraint("grid", e.to_string()))
    }

    pub fn build_spectrum(&self, grid: &FrequencyGrid) -> Result<SpectralAmplitude, ConfigError> {
        let bw = hz_to_angular(self.bandwidth_hz()?);
        match self.spectrum.model {
            SpectrumModel::Gaussian => gaussian_spectrum(grid, bw),
            SpectrumModel::Sinc => sinc_phasematch_spectrum(grid, bw),
            SpectrumModel::Flattop => flattop_spectrum(grid, bw / 2.0),
        }
        .map_err(|e| constraint("spectrum", e.to_string()))
    }

    /// Step position of the π-step mask \[rad/s\].
    pub fn pi_step_position(&self, grid: &FrequencyGrid) -> Result<f64, ConfigError> {
        let offset_hz = match self.mask.step_offset_hz {
            Some(hz) => hz,
            None => self.bandwidth_hz()? / 4.0,
        };
        Ok(grid.center() + hz_to_angular(offset_hz))
    }

    fn finish_mask(&self, mask: PhaseMask) -> Result<PhaseMask, ConfigError> {
        match (self.mask.pixels, self.mask.levels) {
            (Some(p), Some(l)) => {
                slm_quantize(&mask, p, l).map_err(|e| constraint("mask.pixels", e.to_string()))
            }
            _ => Ok(mask),
        }
    }

    pub fn build_mask(&self, grid: &FrequencyGrid) -> Result<PhaseMask, ConfigError> {
        let mask = match self.mask.kind {
            MaskKind::None => PhaseMask::zero(grid),
            MaskKind::OppositeLinear => {
                let delay = self.mask.delay_fs.expect("validated") * 1e-15;
                opposite_linear(grid, delay)
                    .map_err(|e| constraint("mask.delay_fs", e.to_string()))?
            }
            MaskKind::PiStep => {
                let at = self.pi_step_position(grid)?;
                pi_step(grid, at).map_err(|e| constraint("mask.step_offset_hz", e.to_string()))?
            }
            MaskKind::File => {
                let path = self.mask.path.as_ref().expect("validated");
                let file = std::fs::File::open(path)
                    .map_err(|e| constraint("mask.path", format!("cannot open {path:?}: {e}")))?;
                PhaseMask::read_text(grid, std::io::BufReader::new(file))
                    .map_err(|e| constraint("mask.path", e.to_string()))?
            }
        };
        self.finish_mask(mask)
    }

    pub fn build_filter(&self, grid: &FrequencyGrid) -> Result<PairFilter, ConfigError> {
        Ok(compose_pair_filter(&self.build_mask(grid)?))
    }

    pub fn build_detector(&self) -> Result<SfgDetectorSpec, ConfigError> {
        let dc = match self.detector.delta_dc_hz {
            Some(hz) => hz,
            None => self.bandwidth_hz()?,
        };
        let uc = match self.detector.delta_uc_hz {
            Some(hz) => hz,
            None => {
                // 0.1 nm at the up-converted wavelength (half the center).
                let lambda_uc = self.spectrum.center_wavelength_nm * 1e-9 / 2.0;
                bandwidth_to_ordinary_frequency(0.1e-9, lambda_uc)
                    .map_err(|e| constraint("detector.delta_uc_hz", e.to_string()))?
            }
        };
        let lf = self.detector.delta_lf_hz.unwrap_or(dc);
        let input = self.detector.input_bandwidth_hz.unwrap_or(dc);
        SfgDetectorSpec::new(lf, uc, input, dc, self.pump.bandwidth_hz)
            .map_err(|e| constraint("detector", e.to_string()))
    }

    pub fn build_flux(&self) -> Result<FluxState, ConfigError> {
        let dc = self.build_detector()?.delta_dc;
        let lambda = self.spectrum.center_wavelength_nm * 1e-9;
        match (self.detector.power_w, self.detector.flux_per_s) {
            (_, Some(flux)) => FluxState::from_flux(flux, dc, lambda),
            (power, None) => FluxState::from_power(power.unwrap_or(0.25e-6), dc, lambda),
        }
        .map_err(|e| constraint("detector", e.to_string()))
    }

    pub fn build_count_model(&self, seed_override: Option<u64>) -> Result<CountModel, ConfigError> {
        CountModel::new(
            self.counts.peak_rate_hz,
            self.counts.dark_rate_hz,
            self.counts.integration_s,
            seed_override.unwrap_or(self.counts.seed),
        )
        .map_err(|e| constraint("counts", e.to_string()))
    }

    /// Constant retardation offset \[s\].
    pub fn retardation_offset(&self) -> f64 {
        self.scan.retardation_offset_um * 1e-6 / biphoton::SPEED_OF_LIGHT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_profile() {
        let parsed = parse_config("").unwrap();
        assert_eq!(parsed, ExperimentConfig::default());
        // And the default profile carries the reference numbers.
        assert!((parsed.bandwidth_hz().unwrap() - 8.2e12).abs() < 0.01 * 8.2e12);
        let det = parsed.build_detector().unwrap();
        assert!((det.delta_uc - 1.06e11).abs() < 0.01 * 1.06e11);
        assert_eq!(det.pump_bandwidth, 5e6);
        let offset = parsed.retardation_offset();
        assert!((offset - 543.7e-15).abs() < 0.1e-15);
    }

    #[test]
    fn negative_bandwidth_names_the_field() {
        let err = parse_config("[spectrum]\nbandwidth_nm = -3.0\n").unwrap_err();
        match err {
            ConfigError::Constraint { field, .. } => {
                assert_eq!(field, "spectrum.bandwidth_nm")
            }
            other => panic!("expected a constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("[spectrum]\nbandwith_nm = 31.0\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(_)));
    }

    #[test]
    fn syntax_errors_are_distinct() {
        let err = parse_config("[spectrum\nbandwidth_nm = 31.0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)));
    }

    #[test]
    fn round_trip_through_serialization() {
        let doc = r#"
[spectrum]
model = "flattop"
bandwidth_hz = 6.5e12
center_wavelength_nm = 1064.0

[mask]
kind = "opposite_linear"
delay_fs = 150.0
pixels = 128
levels = 256

[counts]
seed = 99
"#;
        let parsed = parse_config(doc).unwrap();
        let reparsed = parse_config(&serialize_config(&parsed)).unwrap();
        assert_eq!(parsed, reparsed);
    }

    #[test]
    fn both_bandwidths_rejected() {
        let err =
            parse_config("[spectrum]\nbandwidth_nm = 31.0\nbandwidth_hz = 8.2e12\n").unwrap_err();
        assert!(matches!(err, ConfigError::Constraint { .. }));
    }

    #[test]
    fn mask_kind_requires_its_parameter() {
        let err = parse_config("[mask]\nkind = \"opposite_linear\"\n").unwrap_err();
        match err {
            ConfigError::Constraint { field, .. } => assert_eq!(field, "mask.delay_fs"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn default_pi_step_sits_mid_signal_band() {
        let config = parse_config("[mask]\nkind = \"pi_step\"\n").unwrap();
        let grid = config.build_grid().unwrap();
        let at = config.pi_step_position(&grid).unwrap();
        let expected =
            grid.center() + 2.0 * std::f64::consts::PI * config.bandwidth_hz().unwrap() / 4.0;
        assert!((at - expected).abs() < 1e-3 * grid.spacing());
    }
}
