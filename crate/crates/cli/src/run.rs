//! Command implementations: assemble the optical chain from a config, run
//! the requested experiment, write result files and return a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use biphoton::error::Error as CoreError;
use biphoton::{
    coincidence_regime, correlation_fwhm, delay_scan, flux_to_power, max_pair_flux, mz_scan,
    relative_wavefunction, sfg_rate_terms, simulate_counts, visibility, InterferenceTrace,
    MzScanSpec, RegimeVerdict, TimeAmplitude,
};

use crate::config::{serialize_config, ConfigError, ExperimentConfig};

/// Failure modes of a run, split by exit code.
#[derive(Debug)]
pub enum RunError {
    /// Invalid configuration (exit code 2).
    Config(ConfigError),
    /// Failure while executing a valid configuration (exit code 3).
    Runtime(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config: {e}"),
            RunError::Runtime(m) => write!(f, "runtime: {m}"),
        }
    }
}

fn runtime(context: &str, e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(format!("{context}: {e}"))
}

/// Files written plus the machine-readable summary (also written to disk).
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Wavefunction,
    DelayScan,
    PiStep,
    MzScan,
    Regime,
    Info,
}

impl CommandKind {
    fn summary_name(self) -> &'static str {
        match self {
            CommandKind::Wavefunction => "wavefunction_summary.json",
            CommandKind::DelayScan => "delay_scan_summary.json",
            CommandKind::PiStep => "pi_step_summary.json",
            CommandKind::MzScan => "mz_scan_summary.json",
            CommandKind::Regime => "regime.json",
            CommandKind::Info => "info.json",
        }
    }
}

pub fn run_experiment(
    config: &ExperimentConfig,
    command: CommandKind,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<Outcome, RunError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| runtime(&format!("creating output directory {out_dir:?}"), e))?;
    let mut outcome = match command {
        CommandKind::Wavefunction => cmd_wavefunction(config, out_dir)?,
        CommandKind::DelayScan => cmd_delay_scan(config, out_dir, seed_override, false)?,
        CommandKind::PiStep => cmd_delay_scan(config, out_dir, seed_override, true)?,
        CommandKind::MzScan => cmd_mz_scan(config, out_dir)?,
        CommandKind::Regime => cmd_regime(config)?,
        CommandKind::Info => cmd_info(config)?,
    };
    let summary_path = out_dir.join(command.summary_name());
    let pretty = serde_json::to_string_pretty(&outcome.summary)
        .map_err(|e| runtime("serializing summary", e))?;
    fs::write(&summary_path, pretty + "\n")
        .map_err(|e| runtime(&format!("writing {summary_path:?}"), e))?;
    outcome.files.push(summary_path);
    // The resolved configuration makes a successful run's output directory
    // self-describing; failed runs leave nothing behind.
    let config_path = out_dir.join("config_resolved.toml");
    fs::write(&config_path, serialize_config(config))
        .map_err(|e| runtime(&format!("writing {config_path:?}"), e))?;
    outcome.files.push(config_path);
    Ok(outcome)
}

#[derive(Serialize)]
struct LobeSummary {
    delay_s: f64,
    rate_rel: f64,
}

#[derive(Serialize)]
struct WavefunctionSummary {
    samples: usize,
    time_step_s: f64,
    raw_peak: f64,
    peak_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    correlation_fwhm_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lobe_fwhms_s: Option<Vec<f64>>,
}

fn shaped_amplitude(config: &ExperimentConfig) -> Result<TimeAmplitude, RunError> {
    let grid = config.build_grid()?;
    let spectrum = config.build_spectrum(&grid)?;
    let filter = config.build_filter(&grid)?;
    relative_wavefunction(&spectrum, &filter).map_err(|e| runtime("transforming", e))
}

fn peak_time(amp: &TimeAmplitude) -> f64 {
    let (j, _) = amp
        .values()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .expect("non-empty amplitude");
    amp.time_grid().point(j)
}

fn cmd_wavefunction(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let amp = shaped_amplitude(config)?;
    let path = out_dir.join("wavefunction.txt");
    let mut buf = Vec::new();
    amp.write_text(&mut buf)
        .map_err(|e| runtime("formatting wavefunction", e))?;
    fs::write(&path, buf).map_err(|e| runtime(&format!("writing {path:?}"), e))?;

    let (fwhm, lobes) = match correlation_fwhm(&amp) {
        Ok(w) => (Some(w), None),
        Err(CoreError::Multimodal { lobe_fwhms }) => (None, Some(lobe_fwhms)),
        Err(e) => return Err(runtime("measuring correlation width", e)),
    };
    let summary = WavefunctionSummary {
        samples: amp.values().len(),
        time_step_s: amp.time_grid().spacing(),
        raw_peak: amp.raw_peak(),
        peak_time_s: peak_time(&amp),
        correlation_fwhm_s: fwhm,
        lobe_fwhms_s: lobes,
    };
    Ok(Outcome {
        files: vec![path],
        summary: serde_json::to_value(summary).expect("serializable"),
    })
}

#[derive(Serialize)]
struct ScanSummary {
    points: usize,
    step_s: f64,
    peak_delay_s: f64,
    rate_rel_at_zero: f64,
    lobes_above_half: Vec<LobeSummary>,
    seed: u64,
}

fn cmd_delay_scan(
    config: &ExperimentConfig,
    out_dir: &Path,
    seed_override: Option<u64>,
    force_pi_step: bool,
) -> Result<Outcome, RunError> {
    // The pi-step command runs the configured chain with the mask kind
    // overridden; step position and SLM pixelation still come from the
    // config.
    let mut config = config.clone();
    if force_pi_step {
        config.mask.kind = crate::config::MaskKind::PiStep;
    }
    let config = &config;
    let grid = config.build_grid()?;
    let spectrum = config.build_spectrum(&grid)?;
    let filter = config.build_filter(&grid)?;
    let amp = relative_wavefunction(&spectrum, &filter).map_err(|e| runtime("transforming", e))?;

    let step = config.scan.step_fs * 1e-15;
    let n = ((config.scan.stop_fs - config.scan.start_fs) / config.scan.step_fs).round() as usize;
    let delays: Vec<f64> = (0..=n)
        .map(|j| config.scan.start_fs * 1e-15 + j as f64 * step)
        .collect();
    let rates = delay_scan(&amp, &delays).map_err(|e| runtime("scanning", e))?;

    let model = config.build_count_model(seed_override)?;
    let count_rates: Vec<f64> = rates.iter().map(|r| r * model.peak_rate).collect();
    let counts = simulate_counts(&count_rates, &model).map_err(|e| runtime("counting", e))?;

    let name = if force_pi_step {
        "pi_step_scan.csv"
    } else {
        "delay_scan.csv"
    };
    let path = out_dir.join(name);
    let mut buf = Vec::new();
    biphoton::sfg::write_scan_csv(&mut buf, &delays, &rates, &counts)
        .map_err(|e| runtime("formatting csv", e))?;
    fs::write(&path, buf).map_err(|e| runtime(&format!("writing {path:?}"), e))?;

    let peak_idx = rates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(j, _)| j)
        .expect("non-empty scan");
    let zero_idx = delays
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(j, _)| j)
        .expect("non-empty scan");
    let summary = ScanSummary {
        points: delays.len(),
        step_s: step,
        peak_delay_s: delays[peak_idx],
        rate_rel_at_zero: rates[zero_idx],
        lobes_above_half: biphoton::sfg::scan_lobes(&rates, 0.5)
            .into_iter()
            .map(|(j, v)| LobeSummary {
                delay_s: delays[j],
                rate_rel: v,
            })
            .collect(),
        seed: model.seed,
    };
    Ok(Outcome {
        files: vec![path],
        summary: serde_json::to_value(summary).expect("serializable"),
    })
}

#[derive(Serialize)]
struct VisibilityWindow {
    center_s: f64,
    width_s: f64,
}

#[derive(Serialize)]
struct MzSummary {
    points: usize,
    retardation_offset_s: f64,
    fringe_period_biphoton_s: f64,
    window: VisibilityWindow,
    visibility_biphoton: f64,
    visibility_single_photon: f64,
}

fn window_visibility(trace: &InterferenceTrace, center: f64, width: f64) -> Result<f64, RunError> {
    visibility(trace, center, width).map_err(|e| runtime("visibility", e))
}

fn cmd_mz_scan(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let grid = config.build_grid()?;
    let spectrum = config.build_spectrum(&grid)?;
    let tau0 = config.retardation_offset();
    let spec = MzScanSpec::new(
        spectrum,
        config.scan.mz_start_fs * 1e-15,
        config.scan.mz_stop_fs * 1e-15,
        config.scan.mz_step_fs * 1e-15,
        tau0,
    )
    .map_err(|e| ConfigError::Constraint {
        field: "scan.mz_step_fs".into(),
        message: e.to_string(),
    })?;
    let (bi, ir) = mz_scan(&spec).map_err(|e| runtime("scanning", e))?;

    let path = out_dir.join("mz_scan.csv");
    let mut buf = Vec::new();
    biphoton::mz::write_scan_csv(&mut buf, &bi, &ir).map_err(|e| runtime("formatting csv", e))?;
    fs::write(&path, buf).map_err(|e| runtime(&format!("writing {path:?}"), e))?;

    let center = tau0 + config.scan.window_center_fs * 1e-15;
    let width = config.scan.window_width_fs * 1e-15;
    let summary = MzSummary {
        points: bi.retardations().len(),
        retardation_offset_s: tau0,
        fringe_period_biphoton_s: bi.fringe_period(),
        window: VisibilityWindow {
            center_s: center,
            width_s: width,
        },
        visibility_biphoton: window_visibility(&bi, center, width)?,
        visibility_single_photon: window_visibility(&ir, center, width)?,
    };
    Ok(Outcome {
        files: vec![path],
        summary: serde_json::to_value(summary).expect("serializable"),
    })
}

#[derive(Serialize)]
struct ConditionSummary {
    name: String,
    satisfied: bool,
}

#[derive(Serialize)]
struct RegimeSummary {
    verdict: String,
    spectral_photon_density_n: f64,
    conditions: Vec<ConditionSummary>,
}

fn verdict_name(v: RegimeVerdict) -> &'static str {
    match v {
        RegimeVerdict::UniversalCoincidence => "UniversalCoincidence",
        RegimeVerdict::EntangledPairCoincidence => "EntangledPairCoincidence",
        RegimeVerdict::NotCoincidence => "NotCoincidence",
    }
}

fn regime_summary(config: &ExperimentConfig) -> Result<RegimeSummary, RunError> {
    let detector = config.build_detector()?;
    let flux = config.build_flux()?;
    let report =
        coincidence_regime(&detector, flux.density).map_err(|e| runtime("classifying", e))?;
    Ok(RegimeSummary {
        verdict: verdict_name(report.verdict).to_string(),
        spectral_photon_density_n: flux.density,
        conditions: report
            .conditions
            .into_iter()
            .map(|c| ConditionSummary {
                name: c.name.to_string(),
                satisfied: c.satisfied,
            })
            .collect(),
    })
}

fn cmd_regime(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let summary = regime_summary(config)?;
    Ok(Outcome {
        files: Vec::new(),
        summary: serde_json::to_value(summary).expect("serializable"),
    })
}

#[derive(Serialize)]
struct RateTermsSummary {
    coherent: f64,
    thermal: f64,
    entangled: f64,
}

#[derive(Serialize)]
struct InfoSummary {
    delta_dc_hz: f64,
    delta_uc_hz: f64,
    phi_max_per_s: f64,
    power_at_phi_max_w: f64,
    flux_per_s: f64,
    power_w: f64,
    spectral_photon_density_n: f64,
    rate_terms: RateTermsSummary,
    weighted_rate_terms: RateTermsSummary,
    regime: RegimeSummary,
}

fn cmd_info(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let detector = config.build_detector()?;
    let flux = config.build_flux()?;
    let lambda = config.spectrum.center_wavelength_nm * 1e-9;
    let phi_max = max_pair_flux(detector.delta_dc).map_err(|e| runtime("flux bound", e))?;
    let terms = sfg_rate_terms(flux.density, detector.delta_uc, detector.delta_dc)
        .map_err(|e| runtime("rate terms", e))?;
    let [w_coh, w_th, w_en] = config.detector.term_weights;
    let summary = InfoSummary {
        delta_dc_hz: detector.delta_dc,
        delta_uc_hz: detector.delta_uc,
        phi_max_per_s: phi_max,
        power_at_phi_max_w: flux_to_power(phi_max, lambda).map_err(|e| runtime("power", e))?,
        flux_per_s: flux.flux,
        power_w: flux.power(),
        spectral_photon_density_n: flux.density,
        rate_terms: RateTermsSummary {
            coherent: terms.coherent,
            thermal: terms.thermal,
            entangled: terms.entangled,
        },
        weighted_rate_terms: RateTermsSummary {
            coherent: w_coh * terms.coherent,
            thermal: w_th * terms.thermal,
            entangled: w_en * terms.entangled,
        },
        regime: regime_summary(config)?,
    };
    Ok(Outcome {
        files: Vec::new(),
        summary: serde_json::to_value(summary).expect("serializable"),
    })
}
