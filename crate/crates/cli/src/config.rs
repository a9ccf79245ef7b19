//! Pipeline configuration with flag > config-file > default precedence.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use heattrace_core::detection::DEFAULT_MIN_CONFIDENCE;
use heattrace_core::eval::DEFAULT_MATCH_TAU;
use heattrace_core::fusion::{DEFAULT_DENY_LABELS, DEFAULT_FALLBACK_MARGIN};
use heattrace_core::pipeline::{ScanOptions, ThresholdModeName};
use heattrace_core::thermal::{DEFAULT_MIN_CONTOUR_AREA, DEFAULT_ROBUST_K};

/// Config-file form of the pipeline knobs and input paths. Every field
/// is optional; unknown keys are rejected.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub threshold_mode: Option<ThresholdModeName>,
    pub threshold_param: Option<f64>,
    pub min_contour_area: Option<usize>,
    pub min_confidence: Option<f64>,
    pub deny_labels: Option<Vec<String>>,
    pub fallback: Option<bool>,
    pub fallback_margin: Option<f64>,
    pub match_tau: Option<f64>,
    pub rgb: Option<PathBuf>,
    pub thermal: Option<PathBuf>,
    pub map: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: PipelineConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if let Some(c) = self.min_confidence {
            if !(0.0..=1.0).contains(&c) {
                bail!("min_confidence {c} outside [0, 1]");
            }
        }
        if let Some(t) = self.match_tau {
            if !(0.0..=1.0).contains(&t) {
                bail!("match_tau {t} outside [0, 1]");
            }
        }
        if let Some(p) = self.threshold_param {
            if !p.is_finite() {
                bail!("threshold_param {p} is not finite");
            }
        }
        if let Some(a) = self.min_contour_area {
            if a == 0 {
                bail!("min_contour_area must be at least 1");
            }
        }
        if let Some(m) = self.fallback_margin {
            if !m.is_finite() || m < 0.0 {
                bail!("fallback_margin {m} must be non-negative");
            }
        }
        Ok(())
    }
}

/// Scan knobs explicitly given on the command line; `None` defers to the
/// config file, then to the built-in default.
#[derive(Debug, Default, Clone)]
pub struct ScanOverrides {
    pub threshold_mode: Option<ThresholdModeName>,
    pub threshold_param: Option<f64>,
    pub min_contour_area: Option<usize>,
    pub min_confidence: Option<f64>,
    pub deny_labels: Option<Vec<String>>,
    pub fallback: Option<bool>,
    pub fallback_margin: Option<f64>,
}

/// Resolves the effective scan options from flags, config, and defaults.
pub fn resolve_scan_options(flags: &ScanOverrides, config: &PipelineConfig) -> Result<ScanOptions> {
    let mode = flags
        .threshold_mode
        .or(config.threshold_mode)
        .unwrap_or(ThresholdModeName::RobustSigma);
    let param = flags.threshold_param.or(config.threshold_param);
    let threshold = match mode {
        ThresholdModeName::RobustSigma => mode.with_param(param.unwrap_or(DEFAULT_ROBUST_K)),
        ThresholdModeName::Absolute => match param {
            Some(p) => mode.with_param(p),
            None => bail!("--threshold-mode absolute requires --threshold-param (a cutoff in C)"),
        },
    };
    let min_confidence = flags
        .min_confidence
        .or(config.min_confidence)
        .unwrap_or(DEFAULT_MIN_CONFIDENCE);
    if !(0.0..=1.0).contains(&min_confidence) {
        bail!("min_confidence {min_confidence} outside [0, 1]");
    }
    let fallback_margin = flags
        .fallback_margin
        .or(config.fallback_margin)
        .unwrap_or(DEFAULT_FALLBACK_MARGIN);
    if !fallback_margin.is_finite() || fallback_margin < 0.0 {
        bail!("fallback_margin {fallback_margin} must be non-negative");
    }
    Ok(ScanOptions {
        threshold,
        min_contour_area: flags
            .min_contour_area
            .or(config.min_contour_area)
            .unwrap_or(DEFAULT_MIN_CONTOUR_AREA),
        min_confidence,
        deny_labels: flags
            .deny_labels
            .clone()
            .or_else(|| config.deny_labels.clone())
            .unwrap_or_else(|| DEFAULT_DENY_LABELS.iter().map(|s| s.to_string()).collect()),
        allow_fallback: flags.fallback.or(config.fallback).unwrap_or(false),
        fallback_margin,
    })
}

pub fn resolve_match_tau(flag: Option<f64>, config: &PipelineConfig) -> Result<f64> {
    let tau = flag.or(config.match_tau).unwrap_or(DEFAULT_MATCH_TAU);
    if !(0.0..=1.0).contains(&tau) {
        bail!("match_tau {tau} outside [0, 1]");
    }
    Ok(tau)
}

/// Splits a comma-separated label list, dropping empty entries.
pub fn parse_deny_labels(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
