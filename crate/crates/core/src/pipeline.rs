//! End-to-end evaluation: channel model -> tallies -> intervals -> rates.
//!
//! One call produces both estimators' certified rates plus the model ground
//! truth and the scan rectangle, packaged for serialization into reports.

use serde::Serialize;

use crate::baseline::baseline_key_rate;
use crate::channel::{model_observables, sample_tallies, TallyMode};
use crate::chernoff::SecurityBudget;
use crate::decoy::{build_scan_rectangle, ScanRectangle};
use crate::error::Result;
use crate::scalar::Real;
use crate::scan::{scan_minimum, KeyRateResult};
use crate::types::{ChannelParams, IntensityProfile, TallySet};

/// Knobs for one pipeline run.
#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    /// How tallies are produced from the modeled observables.
    pub mode: TallyMode,
    /// Coarse scan resolution (h, m).
    pub grid: (usize, usize),
    /// Retain the coarse-grid rate surface in the result.
    pub collect_surface: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            mode: TallyMode::Expected,
            grid: (16, 16),
            collect_surface: false,
        }
    }
}

/// Everything one evaluation produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport<T> {
    /// Model ground truth for the single-photon-pair yield.
    pub y11_true: T,
    /// Model ground truth for the single-photon-pair test-basis error rate.
    pub e11_true: T,
    /// Simulated tallies the estimators consumed.
    pub tallies: TallySet,
    /// Fluctuation intervals and scan bounds.
    pub rectangle: ScanRectangle<T>,
    /// Double-scan certified rate.
    pub double_scan: KeyRateResult<T>,
    /// Independent-worst-casing certified rate.
    pub baseline: KeyRateResult<T>,
}

/// Run the full pipeline for one profile and channel.
pub fn run<T: Real>(
    profile: &IntensityProfile<T>,
    channel: &ChannelParams<T>,
    options: &PipelineOptions,
) -> Result<PipelineReport<T>> {
    let channel = (*channel).validated()?;
    let obs = model_observables(profile, &channel)?;
    let tallies = sample_tallies(&obs, profile, &channel, options.mode)?;
    let budget = SecurityBudget::new(channel.epsilon)?;
    let rectangle = build_scan_rectangle(&tallies, profile, &budget)?;
    let double_scan = scan_minimum(
        &rectangle,
        &tallies,
        profile,
        &channel,
        options.grid,
        options.collect_surface,
    )?;
    let baseline = baseline_key_rate(&tallies, profile, &channel, &budget)?;
    Ok(PipelineReport {
        y11_true: obs.y11_true(),
        e11_true: obs.e11_true(),
        tallies,
        rectangle,
        double_scan,
        baseline,
    })
}
