//! Key-rate evaluation and the double-scan minimization.
//!
//! The secret-key rate depends on the scanned pair (h, m) only through the
//! yield/error bounds, so the certified rate is the minimum of R(h, m) over
//! the scan rectangle. This module evaluates R at one scan point and runs
//! the grid minimization: a coarse grid over the rectangle followed by one
//! 5x5 refinement around the coarse argmin, with deterministic first-found
//! tie-breaking in grid order.

use rayon::prelude::*;
use serde::Serialize;

use crate::decoy::{e11_upper, y11_lower_lp, ScanRectangle};
use crate::error::Result;
use crate::math::{binary_entropy, poisson_pmf};
use crate::scalar::{real, Real};
use crate::types::{ChannelParams, Intensity, IntensityProfile, TallySet};

/// Whether the certified rate is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyRateStatus {
    /// Positive certified rate.
    Key,
    /// The minimized rate was zero or negative; no key can be claimed.
    NoKey,
}

impl KeyRateStatus {
    /// Stable text label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            KeyRateStatus::Key => "key",
            KeyRateStatus::NoKey => "no-key",
        }
    }
}

/// Which estimator produced a [`KeyRateResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMethod {
    /// Joint-constraint LP minimized over the (h, m) rectangle.
    DoubleScan,
    /// Independent worst-casing of every observable.
    Baseline,
}

impl EstimationMethod {
    /// Stable text label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            EstimationMethod::DoubleScan => "double-scan",
            EstimationMethod::Baseline => "baseline",
        }
    }
}

/// One evaluated scan point, retained when a rate surface is requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint<T> {
    pub h: T,
    pub m: T,
    /// Raw (unclamped) rate at this point; negative values are meaningful
    /// here because the minimum is taken before clamping.
    pub r_per_pulse: T,
}

/// Certified key-rate outcome of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyRateResult<T> {
    /// Certified secret bits per pulse pair, clamped to be nonnegative.
    pub r_per_pulse: T,
    /// Certified secret bits per second at the configured repetition rate.
    pub r_bps: T,
    pub status: KeyRateStatus,
    pub method: EstimationMethod,
    /// Single-photon-pair yield lower bound at the minimizing scan point.
    pub y11_lower: T,
    /// Phase-error upper bound at the minimizing scan point.
    pub e11_upper: T,
    /// Minimizing (h, m); absent for the baseline estimator.
    pub argmin: Option<(T, T)>,
    /// Coarse-grid rate surface, when requested.
    pub surface: Option<Vec<SurfacePoint<T>>>,
    /// Coarse grid size actually used (axes collapse to 1 when degenerate).
    pub grid: (usize, usize),
    /// Total failure probability composed over all fluctuation bounds used.
    pub composed_failure_probability: T,
}

/// Secret-key rate from yield/error bounds and the observed key-basis tally:
/// R = P_mu^2 [ (p1_mu)^2 y11 (1 - h(e11)) - f_ec Q_zz h(E_zz) ].
/// The value is returned unclamped so that minimization sees the true
/// ordering; callers clamp at the end.
pub fn key_rate_formula<T: Real>(
    y11: T,
    e11: T,
    tallies: &TallySet,
    profile: &IntensityProfile<T>,
    channel: &ChannelParams<T>,
) -> Result<T> {
    let zz = tallies.require(Intensity::Mu, Intensity::Mu)?;
    let q_zz: T = zz.gain_rate();
    let e_zz: T = zz.error_fraction();
    let p1_mu = poisson_pmf(profile.mu(), 1)?;
    let p_mu = profile.p_mu();
    let key_term = p1_mu * p1_mu * y11 * (T::one() - binary_entropy(e11)?);
    let ec_term = channel.f_ec * q_zz * binary_entropy(e_zz)?;
    Ok(p_mu * p_mu * (key_term - ec_term))
}

/// Raw (unclamped) rate at one scan point: LP yield bound, error bound,
/// then the key-rate formula.
pub fn key_rate_at<T: Real>(
    h: T,
    m: T,
    rect: &ScanRectangle<T>,
    tallies: &TallySet,
    profile: &IntensityProfile<T>,
    channel: &ChannelParams<T>,
) -> Result<T> {
    let (y11, _) = y11_lower_lp(rect, h, m, profile)?;
    let e11 = e11_upper(h, m, y11, profile)?;
    key_rate_formula(y11, e11, tallies, profile, channel)
}

/// Evenly spaced axis over [lo, hi] including both endpoints; a degenerate
/// interval collapses to the single point lo.
pub fn grid_axis<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if !(hi > lo) {
        return vec![lo];
    }
    let n = n.max(2);
    let span = hi - lo;
    let last = real::<T>((n - 1) as f64);
    (0..n)
        .map(|i| lo + span * (real::<T>(i as f64) / last))
        .collect()
}

/// Evaluate the rate on the cross product of two axes, in parallel, and
/// return the rows in (h-index, m-index) lexicographic order.
fn evaluate_grid<T: Real>(
    hs: &[T],
    ms: &[T],
    rect: &ScanRectangle<T>,
    tallies: &TallySet,
    profile: &IntensityProfile<T>,
    channel: &ChannelParams<T>,
) -> Result<Vec<(T, T, T)>> {
    let points: Vec<(T, T)> = hs
        .iter()
        .flat_map(|&h| ms.iter().map(move |&m| (h, m)))
        .collect();
    points
        .into_par_iter()
        .map(|(h, m)| key_rate_at(h, m, rect, tallies, profile, channel).map(|r| (h, m, r)))
        .collect()
}

/// First strict minimum of the evaluated rows, in row order.
fn fold_min<T: Real>(rows: &[(T, T, T)], incumbent: Option<(T, T, T)>) -> Option<(T, T, T)> {
    let mut best = incumbent;
    for &(h, m, r) in rows {
        if best.is_none_or(|(_, _, br)| r < br) {
            best = Some((h, m, r));
        }
    }
    best
}

/// Minimize the rate over the scan rectangle.
///
/// `grid` is the coarse (h, m) resolution; one 5x5 refinement pass then
/// covers the +/- one-coarse-cell window around the coarse argmin, clamped
/// to the rectangle and skipped per axis when that axis is degenerate. The
/// reported yield/error bounds are re-evaluated at the final argmin.
pub fn scan_minimum<T: Real>(
    rect: &ScanRectangle<T>,
    tallies: &TallySet,
    profile: &IntensityProfile<T>,
    channel: &ChannelParams<T>,
    grid: (usize, usize),
    collect_surface: bool,
) -> Result<KeyRateResult<T>> {
    let hs = grid_axis(rect.h_low, rect.h_high, grid.0);
    let ms = grid_axis(rect.m_low, rect.m_high, grid.1);
    let coarse = evaluate_grid(&hs, &ms, rect, tallies, profile, channel)?;
    let mut best = fold_min(&coarse, None).expect("coarse grid is never empty");

    let step_h = if hs.len() > 1 {
        hs[1] - hs[0]
    } else {
        T::zero()
    };
    let step_m = if ms.len() > 1 {
        ms[1] - ms[0]
    } else {
        T::zero()
    };
    let (h0, m0, _) = best;
    let refine_h = if step_h > T::zero() {
        grid_axis(rect.h_low.max(h0 - step_h), rect.h_high.min(h0 + step_h), 5)
    } else {
        vec![h0]
    };
    let refine_m = if step_m > T::zero() {
        grid_axis(rect.m_low.max(m0 - step_m), rect.m_high.min(m0 + step_m), 5)
    } else {
        vec![m0]
    };
    if refine_h.len() > 1 || refine_m.len() > 1 {
        let refined = evaluate_grid(&refine_h, &refine_m, rect, tallies, profile, channel)?;
        best = fold_min(&refined, Some(best)).expect("incumbent is preserved");
    }

    let (h_star, m_star, r_raw) = best;
    let (y11, _) = y11_lower_lp(rect, h_star, m_star, profile)?;
    let e11 = e11_upper(h_star, m_star, y11, profile)?;
    let status = if r_raw > T::zero() {
        KeyRateStatus::Key
    } else {
        KeyRateStatus::NoKey
    };
    let r_per_pulse = r_raw.max(T::zero());
    Ok(KeyRateResult {
        r_per_pulse,
        r_bps: r_per_pulse * channel.rep_rate_hz,
        status,
        method: EstimationMethod::DoubleScan,
        y11_lower: y11,
        e11_upper: e11,
        argmin: Some((h_star, m_star)),
        surface: collect_surface.then(|| {
            coarse
                .iter()
                .map(|&(h, m, r)| SurfacePoint {
                    h,
                    m,
                    r_per_pulse: r,
                })
                .collect()
        }),
        grid: (hs.len(), ms.len()),
        composed_failure_probability: rect.composed_failure_probability(),
    })
}
