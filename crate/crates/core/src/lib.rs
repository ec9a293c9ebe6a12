//! Finite-key rate calculator for measurement-device-independent QKD with
//! four source intensities, using double scanning with jointly constrained
//! decoy-state estimation.
//!
//! The pipeline simulates the coincidence observables of a symmetric fiber
//! link ([`channel`]), turns them into integer tallies, wraps every needed
//! expected rate in a Chernoff interval ([`chernoff`]), and certifies a
//! secret-key rate two ways:
//!
//! * [`scan`]: the double scan. Two fluctuation-sensitive combinations —
//!   the vacuum-related gain combination h and the weak-pair error rate
//!   m — are scanned over their intervals; at each point a small exact LP
//!   ([`decoy`]) lower-bounds the single-photon-pair yield under a joint
//!   total-gain constraint, and the final rate is the minimum over the
//!   scan rectangle.
//! * [`baseline`]: standard independent worst-casing of each observable,
//!   kept for comparison.
//!
//! [`optimize`] searches the six source parameters for the best certified
//! rate, and [`pipeline`] packages one end-to-end evaluation.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the crate-root aliases fix `f64`, which every shipped binary uses.
//!
//! ```
//! use mdiqkd::{Budget64, Channel64, Profile64};
//! use mdiqkd::pipeline::{run, PipelineOptions};
//!
//! let profile = Profile64::new(0.5866, 0.3323, 0.0767, 0.4151, 0.1337, 0.4305)?;
//! let channel = Channel64 {
//!     alpha_db_per_km: 0.18,
//!     eta_d: 0.6,
//!     y0: 4e-8,
//!     ed_z: 0.001,
//!     ed_x: 0.01,
//!     f_ec: 1.16,
//!     epsilon: 1e-10,
//!     distance_km: 120.0,
//!     rep_rate_hz: 5e7,
//!     n_total: 10_000_000_000,
//!     split_ratio: 0.5,
//! };
//! let report = run(&profile, &channel, &PipelineOptions::default())?;
//! assert!(report.double_scan.r_bps > report.baseline.r_bps);
//! # Ok::<(), mdiqkd::Error>(())
//! ```

// Guards are written as negated comparisons (`!(x > y)`) so that NaN fails
// them instead of slipping through the rewritten positive form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tests pin full-precision reference constants and spell out assert ranges.
#![cfg_attr(
    test,
    allow(clippy::excessive_precision, clippy::manual_range_contains)
)]

pub mod baseline;
pub mod channel;
pub mod chernoff;
pub mod decoy;
pub mod error;
pub mod math;
pub mod optimize;
pub mod pipeline;
pub mod scalar;
pub mod scan;
pub mod types;

pub use error::{Error, Result};
pub use scalar::Real;

/// Source profile over `f64`.
pub type Profile64 = types::IntensityProfile<f64>;
/// Channel/session parameters over `f64`.
pub type Channel64 = types::ChannelParams<f64>;
/// Fluctuation-bound budget over `f64`.
pub type Budget64 = chernoff::SecurityBudget<f64>;
/// Scan rectangle over `f64`.
pub type Rectangle64 = decoy::ScanRectangle<f64>;
/// Key-rate outcome over `f64`.
pub type KeyRate64 = scan::KeyRateResult<f64>;
/// Full evaluation report over `f64`.
pub type Report64 = pipeline::PipelineReport<f64>;
