//! Fluctuation analysis: converts an observed rate into a two-sided
//! confidence interval for its expectation.
//!
//! The deviation coefficients follow the concentration bound used for rare
//! coincidence events: the lower tail fails with probability (ε/2)^{3/2},
//! the upper tail with (ε/2)⁴/16, which under f(x) = √(2·ln(1/x)) gives an
//! asymmetric pair of coefficients with δ_u > δ_l.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::types::ExpectedRateInterval;

/// Per-use failure probability and the derived deviation coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityBudget<T> {
    /// Failure probability charged per interval construction.
    pub epsilon: T,
    /// Lower-deviation coefficient δ_l = f((ε/2)^{3/2}) = √(3·ln(2/ε)).
    pub delta_l: T,
    /// Upper-deviation coefficient δ_u = f((ε/2)⁴/16) = √(2·(ln 16 + 4·ln(2/ε))).
    pub delta_u: T,
}

impl<T: Real> SecurityBudget<T> {
    /// Derive both deviation coefficients from a failure probability.
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(Error::Domain(format!(
                "failure probability must lie in (0, 1), got {epsilon}"
            )));
        }
        let two = real::<T>(2.0);
        let ln_inv = (two / epsilon).ln();
        let delta_l = (real::<T>(3.0) * ln_inv).sqrt();
        let delta_u = (two * (real::<T>(16.0).ln() + real::<T>(4.0) * ln_inv)).sqrt();
        Ok(Self {
            epsilon,
            delta_l,
            delta_u,
        })
    }

    /// Budget with both deviation coefficients forced to zero, so every
    /// interval degenerates to its observed rate. Used to evaluate the
    /// estimators on exact expected values (the infinite-data limit).
    pub fn zero_width() -> Self {
        Self {
            epsilon: T::zero(),
            delta_l: T::zero(),
            delta_u: T::zero(),
        }
    }
}

/// Two-sided interval for the expectation of `observed_rate` measured over
/// `n_pairs` trials: Γ ∓ δ·√(Γ/N), lower clamped at 0.
///
/// A zero observed rate yields the degenerate interval [0, 0] (the
/// deviation term vanishes with Γ).
pub fn chernoff_interval<T: Real>(
    observed_rate: T,
    n_pairs: u64,
    budget: &SecurityBudget<T>,
) -> Result<ExpectedRateInterval<T>> {
    if n_pairs == 0 {
        return Err(Error::Domain(
            "cannot bound an expectation from zero emitted pairs".to_string(),
        ));
    }
    if !(observed_rate >= T::zero() && observed_rate <= T::one()) {
        return Err(Error::Domain(format!(
            "observed rate must lie in [0, 1], got {observed_rate}"
        )));
    }
    let n = T::from_u64(n_pairs);
    let dev = (observed_rate / n).sqrt();
    let lower = (observed_rate - budget.delta_l * dev).max(T::zero());
    let upper = observed_rate + budget.delta_u * dev;
    Ok(ExpectedRateInterval {
        observed: observed_rate,
        lower,
        upper,
    })
}
