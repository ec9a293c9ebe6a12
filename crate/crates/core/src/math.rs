//! Elementary numeric functions: Poisson photon-number weights and the
//! binary Shannon entropy.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Probability that a phase-randomized source of mean photon number
/// `lambda` emits exactly `n` photons: λⁿ e^{−λ} / n!.
///
/// Exact multiplicative recurrence for n ≤ 20; log-space evaluation above
/// that to avoid factorial overflow.
pub fn poisson_pmf<T: Real>(lambda: T, n: u32) -> Result<T> {
    if lambda < T::zero() || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "poisson_pmf requires a finite mean photon number >= 0, got {lambda}"
        )));
    }
    if n <= 20 {
        let mut p = (-lambda).exp();
        for k in 1..=n {
            p = p * lambda / T::from_u64(u64::from(k));
        }
        Ok(p)
    } else {
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        // ln p = n·ln λ − λ − ln(n!) with the factorial summed in log space.
        let mut ln_fact = T::zero();
        for k in 2..=n {
            ln_fact = ln_fact + T::from_u64(u64::from(k)).ln();
        }
        let ln_p = T::from_u64(u64::from(n)) * lambda.ln() - lambda - ln_fact;
        Ok(ln_p.exp())
    }
}

/// Binary Shannon entropy h(x) = −x·log₂x − (1−x)·log₂(1−x) in bits, with
/// h(0) = h(1) = 0 by the continuity convention.
pub fn binary_entropy<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Domain(format!(
            "binary_entropy requires a probability in [0, 1], got {x}"
        )));
    }
    if x == T::zero() || x == T::one() {
        return Ok(T::zero());
    }
    let ln2 = real::<T>(std::f64::consts::LN_2);
    let one = T::one();
    Ok(-(x * x.ln() + (one - x) * (one - x).ln()) / ln2)
}
