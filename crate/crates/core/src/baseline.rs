//! Baseline estimator: independent worst-casing of every observable.
//!
//! Each expected rate entering the yield and error expressions is replaced
//! by whichever end of its own Chernoff interval is pessimal, with no joint
//! constraint between them. This is the standard approach the double scan
//! improves on; it is kept as a comparison estimator and as the
//! closed-form evaluator used with a zero-width budget.

use crate::chernoff::{chernoff_interval, SecurityBudget};
use crate::decoy::{promote_to_z, DecoyBounds, DecoyCoeffs};
use crate::error::Result;
use crate::scalar::{real, Real};
use crate::scan::{key_rate_formula, EstimationMethod, KeyRateResult, KeyRateStatus};
use crate::types::{ChannelParams, ExpectedRateInterval, Intensity, IntensityProfile, TallySet};

/// Number of fluctuation-bound constructions the baseline charges for:
/// eight count-rate intervals plus three vacuum error-rate intervals.
pub const BASELINE_CHERNOFF_USES: u32 = 11;

struct BaselineIntervals<T> {
    mbar: ExpectedRateInterval<T>,
    err_ww: ExpectedRateInterval<T>,
    gain_ov: ExpectedRateInterval<T>,
    gain_vo: ExpectedRateInterval<T>,
    gain_vv: ExpectedRateInterval<T>,
    gain_oo: ExpectedRateInterval<T>,
    gain_ow: ExpectedRateInterval<T>,
    gain_wo: ExpectedRateInterval<T>,
    eq_ow: ExpectedRateInterval<T>,
    eq_wo: ExpectedRateInterval<T>,
    eq_oo: ExpectedRateInterval<T>,
}

fn baseline_intervals<T: Real>(
    tallies: &TallySet,
    budget: &SecurityBudget<T>,
) -> Result<BaselineIntervals<T>> {
    use Intensity::{Nu, Omega, Vac};
    let gain = |l, r| -> Result<ExpectedRateInterval<T>> {
        let t = tallies.require(l, r)?;
        chernoff_interval(t.gain_rate(), t.n_pairs, budget)
    };
    let err = |l, r| -> Result<ExpectedRateInterval<T>> {
        let t = tallies.require(l, r)?;
        chernoff_interval(t.err_rate(), t.n_pairs, budget)
    };
    let ww = tallies.require(Omega, Omega)?;
    Ok(BaselineIntervals {
        mbar: chernoff_interval(ww.correct_rate(), ww.n_pairs, budget)?,
        err_ww: chernoff_interval(ww.err_rate(), ww.n_pairs, budget)?,
        gain_ov: gain(Vac, Nu)?,
        gain_vo: gain(Nu, Vac)?,
        gain_vv: gain(Nu, Nu)?,
        gain_oo: gain(Vac, Vac)?,
        gain_ow: gain(Vac, Omega)?,
        gain_wo: gain(Omega, Vac)?,
        eq_ow: err(Vac, Omega)?,
        eq_wo: err(Omega, Vac)?,
        eq_oo: err(Vac, Vac)?,
    })
}

/// Single-photon-pair bounds from independent worst-casing.
///
/// With a zero-width budget every interval collapses to its observed rate
/// and this function becomes the direct closed-form evaluation of the
/// yield and error expressions.
pub fn baseline_bounds<T: Real>(
    tallies: &TallySet,
    profile: &IntensityProfile<T>,
    budget: &SecurityBudget<T>,
) -> Result<DecoyBounds<T>> {
    let c = DecoyCoeffs::new(profile)?;
    let iv = baseline_intervals(tallies, budget)?;
    let p0w = c.p0_omega;
    let p0w2 = p0w * p0w;
    let p0n2 = c.p0_nu * c.p0_nu;
    // Pessimal vacuum combination subtracted from the yield numerator.
    let h_up = p0w * iv.gain_ow.upper + p0w * iv.gain_wo.upper - p0w2 * iv.gain_oo.lower;
    let num = c.p1_nu * c.p2_nu * iv.mbar.lower
        + c.p1_omega * c.p2_omega * c.p0_nu * (iv.gain_ov.lower + iv.gain_vo.lower)
        - c.p1_omega * c.p2_omega * iv.gain_vv.upper
        - c.p1_omega * c.p2_omega * p0n2 * iv.gain_oo.upper
        + c.p1_nu * c.p2_nu * (iv.err_ww.lower - h_up);
    let y11 = (num / c.denom).max(T::zero()).min(T::one());
    let half = real::<T>(0.5);
    let e11 = if !(y11 > T::zero()) {
        half
    } else {
        // Pessimal error mass: max total errors minus min vacuum errors.
        let e_num =
            iv.err_ww.upper - p0w * iv.eq_ow.lower - p0w * iv.eq_wo.lower + p0w2 * iv.eq_oo.upper;
        (e_num / (c.p1_omega * c.p1_omega * y11))
            .max(T::zero())
            .min(half)
    };
    Ok(promote_to_z(y11, e11))
}

/// Key rate from the baseline estimator, packaged like a scan result
/// (no argmin, no surface, grid 1x1).
pub fn baseline_key_rate<T: Real>(
    tallies: &TallySet,
    profile: &IntensityProfile<T>,
    channel: &ChannelParams<T>,
    budget: &SecurityBudget<T>,
) -> Result<KeyRateResult<T>> {
    let bounds = baseline_bounds(tallies, profile, budget)?;
    let r_raw = key_rate_formula(
        bounds.y11_zz_lower,
        bounds.e11_ph_upper,
        tallies,
        profile,
        channel,
    )?;
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
        method: EstimationMethod::Baseline,
        y11_lower: bounds.y11_zz_lower,
        e11_upper: bounds.e11_ph_upper,
        argmin: None,
        surface: None,
        grid: (1, 1),
        composed_failure_probability: T::from_u64(u64::from(BASELINE_CHERNOFF_USES))
            * budget.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{model_observables, sample_tallies, TallyMode};
    use crate::decoy::build_scan_rectangle;
    use crate::scan::scan_minimum;

    fn channel(distance_km: f64) -> ChannelParams<f64> {
        ChannelParams {
            alpha_db_per_km: 0.18,
            eta_d: 0.6,
            y0: 4e-8,
            ed_z: 0.001,
            ed_x: 0.01,
            f_ec: 1.16,
            epsilon: 1e-10,
            distance_km,
            rep_rate_hz: 5e7,
            n_total: 10_000_000_000,
            split_ratio: 0.5,
        }
    }

    fn tallies_for(profile: &IntensityProfile<f64>, ch: &ChannelParams<f64>) -> TallySet {
        let obs = model_observables(profile, ch).unwrap();
        sample_tallies(&obs, profile, ch, TallyMode::Expected).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn reference_bounds_at_120km() {
        let profile =
            IntensityProfile::new(0.5866, 0.3323, 0.0767, 0.4151, 0.1337, 0.4305).unwrap();
        let ch = channel(120.0);
        let t = tallies_for(&profile, &ch);
        let budget = SecurityBudget::new(1e-10).unwrap();
        let b = baseline_bounds(&t, &profile, &budget).unwrap();
        assert!(rel_close(b.y11_zz_lower, 3.67080111066198274e-4, 1e-11));
        assert!(rel_close(b.e11_ph_upper, 3.85717097403423359e-1, 1e-11));
        // Worst-casing drives the error bound high enough to kill the key.
        let out = baseline_key_rate(&t, &profile, &ch, &budget).unwrap();
        assert_eq!(out.r_per_pulse, 0.0);
        assert_eq!(out.status, KeyRateStatus::NoKey);
        assert_eq!(out.method, EstimationMethod::Baseline);
        assert!(out.argmin.is_none());
        assert!(rel_close(out.composed_failure_probability, 1.1e-9, 1e-12));
    }

    #[test]
    fn reference_bounds_at_150km() {
        let profile =
            IntensityProfile::new(0.3851, 0.3707, 0.0763, 0.1763, 0.1898, 0.6124).unwrap();
        let ch = channel(150.0);
        let t = tallies_for(&profile, &ch);
        let budget = SecurityBudget::new(1e-10).unwrap();
        let b = baseline_bounds(&t, &profile, &budget).unwrap();
        assert!(rel_close(b.y11_zz_lower, 9.01932706761298747e-5, 1e-11));
        assert_eq!(b.e11_ph_upper, 0.5);
        let out = baseline_key_rate(&t, &profile, &ch, &budget).unwrap();
        assert_eq!(out.r_per_pulse, 0.0);
    }

    #[test]
    fn zero_width_budget_reduces_to_direct_evaluation() {
        // With degenerate intervals the baseline and the scanned LP evaluate
        // the same closed-form point, so their yields must agree exactly.
        let profile =
            IntensityProfile::new(0.5866, 0.3323, 0.0767, 0.4151, 0.1337, 0.4305).unwrap();
        let ch = channel(120.0);
        let t = tallies_for(&profile, &ch);
        let budget = SecurityBudget::<f64>::zero_width();
        let b = baseline_bounds(&t, &profile, &budget).unwrap();
        let rect = build_scan_rectangle(&t, &profile, &budget).unwrap();
        let scan = scan_minimum(&rect, &t, &profile, &ch, (16, 16), false).unwrap();
        assert!((b.y11_zz_lower - scan.y11_lower).abs() < 1e-15);
        assert!((b.e11_ph_upper - scan.e11_upper).abs() < 1e-15);
        assert!(
            (baseline_key_rate(&t, &profile, &ch, &budget)
                .unwrap()
                .r_per_pulse
                - scan.r_per_pulse)
                .abs()
                < 1e-20
        );
    }

    #[test]
    fn baseline_never_beats_the_double_scan() {
        for (profile, d) in [
            (
                IntensityProfile::new(0.5866, 0.3323, 0.0767, 0.4151, 0.1337, 0.4305).unwrap(),
                120.0,
            ),
            (
                IntensityProfile::new(0.3851, 0.3707, 0.0763, 0.1763, 0.1898, 0.6124).unwrap(),
                150.0,
            ),
            (
                IntensityProfile::new(0.45, 0.25, 0.08, 0.3, 0.2, 0.4).unwrap(),
                80.0,
            ),
        ] {
            let ch = channel(d);
            let t = tallies_for(&profile, &ch);
            let budget = SecurityBudget::new(1e-10).unwrap();
            let rect = build_scan_rectangle(&t, &profile, &budget).unwrap();
            let ds = scan_minimum(&rect, &t, &profile, &ch, (16, 16), false).unwrap();
            let base = baseline_key_rate(&t, &profile, &ch, &budget).unwrap();
            assert!(
                ds.r_per_pulse >= base.r_per_pulse,
                "d={d}: scan {} < baseline {}",
                ds.r_per_pulse,
                base.r_per_pulse
            );
        }
    }

    #[test]
    fn large_sessions_make_both_estimators_agree() {
        let profile =
            IntensityProfile::new(0.5866, 0.3323, 0.0767, 0.4151, 0.1337, 0.4305).unwrap();
        let mut ch = channel(120.0);
        ch.n_total = 10_000_000_000_000_000;
        let t = tallies_for(&profile, &ch);
        let budget = SecurityBudget::new(1e-10).unwrap();
        let rect = build_scan_rectangle(&t, &profile, &budget).unwrap();
        let ds = scan_minimum(&rect, &t, &profile, &ch, (16, 16), false).unwrap();
        let base = baseline_key_rate(&t, &profile, &ch, &budget).unwrap();
        assert!(base.r_per_pulse > 0.0);
        let gap = (ds.r_per_pulse - base.r_per_pulse) / ds.r_per_pulse;
        assert!(gap >= 0.0 && gap < 0.01, "relative gap {gap}");
    }
}
