//! Joint-constraint decoy-state estimation with double scanning.
//!
//! From the observed decoy and vacuum tallies this module builds Chernoff
//! intervals for every expected rate the estimator consumes, exposes the
//! scan rectangle over (h, m) — h the vacuum-related count-rate combination,
//! m the error-count rate of the weakest decoy pair — and, for each fixed
//! scan point, solves a small linear program for the single-photon-pair
//! yield lower bound. The LP couples the correct-count rate M̄ of the
//! weakest pair to the scanned m through the two-sided total-gain
//! constraint M̄ + m ∈ [Q_L, Q_U], and ties the vacuum observables to the
//! scanned h through one equality; that joint structure is what recovers
//! the rate lost by worst-casing each observable independently.

use serde::Serialize;

use crate::chernoff::{chernoff_interval, SecurityBudget};
use crate::error::{Error, Result};
use crate::math::poisson_pmf;
use crate::scalar::{real, Real};
use crate::types::{ExpectedRateInterval, Intensity, IntensityProfile, TallySet};

/// Poisson weights of the two decoy intensities that appear as estimator
/// coefficients, plus the (positive) denominator of the yield expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoyCoeffs<T> {
    /// One- and two-photon weights and vacuum weight of the strong decoy ν.
    pub p1_nu: T,
    pub p2_nu: T,
    pub p0_nu: T,
    /// One- and two-photon weights and vacuum weight of the weak decoy ω.
    pub p1_omega: T,
    pub p2_omega: T,
    pub p0_omega: T,
    /// Yield-estimator denominator p₁^ω p₁^ν (p₁^ω p₂^ν − p₁^ν p₂^ω) > 0.
    pub denom: T,
}

impl<T: Real> DecoyCoeffs<T> {
    /// Compute the coefficient set for a profile.
    pub fn new(profile: &IntensityProfile<T>) -> Result<Self> {
        let p1_nu = poisson_pmf(profile.nu(), 1)?;
        let p2_nu = poisson_pmf(profile.nu(), 2)?;
        let p0_nu = poisson_pmf(profile.nu(), 0)?;
        let p1_omega = poisson_pmf(profile.omega(), 1)?;
        let p2_omega = poisson_pmf(profile.omega(), 2)?;
        let p0_omega = poisson_pmf(profile.omega(), 0)?;
        let denom = p1_omega * p1_nu * (p1_omega * p2_nu - p1_nu * p2_omega);
        if !(denom > T::zero()) {
            return Err(Error::InvalidProfile(format!(
                "yield-estimator denominator must be positive (requires nu > omega), got {denom}"
            )));
        }
        Ok(Self {
            p1_nu,
            p2_nu,
            p0_nu,
            p1_omega,
            p2_omega,
            p0_omega,
            denom,
        })
    }
}

/// Chernoff-derived intervals feeding the scan: the (h, m) bounds plus the
/// per-observable expectation intervals retained for the LP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRectangle<T> {
    /// Bounds on the vacuum-related combination
    /// h = p₀^ω⟨Q_oω⟩ + p₀^ω⟨Q_ωo⟩ − (p₀^ω)²⟨Q_oo⟩.
    pub h_low: T,
    pub h_high: T,
    /// Bounds on the weakest-pair error-count rate m = ⟨Q_ωω E_ωω⟩.
    pub m_low: T,
    pub m_high: T,
    /// Correct-count rate of the weakest decoy pair, M̄ = ⟨Q_ωω(1 − E_ωω)⟩.
    pub mbar: ExpectedRateInterval<T>,
    /// Total gain of the weakest decoy pair (joint constraint on M̄ + m).
    pub gain_ww: ExpectedRateInterval<T>,
    /// Error-count rate of the weakest decoy pair (source of m bounds).
    pub err_ww: ExpectedRateInterval<T>,
    /// Vacuum/decoy gain intervals consumed by the LP.
    pub gain_ov: ExpectedRateInterval<T>,
    pub gain_vo: ExpectedRateInterval<T>,
    pub gain_vv: ExpectedRateInterval<T>,
    pub gain_oo: ExpectedRateInterval<T>,
    pub gain_ow: ExpectedRateInterval<T>,
    pub gain_wo: ExpectedRateInterval<T>,
    /// Number of fluctuation-bound constructions behind this rectangle.
    pub chernoff_uses: u32,
    /// Failure probability charged per construction.
    pub epsilon_per_use: T,
}

impl<T: Real> ScanRectangle<T> {
    /// Composed failure probability: one per-use ε per interval construction.
    pub fn composed_failure_probability(&self) -> T {
        T::from_u64(u64::from(self.chernoff_uses)) * self.epsilon_per_use
    }
}

/// Build the scan rectangle from observed tallies.
///
/// The m bounds are the Chernoff interval of the weakest decoy pair's
/// error-count rate; the h bounds combine the vacuum-pair gain intervals
/// with lower/upper ends chosen to extremize the combination.
///
/// The rectangle is only as informative as the observations behind it: a
/// rate observed as exactly zero yields the degenerate interval [0, 0], so
/// a session that records no weak-pair error events collapses the m axis
/// and makes the downstream error bound vacuous. Meaningful certification
/// requires the consumed tallies to carry events.
pub fn build_scan_rectangle<T: Real>(
    tallies: &TallySet,
    profile: &IntensityProfile<T>,
    budget: &SecurityBudget<T>,
) -> Result<ScanRectangle<T>> {
    use Intensity::{Nu, Omega, Vac};
    let coeffs = DecoyCoeffs::new(profile)?;
    let ww = tallies.require(Omega, Omega)?;
    let mbar = chernoff_interval(ww.correct_rate(), ww.n_pairs, budget)?;
    let gain_ww = chernoff_interval(ww.gain_rate(), ww.n_pairs, budget)?;
    let err_ww = chernoff_interval(ww.err_rate(), ww.n_pairs, budget)?;
    let gain_of = |l: Intensity, r: Intensity| -> Result<ExpectedRateInterval<T>> {
        let t = tallies.require(l, r)?;
        chernoff_interval(t.gain_rate(), t.n_pairs, budget)
    };
    let gain_ov = gain_of(Vac, Nu)?;
    let gain_vo = gain_of(Nu, Vac)?;
    let gain_vv = gain_of(Nu, Nu)?;
    let gain_oo = gain_of(Vac, Vac)?;
    let gain_ow = gain_of(Vac, Omega)?;
    let gain_wo = gain_of(Omega, Vac)?;
    let p0w = coeffs.p0_omega;
    let h_low = p0w * gain_ow.lower + p0w * gain_wo.lower - p0w * p0w * gain_oo.upper;
    let h_high = p0w * gain_ow.upper + p0w * gain_wo.upper - p0w * p0w * gain_oo.lower;
    Ok(ScanRectangle {
        h_low,
        h_high,
        m_low: err_ww.lower,
        m_high: err_ww.upper,
        mbar,
        gain_ww,
        err_ww,
        gain_ov,
        gain_vo,
        gain_vv,
        gain_oo,
        gain_ow,
        gain_wo,
        chernoff_uses: 9,
        epsilon_per_use: budget.epsilon,
    })
}

/// Linear program over the seven expected-value variables
/// x = [M̄, q_oν, q_νo, q_νν, q_oo, q_oω, q_ωo]: minimize objective·x +
/// constant subject to per-variable box bounds and one equality
/// eq_coeffs·x = eq_rhs. The M̄ joint constraint is folded into its box
/// bounds before solving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YieldLp<T> {
    pub objective: [T; 7],
    pub constant: T,
    pub lower: [T; 7],
    pub upper: [T; 7],
    pub eq_coeffs: [T; 7],
    pub eq_rhs: T,
}

/// Solution of a [`YieldLp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpSolution<T> {
    /// Minimal objective value (objective·x + constant).
    pub value: T,
    /// Attaining point.
    pub point: [T; 7],
    /// Per-variable bound activity at the solution:
    /// −1 lower bound, +1 upper bound, 0 interior.
    pub active_bounds: [i8; 7],
}

/// Solver interface for the yield LP, so an external simplex backend can be
/// swapped in for the built-in exact enumerator.
pub trait YieldLpSolver<T: Real> {
    /// Minimize the LP; `Err(Infeasible)` when the feasible set is empty.
    fn minimize(&self, lp: &YieldLp<T>) -> Result<LpSolution<T>>;
}

/// Exact solver: a minimum of a linear objective over a box intersected
/// with one hyperplane lies at a point with at most one coordinate strictly
/// between its bounds, so enumerating (bound assignments) × (choice of the
/// equality-solved coordinate among the tied variables) visits every
/// candidate vertex. Deterministic: candidates are visited in a fixed
/// lexicographic order and only strict improvements replace the incumbent,
/// so the reported vertex is the first attaining one.
#[derive(Debug, Clone, Copy, Default)]
pub struct VertexEnumerationSolver;

impl<T: Real> YieldLpSolver<T> for VertexEnumerationSolver {
    fn minimize(&self, lp: &YieldLp<T>) -> Result<LpSolution<T>> {
        for i in 0..7 {
            if lp.lower[i] > lp.upper[i] {
                return Err(Error::Infeasible(format!(
                    "variable {i} has empty box [{}, {}]",
                    lp.lower[i], lp.upper[i]
                )));
            }
        }
        // Variables tied by the equality (nonzero coefficients).
        let tied: Vec<usize> = (0..7).filter(|&i| lp.eq_coeffs[i] != T::zero()).collect();
        let untied: Vec<usize> = (0..7).filter(|&i| lp.eq_coeffs[i] == T::zero()).collect();
        let tol_for =
            |i: usize| real::<T>(1e-12) * (T::one() + lp.lower[i].abs() + lp.upper[i].abs());
        let mut best: Option<LpSolution<T>> = None;
        let mut x = [T::zero(); 7];
        let combos = 1u32 << untied.len();
        for bits in 0..combos {
            for (k, &i) in untied.iter().enumerate() {
                x[i] = if bits & (1 << k) != 0 {
                    lp.upper[i]
                } else {
                    lp.lower[i]
                };
            }
            for &free in &tied {
                let others: Vec<usize> = tied.iter().copied().filter(|&j| j != free).collect();
                let sub_combos = 1u32 << others.len();
                for sub in 0..sub_combos {
                    for (k, &j) in others.iter().enumerate() {
                        x[j] = if sub & (1 << k) != 0 {
                            lp.upper[j]
                        } else {
                            lp.lower[j]
                        };
                    }
                    let mut rhs = lp.eq_rhs;
                    for &j in &others {
                        rhs = rhs - lp.eq_coeffs[j] * x[j];
                    }
                    let solved = rhs / lp.eq_coeffs[free];
                    let tol = tol_for(free);
                    if solved < lp.lower[free] - tol || solved > lp.upper[free] + tol {
                        continue;
                    }
                    x[free] = solved.max(lp.lower[free]).min(lp.upper[free]);
                    let mut value = lp.constant;
                    for (c, xi) in lp.objective.iter().zip(&x) {
                        value = value + *c * *xi;
                    }
                    if best.as_ref().is_none_or(|b| value < b.value) {
                        let mut active = [0i8; 7];
                        for i in 0..7 {
                            let tol = tol_for(i);
                            active[i] = if (x[i] - lp.lower[i]).abs() <= tol {
                                -1
                            } else if (lp.upper[i] - x[i]).abs() <= tol {
                                1
                            } else {
                                0
                            };
                        }
                        best = Some(LpSolution {
                            value,
                            point: x,
                            active_bounds: active,
                        });
                    }
                }
            }
        }
        best.ok_or_else(|| {
            Error::Infeasible(
                "no vertex satisfies the vacuum-combination equality within the boxes".to_string(),
            )
        })
    }
}

/// Diagnostics of one yield-LP solve, serializable for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpDiagnostics<T> {
    /// Scan point the LP was solved at.
    pub h: T,
    pub m: T,
    /// Clamped yield lower bound.
    pub y11_lower: T,
    /// Attaining variable values [M̄, q_oν, q_νo, q_νν, q_oo, q_oω, q_ωo].
    pub vertex: [T; 7],
    /// Bound activity per variable (−1 lower, +1 upper, 0 interior).
    pub active_bounds: [i8; 7],
}

/// Assemble the yield LP for one scan point: box bounds from the rectangle
/// intervals, the M̄ box tightened by the total-gain joint constraint
/// M̄ ∈ [Q_L − m, Q_U − m], and the vacuum equality with right-hand side h.
pub fn assemble_yield_lp<T: Real>(
    rect: &ScanRectangle<T>,
    h: T,
    m: T,
    coeffs: &DecoyCoeffs<T>,
) -> Result<YieldLp<T>> {
    let tol_h = real::<T>(1e-9) * (T::one() + rect.h_low.abs() + rect.h_high.abs());
    let tol_m = real::<T>(1e-9) * (T::one() + rect.m_high.abs());
    if h < rect.h_low - tol_h || h > rect.h_high + tol_h {
        return Err(Error::Domain(format!(
            "scan value h={h} outside [{}, {}]",
            rect.h_low, rect.h_high
        )));
    }
    if m < rect.m_low - tol_m || m > rect.m_high + tol_m {
        return Err(Error::Domain(format!(
            "scan value m={m} outside [{}, {}]",
            rect.m_low, rect.m_high
        )));
    }
    let boxes = [
        rect.mbar,
        rect.gain_ov,
        rect.gain_vo,
        rect.gain_vv,
        rect.gain_oo,
        rect.gain_ow,
        rect.gain_wo,
    ];
    let mut lower = [T::zero(); 7];
    let mut upper = [T::zero(); 7];
    for (i, b) in boxes.iter().enumerate() {
        lower[i] = b.lower;
        upper[i] = b.upper;
    }
    // Joint constraint: correct counts plus error counts compose the total
    // gain, so M̄ + m must stay inside the total-gain interval.
    lower[0] = lower[0].max(rect.gain_ww.lower - m);
    upper[0] = upper[0].min(rect.gain_ww.upper - m);
    if lower[0] > upper[0] {
        return Err(Error::Infeasible(format!(
            "joint total-gain constraint empties the M-bar box at m={m}: [{}, {}]",
            lower[0], upper[0]
        )));
    }
    let c = coeffs;
    let p0n2 = c.p0_nu * c.p0_nu;
    let p0w2 = c.p0_omega * c.p0_omega;
    Ok(YieldLp {
        objective: [
            c.p1_nu * c.p2_nu,
            c.p1_omega * c.p2_omega * c.p0_nu,
            c.p1_omega * c.p2_omega * c.p0_nu,
            -(c.p1_omega * c.p2_omega),
            -(c.p1_omega * c.p2_omega * p0n2),
            T::zero(),
            T::zero(),
        ],
        constant: c.p1_nu * c.p2_nu * (m - h),
        lower,
        upper,
        eq_coeffs: [
            T::zero(),
            T::zero(),
            T::zero(),
            T::zero(),
            -p0w2,
            c.p0_omega,
            c.p0_omega,
        ],
        eq_rhs: h,
    })
}

/// Yield lower bound at one scan point using a caller-supplied LP backend.
pub fn y11_lower_lp_with<T: Real, S: YieldLpSolver<T>>(
    solver: &S,
    rect: &ScanRectangle<T>,
    h: T,
    m: T,
    profile: &IntensityProfile<T>,
) -> Result<(T, LpDiagnostics<T>)> {
    let coeffs = DecoyCoeffs::new(profile)?;
    let lp = assemble_yield_lp(rect, h, m, &coeffs)?;
    let sol = solver.minimize(&lp)?;
    let y11 = (sol.value / coeffs.denom).max(T::zero()).min(T::one());
    Ok((
        y11,
        LpDiagnostics {
            h,
            m,
            y11_lower: y11,
            vertex: sol.point,
            active_bounds: sol.active_bounds,
        },
    ))
}

/// Yield lower bound at one scan point using the built-in exact solver.
pub fn y11_lower_lp<T: Real>(
    rect: &ScanRectangle<T>,
    h: T,
    m: T,
    profile: &IntensityProfile<T>,
) -> Result<(T, LpDiagnostics<T>)> {
    y11_lower_lp_with(&VertexEnumerationSolver, rect, h, m, profile)
}

/// Test-basis single-photon error upper bound at one scan point:
/// (m − h/2) / ((p₁^ω)² y11), clamped to [0, 0.5]. A nonpositive yield
/// signals "no key" and returns 0.5 (maximal uncertainty) rather than an
/// error; the h/2 subtraction reflects that vacuum-related coincidences
/// are random bits.
pub fn e11_upper<T: Real>(h: T, m: T, y11_lower: T, profile: &IntensityProfile<T>) -> Result<T> {
    let half = real::<T>(0.5);
    if !(y11_lower > T::zero()) {
        return Ok(half);
    }
    let p1w = poisson_pmf(profile.omega(), 1)?;
    let v = (m - half * h) / (p1w * p1w * y11_lower);
    Ok(v.max(T::zero()).min(half))
}

/// Yield/error bounds promoted from the test basis to the key basis.
///
/// Single-photon pairs are basis-independent, so the key-basis yield equals
/// the test-basis yield and the phase-error rate of key-basis pairs equals
/// the test-basis bit-error rate; the promotion is an exact copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoyBounds<T> {
    pub y11_xx_lower: T,
    pub e11_xx_upper: T,
    pub y11_zz_lower: T,
    pub e11_ph_upper: T,
}

/// Promote test-basis bounds to key-basis bounds (exact copies).
pub fn promote_to_z<T: Real>(y11_xx_lower: T, e11_xx_upper: T) -> DecoyBounds<T> {
    DecoyBounds {
        y11_xx_lower,
        e11_xx_upper,
        y11_zz_lower: y11_xx_lower,
        e11_ph_upper: e11_xx_upper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{model_observables, sample_tallies, TallyMode};
    use crate::types::ChannelParams;

    fn channel120() -> ChannelParams<f64> {
        ChannelParams {
            alpha_db_per_km: 0.18,
            eta_d: 0.6,
            y0: 4e-8,
            ed_z: 0.001,
            ed_x: 0.01,
            f_ec: 1.16,
            epsilon: 1e-10,
            distance_km: 120.0,
            rep_rate_hz: 5e7,
            n_total: 10_000_000_000,
            split_ratio: 0.5,
        }
    }

    fn profile120() -> IntensityProfile<f64> {
        IntensityProfile::new(0.5866, 0.3323, 0.0767, 0.4151, 0.1337, 0.4305).unwrap()
    }

    fn rectangle120() -> (ScanRectangle<f64>, IntensityProfile<f64>) {
        let profile = profile120();
        let ch = channel120();
        let obs = model_observables(&profile, &ch).unwrap();
        let t = sample_tallies(&obs, &profile, &ch, TallyMode::Expected).unwrap();
        let budget = SecurityBudget::new(1e-10).unwrap();
        (
            build_scan_rectangle(&t, &profile, &budget).unwrap(),
            profile,
        )
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn coefficients_match_direct_poisson_evaluation() {
        let c = DecoyCoeffs::new(&profile120()).unwrap();
        assert!(rel_close(c.p0_omega, 0.92616766223178759, 1e-14));
        assert!(rel_close(c.p1_omega, 0.0767 * 0.92616766223178759, 1e-14));
        assert!(c.denom > 0.0);
        assert!(rel_close(c.denom, 3.6637799198710346e-5, 1e-13));
    }

    #[test]
    fn rectangle_matches_reference_at_120km() {
        let (rect, _) = rectangle120();
        assert!(rel_close(rect.mbar.lower, 3.19655370714589202e-6, 1e-12));
        assert!(rel_close(rect.mbar.upper, 4.17966525751231988e-6, 1e-12));
        assert!(rel_close(rect.gain_ww.lower, 3.65983760162468173e-6, 1e-12));
        assert!(rel_close(rect.gain_ww.upper, 4.70802193482373087e-6, 1e-12));
        assert!(rel_close(rect.m_low, 3.50927300625524335e-7, 1e-12));
        assert!(rel_close(rect.m_high, 7.14495830479323358e-7, 1e-12));
        // Vacuum-pair counts round to zero at this session size, so the
        // vacuum-related combination pins to the degenerate interval [0, 0].
        assert_eq!((rect.h_low, rect.h_high), (0.0, 0.0));
        assert_eq!(rect.chernoff_uses, 9);
        assert!(rel_close(rect.composed_failure_probability(), 9e-10, 1e-12));
        // Nondegenerate m interval: upper/lower ratio beyond 1.
        assert!(rect.m_high / rect.m_low > 1.0);
        // h may go below zero only through the subtracted vacuum term.
        assert!(rect.h_low >= -rect.gain_oo.upper * 0.92616766223178759_f64.powi(2) - 1e-30);
    }

    #[test]
    fn rectangle_widths_shrink_with_session_size() {
        let profile = profile120();
        let budget = SecurityBudget::new(1e-10).unwrap();
        let mut ch = channel120();
        let obs = model_observables(&profile, &ch).unwrap();
        let t1 = sample_tallies(&obs, &profile, &ch, TallyMode::Expected).unwrap();
        ch.n_total = 1_000_000_000_000;
        let t2 = sample_tallies(&obs, &profile, &ch, TallyMode::Expected).unwrap();
        let r1 = build_scan_rectangle(&t1, &profile, &budget).unwrap();
        let r2 = build_scan_rectangle(&t2, &profile, &budget).unwrap();
        let w1 = r1.m_high - r1.m_low;
        let w2 = r2.m_high - r2.m_low;
        // 100x the data: widths shrink ~10x (integer rounding perturbs the
        // observed rate slightly, hence the loose band).
        assert!((w1 / w2 - 10.0).abs() < 0.05, "ratio {}", w1 / w2);
    }

    #[test]
    fn missing_pair_is_reported() {
        let profile = profile120();
        let budget = SecurityBudget::new(1e-10).unwrap();
        let empty = crate::types::PairTally {
            n_pairs: 0,
            n_coinc: 0,
            n_err: 0,
            basis: None,
        };
        let t = TallySet::new([[empty; 4]; 4]).unwrap();
        let err = build_scan_rectangle(&t, &profile, &budget).unwrap_err();
        assert!(matches!(err, Error::MissingPair(_)));
    }

    #[test]
    fn lp_matches_reference_values() {
        let (rect, profile) = rectangle120();
        let (y_low, _) = y11_lower_lp(&rect, 0.0, rect.m_low, &profile).unwrap();
        let (y_high, _) = y11_lower_lp(&rect, 0.0, rect.m_high, &profile).unwrap();
        assert!(rel_close(y_low, 3.96026747221437726e-4, 1e-11));
        assert!(rel_close(y_high, 4.60746940846721870e-4, 1e-11));
        let e_low = e11_upper(0.0, rect.m_low, y_low, &profile).unwrap();
        let e_high = e11_upper(0.0, rect.m_high, y_high, &profile).unwrap();
        assert!(rel_close(e_low, 1.75599260522429995e-1, 1e-11));
        assert!(rel_close(e_high, 3.07303342469902929e-1, 1e-11));
    }

    #[test]
    fn lp_scan_point_outside_rectangle_is_rejected() {
        let (rect, profile) = rectangle120();
        assert!(y11_lower_lp(&rect, 0.0, rect.m_high * 2.0, &profile).is_err());
        assert!(y11_lower_lp(&rect, 1e-3, rect.m_low, &profile).is_err());
    }

    #[test]
    fn e11_clamps_and_signals_no_key() {
        let profile = profile120();
        // Numerator m - h/2 vanishing or negative clamps to 0.
        assert_eq!(e11_upper(2e-7, 1e-7, 1e-4, &profile).unwrap(), 0.0);
        assert_eq!(e11_upper(4e-7, 1e-7, 1e-4, &profile).unwrap(), 0.0);
        // Zero yield signals maximal uncertainty.
        assert_eq!(e11_upper(0.0, 1e-7, 0.0, &profile).unwrap(), 0.5);
        // Monotone in m for fixed h and yield.
        let e1 = e11_upper(0.0, 2e-7, 4e-4, &profile).unwrap();
        let e2 = e11_upper(0.0, 3e-7, 4e-4, &profile).unwrap();
        assert!(e2 > e1);
    }

    #[test]
    fn promotion_is_exact_copy() {
        let b = promote_to_z(0.3_f64, 0.02);
        assert_eq!(b.y11_zz_lower, 0.3);
        assert_eq!(b.e11_ph_upper, 0.02);
        assert_eq!(b.y11_zz_lower.to_bits(), b.y11_xx_lower.to_bits());
        assert_eq!(b.e11_ph_upper.to_bits(), b.e11_xx_upper.to_bits());
        let z = promote_to_z(0.0, 0.37);
        assert_eq!(z.y11_zz_lower, 0.0);
    }

    #[test]
    fn degenerate_intervals_pin_the_lp_to_direct_evaluation() {
        // Zero-width budget: every interval collapses to its observed rate,
        // the LP has no freedom, and the result equals the closed-form
        // evaluation of the yield expression on those rates.
        let profile = profile120();
        let ch = channel120();
        let obs = model_observables(&profile, &ch).unwrap();
        let t = sample_tallies(&obs, &profile, &ch, TallyMode::Expected).unwrap();
        let budget = SecurityBudget::<f64>::zero_width();
        let rect = build_scan_rectangle(&t, &profile, &budget).unwrap();
        assert_eq!(rect.h_low, rect.h_high);
        assert_eq!(rect.m_low, rect.m_high);
        let (y, _) = y11_lower_lp(&rect, rect.h_low, rect.m_low, &profile).unwrap();
        let c = DecoyCoeffs::new(&profile).unwrap();
        let direct = (c.p1_nu * c.p2_nu * rect.mbar.observed
            + c.p1_omega * c.p2_omega * c.p0_nu * (rect.gain_ov.observed + rect.gain_vo.observed)
            - c.p1_omega * c.p2_omega * rect.gain_vv.observed
            - c.p1_omega * c.p2_omega * c.p0_nu * c.p0_nu * rect.gain_oo.observed
            + c.p1_nu * c.p2_nu * (rect.m_low - rect.h_low))
            / c.denom;
        assert!((y - direct).abs() < 1e-12, "lp {y} direct {direct}");
    }

    #[test]
    fn lp_diagnostics_identify_active_bounds() {
        let (rect, profile) = rectangle120();
        let (_, diag) = y11_lower_lp(&rect, 0.0, rect.m_high, &profile).unwrap();
        // At the minimum every untied variable sits on a bound; the
        // equality-solved variable may be interior.
        let interior = diag.active_bounds.iter().filter(|&&a| a == 0).count();
        assert!(interior <= 1);
        // The strong-decoy pair gain (negative coefficient) maxes out.
        assert_eq!(diag.active_bounds[3], 1);
    }

    #[test]
    fn infeasible_joint_constraint_is_reported() {
        let (mut rect, profile) = rectangle120();
        // Force the total-gain box far away from any feasible M-bar + m.
        rect.gain_ww.lower = 0.5;
        rect.gain_ww.upper = 0.6;
        let err = y11_lower_lp(&rect, 0.0, rect.m_low, &profile).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }
}
