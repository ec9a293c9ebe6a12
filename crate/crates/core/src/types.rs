//! Core domain types: intensity settings, source profiles, channel
//! parameters, observation tallies, and expectation intervals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One of the four source settings each side chooses per pulse: the signal
/// intensity, two decoy intensities, and vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    Mu,
    Nu,
    Omega,
    Vac,
}

impl Intensity {
    /// All settings in canonical order (also the tally-array order).
    pub const ALL: [Intensity; 4] = [
        Intensity::Mu,
        Intensity::Nu,
        Intensity::Omega,
        Intensity::Vac,
    ];

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        match self {
            Intensity::Mu => 0,
            Intensity::Nu => 1,
            Intensity::Omega => 2,
            Intensity::Vac => 3,
        }
    }

    /// Short lowercase label used in CSV output and error messages.
    pub fn label(self) -> &'static str {
        match self {
            Intensity::Mu => "mu",
            Intensity::Nu => "nu",
            Intensity::Omega => "omega",
            Intensity::Vac => "o",
        }
    }
}

/// Measurement-basis label of an intensity pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Both sides encode key bits (signal–signal).
    Zz,
    /// Both sides send test states (decoy–decoy).
    Xx,
}

/// Basis label for an ordered intensity pair: signal–signal pairs are Z–Z,
/// decoy–decoy pairs are X–X, and pairs involving vacuum or mixing signal
/// with decoy carry no label (they are tallied unconditionally).
pub fn pair_basis(l: Intensity, r: Intensity) -> Option<Basis> {
    use Intensity::*;
    match (l, r) {
        (Mu, Mu) => Some(Basis::Zz),
        (Nu | Omega, Nu | Omega) => Some(Basis::Xx),
        _ => None,
    }
}

/// The four source intensities {μ, ν, ω, o} and their selection
/// probabilities. The vacuum probability is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensityProfile<T> {
    mu: T,
    nu: T,
    omega: T,
    p_mu: T,
    p_nu: T,
    p_omega: T,
}

impl<T: Real> IntensityProfile<T> {
    /// Construct a validated profile.
    ///
    /// Invariants: μ > ν > ω > 0 (the strict ν > ω ordering keeps the
    /// yield-estimator denominator positive under Poisson statistics);
    /// each probability in (0, 1) and their sum below 1 so the vacuum
    /// setting retains positive probability.
    pub fn new(mu: T, nu: T, omega: T, p_mu: T, p_nu: T, p_omega: T) -> Result<Self> {
        for (name, v) in [("mu", mu), ("nu", nu), ("omega", omega)] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::InvalidProfile(format!(
                    "intensity {name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(mu > nu) {
            return Err(Error::InvalidProfile(format!(
                "signal intensity must exceed the strong decoy: mu={mu} nu={nu}"
            )));
        }
        if !(nu > omega) {
            return Err(Error::InvalidProfile(format!(
                "decoy ordering nu > omega required (denominator-sign guard), got nu={nu} omega={omega}"
            )));
        }
        let mut sum = T::zero();
        for (name, p) in [("p_mu", p_mu), ("p_nu", p_nu), ("p_omega", p_omega)] {
            if !p.is_finite() || p <= T::zero() || p >= T::one() {
                return Err(Error::InvalidProfile(format!(
                    "probability {name} must lie in (0, 1), got {p}"
                )));
            }
            sum = sum + p;
        }
        if sum >= T::one() {
            return Err(Error::InvalidProfile(format!(
                "selection probabilities must sum below 1 to leave vacuum probability, got {sum}"
            )));
        }
        Ok(Self {
            mu,
            nu,
            omega,
            p_mu,
            p_nu,
            p_omega,
        })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn p_mu(&self) -> T {
        self.p_mu
    }

    pub fn p_nu(&self) -> T {
        self.p_nu
    }

    pub fn p_omega(&self) -> T {
        self.p_omega
    }

    /// Derived vacuum-selection probability 1 − p_μ − p_ν − p_ω.
    pub fn p_o(&self) -> T {
        T::one() - self.p_mu - self.p_nu - self.p_omega
    }

    /// Mean photon number of a setting (vacuum → 0).
    pub fn intensity(&self, s: Intensity) -> T {
        match s {
            Intensity::Mu => self.mu,
            Intensity::Nu => self.nu,
            Intensity::Omega => self.omega,
            Intensity::Vac => T::zero(),
        }
    }

    /// Selection probability of a setting.
    pub fn prob(&self, s: Intensity) -> T {
        match s {
            Intensity::Mu => self.p_mu,
            Intensity::Nu => self.p_nu,
            Intensity::Omega => self.p_omega,
            Intensity::Vac => self.p_o(),
        }
    }

    /// The six free coordinates in optimizer order.
    pub fn coords(&self) -> [T; 6] {
        [
            self.mu,
            self.nu,
            self.omega,
            self.p_mu,
            self.p_nu,
            self.p_omega,
        ]
    }
}

/// Fiber, detector, misalignment, and session-size constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams<T> {
    /// Fiber loss coefficient in dB/km.
    pub alpha_db_per_km: T,
    /// Total receiver efficiency (detector × coupling), in (0, 1].
    pub eta_d: T,
    /// Dark-count probability per detector per gate.
    pub y0: T,
    /// Misalignment error probability for key-basis coincidences.
    pub ed_z: T,
    /// Misalignment error probability for test-basis coincidences.
    pub ed_x: T,
    /// Error-correction inefficiency factor (≥ 1).
    pub f_ec: T,
    /// Per-use failure probability of each fluctuation bound.
    pub epsilon: T,
    /// Total fiber length between the two sources, in km.
    pub distance_km: T,
    /// Source repetition rate in Hz (converts per-pulse rate to bps).
    pub rep_rate_hz: T,
    /// Total number of pulse pairs in the session.
    pub n_total: u64,
    /// Fraction of the fiber on the first side of the measurement node
    /// (0.5 = midpoint).
    pub split_ratio: T,
}

impl<T: Real> ChannelParams<T> {
    /// Validate all invariants, returning the parameters unchanged.
    pub fn validated(self) -> Result<Self> {
        let c = |cond: bool, msg: &str| -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidChannel(msg.to_string()))
            }
        };
        c(
            self.alpha_db_per_km > T::zero() && self.alpha_db_per_km.is_finite(),
            "alpha_db_per_km must be > 0",
        )?;
        c(
            self.eta_d > T::zero() && self.eta_d <= T::one(),
            "eta_d must lie in (0, 1]",
        )?;
        c(
            self.y0 >= T::zero() && self.y0 < T::one(),
            "y0 must lie in [0, 1)",
        )?;
        c(
            self.ed_z >= T::zero() && self.ed_z < T::from_f64(0.5),
            "ed_z must lie in [0, 0.5)",
        )?;
        c(
            self.ed_x >= T::zero() && self.ed_x < T::from_f64(0.5),
            "ed_x must lie in [0, 0.5)",
        )?;
        c(self.f_ec >= T::one(), "f_ec must be >= 1")?;
        c(
            self.epsilon > T::zero() && self.epsilon < T::one(),
            "epsilon must lie in (0, 1)",
        )?;
        c(
            self.distance_km > T::zero() && self.distance_km.is_finite(),
            "distance_km must be > 0",
        )?;
        c(self.rep_rate_hz > T::zero(), "rep_rate_hz must be > 0")?;
        c(self.n_total >= 1, "n_total must be >= 1")?;
        c(
            self.split_ratio >= T::zero() && self.split_ratio <= T::one(),
            "split_ratio must lie in [0, 1]",
        )?;
        Ok(self)
    }

    /// Copy with a different fiber length (used by distance sweeps).
    pub fn at_distance(mut self, distance_km: T) -> Self {
        self.distance_km = distance_km;
        self
    }
}

/// Counts observed for one ordered intensity pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairTally {
    /// Pulse pairs emitted with this setting.
    pub n_pairs: u64,
    /// Effective measurement events among them.
    pub n_coinc: u64,
    /// Effective events recorded with a bit error.
    pub n_err: u64,
    /// Basis label (None for vacuum-involving and mixed pairs).
    pub basis: Option<Basis>,
}

impl PairTally {
    /// Observed gain: coincidences per emitted pair.
    pub fn gain_rate<T: Real>(&self) -> T {
        if self.n_pairs == 0 {
            T::zero()
        } else {
            T::from_u64(self.n_coinc) / T::from_u64(self.n_pairs)
        }
    }

    /// Observed error-weighted gain: error counts per emitted pair.
    pub fn err_rate<T: Real>(&self) -> T {
        if self.n_pairs == 0 {
            T::zero()
        } else {
            T::from_u64(self.n_err) / T::from_u64(self.n_pairs)
        }
    }

    /// Observed correct-count rate: (coincidences − errors) per pair.
    pub fn correct_rate<T: Real>(&self) -> T {
        if self.n_pairs == 0 {
            T::zero()
        } else {
            T::from_u64(self.n_coinc - self.n_err) / T::from_u64(self.n_pairs)
        }
    }

    /// Observed bit-error fraction among coincidences (0 when no events).
    pub fn error_fraction<T: Real>(&self) -> T {
        if self.n_coinc == 0 {
            T::zero()
        } else {
            T::from_u64(self.n_err) / T::from_u64(self.n_coinc)
        }
    }
}

/// Per-pair observation counts for all 16 ordered intensity pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TallySet {
    tallies: [[PairTally; 4]; 4],
}

impl TallySet {
    /// Build from a per-pair table, enforcing 0 ≤ n_err ≤ n_coinc ≤ n_pairs.
    pub fn new(tallies: [[PairTally; 4]; 4]) -> Result<Self> {
        for l in Intensity::ALL {
            for r in Intensity::ALL {
                let t = tallies[l.index()][r.index()];
                if t.n_err > t.n_coinc || t.n_coinc > t.n_pairs {
                    return Err(Error::Domain(format!(
                        "tally ordering violated for ({}, {}): err={} coinc={} pairs={}",
                        l.label(),
                        r.label(),
                        t.n_err,
                        t.n_coinc,
                        t.n_pairs
                    )));
                }
            }
        }
        Ok(Self { tallies })
    }

    /// Counts for one ordered pair.
    pub fn get(&self, l: Intensity, r: Intensity) -> &PairTally {
        &self.tallies[l.index()][r.index()]
    }

    /// Counts for one ordered pair, or an error naming the pair when it
    /// holds no emitted pulses.
    pub fn require(&self, l: Intensity, r: Intensity) -> Result<&PairTally> {
        let t = self.get(l, r);
        if t.n_pairs == 0 {
            Err(Error::MissingPair(format!(
                "({}, {})",
                l.label(),
                r.label()
            )))
        } else {
            Ok(t)
        }
    }
}

/// Chernoff interval for the expectation of an observed rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedRateInterval<T> {
    /// The observed rate the interval was derived from.
    pub observed: T,
    /// Lower confidence limit (clamped at 0).
    pub lower: T,
    /// Upper confidence limit.
    pub upper: T,
}

impl<T: Real> ExpectedRateInterval<T> {
    /// Interval width.
    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    /// Whether a value lies inside the closed interval.
    pub fn contains(&self, x: T) -> bool {
        x >= self.lower && x <= self.upper
    }
}
