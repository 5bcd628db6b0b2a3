//! Queueing model of the access links.
//!
//! Every access-link queue is treated as M/M/1 with service rate `mu` and
//! arrival rate `M / rtt`, so each of the `k` queue stages on the round trip
//! contributes an exponential delay of rate `mu - M / rtt`. `k` is 4 for
//! symmetric links (both uplinks and both downlinks) and 2 when only the
//! uplinks are bottlenecks.
//!
//! Without a timer the expected round trip solves
//! `rtt = tp + k / (mu - M / rtt)` in closed form. With a timer of length
//! `tout`, the timeout probability is the Erlang(k, x) tail at `tout - tp`
//! and the valid bandwidth shrinks by `(1 - P)`:
//! `rtt = tp + k / ((1 - P) * (mu - M / rtt))`, which is solved by scanning
//! `rtt` upward from `tp` on a fixed grid.

use std::fmt;

use crate::error::{param, Result};
use crate::scalar::Scalar;
use crate::stats::{erlang_cdf, ErlangParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LinkMode {
    /// Uplink and downlink have equal capacity; four queue stages.
    Symmetric,
    /// Downlinks are fast enough to ignore; two uplink stages.
    Asymmetric,
}

impl LinkMode {
    pub fn stages(self) -> u32 {
        match self {
            LinkMode::Symmetric => 4,
            LinkMode::Asymmetric => 2,
        }
    }
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkMode::Symmetric => "symmetric",
            LinkMode::Asymmetric => "asymmetric",
        })
    }
}

/// Timer duration; `Infinite` disables the timer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Timeout<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Timeout<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Timeout::Finite(v) => Some(v),
            Timeout::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Timeout::Infinite)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Timeout::Finite(v) => v.as_f64(),
            Timeout::Infinite => f64::INFINITY,
        }
    }
}

impl<T: Scalar> fmt::Display for Timeout<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timeout::Finite(v) => write!(f, "{v}"),
            Timeout::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelInputs<T> {
    /// Bottleneck uplink service rate in packets per second (`C / L`).
    pub mu_up: T,
    /// Downlink service rate; `None` means the same as `mu_up`.
    pub mu_down: Option<T>,
    /// Fixed core round-trip propagation delay in seconds.
    pub tp: T,
    pub tout: Timeout<T>,
    /// Threads per node (window).
    pub m: u32,
    pub mode: LinkMode,
}

impl<T: Scalar> ModelInputs<T> {
    /// Symmetric inputs: both links at `mu`, Erlang shape 4.
    pub fn symmetric(mu: T, tp: T, tout: Timeout<T>, m: u32) -> Self {
        Self {
            mu_up: mu,
            mu_down: None,
            tp,
            tout,
            m,
            mode: LinkMode::Symmetric,
        }
    }

    pub fn asymmetric(mu_up: T, mu_down: T, tp: T, tout: Timeout<T>, m: u32) -> Self {
        Self {
            mu_up,
            mu_down: Some(mu_down),
            tp,
            tout,
            m,
            mode: LinkMode::Asymmetric,
        }
    }

    pub fn with_m(self, m: u32) -> Self {
        Self { m, ..self }
    }

    pub fn with_tout(self, tout: Timeout<T>) -> Self {
        Self { tout, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_up > T::zero()) || !self.mu_up.is_finite() {
            return param(format!("mu_up must be positive, got {}", self.mu_up));
        }
        if let Some(d) = self.mu_down {
            if !(d > T::zero()) || !d.is_finite() {
                return param(format!("mu_down must be positive, got {d}"));
            }
        }
        if !(self.tp >= T::zero()) || !self.tp.is_finite() {
            return param(format!("tp must be non-negative, got {}", self.tp));
        }
        if let Timeout::Finite(t) = self.tout {
            if !(t > self.tp) {
                return param(format!(
                    "tout ({t}) must exceed tp ({}); the timer would fire before any reply",
                    self.tp
                ));
            }
        }
        Ok(())
    }

    fn stages(&self) -> T {
        T::from_count(u64::from(self.mode.stages()))
    }

    fn m_real(&self) -> T {
        T::from_count(u64::from(self.m))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings<T> {
    /// Grid increment for the rtt scan, seconds.
    pub step: T,
    /// Accepted `|rhs - rtt|`, seconds.
    pub tolerance: T,
    /// Search range above `tp`, seconds.
    pub rtt_max: T,
}

impl<T: Scalar> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            step: T::lit(0.001),
            tolerance: T::lit(0.001),
            rtt_max: T::lit(60.0),
        }
    }
}

impl<T: Scalar> SolverSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !self.step.is_finite() {
            return param(format!("solver step must be positive, got {}", self.step));
        }
        if !(self.tolerance >= T::zero()) {
            return param(format!(
                "solver tolerance must be non-negative, got {}",
                self.tolerance
            ));
        }
        if !(self.rtt_max > T::zero()) || !self.rtt_max.is_finite() {
            return param(format!("rtt_max must be positive, got {}", self.rtt_max));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Saturated,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::Saturated => "saturated",
        })
    }
}

/// A solved operating point of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingPoint<T> {
    /// Expected round-trip time, seconds.
    pub rtt: T,
    /// Mean delay of one queue stage, `(rtt - tp) / k`.
    pub x: T,
    pub p_timeout: T,
    /// `(M / rtt) / mu`.
    pub gamma_raw: T,
    /// `gamma_raw * (1 - P)`: only packets that beat the timer.
    pub gamma_good: T,
    /// `rhs(rtt) - rtt` at the returned point.
    pub residual: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticSolution<T> {
    Converged(OperatingPoint<T>),
    /// No fixed point inside the search range; there are no metrics.
    Saturated,
}

impl<T: Scalar> AnalyticSolution<T> {
    pub fn status(&self) -> SolveStatus {
        match self {
            AnalyticSolution::Converged(_) => SolveStatus::Converged,
            AnalyticSolution::Saturated => SolveStatus::Saturated,
        }
    }

    pub fn point(&self) -> Option<&OperatingPoint<T>> {
        match self {
            AnalyticSolution::Converged(p) => Some(p),
            AnalyticSolution::Saturated => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, AnalyticSolution::Converged(_))
    }
}

/// `(m / rtt) / mu`.
pub fn normalized_throughput<T: Scalar>(m: u32, rtt: T, mu: T) -> T {
    T::from_count(u64::from(m)) / rtt / mu
}

/// Closed-form solution with the timer disabled.
///
/// Returns the larger root of `mu E^2 - (M + mu tp + k) E + M tp = 0`; the
/// smaller root lies below `tp` and is not physical. `inp.tout` is ignored.
pub fn solve_no_timeout<T: Scalar>(inp: &ModelInputs<T>) -> Result<AnalyticSolution<T>> {
    inp.validate()?;
    let (rtt, _) = quadratic_roots(inp);
    let mu = inp.mu_up;
    let k = inp.stages();
    let gamma = normalized_throughput(inp.m, rtt, mu);
    let residual = inp.tp + k / (mu - inp.m_real() / rtt) - rtt;
    Ok(AnalyticSolution::Converged(OperatingPoint {
        rtt,
        x: (rtt - inp.tp) / k,
        p_timeout: T::zero(),
        gamma_raw: gamma,
        gamma_good: gamma,
        residual,
    }))
}

/// Both roots `(larger, smaller)` of the no-timeout quadratic.
pub fn quadratic_roots<T: Scalar>(inp: &ModelInputs<T>) -> (T, T) {
    let mu = inp.mu_up;
    let m = inp.m_real();
    let two = T::lit(2.0);
    let b = m + mu * inp.tp + inp.stages();
    let c = m * inp.tp;
    // b^2 - 4 mu c = (M - mu tp)^2 + positive terms, never negative
    let disc = (b * b - T::lit(4.0) * mu * c).max(T::zero());
    let q = (b + disc.sqrt()) / two;
    (q / mu, c / q)
}

/// Fixed-point solution with a finite timer.
///
/// Candidates `tp + n * step` are scanned upward. A candidate is accepted when
/// `|rhs - rtt| <= tolerance`, or when `rhs - rtt` changes sign from positive
/// to non-positive between consecutive valid candidates. Whenever the root is
/// bracketed by two grid points it is refined by bisection. Candidates where
/// `mu - M / rtt <= 0` or `P == 1` are skipped.
pub fn solve_with_timeout<T: Scalar>(
    inp: &ModelInputs<T>,
    s: &SolverSettings<T>,
) -> Result<AnalyticSolution<T>> {
    inp.validate()?;
    s.validate()?;
    let tout = match inp.tout {
        Timeout::Finite(t) => t,
        Timeout::Infinite => {
            return param("solve_with_timeout needs a finite tout; use solve_no_timeout")
        }
    };
    let system = FixedPointSystem::new(inp, tout)?;

    let ceiling = inp.tp + s.rtt_max;
    let mut prev: Option<(T, T)> = None;
    let mut n: u64 = 1;
    loop {
        let rtt = inp.tp + s.step * T::from_count(n);
        if rtt > ceiling {
            return Ok(AnalyticSolution::Saturated);
        }
        n += 1;
        let Some(r) = system.residual(rtt) else {
            prev = None;
            continue;
        };
        if let Some((lo, r_lo)) = prev {
            if r_lo > T::zero() && r <= T::zero() {
                let root = system.bisect(lo, rtt);
                return Ok(system.point(root));
            }
        }
        if r.abs() <= s.tolerance {
            if r > T::zero() {
                let hi = rtt + s.step;
                if let Some(r_hi) = system.residual(hi) {
                    if r_hi <= T::zero() && hi <= ceiling {
                        return Ok(system.point(system.bisect(rtt, hi)));
                    }
                }
            }
            return Ok(system.point(rtt));
        }
        prev = Some((rtt, r));
    }
}

/// Dispatch on the timer: closed form when infinite, fixed point otherwise.
pub fn solve<T: Scalar>(
    inp: &ModelInputs<T>,
    s: &SolverSettings<T>,
) -> Result<AnalyticSolution<T>> {
    match inp.tout {
        Timeout::Infinite => solve_no_timeout(inp),
        Timeout::Finite(_) => solve_with_timeout(inp, s),
    }
}

/// Solve the model at each window size. Per-point failures stay per-point.
pub fn theory_curve<T: Scalar>(
    template: &ModelInputs<T>,
    m_values: &[u32],
    s: &SolverSettings<T>,
) -> Result<Vec<(u32, Result<AnalyticSolution<T>>)>> {
    if m_values.is_empty() {
        return param("m_values must not be empty");
    }
    if m_values.windows(2).any(|w| w[0] >= w[1]) {
        return param("m_values must be strictly increasing");
    }
    Ok(m_values
        .iter()
        .map(|&m| (m, solve(&template.with_m(m), s)))
        .collect())
}

/// The timeout-model equations at fixed inputs.
struct FixedPointSystem<T> {
    mu: T,
    m: T,
    tp: T,
    k: T,
    shape: u32,
    window: T,
    m_count: u32,
}

impl<T: Scalar> FixedPointSystem<T> {
    fn new(inp: &ModelInputs<T>, tout: T) -> Result<Self> {
        ErlangParams::new(inp.mode.stages(), T::one())?;
        Ok(Self {
            mu: inp.mu_up,
            m: inp.m_real(),
            tp: inp.tp,
            k: inp.stages(),
            shape: inp.mode.stages(),
            window: tout - inp.tp,
            m_count: inp.m,
        })
    }

    fn p_timeout(&self, rtt: T) -> Option<T> {
        let x = (rtt - self.tp) / self.k;
        let params = ErlangParams::new(self.shape, x).ok()?;
        Some(T::one() - erlang_cdf(self.window, &params))
    }

    fn rhs(&self, rtt: T) -> Option<(T, T)> {
        let spare = self.mu - self.m / rtt;
        if !(spare > T::zero()) {
            return None;
        }
        let p = self.p_timeout(rtt)?;
        if !(p < T::one()) {
            return None;
        }
        Some((self.tp + self.k / ((T::one() - p) * spare), p))
    }

    fn residual(&self, rtt: T) -> Option<T> {
        self.rhs(rtt).map(|(r, _)| r - rtt)
    }

    /// Root of the residual in `[lo, hi]` with `residual(lo) > 0 >= residual(hi)`.
    fn bisect(&self, mut lo: T, mut hi: T) -> T {
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.residual(mid) {
                Some(r) if r > T::zero() => lo = mid,
                _ => hi = mid,
            }
        }
        hi
    }

    fn point(&self, rtt: T) -> AnalyticSolution<T> {
        let Some((rhs, p)) = self.rhs(rtt) else {
            return AnalyticSolution::Saturated;
        };
        let gamma_raw = normalized_throughput(self.m_count, rtt, self.mu);
        AnalyticSolution::Converged(OperatingPoint {
            rtt,
            x: (rtt - self.tp) / self.k,
            p_timeout: p,
            gamma_raw,
            gamma_good: gamma_raw * (T::one() - p),
            residual: rhs - rtt,
        })
    }
}
