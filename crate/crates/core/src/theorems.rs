//! Sufficient conditions for and against dominance reversals.

use crate::bayes::posterior_point;
use crate::dist::{finite_window, Distribution, TailSide};
use crate::error::{Error, Result};
use crate::kernels::SignalKernel;
use std::fmt;

/// Mass an interval must carry to count as "positive probability".
pub const POSITIVE_MASS: f64 = 1e-12;
/// Changes in `h` at or below this size count as constant.
pub const SLOPE_TOL: f64 = 1e-8;
/// Threshold above which two half-step estimates trigger Richardson refinement.
pub const RICHARDSON_TRIGGER: f64 = 1e-6;
const NOISE_PROBES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trigger {
    LemmaHighValues,
    LemmaLowValues,
    CorollaryI,
    CorollaryII,
    CorollaryIII,
    None,
}

impl Trigger {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trigger::LemmaHighValues => "lemma_high_values",
            Trigger::LemmaLowValues => "lemma_low_values",
            Trigger::CorollaryI => "corollary_i",
            Trigger::CorollaryII => "corollary_ii",
            Trigger::CorollaryIII => "corollary_iii",
            Trigger::None => "none",
        }
    }
}

/// Interval with explicit open/closed ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleoutVerdict {
    pub precluded: bool,
    pub trigger: Trigger,
    pub witness_interval: Option<Interval>,
}

impl RuleoutVerdict {
    fn none() -> Self {
        RuleoutVerdict {
            precluded: false,
            trigger: Trigger::None,
            witness_interval: None,
        }
    }

    fn fired(trigger: Trigger, w: Interval) -> Self {
        RuleoutVerdict {
            precluded: true,
            trigger,
            witness_interval: Some(w),
        }
    }
}

impl fmt::Display for RuleoutVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "precluded={} trigger={}", self.precluded, self.trigger.as_str())?;
        if let Some(w) = &self.witness_interval {
            write!(f, " witness={w}")?;
        }
        Ok(())
    }
}

/// Clips an interval to the support hull of `d`, keeping its open/closed ends
/// unless the clip moves them.
fn clip(iv: Interval, d: &Distribution) -> Interval {
    let (a, b) = d.support();
    let mut out = iv;
    if a > iv.lo {
        out.lo = a;
        out.lo_closed = true;
    }
    if b < iv.hi {
        out.hi = b;
        out.hi_closed = true;
    }
    out
}

/// Preclusion test for one cutoff pair: dominance of the posterior at `z1`
/// over that at `z2` is impossible when the prior puts mass on
/// `(z1 - e_lo, z2 - e_lo]` or on `[z1 - e_hi, z2 - e_hi)`.
pub fn ruleout_lemma(prior: &Distribution, noise_range: (f64, f64), z1: f64, z2: f64) -> Result<RuleoutVerdict> {
    if !(z1 < z2) {
        return Err(Error::BadCutoffs { z1, z2 });
    }
    let (e_lo, e_hi) = noise_range;
    if e_lo.is_finite() {
        let (a, b) = (z1 - e_lo, z2 - e_lo);
        if prior.cdf(b) - prior.cdf(a) > POSITIVE_MASS {
            let iv = Interval {
                lo: a,
                hi: b,
                lo_closed: false,
                hi_closed: true,
            };
            return Ok(RuleoutVerdict::fired(Trigger::LemmaHighValues, clip(iv, prior)));
        }
    }
    if e_hi.is_finite() {
        let (a, b) = (z1 - e_hi, z2 - e_hi);
        if prior.cdf_left(b) - prior.cdf_left(a) > POSITIVE_MASS {
            let iv = Interval {
                lo: a,
                hi: b,
                lo_closed: true,
                hi_closed: false,
            };
            return Ok(RuleoutVerdict::fired(Trigger::LemmaLowValues, clip(iv, prior)));
        }
    }
    Ok(RuleoutVerdict::none())
}

/// Preclusion for every cutoff pair at once. The unbounded-support
/// conditions are reported ahead of the width comparison, which needs a
/// bounded noise range.
pub fn ruleout_corollary(prior: &Distribution, noise_range: (f64, f64)) -> Result<RuleoutVerdict> {
    let gaps = prior.support_gaps();
    if let Some((a, b)) = gaps.first() {
        return Err(Error::NotAnInterval(format!("no mass on ({a}, {b})")));
    }
    let (x_lo, x_hi) = prior.support();
    let (e_lo, e_hi) = noise_range;
    let support = Interval {
        lo: x_lo,
        hi: x_hi,
        lo_closed: x_lo.is_finite(),
        hi_closed: x_hi.is_finite(),
    };
    if e_lo > f64::NEG_INFINITY && x_hi == f64::INFINITY {
        return Ok(RuleoutVerdict::fired(Trigger::CorollaryII, support));
    }
    if e_hi < f64::INFINITY && x_lo == f64::NEG_INFINITY {
        return Ok(RuleoutVerdict::fired(Trigger::CorollaryIII, support));
    }
    if e_lo.is_finite() && e_hi.is_finite() && e_hi - e_lo <= x_hi - x_lo {
        return Ok(RuleoutVerdict::fired(Trigger::CorollaryI, support));
    }
    Ok(RuleoutVerdict::none())
}

/// Default finite-difference step: `1e-5` times the (finitized) noise width.
pub fn default_step(k: &SignalKernel) -> f64 {
    let (a, b) = k.noise_range();
    let (a, b) = finite_window(a, b);
    1e-5 * (b - a)
}

fn central(f: impl Fn(f64) -> f64, z: f64, step: f64) -> f64 {
    let d = |h: f64| (f(z + h) - f(z - h)) / (2.0 * h);
    let full = d(step);
    let half = d(step / 2.0);
    if (full - half).abs() > RICHARDSON_TRIGGER {
        (4.0 * half - full) / 3.0
    } else {
        half
    }
}

fn positive_density(k: &SignalKernel, z: f64, x: f64) -> Result<f64> {
    let v = k.density(z, x);
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::ZeroDensity { z, x })
    }
}

/// `d/dz ln f(z | x)`, analytic where the noise piece allows it.
pub fn loglik_slope(k: &SignalKernel, z: f64, x: f64, step: f64) -> Result<f64> {
    for zz in [z - step, z, z + step] {
        positive_density(k, zz, x)?;
    }
    match k.log_slope_z(z, x) {
        Some(h) => Ok(h),
        None => loglik_slope_fd(k, z, x, step),
    }
}

/// Central finite difference of `ln f(z | x)` in `z`.
pub fn loglik_slope_fd(k: &SignalKernel, z: f64, x: f64, step: f64) -> Result<f64> {
    for zz in [z - step, z, z + step] {
        positive_density(k, zz, x)?;
    }
    Ok(central(|s| k.density(s, x).ln(), z, step))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    StrictlyDecreasing,
    WeaklyDecreasing,
    Violated,
}

impl Monotonicity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Monotonicity::StrictlyDecreasing => "strictly_decreasing",
            Monotonicity::WeaklyDecreasing => "weakly_decreasing",
            Monotonicity::Violated => "violated",
        }
    }

    fn worst(self, other: Monotonicity) -> Monotonicity {
        use Monotonicity::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (WeaklyDecreasing, _) | (_, WeaklyDecreasing) => WeaklyDecreasing,
            _ => StrictlyDecreasing,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeReport {
    pub z: f64,
    /// Grid points with positive density, ascending.
    pub x_grid: Vec<f64>,
    pub h_values: Vec<f64>,
    pub monotone: Monotonicity,
    /// Points where `h` increases from the previous grid point.
    pub violation_points: Vec<f64>,
    /// Grid points skipped for zero density.
    pub skipped: Vec<f64>,
}

impl fmt::Display for SlopeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "z={} monotone={} points={} skipped={} violations={}",
            self.z,
            self.monotone.as_str(),
            self.x_grid.len(),
            self.skipped.len(),
            self.violation_points.len()
        )
    }
}

fn classify_decreasing(v: &[f64], tol: f64) -> (Monotonicity, Vec<usize>) {
    let violations: Vec<usize> = (1..v.len()).filter(|&i| v[i] - v[i - 1] > tol).collect();
    if !violations.is_empty() {
        (Monotonicity::Violated, violations)
    } else if v.windows(2).all(|w| w[1] - w[0] < -tol) {
        (Monotonicity::StrictlyDecreasing, violations)
    } else {
        (Monotonicity::WeaklyDecreasing, violations)
    }
}

/// Classifies `x -> h(z | x)` on the grid. Points with zero density are
/// skipped and listed; an error is returned only when none remain.
pub fn check_h_monotone(k: &SignalKernel, z: f64, x_grid: &[f64]) -> Result<SlopeReport> {
    let mut xs: Vec<f64> = x_grid.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut used = Vec::with_capacity(xs.len());
    let mut h = Vec::with_capacity(xs.len());
    let mut skipped = Vec::new();
    for &x in &xs {
        match k.log_slope_z(z, x).filter(|_| k.density(z, x) > 0.0) {
            Some(v) => {
                used.push(x);
                h.push(v);
            }
            None => skipped.push(x),
        }
    }
    if used.is_empty() {
        let x = xs.first().copied().unwrap_or(f64::NAN);
        return Err(Error::ZeroDensity { z, x });
    }
    let (monotone, idx) = classify_decreasing(&h, SLOPE_TOL);
    Ok(SlopeReport {
        z,
        violation_points: idx.iter().map(|&i| used[i]).collect(),
        x_grid: used,
        h_values: h,
        monotone,
        skipped,
    })
}

/// The slope hypothesis checked at `nz + 1` evenly spaced signals in
/// `[z1, z2]`; the classification is the weakest seen.
#[derive(Clone, Debug)]
pub struct IntervalSlopeReport {
    pub z1: f64,
    pub z2: f64,
    pub monotone: Monotonicity,
    pub reports: Vec<SlopeReport>,
}

pub fn check_h_monotone_on(k: &SignalKernel, z1: f64, z2: f64, nz: usize, x_grid: &[f64]) -> Result<IntervalSlopeReport> {
    if !(z1 <= z2) {
        return Err(Error::BadCutoffs { z1, z2 });
    }
    let nz = nz.max(1);
    let mut reports = Vec::with_capacity(nz + 1);
    let mut monotone = Monotonicity::StrictlyDecreasing;
    for i in 0..=nz {
        let z = z1 + (z2 - z1) * i as f64 / nz as f64;
        let r = check_h_monotone(k, z, x_grid)?;
        monotone = monotone.worst(r.monotone);
        reports.push(r);
    }
    Ok(IntervalSlopeReport { z1, z2, monotone, reports })
}

/// Central difference in `z` of the posterior cdf at `w`.
pub fn posterior_z_derivative(prior: &Distribution, k: &SignalKernel, w: f64, z: f64, step: f64) -> Result<f64> {
    let cdf = |s: f64| posterior_point(prior, k, s).map(|p| p.dist.cdf(w));
    let mut vals = [0.0; 4];
    for (v, s) in vals.iter_mut().zip([z - step, z - step / 2.0, z + step / 2.0, z + step]) {
        *v = cdf(s)?;
    }
    let full = (vals[3] - vals[0]) / (2.0 * step);
    let half = (vals[2] - vals[1]) / step;
    Ok(if (full - half).abs() > RICHARDSON_TRIGGER {
        (4.0 * half - full) / 3.0
    } else {
        half
    })
}

/// Probe points and log-density slopes of `noise` over its finitized support.
fn noise_slopes(noise: &Distribution) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = noise.support();
    let (a, b) = finite_window(a, b);
    let mut es = Vec::with_capacity(NOISE_PROBES + 1);
    let mut rs = Vec::with_capacity(NOISE_PROBES + 1);
    for i in 0..=NOISE_PROBES {
        let e = a + (b - a) * i as f64 / NOISE_PROBES as f64;
        if noise.density_right(e) > 0.0 {
            if let Some(r) = noise.log_density_slope(e) {
                es.push(e);
                rs.push(r);
            }
        }
    }
    (es, rs)
}

/// Longest suffix on which `f'/f` is nondecreasing: `(start index, strict)`.
fn nondecreasing_suffix(rs: &[f64]) -> (usize, bool) {
    let mut start = rs.len().saturating_sub(1);
    while start > 0 && rs[start - 1] <= rs[start] + SLOPE_TOL {
        start -= 1;
    }
    let strict = rs[start..].windows(2).all(|w| w[1] - w[0] > SLOPE_TOL);
    (start, strict)
}

/// Smallest probe `e` with `f'/f` nondecreasing on `[e, inf)`.
///
/// The nondecreasing stretch must cover at least a quarter of the probed
/// range; shorter stretches are treated as boundary noise.
pub fn independent_noise_threshold(noise: &Distribution) -> Result<f64> {
    Ok(noise_threshold_detail(noise)?.0)
}

fn noise_threshold_detail(noise: &Distribution) -> Result<(f64, bool)> {
    let (es, rs) = noise_slopes(noise);
    if es.len() < 2 {
        return Err(Error::NoThreshold);
    }
    let (start, strict) = nondecreasing_suffix(&rs);
    let span = es[es.len() - 1] - es[start];
    if span < 0.25 * (es[es.len() - 1] - es[0]) {
        return Err(Error::NoThreshold);
    }
    Ok((es[start], strict))
}

/// Signals above `zmin` are ordered: higher signals give dominated
/// posteriors, strictly when `strict`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReversalRegion {
    pub x_hi: f64,
    pub eps_hat: f64,
    pub zmin: f64,
    pub strict: bool,
}

/// Region of guaranteed reversals for a bounded-above prior and independent
/// noise. Boundedness is read from the prior's declared tail.
pub fn reversal_region(prior: &Distribution, noise: &Distribution) -> Result<ReversalRegion> {
    if matches!(prior.tail(), Some(t) if t.side == TailSide::Upper) {
        return Err(Error::BadParams("prior has an unbounded upper tail".into()));
    }
    let x_hi = prior.support().1;
    let (eps_hat, strict) = noise_threshold_detail(noise)?;
    Ok(ReversalRegion {
        x_hi,
        eps_hat,
        zmin: x_hi + eps_hat,
        strict,
    })
}

/// `(X, Z) -> (-X, -Z)`: turns upper-bound statements into lower-bound ones.
pub fn reflect_scenario(prior: &Distribution, k: &SignalKernel) -> Result<(Distribution, SignalKernel)> {
    crate::kernels::rescale(prior, k, 0.0, -1.0)
}

/// Whether `F(w | z0) < F(w | z)` for every `w` in `ws`.
pub fn posterior_improves(prior: &Distribution, k: &SignalKernel, z0: f64, z: f64, ws: &[f64]) -> Result<bool> {
    let base = posterior_point(prior, k, z0)?.dist;
    let other = posterior_point(prior, k, z)?.dist;
    Ok(ws.iter().all(|&w| base.cdf(w) < other.cdf(w)))
}

/// Certified lower bound on the largest `zbar` such that the posterior at
/// `z0` is dominated by the posterior at every `z` in `(z0, z0 + zbar)`.
///
/// Returns `z_max` when the predicate holds on the whole probed range.
pub fn dominance_horizon(prior: &Distribution, k: &SignalKernel, z0: f64, ws: &[f64], z_max: f64) -> Result<f64> {
    const CERT: usize = 64;
    let holds = |d: f64| posterior_improves(prior, k, z0, z0 + d, ws);
    let certify = |upto: f64| -> Result<f64> {
        for i in 1..=CERT {
            let d = upto * i as f64 / CERT as f64;
            if !holds(d)? {
                return Ok(upto * (i - 1) as f64 / CERT as f64);
            }
        }
        Ok(upto)
    };
    if holds(z_max)? {
        return certify(z_max);
    }
    let mut lo = 0.0;
    let mut hi = z_max;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Ok(0.0);
    }
    certify(lo)
}
