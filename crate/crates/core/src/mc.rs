//! Monte Carlo oracle for posteriors.
//!
//! Samples are drawn from the joint law of the prior and the signal and
//! kept when the conditioning event occurs. Point conditioning uses a narrow
//! band of signals around the point. Randomness comes from ChaCha8 with one stream
//! per fixed-size chunk of proposals, so results depend only on the seed.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::kernels::{SignalKernel, ThresholdSignal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;

pub const DEFAULT_MC_N: usize = 1_000_000;
pub const DEFAULT_BANDWIDTH: f64 = 1e-3;
pub const DKW_CONFIDENCE: f64 = 1.0 - 1e-6;
/// Below this acceptance rate the conditioning event is treated as null.
pub const MIN_ACCEPTANCE: f64 = 1e-6;
const CHUNK: u64 = 1 << 16;
const CHUNKS_PER_BATCH: u64 = 16;

/// Half-width of the DKW confidence band, capped at 1.
pub fn dkw_band(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt().min(1.0)
}

#[derive(Clone, Debug)]
pub enum McCondition {
    /// `lo < Z <= hi`, compared with horizontal `slack`.
    Band { lo: f64, hi: f64, slack: f64 },
    /// `S >= b` for the threshold signal.
    Threshold(ThresholdSignal, f64),
    /// `Z >= b` for the kernel's own signal.
    SignalAbove(f64),
}

impl McCondition {
    /// `|Z - z| <= bandwidth`
    pub fn band(z: f64, bandwidth: f64) -> McCondition {
        McCondition::Band {
            lo: z - bandwidth,
            hi: z + bandwidth,
            slack: 0.0,
        }
    }

    /// `z - bandwidth < Z <= z`; matches left-limit conventions where the
    /// signal density jumps at `z`.
    pub fn left_band(z: f64, bandwidth: f64) -> McCondition {
        McCondition::Band {
            lo: z - bandwidth,
            hi: z,
            slack: bandwidth,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            McCondition::Band { lo, hi, .. } => format!("band lo={lo} hi={hi}"),
            McCondition::Threshold(_, b) => format!("threshold s>={b}"),
            McCondition::SignalAbove(b) => format!("signal z>={b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
    seed: u64,
    condition: String,
    proposals: u64,
}

impl EmpiricalCdf {
    fn new(mut samples: Vec<f64>, seed: u64, condition: String, proposals: u64) -> Self {
        samples.sort_by(|a, b| a.total_cmp(b));
        EmpiricalCdf {
            samples,
            seed,
            condition,
            proposals,
        }
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Sorted samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn condition(&self) -> &str {
        &self.condition
    }

    /// Accepted samples over proposals.
    pub fn acceptance_rate(&self) -> f64 {
        self.samples.len() as f64 / self.proposals as f64
    }

    pub fn cdf(&self, w: f64) -> f64 {
        self.samples.partition_point(|&s| s <= w) as f64 / self.n() as f64
    }

    pub fn cdf_left(&self, w: f64) -> f64 {
        self.samples.partition_point(|&s| s < w) as f64 / self.n() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.n() as f64
    }

    /// Writes the sorted samples as little-endian `f64`.
    pub fn write_le<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(8 * self.samples.len());
        for s in &self.samples {
            buf.extend_from_slice(&s.to_le_bytes());
        }
        out.write_all(&buf)
    }
}

/// Reads a little-endian `f64` stream.
pub fn read_le(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

/// Kolmogorov distance between an empirical and an analytic cdf, allowing
/// each comparison to use the analytic cdf anywhere within `slack` of the
/// sample point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub at: f64,
}

pub fn ks_distance(emp: &EmpiricalCdf, d: &Distribution, slack: f64) -> KsResult {
    let s = emp.samples();
    let n = s.len() as f64;
    let mut best = KsResult {
        statistic: 0.0,
        at: s.first().copied().unwrap_or(f64::NAN),
    };
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let mut j = i;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        // empirical jumps from i/n to j/n at x
        let above = j as f64 / n - d.cdf(x + slack);
        let below = d.cdf_left(x - slack) - i as f64 / n;
        for g in [above, below] {
            if g > best.statistic {
                best = KsResult { statistic: g, at: x };
            }
        }
        i = j;
    }
    best
}

/// Prior draws restricted to a union of disjoint windows, by inverse cdf.
struct Windows {
    spans: Vec<(f64, f64)>,
    cum: Vec<f64>,
    mass: f64,
}

impl Windows {
    fn new(prior: &Distribution, mut raw: Vec<(f64, f64)>) -> Windows {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut spans: Vec<(f64, f64)> = Vec::new();
        for (a, b) in raw {
            match spans.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => spans.push((a, b)),
            }
        }
        let mut cum = Vec::with_capacity(spans.len());
        let mut mass = 0.0;
        for &(a, b) in &spans {
            mass += prior.cdf(b) - prior.cdf_left(a);
            cum.push(mass);
        }
        Windows { spans, cum, mass }
    }

    fn contains(&self, x: f64) -> bool {
        self.spans.iter().any(|&(a, b)| x >= a && x <= b)
    }

    fn sample<R: Rng + ?Sized>(&self, prior: &Distribution, rng: &mut R) -> f64 {
        let u = rng.random::<f64>() * self.mass;
        let k = self.cum.partition_point(|&c| c <= u).min(self.spans.len() - 1);
        let (a, b) = self.spans[k];
        let lo = prior.cdf_left(a);
        let hi = prior.cdf(b);
        let x = prior.quantile(lo + rng.random::<f64>() * (hi - lo));
        x.clamp(a, b)
    }
}

/// Rejection sampler for the band event.
///
/// Proposal: the prior with probability `alpha`, otherwise the prior
/// restricted to the windows where a kernel atom can land in the band.
/// A proposal `x` is kept with probability `q(x) / (m(x) M)`, where `q` is
/// the band probability given `x` and `m` the proposal density relative to
/// the prior.
struct BandSampler<'a> {
    prior: &'a Distribution,
    k: &'a SignalKernel,
    lo: f64,
    hi: f64,
    alpha: f64,
    windows: Option<Windows>,
    bound: f64,
}

impl<'a> BandSampler<'a> {
    fn new(prior: &'a Distribution, k: &'a SignalKernel, lo: f64, hi: f64) -> Self {
        let (x_lo, x_hi) = prior.support();
        let q_cont = ((hi - lo) * k.sup_density_on(lo - x_hi, hi - x_lo)).min(1.0);
        let mut offsets: Vec<f64> = k.noise().atoms().iter().map(|a| a.at).collect();
        if k.p().is_some() {
            offsets.push(0.0);
        }
        let windows = if offsets.is_empty() {
            None
        } else {
            let w = Windows::new(prior, offsets.iter().map(|o| (lo - o, hi - o)).collect());
            (w.mass > 0.0).then_some(w)
        };
        match windows {
            None => BandSampler {
                prior,
                k,
                lo,
                hi,
                alpha: 1.0,
                windows: None,
                bound: q_cont,
            },
            Some(w) => {
                let alpha = 0.5;
                let inside = 1.0 / (alpha + (1.0 - alpha) / w.mass);
                let bound = (q_cont / alpha).max(inside);
                BandSampler {
                    prior,
                    k,
                    lo,
                    hi,
                    alpha,
                    windows: Some(w),
                    bound,
                }
            }
        }
    }

    fn q(&self, x: f64) -> f64 {
        (self.k.z_cdf(self.hi, x) - self.k.z_cdf(self.lo, x)).max(0.0)
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        let x = match &self.windows {
            Some(w) if rng.random::<f64>() >= self.alpha => w.sample(self.prior, rng),
            _ => self.prior.sample(rng),
        };
        let m = match &self.windows {
            Some(w) if w.contains(x) => self.alpha + (1.0 - self.alpha) / w.mass,
            Some(_) => self.alpha,
            None => 1.0,
        };
        let accept = self.q(x) / (m * self.bound);
        debug_assert!(accept <= 1.0 + 1e-9, "acceptance bound violated: {accept}");
        (rng.random::<f64>() < accept).then_some(x)
    }
}

/// Draws `n` samples of `X` given the conditioning event.
pub fn sample_conditional(prior: &Distribution, k: &SignalKernel, cond: &McCondition, n: usize, seed: u64) -> Result<EmpiricalCdf> {
    if n == 0 {
        return Err(Error::BadParams("sample count must be positive".into()));
    }
    let band = match cond {
        McCondition::Band { lo, hi, .. } => {
            if !(lo < hi) {
                return Err(Error::BadParams(format!("empty band ({lo}, {hi}]")));
            }
            Some(BandSampler::new(prior, k, *lo, *hi))
        }
        _ => None,
    };
    let propose = |rng: &mut ChaCha8Rng| -> Option<f64> {
        match cond {
            McCondition::Band { .. } => band.as_ref().unwrap().propose(rng),
            McCondition::Threshold(ts, b) => {
                let x = prior.sample(rng);
                (ts.sample(x, rng) >= *b).then_some(x)
            }
            McCondition::SignalAbove(b) => {
                let x = prior.sample(rng);
                (k.sample_z(x, rng) >= *b).then_some(x)
            }
        }
    };
    let mut out: Vec<f64> = Vec::with_capacity(n);
    let mut proposals: u64 = 0;
    let mut next_chunk: u64 = 0;
    while out.len() < n {
        let batch: Vec<Vec<f64>> = (next_chunk..next_chunk + CHUNKS_PER_BATCH)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                (0..CHUNK).filter_map(|_| propose(&mut rng)).collect()
            })
            .collect();
        next_chunk += CHUNKS_PER_BATCH;
        proposals += CHUNKS_PER_BATCH * CHUNK;
        for chunk in batch {
            out.extend(chunk);
        }
        let rate = out.len() as f64 / proposals as f64;
        if rate < MIN_ACCEPTANCE {
            return Err(Error::AcceptanceStarved { rate });
        }
    }
    out.truncate(n);
    Ok(EmpiricalCdf::new(out, seed, cond.describe(), proposals))
}

/// Outcome of comparing an analytic posterior against its sampled version.
#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub condition: String,
    pub n: usize,
    pub statistic: f64,
    pub at: f64,
    pub band: f64,
    pub pass: bool,
}

/// Samples and compares against `analytic` within the DKW band at
/// [`DKW_CONFIDENCE`]. Symmetric bands carry second-order bias only and are
/// compared without slack; one-sided bands use their width as slack.
pub fn oracle_check(
    prior: &Distribution,
    k: &SignalKernel,
    cond: &McCondition,
    analytic: &Distribution,
    n: usize,
    seed: u64,
) -> Result<OracleCheck> {
    let emp = sample_conditional(prior, k, cond, n, seed)?;
    let slack = match cond {
        McCondition::Band { slack, .. } => *slack,
        _ => 0.0,
    };
    let ks = ks_distance(&emp, analytic, slack);
    let band = dkw_band(n, DKW_CONFIDENCE);
    Ok(OracleCheck {
        condition: cond.describe(),
        n,
        statistic: ks.statistic,
        at: ks.at,
        band,
        pass: ks.statistic <= band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{posterior_point, posterior_threshold};
    use crate::kernels::*;

    #[test]
    fn dkw_values() {
        assert!((dkw_band(1_000_000, 1.0 - 1e-6) - 0.002_693_4).abs() < 1e-7);
        assert_eq!(dkw_band(1, 0.95), 1.0);
        assert!((dkw_band(100, 0.95) - 0.1358).abs() < 1e-4);
    }

    #[test]
    fn reproducible_and_le_round_trip() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let k = triangle_rectangle_kernel();
        let c = McCondition::band(1.0, 1e-2);
        let a = sample_conditional(&u, &k, &c, 5000, 7).unwrap();
        let b = sample_conditional(&u, &k, &c, 5000, 7).unwrap();
        assert_eq!(a.samples(), b.samples());
        let other = sample_conditional(&u, &k, &c, 5000, 8).unwrap();
        assert_ne!(a.samples(), other.samples());
        let mut buf = Vec::new();
        a.write_le(&mut buf).unwrap();
        assert_eq!(read_le(&buf), a.samples());
        assert_eq!(a.seed(), 7);
        assert!(a.condition().starts_with("band"));
    }

    #[test]
    fn starved_threshold() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let k = triangle_rectangle_kernel();
        let ts = threshold_transform(&k).unwrap();
        let err = sample_conditional(&u, &k, &McCondition::Threshold(ts, 5.0), 10, 1).unwrap_err();
        assert!(matches!(err, Error::AcceptanceStarved { .. }));
    }

    #[test]
    fn matches_analytic_posteriors() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let k = triangle_rectangle_kernel();
        let ts = threshold_transform(&k).unwrap();
        let n = 200_000;
        let post = posterior_threshold(&u, &ts, 2.0).unwrap().dist;
        let chk = oracle_check(&u, &k, &McCondition::Threshold(ts, 2.0), &post, n, 3).unwrap();
        assert!(chk.pass, "{chk:?}");
        let post = posterior_point(&u, &k, 1.0).unwrap().dist;
        let c = McCondition::band(1.0, 1e-3);
        let chk = oracle_check(&u, &k, &c, &post, n, 4).unwrap();
        assert!(chk.pass, "{chk:?}");
    }

    #[test]
    fn atom_sites_are_sampled() {
        let g = crate::dist::make_named_prior("exponential", &[1.0]).unwrap();
        let k = evasion_kernel(PFunction::Constant(0.3), g).unwrap();
        let prior = crate::dist::make_named_prior("neg_exponential", &[1.0]).unwrap();
        let post = posterior_point(&prior, &k, 0.0).unwrap().dist;
        let emp = sample_conditional(&prior, &k, &McCondition::left_band(0.0, 1e-3), 100_000, 11).unwrap();
        let near_zero = 1.0 - emp.cdf_left(-1e-3);
        assert!((near_zero - post.atom_mass_at(0.0)).abs() < 0.01);
        // The prior density drops to zero at the atom site, so a symmetric
        // band sees only half of it.
        let emp = sample_conditional(&prior, &k, &McCondition::band(0.0, 1e-3), 100_000, 11).unwrap();
        assert!((1.0 - emp.cdf_left(-1e-3) - 0.3).abs() < 0.01);
        assert!(emp.acceptance_rate() > 0.05);
    }

    #[test]
    fn narrower_bands_are_less_biased() {
        // Smooth scenario with visible first-order band bias at wide bands.
        let prior = Distribution::uniform(-1.0, 0.0).unwrap();
        let k = additive_kernel(crate::dist::make_named_prior("pareto", &[2.0, 1.0]).unwrap());
        let post = posterior_point(&prior, &k, 1.5).unwrap().dist;
        let gap = |bw: f64| {
            let emp = sample_conditional(&prior, &k, &McCondition::band(1.5, bw), 400_000, 5).unwrap();
            ks_distance(&emp, &post, 0.0).statistic
        };
        let (wide, narrow) = (gap(0.4), gap(0.2));
        assert!(narrow < wide, "{narrow} vs {wide}");
    }
}
