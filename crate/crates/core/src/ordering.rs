//! First-order stochastic dominance and screening curves.

use crate::bayes::{posterior_threshold, posterior_threshold_additive};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::kernels::ThresholdSignal;
use rayon::prelude::*;
use std::fmt;

/// Default tolerance for analytic comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of uniform probe points.
pub const DEFAULT_GRID: usize = 10_000;

/// Relation of the first distribution to the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `F1 < F2 - tol` on the interior.
    StrictDominates,
    /// `F1 <= F2 + tol` everywhere.
    WeakDominates,
    Equal,
    /// The second weakly dominates the first.
    Dominated,
    Incomparable,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::StrictDominates => "strict_dominates",
            Relation::WeakDominates => "weak_dominates",
            Relation::Equal => "equal",
            Relation::Dominated => "dominated",
            Relation::Incomparable => "incomparable",
        }
    }

    /// First weakly dominates second (including equality).
    pub fn dominates(&self) -> bool {
        matches!(self, Relation::StrictDominates | Relation::WeakDominates | Relation::Equal)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct FosdVerdict {
    pub relation: Relation,
    /// Probe points of the largest positive gap, the largest negative gap
    /// and the smallest interior gap (deduplicated).
    pub witness_points: Vec<f64>,
    /// `max (F2 - F1)` over the probes.
    pub max_gap_pos: f64,
    /// `max (F1 - F2)` over the probes.
    pub max_gap_neg: f64,
    /// Smallest `F2 - F1` over interior probes that count for strictness.
    pub min_interior_gap: f64,
    pub tol: f64,
    pub probes: usize,
}

/// One probe: location and whether the left limit is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub w: f64,
    pub left: bool,
    pub f1: f64,
    pub f2: f64,
}

fn eval_bounds(d1: &Distribution, d2: &Distribution) -> (f64, f64) {
    let (a1, b1) = d1.support();
    let (a2, b2) = d2.support();
    let lo = |d: &Distribution, a: f64| if a.is_finite() { a } else { d.quantile(1e-12) };
    let hi = |d: &Distribution, b: f64| if b.is_finite() { b } else { d.quantile(1.0 - 1e-12) };
    (lo(d1, a1).min(lo(d2, a2)), hi(d1, b1).max(hi(d2, b2)))
}

/// Probe table: breakpoints and atoms of both distributions (atoms also
/// from the left) plus `grid + 1` uniform points across the joint support.
pub fn fosd_probes(d1: &Distribution, d2: &Distribution, grid: usize) -> Vec<Probe> {
    let (lo, hi) = eval_bounds(d1, d2);
    let mut pts: Vec<(f64, bool)> = Vec::with_capacity(grid + 64);
    for d in [d1, d2] {
        pts.extend(d.breakpoints().into_iter().map(|w| (w, false)));
        for a in d.atoms() {
            pts.push((a.at, false));
            pts.push((a.at, true));
        }
    }
    let grid = grid.max(1);
    for i in 0..=grid {
        pts.push((lo + (hi - lo) * i as f64 / grid as f64, false));
    }
    pts.retain(|(w, _)| w.is_finite());
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    pts.dedup();
    pts.into_iter()
        .map(|(w, left)| {
            let (f1, f2) = if left { (d1.cdf_left(w), d2.cdf_left(w)) } else { (d1.cdf(w), d2.cdf(w)) };
            Probe { w, left, f1, f2 }
        })
        .collect()
}

/// Compares `d1` against `d2`: `d1` dominates when `F1 <= F2` everywhere.
pub fn fosd_compare(d1: &Distribution, d2: &Distribution, tol: f64) -> FosdVerdict {
    fosd_compare_grid(d1, d2, tol, DEFAULT_GRID)
}

pub fn fosd_compare_grid(d1: &Distribution, d2: &Distribution, tol: f64, grid: usize) -> FosdVerdict {
    let probes = fosd_probes(d1, d2, grid);
    classify(d1, d2, &probes, tol)
}

fn classify(d1: &Distribution, d2: &Distribution, probes: &[Probe], tol: f64) -> FosdVerdict {
    let (lo, hi) = eval_bounds(d1, d2);
    let shared: Vec<f64> = d1
        .atoms()
        .iter()
        .filter(|a| d2.atom_mass_at(a.at) > 0.0)
        .map(|a| a.at)
        .collect();
    let mut pos = (f64::NEG_INFINITY, f64::NAN);
    let mut neg = (f64::NEG_INFINITY, f64::NAN);
    let mut weakest = (f64::INFINITY, f64::NAN);
    for p in probes {
        let gap = p.f2 - p.f1;
        if gap > pos.0 {
            pos = (gap, p.w);
        }
        if -gap > neg.0 {
            neg = (-gap, p.w);
        }
        let interior = p.w > lo && p.w < hi && !shared.contains(&p.w);
        if interior && gap < weakest.0 {
            weakest = (gap, p.w);
        }
    }
    let max_gap_pos = pos.0.max(0.0);
    let max_gap_neg = neg.0.max(0.0);
    let relation = if max_gap_pos <= tol && max_gap_neg <= tol {
        Relation::Equal
    } else if max_gap_neg <= tol {
        if weakest.0 > tol {
            Relation::StrictDominates
        } else {
            Relation::WeakDominates
        }
    } else if max_gap_pos <= tol {
        Relation::Dominated
    } else {
        Relation::Incomparable
    };
    let mut witness_points = Vec::new();
    for w in [pos.1, neg.1, weakest.1] {
        if w.is_finite() && !witness_points.contains(&w) {
            witness_points.push(w);
        }
    }
    FosdVerdict {
        relation,
        witness_points,
        max_gap_pos,
        max_gap_neg,
        min_interior_gap: weakest.0,
        tol,
        probes: probes.len(),
    }
}

/// Sup-distance between two cdfs over the standard probe set.
pub fn sup_gap(d1: &Distribution, d2: &Distribution) -> f64 {
    fosd_probes(d1, d2, DEFAULT_GRID)
        .iter()
        .map(|p| (p.f2 - p.f1).abs())
        .fold(0.0, f64::max)
}

/// Signal used to screen: a transformed threshold signal or independent
/// additive noise (`X + e >= b`).
#[derive(Clone, Copy, Debug)]
pub enum ScreeningSignal<'a> {
    Threshold(&'a ThresholdSignal),
    Additive(&'a Distribution),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreeningCurve {
    pub cutoffs: Vec<f64>,
    /// `E[X | signal >= b]`
    pub values: Vec<f64>,
    /// `P(signal >= b)`
    pub evidences: Vec<f64>,
}

impl ScreeningCurve {
    /// Whether evidences are nonincreasing in the cutoff (up to `tol`).
    pub fn evidence_monotone(&self, tol: f64) -> bool {
        let mut idx: Vec<usize> = (0..self.cutoffs.len()).collect();
        idx.sort_by(|&a, &b| self.cutoffs[a].total_cmp(&self.cutoffs[b]));
        idx.windows(2).all(|w| self.evidences[w[1]] <= self.evidences[w[0]] + tol)
    }
}

pub fn screening_curve(prior: &Distribution, signal: ScreeningSignal<'_>, cutoffs: &[f64]) -> Result<ScreeningCurve> {
    let rows: Vec<Result<(f64, f64)>> = cutoffs
        .par_iter()
        .map(|&b| {
            let post = match signal {
                ScreeningSignal::Threshold(ts) => posterior_threshold(prior, ts, b),
                ScreeningSignal::Additive(noise) => posterior_threshold_additive(prior, noise, b),
            }?;
            Ok((post.dist.mean()?, post.evidence))
        })
        .collect();
    let mut values = Vec::with_capacity(cutoffs.len());
    let mut evidences = Vec::with_capacity(cutoffs.len());
    for (b, r) in cutoffs.iter().zip(rows) {
        let (v, e) = r.map_err(|e| match e {
            Error::ZeroEvidence(_) => Error::ZeroEvidence(format!("signal >= {b} (cutoff)")),
            other => other,
        })?;
        values.push(v);
        evidences.push(e);
    }
    Ok(ScreeningCurve {
        cutoffs: cutoffs.to_vec(),
        values,
        evidences,
    })
}

/// Index pairs `i < j` with `values[i] > values[j] + tol`, largest gap first.
pub fn detect_reversals(c: &ScreeningCurve, tol: f64) -> Vec<(usize, usize)> {
    let v = &c.values;
    let mut out: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let gap = v[i] - v[j];
            if gap > tol {
                out.push((i, j, gap));
            }
        }
    }
    out.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    out.into_iter().map(|(i, j, _)| (i, j)).collect()
}
