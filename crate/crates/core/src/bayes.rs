//! Posterior laws of `X` given a point signal or a threshold event.

use crate::dist::{fmt_num, merge_factors, Atom, Distribution, Normalize, Piece};
use crate::error::{Error, Result};
use crate::kernels::{survival_segments, SignalKernel, ThresholdSignal};
use crate::quad::QUAD_ABS_TOL;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Conditioning {
    /// `Z = z`
    Point(f64),
    /// `S >= b` (or `X + e >= b`)
    Threshold(f64),
}

impl Conditioning {
    pub fn value(&self) -> f64 {
        match self {
            Conditioning::Point(v) | Conditioning::Threshold(v) => *v,
        }
    }

    fn describe(&self) -> String {
        match self {
            Conditioning::Point(z) => format!("Z = {z}"),
            Conditioning::Threshold(b) => format!("signal >= {b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Posterior {
    pub dist: Distribution,
    pub conditioning: Conditioning,
    /// Marginal density (point) or probability (threshold) of the
    /// conditioning event.
    pub evidence: f64,
    /// Absolute quadrature tolerance per piece when any piece of the
    /// computation needed numerical integration.
    pub quad_tol: Option<f64>,
}

impl Posterior {
    /// Distribution schema followed by `conditioning` and `evidence` records.
    pub fn to_text(&self) -> Result<String> {
        let mut s = self.dist.to_text()?;
        match self.conditioning {
            Conditioning::Point(z) => s.push_str(&format!("conditioning point {}\n", fmt_num(z))),
            Conditioning::Threshold(b) => s.push_str(&format!("conditioning threshold {}\n", fmt_num(b))),
        }
        s.push_str(&format!("evidence {}\n", fmt_num(self.evidence)));
        if let Some(t) = self.quad_tol {
            s.push_str(&format!("# quadrature tolerance {}\n", fmt_num(t)));
        }
        Ok(s)
    }
}

/// Product of a prior piece and a likelihood segment on their overlap.
fn multiply(p: &Piece, s: &Piece) -> Option<Piece> {
    let lo = p.lo.max(s.lo);
    let hi = p.hi.min(s.hi);
    if !(lo < hi) {
        return None;
    }
    let o = Piece::origin_of(lo, hi);
    let a = p.poly.shift_origin(p.origin(), o);
    let b = s.poly.shift_origin(s.origin(), o);
    let (factors, c) = merge_factors(&p.factors, &s.factors, o);
    let poly = a.mul(&b).scale(c);
    if poly.is_zero() {
        return None;
    }
    Some(Piece::weighted(lo, hi, poly, factors))
}

struct Likelihood<'a> {
    segments: Vec<Piece>,
    /// Point terms `(x, weight)`: the posterior gets an atom at `x` of
    /// relative weight `weight * f_X(x)`.
    diracs: Vec<(f64, f64)>,
    /// Weight applied to a prior atom located at `x`.
    atom_weight: &'a dyn Fn(f64) -> f64,
}

fn combine(prior: &Distribution, lik: Likelihood<'_>, cond: Conditioning) -> Result<Posterior> {
    // A point term sitting on a prior atom is a positive-probability event
    // and swamps every density contribution.
    let mut hard: Vec<Atom> = Vec::new();
    for &(x, w) in &lik.diracs {
        let m = prior.atom_mass_at(x);
        if m > 0.0 && w > 0.0 {
            hard.push(Atom { at: x, mass: w * m });
        }
    }
    if !hard.is_empty() {
        let evidence: f64 = hard.iter().map(|a| a.mass).sum();
        let dist = Distribution::from_parts(vec![], hard, None, Normalize::Auto)?;
        return Ok(Posterior {
            dist: dist.with_audit(prior.discarded_mass(), prior.approx_error()),
            conditioning: cond,
            evidence,
            quad_tol: None,
        });
    }

    let mut pieces = Vec::new();
    for p in prior.pieces() {
        for s in &lik.segments {
            if let Some(q) = multiply(p, s) {
                pieces.push(q);
            }
        }
    }
    let mut atoms = Vec::new();
    for a in prior.atoms() {
        let w = (lik.atom_weight)(a.at);
        if w > 0.0 {
            atoms.push(Atom { at: a.at, mass: a.mass * w });
        }
    }
    for &(x, w) in &lik.diracs {
        let f = prior.density_at(x);
        if w > 0.0 && f > 0.0 {
            atoms.push(Atom { at: x, mass: w * f });
        }
    }
    let mut evidence: f64 = atoms.iter().map(|a| a.mass).sum();
    let uses_quad = pieces.iter().any(|p| p.uses_quadrature());
    for p in &pieces {
        evidence += p.mass()?;
    }
    if !(evidence > 1e-300) || !evidence.is_finite() {
        return Err(Error::ZeroEvidence(cond.describe()));
    }
    let dist = Distribution::from_parts(pieces, atoms, None, Normalize::Auto)?;
    Ok(Posterior {
        dist: dist.with_audit(prior.discarded_mass(), prior.approx_error()),
        conditioning: cond,
        evidence,
        quad_tol: (uses_quad || prior.uses_quadrature()).then_some(QUAD_ABS_TOL),
    })
}

/// Law of `X` given `Z = z`.
pub fn posterior_point(prior: &Distribution, k: &SignalKernel, z: f64) -> Result<Posterior> {
    let (segments, diracs) = k.likelihood(z);
    let weight = |x: f64| k.density(z, x);
    combine(
        prior,
        Likelihood {
            segments,
            diracs,
            atom_weight: &weight,
        },
        Conditioning::Point(z),
    )
}

/// Law of `X` given `S >= b`.
pub fn posterior_threshold(prior: &Distribution, ts: &ThresholdSignal, b: f64) -> Result<Posterior> {
    let weight = |x: f64| ts.survival(b, x);
    combine(
        prior,
        Likelihood {
            segments: ts.likelihood(b),
            diracs: vec![],
            atom_weight: &weight,
        },
        Conditioning::Threshold(b),
    )
}

/// Law of `X` given `X + e >= b` with `e` independent of `X`.
pub fn posterior_threshold_additive(prior: &Distribution, noise: &Distribution, b: f64) -> Result<Posterior> {
    let weight = |x: f64| noise.survival(b - x) + noise.atom_mass_at(b - x);
    combine(
        prior,
        Likelihood {
            segments: survival_segments(noise, b),
            diracs: vec![],
            atom_weight: &weight,
        },
        Conditioning::Threshold(b),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_named_prior;
    use crate::kernels::*;

    fn uniform() -> Distribution {
        Distribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn triangle_posteriors() {
        let k = triangle_rectangle_kernel();
        let p2 = posterior_point(&uniform(), &k, 2.0).unwrap();
        assert!((p2.evidence - 1.0 / 3.0).abs() < 1e-15);
        for w in [0.1, 0.5, 0.9] {
            assert!((p2.dist.cdf(w) - w).abs() < 1e-15);
        }
        let p1 = posterior_point(&uniform(), &k, 1.0).unwrap();
        assert!((p1.evidence - 2.0 / 3.0).abs() < 1e-15);
        assert!((p1.dist.cdf(0.5) - 0.375).abs() < 1e-15);
        assert!(p1.quad_tol.is_none());
        assert!(matches!(posterior_point(&uniform(), &k, 3.5), Err(Error::ZeroEvidence(_))));
        assert!(matches!(posterior_point(&uniform(), &k, -0.5), Err(Error::ZeroEvidence(_))));
    }

    #[test]
    fn threshold_posteriors() {
        let ts = threshold_transform(&triangle_rectangle_kernel()).unwrap();
        let p1 = posterior_threshold(&uniform(), &ts, 1.0).unwrap();
        assert!((p1.dist.cdf(0.5) - 0.375).abs() < 1e-15);
        let p2 = posterior_threshold(&uniform(), &ts, 2.0).unwrap();
        assert!((p2.dist.mean().unwrap() - 0.5).abs() < 1e-15);
        let p0 = posterior_threshold(&uniform(), &ts, -1.0).unwrap();
        assert!((p0.evidence - 1.0).abs() < 1e-15);
        assert!((p0.dist.cdf(0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn additive_threshold() {
        let n = uniform();
        let p0 = posterior_threshold_additive(&uniform(), &n, 0.0).unwrap();
        assert!((p0.dist.cdf(0.4) - 0.4).abs() < 1e-15);
        let p1 = posterior_threshold_additive(&uniform(), &n, 1.0).unwrap();
        assert!((p1.dist.cdf(0.5) - 0.25).abs() < 1e-15);
        assert!((p1.dist.mean().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(posterior_threshold_additive(&uniform(), &n, 2.5).is_err());
    }

    #[test]
    fn uninformative_kernel_returns_prior() {
        let prior = Distribution::new(vec![Piece::polynomial(0.0, 1.0, &[0.5, 1.0])], vec![], None, false).unwrap();
        let k = additive_kernel(Distribution::uniform(-5.0, 5.0).unwrap());
        let post = posterior_point(&prior, &k, 0.3).unwrap();
        assert_eq!(post.dist.pieces().len(), 1);
        for (a, b) in post.dist.pieces()[0].poly.coeffs().iter().zip(prior.pieces()[0].poly.coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn prior_atoms_and_kernel_atoms() {
        let prior = Distribution::new(vec![Piece::polynomial(0.0, 1.0, &[0.7])], vec![Atom { at: 0.5, mass: 0.3 }], None, false).unwrap();
        let k = triangle_rectangle_kernel();
        let post = posterior_point(&prior, &k, 1.0).unwrap();
        // atom weight f(1 | 0.5) = 2/3
        let ev = 0.7 * 2.0 / 3.0 + 0.3 * 2.0 / 3.0;
        assert!((post.evidence - ev).abs() < 1e-15);
        assert!((post.dist.atom_mass_at(0.5) - 0.2 / ev).abs() < 1e-15);

        // evasion: Dirac on the prior density
        let g = make_named_prior("exponential", &[1.0]).unwrap();
        let ev_k = evasion_kernel(PFunction::Constant(0.3), g).unwrap();
        let prior = make_named_prior("neg_exponential", &[1.0]).unwrap().truncate(-30.0, 0.0).unwrap();
        let post = posterior_point(&prior, &ev_k, 0.0).unwrap();
        let f0 = prior.density_at(0.0);
        let cont = 0.7 * f0 * 0.5 * (1.0 - (-60.0f64).exp());
        let want = 0.3 * f0 / (0.3 * f0 + cont);
        assert!((post.dist.atom_mass_at(0.0) - want).abs() < 1e-12);
        assert!((want - 0.3 / 0.65).abs() < 1e-12);

        // Dirac hitting a prior atom gives an atom-only posterior
        let prior = Distribution::new(vec![Piece::polynomial(-1.0, 0.0, &[0.5])], vec![Atom { at: 0.0, mass: 0.5 }], None, false).unwrap();
        let g = make_named_prior("exponential", &[1.0]).unwrap();
        let ev_k = evasion_kernel(PFunction::Constant(0.3), g).unwrap();
        let post = posterior_point(&prior, &ev_k, 0.0).unwrap();
        assert_eq!(post.dist.atoms().len(), 1);
        assert_eq!(post.dist.cdf(-0.1), 0.0);
    }

    #[test]
    fn exponential_noise_invariance() {
        let prior = Distribution::uniform(-1.0, 0.0).unwrap();
        let k = additive_kernel(make_named_prior("exponential", &[1.0]).unwrap());
        let a = posterior_point(&prior, &k, 1.0).unwrap();
        let b = posterior_point(&prior, &k, 5.0).unwrap();
        for w in [-0.9, -0.5, -0.1] {
            assert!((a.dist.cdf(w) - b.dist.cdf(w)).abs() < 1e-13);
        }
    }

    #[test]
    fn pareto_posterior_shape() {
        let prior = Distribution::uniform(-1.0, 0.0).unwrap();
        let k = additive_kernel(make_named_prior("pareto", &[2.0, 1.0]).unwrap());
        let post = posterior_point(&prior, &k, 2.0).unwrap();
        // density proportional to (z - x)^-3 on [-1, 0]
        let norm = 0.5 * (2f64.powi(-2) - 3f64.powi(-2));
        for x in [-0.8, -0.3] {
            let want = (2.0 - x as f64).powi(-3) / norm;
            assert!((post.dist.density_at(x) - want).abs() < 1e-12);
        }
        assert!(post.quad_tol.is_none());
    }

    #[test]
    fn s_equivalence_on_grid() {
        let prior = make_named_prior("uniform", &[0.0, 1.0]).unwrap();
        for k in [triangle_rectangle_kernel(), three_piece_kernel(0.1, 1.0).unwrap()] {
            let ts = threshold_transform(&k).unwrap();
            for i in 0..20 {
                let z = 1.0 + 1.9 * i as f64 / 19.0;
                let a = posterior_point(&prior, &k, z).unwrap();
                let b = posterior_threshold(&prior, &ts, z).unwrap();
                for j in 0..=100 {
                    let w = j as f64 / 100.0;
                    assert!((a.dist.cdf(w) - b.dist.cdf(w)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn text_output_has_evidence() {
        let post = posterior_point(&uniform(), &triangle_rectangle_kernel(), 1.0).unwrap();
        let t = post.to_text().unwrap();
        assert!(t.contains("evidence 0.666666666666666"));
        let (d, extra) = Distribution::from_text_with_extras(&t).unwrap();
        assert_eq!(extra.len(), 2);
        assert!((d.cdf(0.5) - 0.375).abs() < 1e-15);
    }
}
