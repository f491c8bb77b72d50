//! Conditional signal families `f(z | x)` and the threshold transform.

use crate::dist::{finite_window, CustomFn, Distribution, Factor, Piece};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad;
use rand::Rng;

/// Probability of the truthful component in the evasion kernel.
#[derive(Clone, Debug)]
pub enum PFunction {
    Constant(f64),
    /// `1 / (1 + exp(-steepness * (x - midpoint)))`
    Logistic { steepness: f64, midpoint: f64 },
    Custom(CustomFn),
}

impl PFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PFunction::Constant(c) => *c,
            PFunction::Logistic { steepness, midpoint } => crate::dist::logistic_complement(-steepness * (x - midpoint)),
            PFunction::Custom(f) => f.call(x),
        }
    }

    /// `1 - p(x)` as a constant times an optional factor in `x`.
    fn complement(&self) -> (f64, Option<Factor>) {
        match self {
            PFunction::Constant(c) => (1.0 - c, None),
            PFunction::Logistic { steepness, midpoint } => (
                1.0,
                Some(Factor::Logistic {
                    steepness: *steepness,
                    midpoint: *midpoint,
                }),
            ),
            PFunction::Custom(f) => {
                let f = f.clone();
                let label = format!("1-{}", f.label());
                (1.0, Some(Factor::Custom(CustomFn::new(label, move |x| 1.0 - f.call(x)))))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelKind {
    TriangleRectangle,
    ThreePiece { iota: f64, xi: f64, h: f64 },
    Additive,
    Evasion,
}

/// Conditional density of the signal given `x`.
///
/// Every kernel is a location family in the noise `e = z - x`; the evasion
/// kernel additionally mixes in a point mass at `e = 0` with an
/// `x`-dependent weight.
#[derive(Clone, Debug)]
pub struct SignalKernel {
    kind: KernelKind,
    noise: Distribution,
    p: Option<PFunction>,
}

/// Default x-range probed when validating caller-supplied functions.
pub const PROBE_X_RANGE: (f64, f64) = (-10.0, 10.0);

pub fn triangle_rectangle_kernel() -> SignalKernel {
    let noise = Distribution::new(
        vec![
            Piece::polynomial(0.0, 1.0, &[1.0, -2.0 / 3.0]),
            Piece::polynomial(1.0, 2.0, &[1.0 / 3.0]),
        ],
        vec![],
        None,
        false,
    )
    .expect("triangle-rectangle noise is a valid density");
    SignalKernel {
        kind: KernelKind::TriangleRectangle,
        noise,
        p: None,
    }
}

/// Continuous three-piece kernel; requires `iota` in (0,1) and
/// `xi` in `[1, (2 - iota) / (1 + iota))`.
pub fn three_piece_kernel(iota: f64, xi: f64) -> Result<SignalKernel> {
    if !(iota > 0.0 && iota < 1.0) {
        return Err(Error::BadParams(format!("iota = {iota} must lie in (0, 1)")));
    }
    let xi_max = (2.0 - iota) / (1.0 + iota);
    if !(xi >= 1.0 && xi < xi_max) {
        return Err(Error::BadParams(format!("xi = {xi} must lie in [1, {xi_max})")));
    }
    let h = three_piece_h(iota, xi);
    let noise = Distribution::new(
        vec![
            Piece::polynomial(0.0, xi, &[1.0, -(1.0 - h) / xi]),
            Piece::polynomial(xi, xi + 1.0, &[h, -iota]),
            Piece::polynomial(xi + 1.0, xi + 1.0 + iota, &[h - iota, -(h - iota) / iota]),
        ],
        vec![],
        None,
        false,
    )?;
    Ok(SignalKernel {
        kind: KernelKind::ThreePiece { iota, xi, h },
        noise,
        p: None,
    })
}

/// Middle level of the three-piece kernel.
pub fn three_piece_h(iota: f64, xi: f64) -> f64 {
    (2.0 + iota + iota * iota - xi) / (2.0 + xi + iota)
}

/// `f(z | x) = f_noise(z - x)`.
pub fn additive_kernel(noise: Distribution) -> SignalKernel {
    SignalKernel {
        kind: KernelKind::Additive,
        noise,
        p: None,
    }
}

/// Truthful report (`z = x`) with probability `p(x)`, otherwise `z = x + e`
/// with `e ~ g` on `[0, inf)`.
pub fn evasion_kernel(p: PFunction, g: Distribution) -> Result<SignalKernel> {
    if !g.atoms().is_empty() {
        return Err(Error::BadParams("evasion noise g must have a density without atoms".into()));
    }
    if g.support().0 < 0.0 {
        return Err(Error::BadParams("evasion noise g must live on [0, inf)".into()));
    }
    let (a, b) = PROBE_X_RANGE;
    for i in 0..=1000 {
        let x = a + (b - a) * i as f64 / 1000.0;
        let v = p.eval(x);
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::BadParams(format!("p({x}) = {v} escapes (0, 1)")));
        }
    }
    Ok(SignalKernel {
        kind: KernelKind::Evasion,
        noise: g,
        p: Some(p),
    })
}

/// Affine change of units `x -> shift + scale * x` applied to both `X` and
/// `Z`. Maps a prior/kernel pair on `[a, b]` to one on `[0, 1]` with
/// `shift = -a / (b - a)`, `scale = 1 / (b - a)`.
pub fn rescale(prior: &Distribution, k: &SignalKernel, shift: f64, scale: f64) -> Result<(Distribution, SignalKernel)> {
    Ok((prior.affine(shift, scale)?, k.rescaled(shift, scale)?))
}

impl SignalKernel {
    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    /// Noise law of `z - x` (the continuous part `g` for the evasion kernel).
    pub fn noise(&self) -> &Distribution {
        &self.noise
    }

    pub fn p(&self) -> Option<&PFunction> {
        self.p.as_ref()
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            KernelKind::TriangleRectangle => "triangle_rectangle",
            KernelKind::ThreePiece { .. } => "three_piece",
            KernelKind::Additive => "additive",
            KernelKind::Evasion => "evasion_mixture",
        }
    }

    /// Noise range `[e_lo, e_hi]`.
    pub fn noise_range(&self) -> (f64, f64) {
        let (lo, hi) = self.noise.support();
        match self.kind {
            KernelKind::Evasion => (lo.min(0.0), hi.max(0.0)),
            _ => (lo, hi),
        }
    }

    pub fn window(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.noise_range();
        (x + lo, x + hi)
    }

    /// Weight multiplying the noise density at `x`.
    fn continuous_weight(&self, x: f64) -> f64 {
        match &self.p {
            Some(p) => 1.0 - p.eval(x),
            None => 1.0,
        }
    }

    /// Density of the continuous part, right-continuous in `z`.
    pub fn density(&self, z: f64, x: f64) -> f64 {
        let d = self.noise.density_right(z - x);
        if d == 0.0 {
            0.0
        } else {
            self.continuous_weight(x) * d
        }
    }

    /// Point masses of `Z` given `x`, as `(z, mass)`.
    pub fn atoms(&self, x: f64) -> Vec<(f64, f64)> {
        let w = self.continuous_weight(x);
        let mut v: Vec<(f64, f64)> = self.noise.atoms().iter().map(|a| (x + a.at, w * a.mass)).collect();
        if let Some(p) = &self.p {
            v.push((x, p.eval(x)));
        }
        v
    }

    pub fn atom_mass(&self, z: f64, x: f64) -> f64 {
        self.atoms(x).iter().filter(|(s, _)| *s == z).map(|(_, m)| m).sum()
    }

    /// `P(Z <= z | x)`.
    pub fn z_cdf(&self, z: f64, x: f64) -> f64 {
        let base = self.noise.cdf(z - x);
        match &self.p {
            Some(p) => {
                let pv = p.eval(x);
                (1.0 - pv) * base + if z >= x { pv } else { 0.0 }
            }
            None => base,
        }
    }

    /// `\int f(z|x) dz + atoms`, with the continuous part integrated by
    /// adaptive quadrature over each noise piece.
    pub fn total_mass(&self, x: f64) -> f64 {
        let mut m = 0.0;
        for p in self.noise.pieces() {
            m += quad::integrate(|z| self.density(z, x), x + p.lo, x + p.hi).value;
        }
        m + self.atoms(x).iter().map(|(_, w)| w).sum::<f64>()
    }

    /// Checks nonnegativity on an `nz`-point grid per x and unit mass for
    /// every x in `xs`.
    pub fn validate(&self, xs: &[f64], nz: usize) -> Result<()> {
        for &x in xs {
            let (a, b) = self.window(x);
            let (a, b) = finite_window(a, b);
            for i in 0..=nz {
                let z = a + (b - a) * i as f64 / nz as f64;
                let v = self.density(z, x);
                if !(v >= 0.0) {
                    return Err(Error::BadParams(format!("f({z} | {x}) = {v} is negative")));
                }
            }
            let m = self.total_mass(x);
            if (m - 1.0).abs() > 1e-9 {
                return Err(Error::BadParams(format!("kernel mass {m} at x = {x}")));
            }
        }
        Ok(())
    }

    /// Analytic `d/dz ln f(z | x)` inside a noise piece.
    pub fn log_slope_z(&self, z: f64, x: f64) -> Option<f64> {
        self.noise.log_density_slope(z - x)
    }

    pub fn sup_density(&self) -> f64 {
        self.weight_bound() * self.noise.sup_density()
    }

    /// Upper bound on the continuous density for noise values in `[e_lo, e_hi]`.
    pub fn sup_density_on(&self, e_lo: f64, e_hi: f64) -> f64 {
        self.weight_bound() * self.noise.sup_density_on(e_lo, e_hi)
    }

    fn weight_bound(&self) -> f64 {
        match &self.p {
            Some(PFunction::Constant(c)) => 1.0 - c,
            _ => 1.0,
        }
    }

    /// Draws `Z` given `x`.
    pub fn sample_z<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        if let Some(p) = &self.p {
            let u: f64 = rng.random();
            if u < p.eval(x) {
                return x;
            }
        }
        x + self.noise.sample(rng)
    }

    /// The kernel in new units `x' = shift + scale * x`, `z' = shift + scale * z`.
    pub fn rescaled(&self, shift: f64, scale: f64) -> Result<SignalKernel> {
        let noise = self.noise.affine(0.0, scale)?;
        let p = self.p.as_ref().map(|p| match p {
            PFunction::Constant(c) => PFunction::Constant(*c),
            PFunction::Logistic { steepness, midpoint } => PFunction::Logistic {
                steepness: steepness / scale,
                midpoint: shift + scale * midpoint,
            },
            PFunction::Custom(f) => {
                let f = f.clone();
                let label = format!("{}@affine", f.label());
                PFunction::Custom(CustomFn::new(label, move |y| f.call((y - shift) / scale)))
            }
        });
        let kind = match self.kind {
            KernelKind::Evasion => KernelKind::Evasion,
            _ => KernelKind::Additive,
        };
        Ok(SignalKernel { kind, noise, p })
    }

    /// Likelihood of `x` given `Z = z`: density segments in `x` plus point
    /// contributions `(x, weight)` from the kernel's atoms.
    pub(crate) fn likelihood(&self, z: f64) -> (Vec<Piece>, Vec<(f64, f64)>) {
        let (c, factor) = match &self.p {
            Some(p) => p.complement(),
            None => (1.0, None),
        };
        let mut segs = Vec::with_capacity(self.noise.pieces().len());
        for piece in self.noise.pieces() {
            // x = z - e
            let mut s = piece.affine(z, -1.0);
            if c != 1.0 {
                s.poly = s.poly.scale(c);
            }
            if let Some(f) = &factor {
                s.factors.push(f.clone());
            }
            segs.push(s);
        }
        let mut diracs: Vec<(f64, f64)> = self.noise.atoms().iter().map(|a| (z - a.at, a.mass)).collect();
        if let Some(p) = &self.p {
            diracs.push((z, p.eval(z)));
        }
        if let Some(f) = &factor {
            // Noise atoms are also thinned by 1 - p(x).
            let n = self.noise.atoms().len();
            for d in diracs.iter_mut().take(n) {
                d.1 *= c * f.value(d.0);
            }
        } else if c != 1.0 {
            let n = self.noise.atoms().len();
            for d in diracs.iter_mut().take(n) {
                d.1 *= c;
            }
        }
        (segs, diracs)
    }
}

/// Signal `S` with conditional cdf `F_S(s | x) = 1 - f(s | x)`.
#[derive(Clone, Debug)]
pub struct ThresholdSignal {
    source: SignalKernel,
    /// Jumps of `F_S` in noise coordinates, `(e, size)`, including the
    /// terminal atom.
    jumps: Vec<(f64, f64)>,
    range: (f64, f64),
}

/// Builds the threshold signal; fails with `NotACdf` when `1 - f(.|x)` is
/// not a cdf.
pub fn threshold_transform(k: &SignalKernel) -> Result<ThresholdSignal> {
    ThresholdSignal::new(k)
}

const MONOTONE_PROBES: usize = 10_000;

impl ThresholdSignal {
    pub fn new(k: &SignalKernel) -> Result<ThresholdSignal> {
        if k.p.is_some() {
            return Err(Error::NotACdf("the evasion kernel's point mass has no density to transform".into()));
        }
        let noise = &k.noise;
        if !noise.atoms().is_empty() {
            return Err(Error::NotACdf("kernel has atoms".into()));
        }
        let (lo, hi) = noise.support();
        if !lo.is_finite() {
            return Err(Error::NotACdf("noise range is unbounded below".into()));
        }
        let f0 = noise.density_at(lo);
        if (f0 - 1.0).abs() > 1e-9 {
            return Err(Error::NotACdf(format!("f at the window's left end is {f0}, not 1")));
        }
        let pieces = noise.pieces();
        let per_piece = (MONOTONE_PROBES / pieces.len()).max(64);
        let mut prev = f64::INFINITY;
        let mut jumps = Vec::new();
        for (i, p) in pieces.iter().enumerate() {
            if i > 0 && p.lo > pieces[i - 1].hi {
                return Err(Error::NotACdf(format!("noise density vanishes on ({}, {})", pieces[i - 1].hi, p.lo)));
            }
            let (a, b) = finite_window(p.lo, p.hi);
            for j in 0..=per_piece {
                let e = a + (b - a) * j as f64 / per_piece as f64;
                let v = p.eval(e);
                if v > 1.0 + 1e-9 {
                    return Err(Error::NotACdf(format!("f({e}) = {v} exceeds 1")));
                }
                if v > prev + 1e-12 {
                    return Err(Error::NotACdf(format!("1 - f decreases near e = {e}")));
                }
                if j == 0 && prev.is_finite() && prev - v > 1e-12 {
                    jumps.push((p.lo, prev - v));
                }
                prev = v;
            }
        }
        if hi.is_finite() {
            let last = pieces.last().unwrap();
            let terminal = last.eval(hi);
            if terminal > 1e-12 {
                jumps.push((hi, terminal));
            }
        }
        Ok(ThresholdSignal {
            source: k.clone(),
            jumps,
            range: (lo, hi),
        })
    }

    pub fn source(&self) -> &SignalKernel {
        &self.source
    }

    /// `[e_lo, e_hi]` relative to `x`.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// `F_S(s | x)`.
    pub fn cdf(&self, s: f64, x: f64) -> f64 {
        let e = s - x;
        let (lo, hi) = self.range;
        if e < lo {
            0.0
        } else if e >= hi {
            1.0
        } else {
            1.0 - self.source.noise.density_right(e)
        }
    }

    /// Left limit of `f` at `e`.
    fn f_left(&self, e: f64) -> f64 {
        let noise = &self.source.noise;
        let pieces = noise.pieces();
        let i = pieces.partition_point(|p| p.lo < e);
        match i.checked_sub(1) {
            Some(i) if e <= pieces[i].hi => pieces[i].eval(e).max(0.0),
            _ => 0.0,
        }
    }

    /// `P(S >= b | x)`.
    pub fn survival(&self, b: f64, x: f64) -> f64 {
        let e = b - x;
        let (lo, hi) = self.range;
        if e <= lo {
            1.0
        } else if e > hi {
            0.0
        } else {
            self.f_left(e)
        }
    }

    /// Point masses of `S` given `x`, as `(s, mass)`.
    pub fn atoms(&self, x: f64) -> Vec<(f64, f64)> {
        self.jumps.iter().map(|(e, m)| (x + e, *m)).collect()
    }

    /// Draws `S` given `x` by inverting `F_S`.
    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        x + self.noise_quantile(u)
    }

    /// Smallest `e` with `1 - f(e) >= u`.
    pub(crate) fn noise_quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.range;
        let target = 1.0 - u;
        let noise = &self.source.noise;
        for p in noise.pieces() {
            let right = p.eval(p.hi);
            if right > target && p.hi < hi {
                continue;
            }
            if right > target {
                return hi;
            }
            let left = p.eval(p.lo.max(lo));
            if left <= target {
                return p.lo;
            }
            let c = p.poly.coeffs();
            if p.factors.is_empty() && c.len() == 2 && c[1] != 0.0 {
                let e = p.origin() + (target - c[0]) / c[1];
                return e.clamp(p.lo.max(lo), p.hi);
            }
            let (mut a, mut b) = finite_window(p.lo, p.hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if p.eval(m) <= target {
                    b = m;
                } else {
                    a = m;
                }
            }
            return b;
        }
        hi
    }

    /// Likelihood of `x` given `S >= b`: segments in `x` (no point terms).
    pub(crate) fn likelihood(&self, b: f64) -> Vec<Piece> {
        let mut segs: Vec<Piece> = self.source.noise.pieces().iter().map(|p| p.affine(b, -1.0)).collect();
        let (lo, _) = self.range;
        segs.push(Piece::weighted(b - lo, f64::INFINITY, Poly::constant(1.0), vec![]));
        segs
    }
}

/// `P(e >= t)` for a noise law, as likelihood segments in `x = b - t` plus
/// the constant-one region.
pub(crate) fn survival_segments(noise: &Distribution, b: f64) -> Vec<Piece> {
    let mut cuts: Vec<f64> = noise.breakpoints();
    cuts.extend(noise.atoms().iter().map(|a| a.at));
    let (lo, hi) = noise.support();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut segs = Vec::new();
    let pieces = noise.pieces();
    for w in cuts.windows(2) {
        let (a, c) = (w[0], w[1]);
        // P(e >= t) for t in (a, c): mass strictly right of c-, i.e. atoms at >= c
        // plus continuous mass above t.
        let after = noise.survival(c) + noise.atom_mass_at(c);
        let piece = pieces.iter().find(|p| p.lo <= a && p.hi >= c && p.lo < p.hi);
        let seg = match piece {
            None => Piece::weighted(a, c, Poly::constant(after), vec![]),
            Some(p) => survival_piece(p, a, c, after),
        };
        if !seg.poly.is_zero() {
            segs.push(seg.affine(b, -1.0));
        }
    }
    segs.push(Piece::weighted(b - lo, f64::INFINITY, Poly::constant(1.0), vec![]));
    segs
}

/// `after + \int_t^c f` on `(a, c)` as a single weighted piece.
fn survival_piece(p: &Piece, a: f64, c: f64, after: f64) -> Piece {
    let q = p.restrict(a, c);
    match q.factors.as_slice() {
        [] if c.is_finite() => {
            // after + A(c) - A(t), A antiderivative in t - origin
            let anti = q.poly.antiderivative();
            let o = q.origin();
            let poly = Poly::constant(after + anti.eval(c - o)).add(&anti.scale(-1.0));
            Piece::weighted(q.lo, q.hi, poly, vec![])
        }
        [Factor::Exp { rate, origin }] if q.poly.degree() == 0 && !c.is_finite() && after == 0.0 => {
            // \int_t^inf k e^{r (e - o)} de = -(k / r) e^{r (t - o)}
            let k = q.poly.coeffs()[0];
            Piece::weighted(q.lo, q.hi, Poly::constant(-k / rate), vec![Factor::Exp { rate: *rate, origin: *origin }])
        }
        [Factor::Power { center, exponent }]
            if q.poly.degree() == 0 && !c.is_finite() && after == 0.0 && a >= *center && *exponent > 1.0 =>
        {
            let k = q.poly.coeffs()[0];
            Piece::weighted(
                q.lo,
                q.hi,
                Poly::constant(k / (exponent - 1.0)),
                vec![Factor::Power {
                    center: *center,
                    exponent: exponent - 1.0,
                }],
            )
        }
        _ => {
            let p = q.clone();
            let label = "noise-survival".to_string();
            let f = move |t: f64| after + p.integral(t, c).unwrap_or(f64::NAN);
            Piece::weighted(q.lo, q.hi, Poly::constant(1.0), vec![Factor::Custom(CustomFn::new(label, f))])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_named_prior;

    #[test]
    fn triangle_values() {
        let k = triangle_rectangle_kernel();
        assert!((k.density(1.0, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!((k.density(2.0, 0.5) - 1.0 / 3.0).abs() < 1e-15);
        assert!((k.total_mass(0.0) - 1.0).abs() < 1e-12);
        assert_eq!(k.density(2.0, 0.0), 0.0);
        assert_eq!(k.window(0.5), (0.5, 2.5));
    }

    #[test]
    fn three_piece_h_and_mass() {
        assert!((three_piece_h(0.1, 1.0) - 1.11 / 3.1).abs() < 1e-15);
        let k = three_piece_kernel(0.1, 1.0).unwrap();
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        k.validate(&xs, 1000).unwrap();
        // continuity at the breakpoints
        for e in [1.0, 2.0] {
            assert!((k.density(e - 1e-12, 0.0) - k.density(e, 0.0)).abs() < 1e-9);
        }
        assert!(matches!(three_piece_kernel(0.5, 1.5), Err(Error::BadParams(_))));
        assert!(matches!(three_piece_kernel(0.1, 0.9), Err(Error::BadParams(_))));
        assert!(three_piece_kernel(1.0, 1.0).is_err());
    }

    #[test]
    fn additive_values() {
        let u = additive_kernel(Distribution::uniform(0.0, 1.0).unwrap());
        assert_eq!(u.density(0.7, 0.5), 1.0);
        let e = additive_kernel(make_named_prior("exponential", &[1.0]).unwrap());
        assert!((e.density(2.0, 0.5) - (-1.5f64).exp()).abs() < 1e-15);
        let p = additive_kernel(make_named_prior("pareto", &[2.0, 1.0]).unwrap());
        // e = 0.5 lies below the Pareto scale, so there is no density there.
        assert_eq!(p.density(1.5, 1.0), 0.0);
        assert!((p.density(3.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((p.log_slope_z(3.0, 1.0).unwrap() + 1.5).abs() < 1e-15);
    }

    #[test]
    fn translation_equivariance() {
        let k = three_piece_kernel(0.1, 1.0).unwrap();
        for (z, x) in [(0.375, 0.125), (1.75, 0.25), (2.0625, 0.0)] {
            for c in [0.5, -2.0, 7.25] {
                assert_eq!(k.density(z + c, x + c), k.density(z, x));
            }
        }
    }

    #[test]
    fn evasion_values() {
        let g = make_named_prior("exponential", &[1.0]).unwrap();
        let k = evasion_kernel(PFunction::Constant(0.3), g.clone()).unwrap();
        assert!((k.density(1.0, 0.0) - 0.7 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(k.atom_mass(0.0, 0.0), 0.3);
        assert!((k.total_mass(-2.0) - 1.0).abs() < 1e-10);
        assert!(evasion_kernel(PFunction::Constant(1.0), g.clone()).is_err());
        let lk = evasion_kernel(PFunction::Logistic { steepness: 0.5, midpoint: 0.0 }, g).unwrap();
        assert!((lk.total_mass(3.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn transform_triangle() {
        let ts = threshold_transform(&triangle_rectangle_kernel()).unwrap();
        let x = 0.25;
        assert_eq!(ts.cdf(x, x), 0.0);
        assert!((ts.cdf(x + 0.5, x) - 1.0 / 3.0).abs() < 1e-15);
        assert!((ts.cdf(x + 1.5, x) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ts.cdf(x + 2.0, x), 1.0);
        let atoms = ts.atoms(x);
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].0 - 2.25).abs() < 1e-15 && (atoms[0].1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn transform_rejects_non_cdfs() {
        let tri = Distribution::new(
            vec![Piece::polynomial(-1.0, 0.0, &[0.0, 1.0]), Piece::polynomial(0.0, 1.0, &[1.0, -1.0])],
            vec![],
            None,
            false,
        )
        .unwrap();
        assert!(matches!(threshold_transform(&additive_kernel(tri)), Err(Error::NotACdf(_))));
        let g = make_named_prior("exponential", &[1.0]).unwrap();
        let ev = evasion_kernel(PFunction::Constant(0.3), g).unwrap();
        assert!(threshold_transform(&ev).is_err());
        assert!(threshold_transform(&three_piece_kernel(0.1, 1.0).unwrap()).is_ok());
    }

    #[test]
    fn round_trip_identity() {
        for k in [triangle_rectangle_kernel(), three_piece_kernel(0.1, 1.0).unwrap(), three_piece_kernel(0.01, 1.2).unwrap()] {
            let ts = threshold_transform(&k).unwrap();
            for x in [0.0, 0.37, 1.0] {
                let (a, b) = k.window(x);
                for i in 1..200 {
                    let z = a + (b - a) * i as f64 / 200.0;
                    assert!((ts.survival(z, x) - k.density(z, x)).abs() < 1e-12, "z={z} x={x}");
                }
            }
        }
    }

    #[test]
    fn noise_quantile_inverts_cdf() {
        let ts = threshold_transform(&triangle_rectangle_kernel()).unwrap();
        assert!((ts.noise_quantile(1.0 / 3.0) - 0.5).abs() < 1e-12);
        assert_eq!(ts.noise_quantile(0.9), 2.0);
        assert!((ts.noise_quantile(0.6) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn survival_segments_match_direct() {
        let noises = [
            Distribution::uniform(0.0, 1.0).unwrap(),
            make_named_prior("exponential", &[1.5]).unwrap(),
            make_named_prior("pareto", &[2.0, 1.0]).unwrap(),
            Distribution::new(
                vec![Piece::polynomial(0.0, 1.0, &[0.5])],
                vec![crate::dist::Atom { at: 0.5, mass: 0.5 }],
                None,
                false,
            )
            .unwrap(),
        ];
        let b = 1.2;
        for n in &noises {
            let segs = survival_segments(n, b);
            for i in 0..400 {
                let x = -6.0 + 8.0 * i as f64 / 400.0 + 1e-7;
                let direct = 1.0 - n.cdf_left(b - x);
                let seg = segs.iter().find(|s| s.contains(x)).map(|s| s.eval(x)).unwrap_or(0.0);
                assert!((seg - direct).abs() < 1e-12, "x={x}: {seg} vs {direct}");
            }
        }
    }
}
