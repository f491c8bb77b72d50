//! Dense univariate polynomials in a local variable `t = x - origin`.

use std::fmt;

/// Coefficients in ascending order: `c[0] + c[1] t + c[2] t^2 + ...`.
#[derive(Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn antiderivative(&self) -> Poly {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        Poly::new(out)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Returns `Q(t) = P(a + b t)`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Poly {
        let lin = Poly::new(vec![a, b]);
        let mut acc = Poly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c));
        }
        acc
    }

    /// Re-expresses a polynomial in `x - from` as one in `x - to`.
    pub fn shift_origin(&self, from: f64, to: f64) -> Poly {
        if from == to {
            return self.clone();
        }
        self.compose_affine(to - from, 1.0)
    }

    /// Real roots of the polynomial strictly inside `(lo, hi)`.
    ///
    /// Closed forms up to degree 2; higher degrees fall back to sign-change
    /// bracketing on a fine grid followed by bisection.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let c = &self.coeffs;
        let mut roots = match c.len() {
            0 | 1 => Vec::new(),
            2 => vec![-c[0] / c[1]],
            3 => quadratic_roots(c[2], c[1], c[0]),
            _ => return self.bracketed_roots(lo, hi),
        };
        roots.retain(|r| *r > lo && *r < hi);
        roots.sort_by(|a, b| a.total_cmp(b));
        roots
    }

    fn bracketed_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        const N: usize = 256;
        let mut roots = Vec::new();
        let step = (hi - lo) / N as f64;
        let mut a = lo;
        let mut fa = self.eval(a);
        for i in 1..=N {
            let b = if i == N { hi } else { lo + step * i as f64 };
            let fb = self.eval(b);
            if fa == 0.0 && a > lo {
                roots.push(a);
            } else if fa * fb < 0.0 {
                let (mut l, mut r, mut fl) = (a, b, fa);
                for _ in 0..200 {
                    let m = 0.5 * (l + r);
                    let fm = self.eval(m);
                    if fm == 0.0 || r - l <= f64::EPSILON * m.abs().max(1.0) {
                        l = m;
                        r = m;
                        break;
                    }
                    if fl * fm < 0.0 {
                        r = m;
                    } else {
                        l = m;
                        fl = fm;
                    }
                }
                roots.push(0.5 * (l + r));
            }
            a = b;
            fa = fb;
        }
        roots
    }

    /// Minimum over `[lo, hi]` (finite bounds), checked at the endpoints and
    /// at interior critical points.
    pub fn min_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (self.eval(lo), lo);
        let mut consider = |t: f64| {
            let v = self.eval(t);
            if v < best.0 {
                best = (v, t);
            }
        };
        consider(hi);
        for r in self.derivative().roots_in(lo, hi) {
            consider(r);
        }
        best
    }

    /// Maximum over `[lo, hi]` (finite bounds).
    pub fn max_on(&self, lo: f64, hi: f64) -> f64 {
        let (m, _) = self.scale(-1.0).min_on(lo, hi);
        -m
    }

    /// Largest absolute coefficient; used to scale rounding tolerances.
    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Citardauq form avoids cancellation in the smaller root.
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Solves `a t^2 + b t + c = 0` returning the root inside `[lo, hi]`, if any.
pub(crate) fn quadratic_root_in(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Option<f64> {
    let slack = 1e-12 * (hi - lo).abs().max(1.0);
    quadratic_roots(a, b, c)
        .into_iter()
        .find(|r| *r >= lo - slack && *r <= hi + slack)
        .map(|r| r.clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_calculus() {
        let p = Poly::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 6.0]);
        let a = p.antiderivative();
        assert!((a.eval(1.0) - (1.0 - 1.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn compose_and_shift() {
        let p = Poly::new(vec![0.0, 0.0, 1.0]); // t^2
        let q = p.compose_affine(1.0, 2.0); // (1 + 2t)^2
        assert_eq!(q.coeffs(), &[1.0, 4.0, 4.0]);
        // P in (x - 0) re-centred at 3 evaluates identically.
        let s = p.shift_origin(0.0, 3.0);
        for x in [-1.0, 0.5, 4.0] {
            assert!((s.eval(x - 3.0) - p.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn trailing_zeros_trimmed() {
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
        assert_eq!(Poly::new(vec![1.0, 0.0]).degree(), 0);
    }

    #[test]
    fn min_finds_interior_extremum() {
        let p = Poly::new(vec![1.0, -2.0, 1.0]); // (t-1)^2
        let (m, at) = p.min_on(0.0, 3.0);
        assert!(m.abs() < 1e-15);
        assert!((at - 1.0).abs() < 1e-12);
        assert!((p.max_on(0.0, 3.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn higher_degree_roots() {
        // (t-0.2)(t-0.5)(t-0.7)(t-0.9)
        let mut p = Poly::constant(1.0);
        for r in [0.2, 0.5, 0.7, 0.9] {
            p = p.mul(&Poly::new(vec![-r, 1.0]));
        }
        let roots = p.roots_in(0.0, 1.0);
        assert_eq!(roots.len(), 4);
        for (got, want) in roots.iter().zip([0.2, 0.5, 0.7, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
