//! Rational functions analytic on a neighbourhood of the closed disk and their
//! exact `H^2` inner products.
//!
//! A [`Rational`] is `p(z) / prod_k (1 - conj(a_k) z)` with `|a_k| < 1`, so
//! every pole `1 / conj(a_k)` lies outside the closed disk. Inner products
//! are reduced by partial fractions to the reproducing identities
//! `<f, z^k> = f^(k)(0)/k!` and
//! `<f, (1 - conj(a) z)^{-s}> = [(z - a)^{s-1}] (z^{s-1} f(z))`.

use num_complex::Complex64;

use super::poly;
use crate::error::{Error, Result};
use crate::numerics::{ONE, ZERO};

/// Poles closer than this (in the `a` parametrization) are merged.
const POLE_MERGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    numer: Vec<Complex64>,
    poles: Vec<Complex64>,
}

impl Rational {
    /// `numer / prod (1 - conj(a) z)` over `poles`; factors with `a = 0` are
    /// dropped.
    pub fn new(numer: Vec<Complex64>, poles: Vec<Complex64>) -> Result<Self> {
        if poles.iter().any(|a| !(a.norm() < 1.0)) {
            return Err(Error::PoleInsideDisk);
        }
        let poles = poles.into_iter().filter(|a| a.norm() > 1e-15).collect();
        Ok(Self { numer, poles })
    }

    pub fn polynomial(numer: Vec<Complex64>) -> Self {
        Self {
            numer,
            poles: Vec::new(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn monomial(k: usize) -> Self {
        let mut p = vec![ZERO; k + 1];
        p[k] = ONE;
        Self::polynomial(p)
    }

    /// Szegő kernel `1 / (1 - conj(a) z)`.
    pub fn szego(a: Complex64) -> Result<Self> {
        Self::new(vec![ONE], vec![a])
    }

    pub fn numer(&self) -> &[Complex64] {
        &self.numer
    }

    /// The `a_k` of the denominator factors `1 - conj(a_k) z`.
    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let den = self
            .poles
            .iter()
            .fold(ONE, |acc, a| acc * (ONE - a.conj() * z));
        poly::eval(&self.numer, z) / den
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        Rational {
            numer: poly::mul(&self.numer, &other.numer),
            poles,
        }
    }

    pub fn scale(&self, s: Complex64) -> Rational {
        Rational {
            numer: poly::scale(&self.numer, s),
            poles: self.poles.clone(),
        }
    }

    /// `z^k f`.
    pub fn shift(&self, k: usize) -> Rational {
        let mut numer = vec![ZERO; k];
        numer.extend_from_slice(&self.numer);
        Rational {
            numer,
            poles: self.poles.clone(),
        }
    }

    /// Degree of the numerator minus the number of poles.
    pub fn excess(&self) -> isize {
        poly::trim(&self.numer).len() as isize - 1 - self.poles.len() as isize
    }

    pub fn add(&self, other: &Rational) -> Rational {
        combine(&[ONE, ONE], &[self.clone(), other.clone()])
    }

    /// Taylor coefficients at `z0` (powers of `z - z0`), `len` terms.
    pub fn taylor(&self, z0: Complex64, len: usize) -> Vec<Complex64> {
        let mut series = poly::taylor_shift(&self.numer, z0, len);
        for a in &self.poles {
            series = times_reflected_series(&series, *a, z0);
        }
        series
    }

    /// Polynomial part and principal parts: returns `(p, parts)` with
    /// `f = p(z) + sum_a sum_s parts[a][s-1] / (1 - conj(a) z)^s`.
    pub fn partial_fractions(&self) -> (Vec<Complex64>, Vec<(Complex64, Vec<Complex64>)>) {
        let groups = group_poles(&self.poles);
        let mut parts = Vec::with_capacity(groups.len());
        for (i, &(a, m)) in groups.iter().enumerate() {
            let p = ONE / a.conj();
            // Taylor series at p of numer / (other factors)
            let mut series = poly::taylor_shift(&self.numer, p, m);
            for (j, &(b, mb)) in groups.iter().enumerate() {
                if j != i {
                    for _ in 0..mb {
                        series = times_reflected_series(&series, b, p);
                    }
                }
            }
            let q = -ONE / a.conj();
            let coeffs: Vec<Complex64> = (1..=m)
                .map(|s| series[m - s] * q.powi((m - s) as i32))
                .collect();
            parts.push((a, coeffs));
        }
        let total: usize = groups.iter().map(|g| g.1).sum();
        let deg = poly::trim(&self.numer).len();
        let mut polynomial = Vec::new();
        if deg > total {
            let len = deg - total;
            let mut t = self.taylor(ZERO, len);
            for (a, coeffs) in &parts {
                for (s1, &cs) in coeffs.iter().enumerate() {
                    let s = s1 + 1;
                    for (n, tn) in t.iter_mut().enumerate() {
                        *tn -= cs * binomial(n + s - 1, s - 1) * a.conj().powi(n as i32);
                    }
                }
            }
            polynomial = t;
        }
        (polynomial, parts)
    }
}

/// Multiplies a Taylor series at `z0` by that of `1 / (1 - conj(a) z)`.
fn times_reflected_series(series: &[Complex64], a: Complex64, z0: Complex64) -> Vec<Complex64> {
    let d = ONE - a.conj() * z0;
    let r = a.conj() / d;
    let mut factor = Vec::with_capacity(series.len());
    let mut term = ONE / d;
    for _ in 0..series.len() {
        factor.push(term);
        term *= r;
    }
    let mut out = vec![ZERO; series.len()];
    for i in 0..series.len() {
        for j in 0..=i {
            out[i] += series[j] * factor[i - j];
        }
    }
    out
}

fn group_poles(poles: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for &a in poles {
        match groups.iter_mut().find(|g| (g.0 - a).norm() <= POLE_MERGE) {
            Some(g) => g.1 += 1,
            None => groups.push((a, 1)),
        }
    }
    groups
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `sum_k coeffs[k] items[k]` over the least common denominator.
pub fn combine(coeffs: &[Complex64], items: &[Rational]) -> Rational {
    // least common multiple of the pole multisets
    let mut lcm: Vec<(Complex64, usize)> = Vec::new();
    for f in items {
        for (a, m) in group_poles(&f.poles) {
            match lcm.iter_mut().find(|g| (g.0 - a).norm() <= POLE_MERGE) {
                Some(g) => g.1 = g.1.max(m),
                None => lcm.push((a, m)),
            }
        }
    }
    let mut numer = Vec::new();
    for (&ck, f) in coeffs.iter().zip(items) {
        let own = group_poles(&f.poles);
        let mut missing = Vec::new();
        for &(a, m) in &lcm {
            let have = own
                .iter()
                .find(|g| (g.0 - a).norm() <= POLE_MERGE)
                .map_or(0, |g| g.1);
            missing.extend(std::iter::repeat_n(a, m - have));
        }
        let term = poly::mul(&f.numer, &poly::from_reflected(&missing));
        numer = poly::add(&numer, &poly::scale(&term, ck));
    }
    let poles = lcm
        .iter()
        .flat_map(|&(a, m)| std::iter::repeat_n(a, m))
        .collect();
    Rational { numer, poles }
}

/// `<f, g>` in `H^2`, conjugate-linear in `g`.
pub fn h2_inner(f: &Rational, g: &Rational) -> Complex64 {
    // expand the argument with the smaller polynomial part; large polynomial
    // parts come with large, mutually cancelling principal parts
    if f.excess() < g.excess() {
        return inner_expanding(g, f).conj();
    }
    inner_expanding(f, g)
}

fn inner_expanding(f: &Rational, g: &Rational) -> Complex64 {
    let (polynomial, parts) = g.partial_fractions();
    let mut sum = ZERO;
    if !polynomial.is_empty() {
        let fhat = f.taylor(ZERO, polynomial.len());
        for (a, b) in fhat.iter().zip(&polynomial) {
            sum += a * b.conj();
        }
    }
    for (a, coeffs) in parts {
        let m = coeffs.len();
        let ft = f.taylor(a, m);
        for (s1, cs) in coeffs.iter().enumerate() {
            // coefficient of (z - a)^{s-1} in z^{s-1} f(z), with s - 1 = s1
            let mut val = ZERO;
            for i in 0..=s1 {
                val += binomial(s1, i) * a.powi((s1 - i) as i32) * ft[s1 - i];
            }
            sum += cs.conj() * val;
        }
    }
    sum
}

pub fn h2_norm(f: &Rational) -> f64 {
    h2_inner(f, f).re.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    /// Trapezoid rule on the circle; exact up to aliasing for these decays.
    fn quad_inner(f: &Rational, g: &Rational, n: usize) -> Complex64 {
        let mut s = ZERO;
        for k in 0..n {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
            s += f.eval(z) * g.eval(z).conj();
        }
        s / n as f64
    }

    #[test]
    fn constants_and_kernels() {
        let one = Rational::constant(ONE);
        assert!((h2_inner(&one, &one) - ONE).norm() < 1e-15);
        let a = c(0.3, 0.0);
        let b = c(0.0, 0.5);
        let ka = Rational::szego(a).unwrap();
        let kb = Rational::szego(b).unwrap();
        let want = ONE / (ONE - a.conj() * b);
        assert!((h2_inner(&ka, &kb) - want).norm() < 1e-14);
        assert!((want - ONE / c(1.0, -0.15)).norm() < 1e-15);
    }

    #[test]
    fn monomials_orthonormal() {
        for n in 0..=6 {
            for m in 0..=6 {
                let v = h2_inner(&Rational::monomial(n), &Rational::monomial(m));
                let q = quad_inner(&Rational::monomial(n), &Rational::monomial(m), 4096);
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-14);
                assert!((q - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_poles_match_quadrature() {
        let f = Rational::new(
            vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.0, 1.0), c(0.4, 0.0)],
            vec![c(0.5, 0.1), c(0.5, 0.1), c(-0.2, 0.6)],
        )
        .unwrap();
        let g = Rational::new(
            vec![
                c(0.2, -1.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.3, 0.3),
            ],
            vec![c(0.5, 0.1), c(0.1, -0.3), c(0.1, -0.3), c(0.1, -0.3)],
        )
        .unwrap();
        let exact = h2_inner(&f, &g);
        let quad = quad_inner(&f, &g, 4096);
        assert!((exact - quad).norm() < 1e-11, "{exact} vs {quad}");
        let back = h2_inner(&g, &f).conj();
        assert!((exact - back).norm() < 1e-11);
    }

    #[test]
    fn partial_fractions_reconstruct() {
        let f = Rational::new(
            vec![
                c(1.0, 0.0),
                c(0.0, 2.0),
                c(-1.0, 0.5),
                c(0.5, 0.0),
                c(0.1, 0.1),
            ],
            vec![c(0.4, 0.0), c(0.4, 0.0), c(0.0, -0.7)],
        )
        .unwrap();
        let (p, parts) = f.partial_fractions();
        let z = c(0.3, 0.8);
        let mut v = poly::eval(&p, z);
        for (a, cs) in parts {
            for (s1, cs) in cs.iter().enumerate() {
                v += cs / (ONE - a.conj() * z).powi(s1 as i32 + 1);
            }
        }
        assert!((v - f.eval(z)).norm() < 1e-12);
    }

    #[test]
    fn combine_matches_pointwise_sum() {
        let f = Rational::new(vec![ONE, ONE], vec![c(0.2, 0.1)]).unwrap();
        let g = Rational::new(vec![c(0.0, 1.0)], vec![c(0.2, 0.1), c(-0.5, 0.0)]).unwrap();
        let h = combine(&[c(2.0, 0.0), c(0.0, -1.0)], &[f.clone(), g.clone()]);
        assert_eq!(h.poles().len(), 2);
        let z = c(-0.4, 0.3);
        let want = f.eval(z) * 2.0 + g.eval(z) * c(0.0, -1.0);
        assert!((h.eval(z) - want).norm() < 1e-14);
    }

    #[test]
    fn rejects_poles_in_closed_disk() {
        assert_eq!(Rational::szego(ONE), Err(Error::PoleInsideDisk));
    }
}
