//! Dense complex polynomials, coefficients in ascending degree order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, CMatrix, ONE, ZERO};

pub fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(ZERO, |acc, &a| acc * z + a)
}

pub fn mul(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn add(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; p.len().max(q.len())];
    for (i, &a) in p.iter().enumerate() {
        out[i] += a;
    }
    for (i, &b) in q.iter().enumerate() {
        out[i] += b;
    }
    out
}

pub fn scale(p: &[Complex64], s: Complex64) -> Vec<Complex64> {
    p.iter().map(|&a| a * s).collect()
}

/// `prod (z - r)`.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    roots
        .iter()
        .fold(vec![ONE], |acc, &r| mul(&acc, &[-r, ONE]))
}

/// `prod (1 - conj(a) z)`.
pub fn from_reflected(zeros: &[Complex64]) -> Vec<Complex64> {
    zeros
        .iter()
        .fold(vec![ONE], |acc, &a| mul(&acc, &[ONE, -a.conj()]))
}

pub fn derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * k as f64)
        .collect()
}

/// Coefficients of `p` in powers of `(z - z0)`, truncated to `len` terms.
pub fn taylor_shift(p: &[Complex64], z0: Complex64, len: usize) -> Vec<Complex64> {
    let mut work = p.to_vec();
    let mut out = Vec::with_capacity(len);
    // repeated synthetic division by (z - z0)
    for _ in 0..len {
        if work.is_empty() {
            out.push(ZERO);
            continue;
        }
        let mut next = vec![ZERO; work.len() - 1];
        let mut acc = ZERO;
        for k in (0..work.len()).rev() {
            acc = acc * z0 + work[k];
            if k > 0 {
                next[k - 1] = acc;
            }
        }
        out.push(acc);
        work = next;
    }
    out
}

/// Drops leading coefficients that are negligible against the largest one.
pub fn trim(p: &[Complex64]) -> Vec<Complex64> {
    let big = p.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut end = p.len();
    while end > 0 && p[end - 1].norm() <= 1e-14 * big {
        end -= 1;
    }
    p[..end].to_vec()
}

/// Roots from companion-matrix eigenvalues, each refined by a few Newton steps
/// that are kept only when they reduce the residual.
pub fn roots(p: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = trim(p);
    if p.is_empty() {
        return Err(Error::RootFindingFailure("zero polynomial".into()));
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let dp = derivative(&p);
    let mut out = eigenvalues(&comp)?;
    for r in out.iter_mut() {
        for _ in 0..4 {
            let f = eval(&p, *r);
            let d = eval(&dp, *r);
            if d.norm() == 0.0 {
                break;
            }
            let cand = *r - f / d;
            if eval(&p, cand).norm() < f.norm() {
                *r = cand;
            } else {
                break;
            }
        }
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::RootFindingFailure("non-finite root".into()));
        }
    }
    Ok(out)
}

/// Matches `a` against `b` as multisets within `tol`; returns the elements of
/// `b` left over, or `None` when some element of `a` has no partner.
pub fn multiset_difference(b: &[Complex64], a: &[Complex64], tol: f64) -> Option<Vec<Complex64>> {
    let mut rest = b.to_vec();
    for &x in a {
        let (k, d) = rest
            .iter()
            .enumerate()
            .map(|(k, &y)| (k, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, v| {
                if v.1 < acc.1 {
                    v
                } else {
                    acc
                }
            });
        if k == usize::MAX || d > tol {
            return None;
        }
        rest.swap_remove(k);
    }
    Some(rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    #[test]
    fn roots_of_known_polynomial() {
        let want = [c(0.5, 0.0), c(-0.2, 0.7), c(1.5, -1.0)];
        let p = from_roots(&want);
        let got = roots(&p).unwrap();
        assert!(multiset_difference(&got, &want, 1e-12).is_some());
    }

    #[test]
    fn taylor_shift_reconstructs() {
        let p = vec![c(1.0, 2.0), c(-3.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)];
        let z0 = c(0.3, -0.4);
        let t = taylor_shift(&p, z0, 4);
        let z = c(-0.7, 0.2);
        let back = eval(&t, z - z0);
        assert!((back - eval(&p, z)).norm() < 1e-13);
    }

    #[test]
    fn multiset_with_repeats() {
        let b = [ZERO, ZERO, c(0.3, 0.0)];
        assert!(multiset_difference(&b, &[ZERO, ZERO], 1e-9).is_some());
        assert!(multiset_difference(&[ZERO, c(0.5, 0.0)], &[ZERO, ZERO], 1e-9).is_none());
    }
}
