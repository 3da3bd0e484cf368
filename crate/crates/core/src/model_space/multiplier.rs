//! Multipliers `phi` with `phi K_{B1} ⊂ K_{B2}` and the search for isometric
//! ones.
//!
//! Every multiplier has the form `phi = h q1 / q2` where `q_i` is the
//! denominator polynomial of `B_i` and `deg h <= deg B2 - deg B1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;

use super::basis::{gram_of, membership_residual, tm_basis};
use super::blaschke::{FiniteBlaschke, ZERO_MATCH};
use super::crofoot::crofoot;
use super::poly;
use super::rational::{h2_inner, Rational};
use crate::error::Result;
use crate::numerics::{random, CMatrix, ONE, ZERO};

/// Gram tolerance for accepting an isometric multiplier.
pub const ISOMETRY_EPS: f64 = 1e-8;

pub fn multiplier_exists(b1: &FiniteBlaschke, b2: &FiniteBlaschke) -> bool {
    b1.degree() <= b2.degree()
}

/// `h q1 / q2` as a rational function.
pub fn multiplier_from_h(b1: &FiniteBlaschke, b2: &FiniteBlaschke, h: &[Complex64]) -> Rational {
    Rational::new(poly::mul(h, &b1.denominator()), b2.zeros().to_vec())
        .expect("zeros lie inside the disk")
}

/// Basis `z^j q1 / q2`, `j = 0..=deg B2 - deg B1`; empty when no multiplier
/// exists.
pub fn multiplier_space(b1: &FiniteBlaschke, b2: &FiniteBlaschke) -> Vec<Rational> {
    if !multiplier_exists(b1, b2) {
        return Vec::new();
    }
    (0..=b2.degree() - b1.degree())
        .map(|j| {
            let mut h = vec![ZERO; j + 1];
            h[j] = ONE;
            multiplier_from_h(b1, b2, &h)
        })
        .collect()
}

/// Largest violation of `phi e in K_{B2}` over the basis `e` of `K_{B1}`.
pub fn multiplier_residual(
    b1: &FiniteBlaschke,
    b2: &FiniteBlaschke,
    phi: &Rational,
) -> Result<f64> {
    let basis = tm_basis(b1)?;
    Ok(basis
        .functions()
        .iter()
        .map(|e| membership_residual(b2, &phi.mul(e)))
        .fold(0.0, f64::max))
}

/// `|| [<phi e_j, phi e_i>] - I ||_F` over the basis of `K_{B1}`.
pub fn isometry_gap(b1: &FiniteBlaschke, phi: &Rational) -> Result<f64> {
    let basis = tm_basis(b1)?;
    let images: Vec<Rational> = basis.functions().iter().map(|e| phi.mul(e)).collect();
    let n = images.len();
    Ok((gram_of(&images) - CMatrix::identity(n, n)).norm())
}

#[derive(Debug, Clone)]
pub enum IsometricMultiplier {
    Found {
        h: Vec<Complex64>,
        multiplier: Rational,
        gap: f64,
    },
    /// No isometric multiplier exists; `reason` names the obstruction and
    /// `gap` its size.
    NotFound {
        reason: String,
        gap: f64,
    },
    Undetermined {
        best_gap: f64,
    },
}

impl IsometricMultiplier {
    pub fn is_found(&self) -> bool {
        matches!(self, IsometricMultiplier::Found { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            IsometricMultiplier::Found { .. } => "found",
            IsometricMultiplier::NotFound { .. } => "not_found",
            IsometricMultiplier::Undetermined { .. } => "undetermined",
        }
    }
}

fn found(
    b1: &FiniteBlaschke,
    b2: &FiniteBlaschke,
    h: Vec<Complex64>,
) -> Result<Option<IsometricMultiplier>> {
    let multiplier = multiplier_from_h(b1, b2, &h);
    let gap = isometry_gap(b1, &multiplier)?;
    if gap <= ISOMETRY_EPS {
        Ok(Some(IsometricMultiplier::Found { h, multiplier, gap }))
    } else {
        Ok(None)
    }
}

/// Searches for `phi` with `phi K_{B1} ⊂ K_{B2}` isometrically.
///
/// Order of attempts: inclusion when `B1` divides `B2`; a Crofoot transform
/// of `B1` followed by inclusion; for equal degrees the one-dimensional
/// multiplier space is decided exactly; otherwise Levenberg–Marquardt on the
/// coefficients of `h` from `budget` seeded starts.
pub fn isometric_multiplier(
    b1: &FiniteBlaschke,
    b2: &FiniteBlaschke,
    budget: usize,
    seed: u64,
) -> Result<IsometricMultiplier> {
    let (n, m) = (b1.degree(), b2.degree());
    if n > m {
        return Ok(IsometricMultiplier::NotFound {
            reason: format!("degree {n} exceeds degree {m}: no multiplier at all"),
            gap: f64::INFINITY,
        });
    }
    if n == 0 {
        return Err(crate::Error::Invalid(
            "model space of a constant is trivial".into(),
        ));
    }

    // phi = 1: h = q2 / q1 = prod over the zeros of B2 not in B1
    if let Some(rest) = poly::multiset_difference(b2.zeros(), b1.zeros(), ZERO_MATCH) {
        if let Some(out) = found(b1, b2, poly::from_reflected(&rest))? {
            return Ok(out);
        }
    }

    // Crofoot shift sending some zero w of B2 to a zero of the shifted B1
    let mut tried: Vec<Complex64> = Vec::new();
    for &w in b2.zeros() {
        let a = b1.eval(w);
        if a.norm() <= ZERO_MATCH || tried.iter().any(|t| (t - a).norm() <= ZERO_MATCH) {
            continue;
        }
        tried.push(a);
        let Ok((shifted, mult)) = crofoot(b1, a) else {
            continue;
        };
        if let Some(rest) = poly::multiset_difference(b2.zeros(), shifted.zeros(), 1e-8) {
            let s = mult.eval(ZERO);
            let h = poly::scale(&poly::from_reflected(&rest), s);
            if let Some(out) = found(b1, b2, h)? {
                return Ok(out);
            }
        }
    }

    let k = m - n + 1;
    let blocks = gram_blocks(b1, b2)?;
    if k == 1 {
        let g0 = CMatrix::from_fn(n, n, |i, j| blocks[i][j][(0, 0)]);
        let scale = g0.trace().re / n as f64;
        let off = (&g0 - CMatrix::identity(n, n) * Complex64::new(scale, 0.0)).norm();
        if off <= 1e-10 * scale {
            let h = vec![Complex64::new(1.0 / scale.sqrt(), 0.0)];
            if let Some(out) = found(b1, b2, h)? {
                return Ok(out);
            }
        }
        return Ok(IsometricMultiplier::NotFound {
            reason: "equal degrees: the Gram matrix of q1/q2 times the basis is not a multiple of the identity"
                .into(),
            gap: off / scale,
        });
    }
    least_squares_search(b1, b2, &blocks, budget, seed)
}

/// `blocks[i][j][(q, p)] = <phi_p e_i, phi_q e_j>` for the multiplier basis
/// `phi_p` and the basis `e_i` of `K_{B1}`.
fn gram_blocks(b1: &FiniteBlaschke, b2: &FiniteBlaschke) -> Result<Vec<Vec<CMatrix>>> {
    let basis = tm_basis(b1)?;
    let n = basis.dim();
    let phis = multiplier_space(b1, b2);
    let k = phis.len();
    let prods: Vec<Vec<Rational>> = phis
        .iter()
        .map(|phi| basis.functions().iter().map(|e| phi.mul(e)).collect())
        .collect();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| CMatrix::from_fn(k, k, |q, p| h2_inner(&prods[p][i], &prods[q][j])))
                .collect()
        })
        .collect())
}

fn least_squares_search(
    b1: &FiniteBlaschke,
    b2: &FiniteBlaschke,
    blocks: &[Vec<CMatrix>],
    budget: usize,
    seed: u64,
) -> Result<IsometricMultiplier> {
    let k = blocks[0][0].nrows();
    let mut rng = random::SeededRng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..budget {
        let start: Vec<Complex64> = (0..k).map(|_| random::gaussian(&mut rng)).collect();
        let (h, gap) = levenberg_marquardt(blocks, start);
        if gap <= ISOMETRY_EPS {
            if let Some(out) = found(b1, b2, h)? {
                return Ok(out);
            }
        }
        best = best.min(gap);
    }
    Ok(IsometricMultiplier::Undetermined { best_gap: best })
}

fn gram_residual(
    blocks: &[Vec<CMatrix>],
    h: &DVector<Complex64>,
) -> (Vec<f64>, Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    // returns real residuals plus T h and h* T for each block
    let n = blocks.len();
    let mut r = Vec::with_capacity(2 * n * n);
    let mut th = Vec::with_capacity(n * n);
    let mut ht = Vec::with_capacity(n * n);
    for (i, row) in blocks.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            let a = t * h;
            let b = h.adjoint() * t;
            let g = h.dotc(&a) - if i == j { ONE } else { ZERO };
            r.push(g.re);
            r.push(g.im);
            th.push(a.iter().copied().collect());
            ht.push(b.iter().copied().collect());
        }
    }
    (r, th, ht)
}

fn levenberg_marquardt(blocks: &[Vec<CMatrix>], start: Vec<Complex64>) -> (Vec<Complex64>, f64) {
    let k = start.len();
    let mut h = DVector::from_vec(start);
    let cost = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let (mut r, mut th, mut ht) = gram_residual(blocks, &h);
    let mut current = cost(&r);
    let mut mu = 1e-3;
    for _ in 0..500 {
        if current.sqrt() <= ISOMETRY_EPS * 0.1 {
            break;
        }
        let rows = r.len();
        let mut jac = DMatrix::<f64>::zeros(rows, 2 * k);
        for (b, (a, c)) in th.iter().zip(&ht).enumerate() {
            for p in 0..k {
                // real direction e_p, then imaginary direction i e_p
                let dre = a[p] + c[p];
                let dim = Complex64::new(0.0, -1.0) * a[p] + Complex64::new(0.0, 1.0) * c[p];
                jac[(2 * b, p)] = dre.re;
                jac[(2 * b + 1, p)] = dre.im;
                jac[(2 * b, k + p)] = dim.re;
                jac[(2 * b + 1, k + p)] = dim.im;
            }
        }
        let rv = DVector::from_vec(r.clone());
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * rv;
        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for d in 0..2 * k {
                lhs[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(step) = lhs.lu().solve(&(-&grad)) else {
                mu *= 10.0;
                continue;
            };
            let cand = DVector::from_fn(k, |p, _| h[p] + Complex64::new(step[p], step[k + p]));
            let (r2, th2, ht2) = gram_residual(blocks, &cand);
            let c2 = cost(&r2);
            if c2 < current {
                h = cand;
                r = r2;
                th = th2;
                ht = ht2;
                current = c2;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (h.iter().copied().collect(), current.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn pair(a: f64) -> (FiniteBlaschke, FiniteBlaschke) {
        (
            FiniteBlaschke::monomial(2),
            FiniteBlaschke::from_zeros(vec![ZERO, c(a, 0.0)]).unwrap(),
        )
    }

    #[test]
    fn space_for_equal_degrees() {
        let a = 0.5;
        let (b1, b2) = pair(a);
        assert!(multiplier_exists(&b1, &b2));
        let space = multiplier_space(&b1, &b2);
        assert_eq!(space.len(), 1);
        let z = c(0.3, -0.6);
        assert!((space[0].eval(z) - ONE / (ONE - z * a)).norm() < 1e-14);
        assert!(multiplier_residual(&b1, &b2, &space[0]).unwrap() < 1e-9);
    }

    #[test]
    fn not_isometric_for_nonzero_a() {
        let (b1, b2) = pair(0.5);
        let out = isometric_multiplier(&b1, &b2, 4, 0).unwrap();
        assert!(
            matches!(out, IsometricMultiplier::NotFound { .. }),
            "{out:?}"
        );
        let (b1, b2) = pair(0.0);
        let out = isometric_multiplier(&b1, &b2, 4, 0).unwrap();
        assert!(out.is_found());
    }

    #[test]
    fn degree_obstruction() {
        let b1 = FiniteBlaschke::monomial(3);
        let b2 = FiniteBlaschke::monomial(2);
        assert!(!multiplier_exists(&b1, &b2));
        assert!(multiplier_space(&b1, &b2).is_empty());
        assert!(matches!(
            isometric_multiplier(&b1, &b2, 1, 0).unwrap(),
            IsometricMultiplier::NotFound { .. }
        ));
    }

    #[test]
    fn inclusion_when_dividing() {
        let b1 = FiniteBlaschke::monomial(1);
        let b2 = FiniteBlaschke::from_zeros(vec![ZERO, c(0.3, 0.0)]).unwrap();
        match isometric_multiplier(&b1, &b2, 1, 0).unwrap() {
            IsometricMultiplier::Found { multiplier, .. } => {
                assert!((multiplier.eval(c(0.2, 0.5)) - ONE).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn crofoot_image_found() {
        let b1 = FiniteBlaschke::from_zeros(vec![c(0.2, 0.1), c(-0.4, 0.3)]).unwrap();
        let (b2, _) = crofoot(&b1, c(0.3, -0.2)).unwrap();
        let out = isometric_multiplier(&b1, &b2, 1, 0).unwrap();
        assert!(out.is_found(), "{out:?}");
    }

    #[test]
    fn least_squares_path() {
        // a one-dimensional K_{B1} always admits a norm-one multiplier
        let b1 = FiniteBlaschke::from_zeros(vec![c(0.5, 0.2)]).unwrap();
        let b2 = FiniteBlaschke::from_zeros(vec![c(-0.3, 0.1), c(0.1, 0.6), c(0.0, -0.5)]).unwrap();
        let blocks = gram_blocks(&b1, &b2).unwrap();
        match least_squares_search(&b1, &b2, &blocks, 4, 3).unwrap() {
            IsometricMultiplier::Found {
                multiplier, gap, ..
            } => {
                assert!(gap <= ISOMETRY_EPS);
                assert!(multiplier_residual(&b1, &b2, &multiplier).unwrap() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}
