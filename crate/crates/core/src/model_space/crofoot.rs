use num_complex::Complex64;

use super::blaschke::FiniteBlaschke;
use super::poly;
use super::rational::Rational;
use crate::error::{Error, Result};
use crate::numerics::{c, ONE, ZERO};

/// Points used to verify fitted front constants.
pub(crate) fn check_points() -> Vec<Complex64> {
    (0..20)
        .map(|k| {
            let r = 0.15 + 0.8 * (k % 5) as f64 / 5.0;
            Complex64::from_polar(r, 0.37 + 1.3 * k as f64)
        })
        .collect()
}

/// Front constant making `zeros` agree with `target` at a reference point,
/// then verified at the check points.
pub(crate) fn fit_blaschke(
    zeros: Vec<Complex64>,
    target: impl Fn(Complex64) -> Complex64,
    what: &str,
) -> Result<FiniteBlaschke> {
    let zeros: Vec<Complex64> = zeros
        .into_iter()
        .map(|a| if a.norm() < 1e-15 { ZERO } else { a })
        .collect();
    if let Some(a) = zeros.iter().find(|a| a.norm() >= 1.0 - 1e-9) {
        return Err(Error::RootFindingFailure(format!(
            "{what}: root {a} is not inside the disk"
        )));
    }
    let bare = FiniteBlaschke::from_zeros(zeros.clone())?;
    // reference point with the largest |bare| among the check points
    let z0 = check_points()
        .into_iter()
        .max_by(|x, y| {
            bare.eval(*x)
                .norm()
                .partial_cmp(&bare.eval(*y).norm())
                .unwrap()
        })
        .unwrap();
    let ratio = target(z0) / bare.eval(z0);
    let constant = ratio / ratio.norm();
    let fitted = FiniteBlaschke::new(zeros, constant)?;
    let gap = check_points()
        .into_iter()
        .map(|z| (fitted.eval(z) - target(z)).norm())
        .fold(0.0, f64::max);
    if gap > 1e-9 {
        return Err(Error::RootFindingFailure(format!(
            "{what}: fitted product misses by {gap:e}"
        )));
    }
    Ok(fitted)
}

/// `B_a = (B - a) / (1 - conj(a) B)` and the multiplier
/// `sqrt(1 - |a|^2) / (1 - conj(a) B)`, which maps `K_B` unitarily onto
/// `K_{B_a}`.
pub fn crofoot(b: &FiniteBlaschke, a: Complex64) -> Result<(FiniteBlaschke, Rational)> {
    if !(a.norm() < 1.0) {
        return Err(Error::Invalid(format!(
            "shift parameter {a} is not in the disk"
        )));
    }
    if a == ZERO {
        return Ok((b.clone(), Rational::constant(ONE)));
    }
    let num = b.numerator();
    let den = b.denominator();
    // B = a  <=>  N - a D = 0
    let eq = poly::add(&num, &poly::scale(&den, -a));
    let zeros = poly::roots(&eq)?;
    if zeros.len() != b.degree() {
        return Err(Error::RootFindingFailure(format!(
            "expected {} solutions of B = a, found {}",
            b.degree(),
            zeros.len()
        )));
    }
    let shifted = fit_blaschke(
        zeros,
        |z| {
            let v = b.eval(z);
            (v - a) / (ONE - a.conj() * v)
        },
        "Crofoot transform",
    )?;
    // 1 - conj(a) B = (D - conj(a) N) / D, whose zeros reflect those of B_a
    let s = (1.0 - a.norm_sqr()).sqrt();
    let scale = c(s, 0.0) / (ONE - a.conj() * b.eval(ZERO));
    let mult = Rational::new(poly::scale(&den, scale), shifted.zeros().to_vec())?;
    let gap = check_points()
        .into_iter()
        .map(|z| (mult.eval(z) - s / (ONE - a.conj() * b.eval(z))).norm())
        .fold(0.0, f64::max);
    if gap > 1e-9 {
        return Err(Error::RootFindingFailure(format!(
            "Crofoot multiplier misses by {gap:e}"
        )));
    }
    Ok((shifted, mult))
}
