//! The atomic singular inner function `exp(-(1 + z) / (1 - z))` and a
//! quadrature check that `(1 - Theta) / (1 - Phi)` acts isometrically on
//! `K_Phi`.
//!
//! Boundary integrals use the substitution `zeta = (x - i) / (x + i)`, under
//! which `Theta(zeta) = e^{ix}` and `dm = dx / (pi (1 + x^2))`. The real line
//! is integrated panel by panel up to `|x| = X`; the arc `|x| > X` around
//! `zeta = 1` is integrated in the angle with `|1 - Theta|^2` replaced by its
//! mean value 2, which leaves an oscillatory error of order `1 / X^2`.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::basis::tm_basis;
use super::blaschke::FiniteBlaschke;
use super::clark::AtomicMeasure;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, ONE};

pub fn atomic_singular_inner(z: Complex64) -> Complex64 {
    (-(ONE + z) / (ONE - z)).exp()
}

/// `(2 n pi - i) / (2 n pi + i)`, where the singular inner function equals 1.
pub fn carrier_point(n: i64) -> Complex64 {
    let x = 2.0 * PI * n as f64;
    Complex64::new(x, -1.0) / Complex64::new(x, 1.0)
}

/// Clark weight of the singular inner function at `carrier_point(n)`.
pub fn carrier_weight(n: i64) -> f64 {
    let x = 2.0 * PI * n as f64;
    2.0 / (1.0 + x * x)
}

/// Restriction of the Clark measure of the singular inner function to the
/// carrier points with the given indices.
pub fn carrier_measure(indices: &[i64]) -> Result<AtomicMeasure> {
    AtomicMeasure::new(
        indices
            .iter()
            .map(|&n| (carrier_point(n), carrier_weight(n)))
            .collect(),
    )
}

fn cayley_point(x: f64) -> Complex64 {
    Complex64::new(x, -1.0) / Complex64::new(x, 1.0)
}

struct Integrand<'a> {
    theta: &'a dyn Fn(Complex64) -> Complex64,
    phi: &'a FiniteBlaschke,
    basis: super::basis::ModelSpaceBasis,
}

impl Integrand<'_> {
    /// `e_i(zeta) conj(e_j(zeta)) / |1 - Phi(zeta)|^2`, optionally weighted
    /// by `|1 - Theta(zeta)|^2`.
    fn value(&self, zeta: Complex64, weighted: bool) -> CMatrix {
        let e = self.basis.eval(zeta);
        let n = e.len();
        let mut w = 1.0 / (ONE - self.phi.eval(zeta)).norm_sqr();
        if weighted {
            w *= (ONE - (self.theta)(zeta)).norm_sqr();
        } else {
            w *= 2.0;
        }
        CMatrix::from_fn(n, n, |i, j| e[i] * e[j].conj() * w)
    }

    /// Integral over `a <= x <= b` with panels of width at most `pi / 4`.
    fn line(&self, rule: &GaussLegendre, a: f64, b: f64) -> CMatrix {
        let n = self.basis.dim();
        let mut acc = CMatrix::zeros(n, n);
        let panels = ((b - a) / (PI / 4.0)).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + h * p as f64;
            for &(t, w) in rule.as_node_weight_pairs() {
                let x = lo + 0.5 * h * (t + 1.0);
                let dm = 0.5 * h * w / (PI * (1.0 + x * x));
                acc += self.value(cayley_point(x), true) * Complex64::new(dm, 0.0);
            }
        }
        acc
    }

    /// Arc `|arg zeta| < 2 atan(1 / x_max)` with the averaged weight.
    fn arc(&self, rule: &GaussLegendre, x_max: f64) -> CMatrix {
        let n = self.basis.dim();
        let mut acc = CMatrix::zeros(n, n);
        let half = 2.0 * (1.0 / x_max).atan();
        for &(t, w) in rule.as_node_weight_pairs() {
            let ang = half * t;
            let dm = half * w / (2.0 * PI);
            acc += self.value(Complex64::from_polar(1.0, ang), false) * Complex64::new(dm, 0.0);
        }
        acc
    }
}

/// Largest entry of `[∫ |G|^2 e_i conj(e_j) dm] - I` over the orthonormal
/// basis of `K_Phi`, with `G = (1 - Theta) / (1 - Phi)`. The cut-off `X` is
/// doubled until the estimate moves by less than `tol / 10`.
pub fn quadrature_isometry_check(
    theta: &dyn Fn(Complex64) -> Complex64,
    phi: &FiniteBlaschke,
    tol: f64,
) -> Result<f64> {
    let basis = tm_basis(phi)?;
    let n = basis.dim();
    let rule = GaussLegendre::new(16).map_err(|e| Error::Invalid(e.to_string()))?;
    let f = Integrand { theta, phi, basis };
    let mut x_max = 64.0 * PI;
    let mut middle = f.line(&rule, -x_max, x_max);
    let mut estimate = &middle + f.arc(&rule, x_max);
    let mut change = f64::INFINITY;
    while x_max < 1.0e6 {
        let next = 2.0 * x_max;
        middle += f.line(&rule, -next, -x_max) + f.line(&rule, x_max, next);
        let refined = &middle + f.arc(&rule, next);
        change = (&refined - &estimate)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        estimate = refined;
        x_max = next;
        if change < tol / 10.0 {
            let gap = estimate - CMatrix::identity(n, n);
            return Ok(gap.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }
    Err(Error::QuadratureNonConvergence(change))
}
