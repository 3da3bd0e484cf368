use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poly;
use super::rational::Rational;
use crate::error::{Error, Result};
use crate::numerics::{from_pair, pair, random::disk_point, ONE, ZERO};

/// Tolerance for matching zeros in `divides`.
pub const ZERO_MATCH: f64 = 1e-9;

/// `c prod (z - a_i) / (1 - conj(a_i) z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBlaschke {
    zeros: Vec<Complex64>,
    constant: Complex64,
}

impl FiniteBlaschke {
    pub fn new(zeros: Vec<Complex64>, constant: Complex64) -> Result<Self> {
        if let Some(a) = zeros.iter().find(|a| !(a.norm() <= 1.0 - 1e-9)) {
            return Err(Error::Invalid(format!(
                "Blaschke zero {a} is not inside the disk"
            )));
        }
        if (constant.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "front constant {constant} is not unimodular"
            )));
        }
        Ok(Self { zeros, constant })
    }

    pub fn from_zeros(zeros: Vec<Complex64>) -> Result<Self> {
        Self::new(zeros, ONE)
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        Self {
            zeros: vec![ZERO; n],
            constant: ONE,
        }
    }

    /// Random product with zeros uniform in the disk of radius `radius`; when
    /// `vanish` is set the first zero is the origin.
    pub fn random<R: Rng + ?Sized>(degree: usize, radius: f64, vanish: bool, rng: &mut R) -> Self {
        let mut zeros: Vec<Complex64> = (0..degree).map(|_| disk_point(radius, rng)).collect();
        if vanish && degree > 0 {
            zeros[0] = ZERO;
        }
        let t = rng.random::<f64>() * std::f64::consts::TAU;
        Self {
            zeros,
            constant: Complex64::from_polar(1.0, t),
        }
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .fold(self.constant, |acc, a| acc * (z - a) / (ONE - a.conj() * z))
    }

    /// `c prod (z - a_i)`.
    pub fn numerator(&self) -> Vec<Complex64> {
        poly::scale(&poly::from_roots(&self.zeros), self.constant)
    }

    /// `prod (1 - conj(a_i) z)`.
    pub fn denominator(&self) -> Vec<Complex64> {
        poly::from_reflected(&self.zeros)
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.numerator(), self.zeros.clone()).expect("zeros lie inside the disk")
    }

    /// `|B'(zeta)|` for unimodular `zeta`, where it equals
    /// `sum (1 - |a|^2) / |zeta - a|^2`.
    pub fn boundary_derivative(&self, zeta: Complex64) -> f64 {
        self.zeros
            .iter()
            .map(|a| (1.0 - a.norm_sqr()) / (zeta - a).norm_sqr())
            .sum()
    }

    /// `self` divides `other` when its zeros form a sub-multiset of the
    /// zeros of `other`.
    pub fn divides(&self, other: &FiniteBlaschke) -> bool {
        poly::multiset_difference(&other.zeros, &self.zeros, ZERO_MATCH).is_some()
    }

    pub fn vanishes_at_zero(&self) -> bool {
        self.zeros.iter().any(|a| a.norm() <= ZERO_MATCH)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteBlaschkeJson {
    pub zeros: Vec<[f64; 2]>,
    #[serde(default = "unit_constant")]
    pub constant: [f64; 2],
}

fn unit_constant() -> [f64; 2] {
    [1.0, 0.0]
}

impl FiniteBlaschkeJson {
    pub fn to_blaschke(&self) -> Result<FiniteBlaschke> {
        let zeros = self.zeros.iter().map(|&p| from_pair(p)).collect();
        FiniteBlaschke::new(zeros, from_pair(self.constant))
    }
}

impl From<&FiniteBlaschke> for FiniteBlaschkeJson {
    fn from(b: &FiniteBlaschke) -> Self {
        Self {
            zeros: b.zeros.iter().map(|&z| pair(z)).collect(),
            constant: pair(b.constant),
        }
    }
}
