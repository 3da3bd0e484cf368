use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blaschke::FiniteBlaschke;
use super::crofoot::fit_blaschke;
use super::poly;
use crate::error::{Error, Result};
use crate::numerics::{from_pair, pair, ONE};

/// Finite positive measure on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(Complex64, f64)>,
}

impl AtomicMeasure {
    pub fn new(mut atoms: Vec<(Complex64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Invalid("measure has no atoms".into()));
        }
        for &(z, w) in &atoms {
            if (z.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Invalid(format!("atom {z} is not on the circle")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Invalid(format!("atom weight {w} is not positive")));
            }
        }
        atoms.sort_by(|x, y| angle(x.0).partial_cmp(&angle(y.0)).unwrap());
        for pair in atoms.windows(2) {
            if (pair[0].0 - pair[1].0).norm() <= 1e-10 {
                return Err(Error::Invalid("atoms are not distinct".into()));
            }
        }
        Ok(Self { atoms })
    }

    /// Atoms sorted by argument in `[0, 2 pi)`.
    pub fn atoms(&self) -> &[(Complex64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `sum_k w_k (1 - |z|^2) / |zeta_k - z|^2`.
    pub fn poisson(&self, z: Complex64) -> f64 {
        self.atoms
            .iter()
            .map(|&(zeta, w)| w * (1.0 - z.norm_sqr()) / (zeta - z).norm_sqr())
            .sum()
    }

    /// `sum_k w_k (zeta_k + z) / (zeta_k - z)`.
    pub fn herglotz(&self, z: Complex64) -> Complex64 {
        self.atoms
            .iter()
            .map(|&(zeta, w)| (zeta + z) / (zeta - z) * w)
            .sum()
    }

    /// Largest atom displacement or weight change against `other`, or
    /// infinity when the atom counts differ.
    pub fn distance(&self, other: &AtomicMeasure) -> f64 {
        if self.atoms.len() != other.atoms.len() {
            return f64::INFINITY;
        }
        self.atoms
            .iter()
            .map(|&(z, w)| {
                other
                    .atoms
                    .iter()
                    .map(|&(y, v)| (z - y).norm().max((w - v).abs()))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

fn angle(z: Complex64) -> f64 {
    z.arg().rem_euclid(std::f64::consts::TAU)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub zeta: [f64; 2],
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomicMeasureJson {
    pub atoms: Vec<AtomJson>,
}

impl AtomicMeasureJson {
    pub fn to_measure(&self) -> Result<AtomicMeasure> {
        AtomicMeasure::new(
            self.atoms
                .iter()
                .map(|a| (from_pair(a.zeta), a.weight))
                .collect(),
        )
    }
}

impl From<&AtomicMeasure> for AtomicMeasureJson {
    fn from(m: &AtomicMeasure) -> Self {
        Self {
            atoms: m
                .atoms
                .iter()
                .map(|&(z, w)| AtomJson {
                    zeta: pair(z),
                    weight: w,
                })
                .collect(),
        }
    }
}

/// Clark measure of `B` at 1: atoms where `B = 1`, weights `1 / |B'|`.
pub fn clark_measure(b: &FiniteBlaschke) -> Result<AtomicMeasure> {
    if b.degree() == 0 {
        return Err(Error::Invalid(
            "constant Blaschke product has no Clark measure".into(),
        ));
    }
    // B = 1  <=>  c N - D = 0
    let eq = poly::add(&b.numerator(), &poly::scale(&b.denominator(), -ONE));
    let roots = poly::roots(&eq)?;
    let mut atoms = Vec::with_capacity(roots.len());
    for r in roots {
        if (r.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::NonUnimodularRoot(r.norm()));
        }
        let zeta = r / r.norm();
        atoms.push((zeta, 1.0 / b.boundary_derivative(zeta)));
    }
    AtomicMeasure::new(atoms)
}

/// Inner function `Phi = (H - 1) / (H + 1)` with `H` the Herglotz integral of
/// `mu`; its Clark measure at 1 is `mu`.
pub fn inner_from_measure(mu: &AtomicMeasure) -> Result<FiniteBlaschke> {
    // H = N / D with D = prod (zeta_k - z)
    let atoms = mu.atoms();
    let den = atoms
        .iter()
        .fold(vec![ONE], |acc, &(zeta, _)| poly::mul(&acc, &[zeta, -ONE]));
    let mut num = Vec::new();
    for (k, &(zeta, w)) in atoms.iter().enumerate() {
        let mut term = vec![zeta * w, ONE * w];
        for (j, &(other, _)) in atoms.iter().enumerate() {
            if j != k {
                term = poly::mul(&term, &[other, -ONE]);
            }
        }
        num = poly::add(&num, &term);
    }
    // Phi vanishes where N = D
    let zeros = poly::roots(&poly::add(&num, &poly::scale(&den, -ONE)))?;
    fit_blaschke(
        zeros,
        |z| {
            let h = mu.herglotz(z);
            (h - ONE) / (h + ONE)
        },
        "inner function from measure",
    )
}
