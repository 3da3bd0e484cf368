#![allow(dead_code)]

use num_complex::Complex64;
use pimodel::model_space::{compressed_shift, FiniteBlaschke};
use pimodel::numerics::random::{disk_point, rng, unitary, SeededRng};
use pimodel::partial_isometry::random_cnu;
use pimodel::{CMatrix, PartialIsometry, Tolerance};

pub fn tol() -> Tolerance {
    Tolerance::default()
}

pub fn seeded(seed: u64) -> SeededRng {
    rng(seed)
}

pub fn cnu(dim: usize, defect: usize, g: &mut SeededRng) -> PartialIsometry {
    random_cnu(dim, defect, g, tol()).unwrap()
}

pub fn conjugate(v: &PartialIsometry, q: &CMatrix) -> PartialIsometry {
    PartialIsometry::new(q * v.matrix() * q.adjoint()).unwrap()
}

pub fn random_conjugate(v: &PartialIsometry, g: &mut SeededRng) -> (PartialIsometry, CMatrix) {
    let q = unitary(v.dim(), g);
    (conjugate(v, &q), q)
}

/// Zeros `0, z_1, ..., z_k` with the `z_i` uniform in the disk of radius
/// `radius` and pairwise separated by at least `gap`.
pub fn separated_zeros(count: usize, radius: f64, gap: f64, g: &mut SeededRng) -> Vec<Complex64> {
    let mut zeros = vec![Complex64::new(0.0, 0.0)];
    while zeros.len() < count {
        let z = disk_point(radius, g);
        if zeros.iter().all(|w| (w - z).norm() > gap) {
            zeros.push(z);
        }
    }
    zeros
}

/// Compressed shift of `B`, in a randomly rotated basis.
pub fn rotated_shift(b: &FiniteBlaschke, g: &mut SeededRng) -> PartialIsometry {
    let s = compressed_shift(b, tol()).unwrap();
    random_conjugate(&s, g).0
}

pub fn disk_samples(count: usize, radius: f64, g: &mut SeededRng) -> Vec<Complex64> {
    (0..count).map(|_| disk_point(radius, g)).collect()
}
