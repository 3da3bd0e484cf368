//! Anchored defect frames, the abstract model kernel and Herglotz spaces.
//!
//! A [`ModelFrame`] fixes `j_0` (basis of `(ran V)^perp`), `j_inf` (basis of
//! `ker V`) and, for each `z` off the circle, an orthonormal basis `j_z` of
//! `(ran (V - z)P)^perp`. With `A(z) = j_z* j_0` and `B(z) = j_z* j_inf` the
//! kernel `j_z* j_w` equals
//! `(A(z)A(w)* - z B(z)B(w)* conj(w)) / (1 - z conj(w))`.
//!
//! The Herglotz symbol paired with `W(z) = sqrt(2) (A(z) + z B(z))^{-1}` is
//! `b(z) = -z A(z)^{-1} B(z)`, which differs from the characteristic function
//! `z A^{-1} B` by the constant unitary `-I`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::livsic::defect_frame;
use crate::numerics::{inverse_checked, CMatrix, Tolerance, ONE};
use crate::partial_isometry::PartialIsometry;

/// Distance from the circle below which frames are not evaluated.
const CIRCLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ModelFrame {
    source: PartialIsometry,
}

impl ModelFrame {
    pub fn new(v: &PartialIsometry) -> Result<Self> {
        let (np, nm) = v.deficiency_indices();
        if np != nm {
            return Err(Error::UnequalIndices(np, nm));
        }
        if np == 0 {
            return Err(Error::WrongDefect {
                expected: 1,
                got: 0,
            });
        }
        if !v.is_completely_non_unitary()?.is_cnu() {
            return Err(Error::Invalid(
                "partial isometry is not completely non-unitary".into(),
            ));
        }
        Ok(Self { source: v.clone() })
    }

    pub fn source(&self) -> &PartialIsometry {
        &self.source
    }

    pub fn size(&self) -> usize {
        self.source.deficiency_indices().0
    }

    pub fn tol(&self) -> &Tolerance {
        self.source.tol()
    }

    pub fn j0(&self) -> &CMatrix {
        self.source.defect_minus()
    }

    pub fn jinf(&self) -> &CMatrix {
        self.source.defect_plus()
    }

    /// Orthonormal basis of `(ran (V - z)P)^perp`; `j_0` itself at `z = 0`.
    pub fn jz(&self, z: Complex64) -> Result<CMatrix> {
        if (z.norm() - 1.0).abs() < CIRCLE_GUARD {
            return Err(Error::Invalid(format!("{z} lies on the unit circle")));
        }
        defect_frame(&self.source, z)
    }
}

/// `(A(z), B(z)) = (j_z* j_0, j_z* j_inf)`.
pub fn ab_functions(frame: &ModelFrame, z: Complex64) -> Result<(CMatrix, CMatrix)> {
    let jz = frame.jz(z)?;
    Ok((jz.adjoint() * frame.j0(), jz.adjoint() * frame.jinf()))
}

fn kernel_denominator(z: Complex64, w: Complex64) -> Result<Complex64> {
    let d = ONE - z * w.conj();
    if d.norm() < 1e-12 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(d)
}

/// `(A(z)A(w)* - z B(z)B(w)* conj(w)) / (1 - z conj(w))`.
pub fn abstract_kernel(frame: &ModelFrame, z: Complex64, w: Complex64) -> Result<CMatrix> {
    let d = kernel_denominator(z, w)?;
    let (az, bz) = ab_functions(frame, z)?;
    let (aw, bw) = ab_functions(frame, w)?;
    Ok((&az * aw.adjoint() - &bz * bw.adjoint() * (z * w.conj())) / d)
}

/// `j_z* j_w`.
pub fn gamma_kernel(frame: &ModelFrame, z: Complex64, w: Complex64) -> Result<CMatrix> {
    kernel_denominator(z, w)?;
    Ok(frame.jz(z)?.adjoint() * frame.jz(w)?)
}

/// `G = (I + b)(I - b)^{-1}`.
pub fn herglotz_transform(b: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let n = b.nrows();
    let id = CMatrix::identity(n, n);
    let inv = inverse_checked(&(&id - b), tol)
        .ok_or_else(|| Error::SingularPencil("I - b is singular".into()))?;
    Ok((&id + b) * inv)
}

/// `b = (G - I)(G + I)^{-1}`.
pub fn herglotz_inverse(g: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let n = g.nrows();
    let id = CMatrix::identity(n, n);
    let inv = inverse_checked(&(g + &id), tol)
        .ok_or_else(|| Error::SingularPencil("G + I is singular".into()))?;
    Ok((g - &id) * inv)
}

/// `G_b` on the disk, continued outside by `G(z) = -G(1 / conj(z))*`.
pub fn herglotz_extension(
    b: &dyn Fn(Complex64) -> Result<CMatrix>,
    z: Complex64,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let r = z.norm();
    if (r - 1.0).abs() < CIRCLE_GUARD {
        return Err(Error::Invalid(format!("{z} lies on the unit circle")));
    }
    if r < 1.0 {
        herglotz_transform(&b(z)?, tol)
    } else {
        let inside = herglotz_transform(&b(ONE / z.conj())?, tol)?;
        Ok(-inside.adjoint())
    }
}

/// `(G(z) + G(w)*) / (1 - z conj(w))` with `G` extended across the circle.
pub fn herglotz_kernel(
    b: &dyn Fn(Complex64) -> Result<CMatrix>,
    z: Complex64,
    w: Complex64,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let d = kernel_denominator(z, w)?;
    let gz = herglotz_extension(b, z, tol)?;
    let gw = herglotz_extension(b, w, tol)?;
    Ok((gz + gw.adjoint()) / d)
}

/// Herglotz symbol `-z A(z)^{-1} B(z)` of the frame, for `|z| < 1`.
pub fn frame_symbol(frame: &ModelFrame, z: Complex64) -> Result<CMatrix> {
    if !(z.norm() < 1.0) {
        return Err(Error::Invalid(format!("{z} is not in the open unit disk")));
    }
    let (a, b) = ab_functions(frame, z)?;
    let ainv =
        inverse_checked(&a, frame.tol()).ok_or_else(|| Error::SingularGram(z.to_string()))?;
    Ok(ainv * b * (-z))
}

/// `W(z) = sqrt(2) (A(z) + z B(z))^{-1}`.
pub fn canonical_multiplier(frame: &ModelFrame, z: Complex64) -> Result<CMatrix> {
    let (a, b) = ab_functions(frame, z)?;
    let pencil = a + b * z;
    let inv = inverse_checked(&pencil, frame.tol())
        .ok_or_else(|| Error::SingularPencil(format!("A(z) + zB(z) at z = {z}")))?;
    Ok(inv * Complex64::new(std::f64::consts::SQRT_2, 0.0))
}

/// `K_w(z) - W(z) k_w(z) W(w)*` with the frame's own symbol.
pub fn multiplier_identity_gap(frame: &ModelFrame, z: Complex64, w: Complex64) -> Result<f64> {
    let symbol = |x: Complex64| frame_symbol(frame, x);
    let big = herglotz_kernel(&symbol, z, w, frame.tol())?;
    let small = abstract_kernel(frame, z, w)?;
    let wz = canonical_multiplier(frame, z)?;
    let ww = canonical_multiplier(frame, w)?;
    Ok((big - wz * small * ww.adjoint()).norm())
}

/// Block Gram matrix `[K(z_i, z_j)]`.
pub fn kernel_gram(
    points: &[Complex64],
    kernel: &dyn Fn(Complex64, Complex64) -> Result<CMatrix>,
) -> Result<CMatrix> {
    let mut blocks = Vec::with_capacity(points.len());
    for &zi in points {
        let mut row = Vec::with_capacity(points.len());
        for &zj in points {
            row.push(kernel(zi, zj)?);
        }
        blocks.push(row);
    }
    let n = blocks[0][0].nrows();
    let m = points.len();
    Ok(CMatrix::from_fn(n * m, n * m, |r, c| {
        blocks[r / n][c / n][(r % n, c % n)]
    }))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn psd_margin(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
