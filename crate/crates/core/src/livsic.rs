//! Characteristic functions of partial isometries.
//!
//! `w_V` is evaluated either through a unitary extension `U` of `V`,
//! `w(z) = z F1(z) F2(z)^{-1}` with `F1 = E*(U - z)^{-1}E`,
//! `F2 = E*(U - z)^{-1}U E` and `E` a basis of `ker V`, or directly from the
//! defect spaces as `w(z) = z A(z)^{-1} B(z)`, where `A = j_z* j_0`,
//! `B = j_z* j_inf` and `j_z` spans `(ran (V - z))^perp` inside the initial
//! space. The two routes agree up to constant unitary factors.

use num_complex::Complex64;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::numerics::{
    self, c, inverse_checked, onb_nullspace, polar_unitary, singular_values, CMatrix, Tolerance,
    ZERO,
};
use crate::partial_isometry::PartialIsometry;

/// Anything that can be sampled as an `n x n` matrix function on the disk.
pub trait MatrixFunction {
    fn size(&self) -> usize;
    fn eval(&self, z: Complex64) -> Result<CMatrix>;
}

impl<F> MatrixFunction for (usize, F)
where
    F: Fn(Complex64) -> Result<CMatrix>,
{
    fn size(&self) -> usize {
        self.0
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        (self.1)(z)
    }
}

#[derive(Debug, Clone)]
pub enum Route {
    Extension { u: CMatrix, kernel_basis: CMatrix },
    DefectKernel,
}

/// Characteristic function of a CNU partial isometry with equal indices.
#[derive(Debug, Clone)]
pub struct CharFn {
    source: PartialIsometry,
    route: Route,
}

fn check_source(v: &PartialIsometry) -> Result<usize> {
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
    Ok(np)
}

impl CharFn {
    /// Extension route with the canonical unitary extension.
    pub fn extension(v: &PartialIsometry) -> Result<Self> {
        check_source(v)?;
        let u = v.unitary_extension()?;
        Ok(Self {
            source: v.clone(),
            route: Route::Extension {
                u,
                kernel_basis: v.defect_plus().clone(),
            },
        })
    }

    /// Extension route with a caller-supplied unitary extension.
    pub fn with_extension(v: &PartialIsometry, u: CMatrix) -> Result<Self> {
        check_source(v)?;
        let n = v.dim();
        if u.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "extension is {}x{}, expected {n}x{n}",
                u.nrows(),
                u.ncols()
            )));
        }
        let tol = v.tol();
        if numerics::unitarity_defect(&u) > tol.residual_eps
            || (&u * v.initial_projection() - v.matrix()).norm() > tol.residual_eps
        {
            return Err(Error::Invalid("not a unitary extension of V".into()));
        }
        Ok(Self {
            source: v.clone(),
            route: Route::Extension {
                u,
                kernel_basis: v.defect_plus().clone(),
            },
        })
    }

    pub fn defect(v: &PartialIsometry) -> Result<Self> {
        check_source(v)?;
        Ok(Self {
            source: v.clone(),
            route: Route::DefectKernel,
        })
    }

    pub fn source(&self) -> &PartialIsometry {
        &self.source
    }

    pub fn route(&self) -> &Route {
        &self.route
    }
}

impl MatrixFunction for CharFn {
    fn size(&self) -> usize {
        self.source.deficiency_indices().0
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        match &self.route {
            Route::Extension { u, kernel_basis } => {
                extension_formula(u, kernel_basis, z, self.source.tol())
            }
            Route::DefectKernel => charfn_defect(&self.source, z),
        }
    }
}

fn check_disk(z: Complex64) -> Result<()> {
    if !(z.norm() < 1.0) {
        return Err(Error::Invalid(format!(
            "point {z} is not in the open unit disk"
        )));
    }
    Ok(())
}

fn extension_formula(u: &CMatrix, e: &CMatrix, z: Complex64, tol: &Tolerance) -> Result<CMatrix> {
    check_disk(z)?;
    let n = u.nrows();
    let shifted = u - CMatrix::identity(n, n) * z;
    let res =
        inverse_checked(&shifted, tol).ok_or_else(|| Error::SingularResolvent(z.to_string()))?;
    let f1 = e.adjoint() * &res * e;
    let f2 = e.adjoint() * &res * u * e;
    let f2inv =
        inverse_checked(&f2, tol).ok_or_else(|| Error::SingularSecondFactor(z.to_string()))?;
    Ok(f1 * f2inv * z)
}

/// `w_V(z)` through the unitary extension `u`.
pub fn charfn_extension(v: &PartialIsometry, u: &CMatrix, z: Complex64) -> Result<CMatrix> {
    CharFn::with_extension(v, u.clone())?.eval(z)
}

/// Orthonormal basis of `(ran (V - z)P)^perp` where `P` projects onto the
/// initial space; at `z = 0` this is `(ran V)^perp` itself.
pub fn defect_frame(v: &PartialIsometry, z: Complex64) -> Result<CMatrix> {
    let n = v.dim();
    let (_, nm) = v.deficiency_indices();
    if z == ZERO {
        return Ok(v.defect_minus().clone());
    }
    let p = v.initial_projection();
    let m = ((v.matrix() - CMatrix::identity(n, n) * z) * p).adjoint();
    let frame = onb_nullspace(&m, v.tol());
    if frame.ncols() != nm {
        return Err(Error::SingularGram(format!(
            "{z}: defect space has dimension {} instead of {nm}",
            frame.ncols()
        )));
    }
    Ok(frame)
}

/// `w_V(z) = z A(z)^{-1} B(z)` from the defect spaces.
pub fn charfn_defect(v: &PartialIsometry, z: Complex64) -> Result<CMatrix> {
    check_disk(z)?;
    let jz = defect_frame(v, z)?;
    let a = jz.adjoint() * v.defect_minus();
    let b = jz.adjoint() * v.defect_plus();
    let ainv = inverse_checked(&a, v.tol()).ok_or_else(|| Error::SingularGram(z.to_string()))?;
    Ok(ainv * b * z)
}

/// Zero plus 12 points on each of the circles `|z| = 0.35` and `|z| = 0.7`.
pub fn default_samples() -> Vec<Complex64> {
    sample_points(25)
}

/// `count` sample points: the origin, then points on circles of radius 0.35
/// and 0.7 alternately, with a rotation between the two rings.
pub fn sample_points(count: usize) -> Vec<Complex64> {
    let mut pts = vec![ZERO];
    let rest = count.saturating_sub(1);
    let inner = rest / 2;
    let outer = rest - inner;
    for k in 0..inner {
        let t = std::f64::consts::TAU * k as f64 / inner as f64;
        pts.push(Complex64::from_polar(0.35, t));
    }
    for k in 0..outer {
        let t = std::f64::consts::TAU * (k as f64 + 0.5) / outer as f64;
        pts.push(Complex64::from_polar(0.7, t));
    }
    pts
}

#[derive(Debug, Clone)]
pub enum Coincidence {
    /// `Q1 w2(z) Q2 = w1(z)` at every sample.
    Coincident {
        q1: CMatrix,
        q2: CMatrix,
        residual: f64,
    },
    /// Singular values of `w1(z)` and `w2(z)` differ at this point.
    NotCoincident {
        witness: Complex64,
        gap: f64,
    },
    Undetermined {
        residual: f64,
    },
}

impl Coincidence {
    pub fn is_coincident(&self) -> bool {
        matches!(self, Coincidence::Coincident { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Coincidence::Coincident { .. } => "coincident",
            Coincidence::NotCoincident { .. } => "not_coincident",
            Coincidence::Undetermined { .. } => "undetermined",
        }
    }
}

const RANDOM_STARTS: usize = 8;
const MAX_SWEEPS: usize = 3000;

fn max_residual(q1: &CMatrix, q2: &CMatrix, w1: &[CMatrix], w2: &[CMatrix]) -> f64 {
    w1.iter()
        .zip(w2)
        .map(|(a, b)| (q1 * b * q2 - a).norm())
        .fold(0.0, f64::max)
}

fn procrustes(
    mut q2: CMatrix,
    w1: &[CMatrix],
    w2: &[CMatrix],
    target: f64,
) -> (CMatrix, CMatrix, f64) {
    let n = q2.nrows();
    let mut q1 = CMatrix::identity(n, n);
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..MAX_SWEEPS {
        let mut m1 = CMatrix::zeros(n, n);
        for (a, b) in w1.iter().zip(w2) {
            m1 += a * (b * &q2).adjoint();
        }
        q1 = polar_unitary(&m1);
        let mut m2 = CMatrix::zeros(n, n);
        for (a, b) in w1.iter().zip(w2) {
            m2 += b.adjoint() * q1.adjoint() * a;
        }
        q2 = polar_unitary(&m2);
        let r = max_residual(&q1, &q2, w1, w2);
        if r <= target {
            return (q1, q2, r);
        }
        if r < best * (1.0 - 1e-6) {
            best = r;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 50 {
                break;
            }
        }
    }
    let r = max_residual(&q1, &q2, w1, w2);
    (q1, q2, r)
}

/// Searches for constant unitaries with `Q1 w2(z) Q2 = w1(z)` on `samples`.
///
/// A mismatch of singular values at some sample is a certificate that no such
/// pair exists. Otherwise alternating Procrustes sweeps are run from an
/// SVD-aligned start and from random unitary starts drawn from `seed`.
pub fn coincide(
    w1: &dyn MatrixFunction,
    w2: &dyn MatrixFunction,
    samples: &[Complex64],
    tol: &Tolerance,
    seed: u64,
) -> Result<Coincidence> {
    let n = w1.size();
    if w2.size() != n {
        return Err(Error::DimensionMismatch(format!("{n} vs {}", w2.size())));
    }
    if samples.len() < 2 * n * n {
        return Err(Error::Invalid(format!(
            "need at least {} samples, got {}",
            2 * n * n,
            samples.len()
        )));
    }
    let mut v1 = Vec::with_capacity(samples.len());
    let mut v2 = Vec::with_capacity(samples.len());
    for &z in samples {
        let a = w1.eval(z)?;
        let b = w2.eval(z)?;
        let gap = singular_values(&a)
            .iter()
            .zip(singular_values(&b))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        if gap > tol.residual_eps {
            return Ok(Coincidence::NotCoincident { witness: z, gap });
        }
        v1.push(a);
        v2.push(b);
    }

    if n == 1 {
        let (k, _) = v2
            .iter()
            .enumerate()
            .map(|(k, b)| (k, b[(0, 0)].norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let denom = v2[k][(0, 0)];
        let ratio = if denom.norm() > 0.0 {
            v1[k][(0, 0)] / denom
        } else {
            c(1.0, 0.0)
        };
        let phase = if ratio.norm() > 0.0 {
            ratio / ratio.norm()
        } else {
            c(1.0, 0.0)
        };
        let q1 = CMatrix::from_element(1, 1, phase);
        let q2 = CMatrix::identity(1, 1);
        let residual = max_residual(&q1, &q2, &v1, &v2);
        if residual <= tol.residual_eps {
            return Ok(Coincidence::Coincident { q1, q2, residual });
        }
        // the constant is forced, so the worst sample is a genuine witness
        let (s, gap) = v1
            .iter()
            .zip(&v2)
            .enumerate()
            .map(|(s, (a, b))| (s, (a[(0, 0)] - phase * b[(0, 0)]).norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        return Ok(Coincidence::NotCoincident {
            witness: samples[s],
            gap,
        });
    }

    let target = tol.residual_eps * 0.5;
    let mut starts = Vec::with_capacity(RANDOM_STARTS + 1);
    // align right singular vectors at the sample of largest norm
    let (k, _) = v1
        .iter()
        .enumerate()
        .map(|(k, a)| (k, a.norm()))
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let d1 = numerics::svd(&v1[k]);
    let d2 = numerics::svd(&v2[k]);
    starts.push(&d2.w * d1.w.adjoint());
    let mut rng = numerics::random::SeededRng::seed_from_u64(seed);
    for _ in 0..RANDOM_STARTS {
        starts.push(numerics::random::unitary(n, &mut rng));
    }
    let mut best = f64::INFINITY;
    for start in starts {
        let (q1, q2, r) = procrustes(start, &v1, &v2, target);
        if r <= tol.residual_eps {
            return Ok(Coincidence::Coincident {
                q1,
                q2,
                residual: r,
            });
        }
        best = best.min(r);
    }
    Ok(Coincidence::Undetermined { residual: best })
}

/// Unitary equivalence test for defect-one CNU partial isometries: equal
/// monic characteristic polynomials.
pub fn hml_equivalent(a: &PartialIsometry, b: &PartialIsometry) -> Result<bool> {
    for v in [a, b] {
        let (np, nm) = v.deficiency_indices();
        if np != 1 || nm != 1 {
            return Err(Error::WrongDefect {
                expected: 1,
                got: if np != 1 { np } else { nm },
            });
        }
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    for v in [a, b] {
        if !v.is_completely_non_unitary()?.is_cnu() {
            return Err(Error::Invalid(
                "partial isometry is not completely non-unitary".into(),
            ));
        }
    }
    let pa = numerics::char_poly(a.matrix())?;
    let pb = numerics::char_poly(b.matrix())?;
    let gap = pa
        .iter()
        .zip(&pb)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(gap <= a.tol().residual_eps)
}
