//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is a pure function of its inputs. Matrices are
//! `nalgebra::DMatrix<Complex64>`; the factorizations come from nalgebra and
//! this module adds the rank decisions, subspace bases and unitary completion
//! the rest of the crate is written against.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix, row/column counts are those of the nalgebra value.
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical thresholds shared by every rank and residual decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// A singular value counts as nonzero iff it exceeds `rank_eps * sigma_max`.
    pub rank_eps: f64,
    pub residual_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_eps: 1e-9,
            residual_eps: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_eps: f64, residual_eps: f64) -> Result<Self> {
        let tol = Self {
            rank_eps,
            residual_eps,
        };
        tol.check()?;
        Ok(tol)
    }

    pub fn check(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.rank_eps) && ok(self.residual_eps) {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "tolerances must be positive and finite, got rank_eps={}, residual_eps={}",
                self.rank_eps, self.residual_eps
            )))
        }
    }
}

/// Thin singular value decomposition `M = U diag(s) W*` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub w: CMatrix,
}

impl Svd {
    /// Number of singular values above `rank_eps * s[0]`.
    pub fn rank(&self, tol: &Tolerance) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&x| x > tol.rank_eps * smax).count()
    }
}

pub fn svd(m: &CMatrix) -> Svd {
    let (r, cdim) = m.shape();
    let k = r.min(cdim);
    if k == 0 {
        return Svd {
            u: CMatrix::zeros(r, 0),
            s: Vec::new(),
            w: CMatrix::zeros(cdim, 0),
        };
    }
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("u requested");
    let w = dec.v_t.expect("v_t requested").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        dec.singular_values[b]
            .partial_cmp(&dec.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let s = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u = CMatrix::from_fn(r, k, |i, j| u[(i, order[j])]);
    let w = CMatrix::from_fn(cdim, k, |i, j| w[(i, order[j])]);
    Svd { u, s, w }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn rank(m: &CMatrix, tol: &Tolerance) -> usize {
    svd(m).rank(tol)
}

/// Complex Schur form `M = Q T Q*`. The QR iteration can cycle on exactly
/// structured input such as the lower shift on `C^3`; a fixed unitary change
/// of basis breaks the symmetry before retrying.
fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        return Ok(s.unpack());
    }
    for seed in 0..4 {
        let w = random::unitary(m.nrows(), &mut random::rng(0x5c4u64 + seed));
        if let Some(s) = Schur::try_new(w.adjoint() * m * &w, f64::EPSILON, 10_000) {
            let (z, t) = s.unpack();
            return Ok((w * z, t));
        }
    }
    Err(Error::NonConvergence)
}

/// Eigenpairs of a square matrix from a complex Schur form.
///
/// Eigenvectors are recovered by back substitution on the triangular factor;
/// exactly repeated diagonal entries are nudged by `eps * ||T||` so defective
/// matrices still produce unit vectors with small residual.
pub fn eig(m: &CMatrix) -> Result<Vec<(Complex64, nalgebra::DVector<Complex64>)>> {
    let (r, cdim) = m.shape();
    if r != cdim {
        return Err(Error::NotSquare {
            rows: r,
            cols: cdim,
        });
    }
    let n = r;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (q, t) = schur(m)?;
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = nalgebra::DVector::<Complex64>::zeros(n);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < tiny {
                d = c(tiny, 0.0);
            }
            y[j] = -acc / d;
            // rescale to avoid overflow on strongly defective blocks
            let ny = y.norm();
            if ny > 1e150 {
                y /= c(ny, 0.0);
            }
        }
        let x = &q * y;
        let nx = x.norm();
        out.push((lambda, x / c(nx, 0.0)));
    }
    Ok(out)
}

pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let (r, cdim) = m.shape();
    if r != cdim {
        return Err(Error::NotSquare {
            rows: r,
            cols: cdim,
        });
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur(m)?;
    Ok((0..r).map(|i| t[(i, i)]).collect())
}

/// Monic characteristic polynomial, coefficients in ascending degree order
/// (the last entry is 1).
pub fn char_poly(m: &CMatrix) -> Result<Vec<Complex64>> {
    let eigs = eigenvalues(m)?;
    let mut p = vec![ONE];
    for lam in eigs {
        // multiply by (z - lam)
        let mut next = vec![ZERO; p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * lam;
        }
        p = next;
    }
    Ok(p)
}

/// Orthonormal basis of `ker M`, one column per null direction.
pub fn onb_nullspace(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    let dec = svd(m);
    let r = dec.rank(tol);
    if r == 0 {
        return CMatrix::identity(cols, cols);
    }
    let row_space = dec.w.columns(0, r).into_owned();
    let q = complete_columns(&row_space);
    q.columns(r, cols - r).into_owned()
}

/// Orthonormal basis of `ran M`.
pub fn onb_range(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    let dec = svd(m);
    let r = dec.rank(tol);
    dec.u.columns(0, r).into_owned()
}

/// Unitary matrix whose leading columns are exactly `cols`.
pub fn complete_to_unitary(cols: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let k = cols.ncols();
    if k > cols.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} columns cannot be orthonormal in C^{}",
            k,
            cols.nrows()
        )));
    }
    let gram = cols.adjoint() * cols;
    let residual = (gram - CMatrix::identity(k, k)).norm();
    if residual > tol.residual_eps {
        return Err(Error::NotOrthonormal { residual });
    }
    Ok(complete_columns(cols))
}

// Assumes orthonormal input columns.
fn complete_columns(cols: &CMatrix) -> CMatrix {
    let n = cols.nrows();
    let k = cols.ncols();
    let mut stacked = CMatrix::zeros(n, k + n);
    stacked.columns_mut(0, k).copy_from(cols);
    stacked
        .columns_mut(k, n)
        .copy_from(&CMatrix::identity(n, n));
    let q = stacked.qr().q();
    let mut out = q.clone();
    out.columns_mut(0, k).copy_from(cols);
    out
}

/// Nearest matrix with orthonormal columns (unitary polar factor `U W*`).
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let dec = svd(m);
    &dec.u * dec.w.adjoint()
}

/// Orthogonal projection onto the span of orthonormal columns.
pub fn projector(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}

/// `||Q*Q - I||_F`.
pub fn unitarity_defect(q: &CMatrix) -> f64 {
    let k = q.ncols();
    (q.adjoint() * q - CMatrix::identity(k, k)).norm()
}

/// Inverse with a conditioning guard: fails when the smallest singular value
/// is below `rank_eps * sigma_max`.
pub fn inverse_checked(m: &CMatrix, tol: &Tolerance) -> Option<CMatrix> {
    if m.nrows() != m.ncols() {
        return None;
    }
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    let s = singular_values(m);
    let smax = s[0];
    let smin = *s.last().unwrap();
    if smax == 0.0 || smin <= tol.rank_eps * smax {
        return None;
    }
    m.clone().try_inverse()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn from_rows(rows: &[Vec<Complex64>]) -> CMatrix {
    let r = rows.len();
    let cdim = rows.first().map(|x| x.len()).unwrap_or(0);
    CMatrix::from_fn(r, cdim, |i, j| rows[i][j])
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cdim = rows.first().map(|x| x.len()).unwrap_or(0);
    CMatrix::from_fn(r, cdim, |i, j| c(rows[i][j], 0.0))
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    let n = entries.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
}

/// `[[re, im], ...]` pair form of a complex number.
pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_pair(p: [f64; 2]) -> Complex64 {
    c(p[0], p[1])
}

/// Wire form of a matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for CMatrixJson {
    fn from(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(pair(m[(i, j)]));
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl CMatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Invalid("rows and cols must be at least 1".into()));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Invalid(format!(
                "data has {} entries, expected rows*cols = {}",
                self.data.len(),
                self.rows * self.cols
            )));
        }
        if let Some(k) = self
            .data
            .iter()
            .position(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(Error::Invalid(format!("data[{k}] is not finite")));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            from_pair(self.data[i * self.cols + j])
        }))
    }
}

/// Seeded generators for test and demo inputs.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    pub type SeededRng = ChaCha8Rng;

    pub fn rng(seed: u64) -> SeededRng {
        use rand::SeedableRng;
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) / c(std::f64::consts::SQRT_2, 0.0)
    }

    pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
    }

    /// Haar-distributed unitary (QR of a Gaussian matrix with phase fix).
    pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let g = gaussian_matrix(n, n, rng);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
        q
    }

    /// Point drawn uniformly from the disk of the given radius.
    pub fn disk_point<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Complex64 {
        let r = radius * rng.random::<f64>().sqrt();
        let t = rng.random::<f64>() * std::f64::consts::TAU;
        Complex64::from_polar(r, t)
    }

    /// `W P` with `W` Haar unitary and `P` the projection onto a random
    /// subspace of codimension `defect`; generically completely non-unitary.
    pub fn partial_isometry_matrix<R: Rng + ?Sized>(
        dim: usize,
        defect: usize,
        rng: &mut R,
    ) -> CMatrix {
        let w = unitary(dim, rng);
        let basis = unitary(dim, rng);
        let keep = basis.columns(0, dim - defect).into_owned();
        w * projector(&keep)
    }
}
