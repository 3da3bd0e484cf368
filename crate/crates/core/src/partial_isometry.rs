//! Validated partial isometries on `C^n`.
//!
//! A [`PartialIsometry`] caches orthonormal bases for its initial space
//! `(ker V)^perp`, final space `ran V`, and the two defect spaces
//! `ker V` and `(ran V)^perp`. Matrices are always square; maps between
//! spaces of different dimension are plain [`CMatrix`] values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    self, complete_to_unitary, eig, onb_nullspace, onb_range, projector, CMatrix, CMatrixJson,
    Tolerance, I, ONE,
};

#[derive(Debug, Clone)]
pub struct PartialIsometry {
    matrix: CMatrix,
    tol: Tolerance,
    initial_space: CMatrix,
    final_space: CMatrix,
    defect_plus: CMatrix,
    defect_minus: CMatrix,
}

/// Outcome of the completely-non-unitary test.
#[derive(Debug, Clone)]
pub enum CnuStatus {
    Cnu,
    /// Orthonormal basis of the unitary part.
    NotCnu(CMatrix),
    BoundaryAmbiguous,
}

impl CnuStatus {
    pub fn is_cnu(&self) -> bool {
        matches!(self, CnuStatus::Cnu)
    }

    pub fn label(&self) -> &'static str {
        match self {
            CnuStatus::Cnu => "cnu",
            CnuStatus::NotCnu(_) => "not_cnu",
            CnuStatus::BoundaryAmbiguous => "boundary_ambiguous",
        }
    }
}

impl PartialIsometry {
    /// Checks `V V* V = V` and caches the four subspace bases.
    pub fn validate(m: CMatrix, tol: Tolerance) -> Result<Self> {
        tol.check()?;
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        if !numerics::is_finite(&m) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        let residual = (&m * m.adjoint() * &m - &m).norm();
        if residual > tol.residual_eps {
            return Err(Error::NotPartialIsometry { residual });
        }
        let n = rows;
        let dec = numerics::svd(&m);
        // singular values of a partial isometry are 0 or 1
        let r = dec.s.iter().filter(|&&s| s > 0.5).count();
        let initial_space = dec.w.columns(0, r).into_owned();
        let final_space = dec.u.columns(0, r).into_owned();
        let defect_plus = complete_to_unitary(&initial_space, &tol)?
            .columns(r, n - r)
            .into_owned();
        let defect_minus = complete_to_unitary(&final_space, &tol)?
            .columns(r, n - r)
            .into_owned();
        for p in [
            projector(&initial_space) - m.adjoint() * &m,
            projector(&final_space) - &m * m.adjoint(),
        ] {
            let gap = p.norm();
            if gap > 2.0 * tol.residual_eps {
                return Err(Error::NotPartialIsometry { residual: gap });
            }
        }
        Ok(Self {
            matrix: m,
            tol,
            initial_space,
            final_space,
            defect_plus,
            defect_minus,
        })
    }

    pub fn new(m: CMatrix) -> Result<Self> {
        Self::validate(m, Tolerance::default())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn initial_space(&self) -> &CMatrix {
        &self.initial_space
    }

    pub fn final_space(&self) -> &CMatrix {
        &self.final_space
    }

    /// Orthonormal basis of `ker V`.
    pub fn defect_plus(&self) -> &CMatrix {
        &self.defect_plus
    }

    /// Orthonormal basis of `(ran V)^perp`.
    pub fn defect_minus(&self) -> &CMatrix {
        &self.defect_minus
    }

    pub fn initial_projection(&self) -> CMatrix {
        projector(&self.initial_space)
    }

    pub fn kernel_projection(&self) -> CMatrix {
        projector(&self.defect_plus)
    }

    pub fn deficiency_indices(&self) -> (usize, usize) {
        (self.defect_plus.ncols(), self.defect_minus.ncols())
    }

    pub fn adjoint(&self) -> Result<Self> {
        Self::validate(self.matrix.adjoint(), self.tol)
    }

    /// `Q1 V Q2` for unitary `Q1`, `Q2`.
    pub fn transform(&self, q1: &CMatrix, q2: &CMatrix) -> Result<Self> {
        Self::validate(q1 * &self.matrix * q2, self.tol)
    }

    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        numerics::eigenvalues(&self.matrix)
    }

    /// Decides complete non-unitarity from the spectrum. When eigenvalues
    /// reach the circle, the span of their eigenspaces is checked to be
    /// reducing with `V` unitary on it before it is reported.
    pub fn is_completely_non_unitary(&self) -> Result<CnuStatus> {
        let n = self.dim();
        let pairs = eig(&self.matrix)?;
        let edge = 1.0 - self.tol.rank_eps;
        let boundary: Vec<Complex64> = pairs
            .iter()
            .map(|p| p.0)
            .filter(|l| l.norm() >= edge)
            .collect();
        if boundary.is_empty() {
            return Ok(CnuStatus::Cnu);
        }
        // one eigenspace per cluster of boundary eigenvalues
        let mut reps: Vec<Complex64> = Vec::new();
        for l in boundary {
            if reps.iter().all(|r| (r - l).norm() > 1e-6) {
                reps.push(l);
            }
        }
        let mut spans = CMatrix::zeros(n, 0);
        for l in reps {
            let shifted = &self.matrix - CMatrix::identity(n, n) * l;
            let null = onb_nullspace(&shifted, &Tolerance::new(1e-7, self.tol.residual_eps)?);
            let k = spans.ncols();
            spans = spans.insert_columns(k, null.ncols(), numerics::ZERO);
            spans.columns_mut(k, null.ncols()).copy_from(&null);
        }
        let basis = onb_range(&spans, &self.tol);
        if basis.ncols() == 0 {
            return Ok(CnuStatus::BoundaryAmbiguous);
        }
        let p = projector(&basis);
        let comp = CMatrix::identity(n, n) - &p;
        let v = &self.matrix;
        let leak = (&comp * v * &p).norm() + (&comp * v.adjoint() * &p).norm();
        let vp = v * &basis;
        let unitary_gap = numerics::unitarity_defect(&vp);
        let slack = self.tol.residual_eps * (n as f64).sqrt().max(1.0) * 10.0;
        if leak <= slack && unitary_gap <= slack {
            Ok(CnuStatus::NotCnu(basis))
        } else {
            Ok(CnuStatus::BoundaryAmbiguous)
        }
    }

    /// Unitary `U` agreeing with `V` on the initial space and sending the
    /// cached `ker V` basis to the cached `(ran V)^perp` basis in index order.
    pub fn unitary_extension(&self) -> Result<CMatrix> {
        let (np, nm) = self.deficiency_indices();
        if np != nm {
            return Err(Error::UnequalIndices(np, nm));
        }
        Ok(&self.matrix + &self.defect_minus * self.defect_plus.adjoint())
    }

    /// Halmos–McLaughlin order: `A <= B` iff `A = B A* A`.
    pub fn hm_leq(&self, other: &PartialIsometry) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let a = &self.matrix;
        let gap = (a - other.matrix() * a.adjoint() * a).norm();
        Ok(gap <= self.tol.residual_eps)
    }

    /// `i (I + V)(I - V)^{-1}`.
    pub fn cayley(&self) -> Result<CMatrix> {
        let n = self.dim();
        let id = CMatrix::identity(n, n);
        let near_one = self
            .spectrum()?
            .iter()
            .any(|l| (l - ONE).norm() <= self.tol.rank_eps);
        let inv = if near_one {
            None
        } else {
            numerics::inverse_checked(&(&id - &self.matrix), &self.tol)
        };
        let inv =
            inv.ok_or_else(|| Error::SpectrumObstruction("1 is an eigenvalue of V".into()))?;
        Ok((&id + &self.matrix) * inv * I)
    }
}

/// `(S - iI)(S + iI)^{-1}`.
pub fn inverse_cayley(s: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let (rows, cols) = s.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let id = CMatrix::identity(rows, rows);
    let near = numerics::eigenvalues(s)?
        .iter()
        .any(|l| (l + I).norm() <= tol.rank_eps);
    let inv = if near {
        None
    } else {
        numerics::inverse_checked(&(s + &id * I), tol)
    };
    let inv = inv.ok_or_else(|| Error::SpectrumObstruction("-i is an eigenvalue of S".into()))?;
    Ok((s - &id * I) * inv)
}

/// Partial isometry whose first columns are `cols` and the rest zero, the
/// canonical form `[u_1|...|u_r|0|...|0]`.
pub fn column_form(cols: &CMatrix) -> CMatrix {
    let n = cols.nrows();
    let mut m = CMatrix::zeros(n, n);
    m.columns_mut(0, cols.ncols()).copy_from(cols);
    m
}

/// Random completely non-unitary partial isometry with indices
/// `(defect, defect)` on `C^dim`.
pub fn random_cnu<R: rand::Rng + ?Sized>(
    dim: usize,
    defect: usize,
    rng: &mut R,
    tol: Tolerance,
) -> Result<PartialIsometry> {
    loop {
        let m = numerics::random::partial_isometry_matrix(dim, defect, rng);
        let v = PartialIsometry::validate(m, tol)?;
        // keep a margin from the circle so resolvents stay well conditioned
        let rho = v.spectrum()?.iter().map(|l| l.norm()).fold(0.0, f64::max);
        if rho < 0.97 {
            return Ok(v);
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TolOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_eps: Option<f64>,
}

impl TolOverride {
    pub fn apply(&self, base: Tolerance) -> Tolerance {
        Tolerance {
            rank_eps: self.rank_eps.unwrap_or(base.rank_eps),
            residual_eps: self.residual_eps.unwrap_or(base.residual_eps),
        }
    }
}

/// Matrix wire form plus optional tolerance overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialIsometryJson {
    #[serde(flatten)]
    pub matrix: CMatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<TolOverride>,
}

impl PartialIsometryJson {
    pub fn to_partial_isometry(&self, base: Tolerance) -> Result<PartialIsometry> {
        let tol = self.tol.as_ref().map(|t| t.apply(base)).unwrap_or(base);
        PartialIsometry::validate(self.matrix.to_matrix()?, tol)
    }
}

impl From<&PartialIsometry> for PartialIsometryJson {
    fn from(v: &PartialIsometry) -> Self {
        Self {
            matrix: CMatrixJson::from(v.matrix()),
            tol: None,
        }
    }
}

/// Nilpotent Jordan block with ones on the superdiagonal.
pub fn jordan_block(n: usize) -> CMatrix {
    let mut j = CMatrix::zeros(n, n);
    for k in 0..n.saturating_sub(1) {
        j[(k, k + 1)] = ONE;
    }
    j
}

/// The 4x4 pair with equal characteristic polynomials but different Jordan
/// forms (`A` has a chain of length 3, `B` two chains of length 2).
pub fn defect_two_pair() -> (CMatrix, CMatrix) {
    let mut a = CMatrix::zeros(4, 4);
    a[(0, 1)] = ONE;
    a[(1, 2)] = ONE;
    let mut b = CMatrix::zeros(4, 4);
    b[(0, 1)] = ONE;
    b[(2, 3)] = ONE;
    (a, b)
}
