//! The pre-orders on matrix partial isometries.
//!
//! `A ≼_q B` asks for an injective `X` with `X ker(A)^⊥ ⊂ ker(B)^⊥` and
//! `X A = B X` on `ker(A)^⊥`; `A ≼ B` asks for the same with `X` isometric.
//! Both constraints are linear in `X`, so the admissible intertwiners form a
//! subspace which is computed exactly; what remains is a rank question
//! (for `≼_q`) or a nonconvex isometry search (for `≼`).

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::livsic::hml_equivalent;
use crate::model_space::h2_inner;
use crate::model_space::{
    isometric_multiplier, mult_partial_isometry, tm_basis, FiniteBlaschke, IsometricMultiplier,
};
use crate::numerics::{self, random, CMatrix, CMatrixJson, Tolerance};
use crate::partial_isometry::PartialIsometry;

/// Random coefficient vectors drawn when estimating the generic rank of a
/// solution space.
pub const RANK_SAMPLES: usize = 16;

/// Isometry tolerance for `≼` witnesses.
pub const ISOMETRY_EPS: f64 = 1e-9;

const PROJECTION_SWEEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Halmos–McLaughlin extension order.
    Hm,
    /// Isometric intertwiner.
    Iso,
    /// Injective intertwiner.
    Quasi,
}

impl Relation {
    pub fn label(&self) -> &'static str {
        match self {
            Relation::Hm => "hm",
            Relation::Iso => "iso",
            Relation::Quasi => "quasi",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Holds { witness: CMatrix },
    Fails { obstruction: String },
    Undetermined,
}

/// Residuals behind a verdict. For `Holds` they describe the witness; for
/// the other outcomes, the best candidate seen.
#[derive(Debug, Clone, Default)]
pub struct Residuals {
    /// `||(X A - B X) P_init(A)|| / ||X||`.
    pub intertwining: f64,
    /// `||P_ker(B) X P_init(A)|| / ||X||`.
    pub inclusion: f64,
    /// `||X* X - I||_F`, for the isometric order.
    pub isometry: Option<f64>,
    /// `sigma_min / sigma_max` of the witness (or best sample).
    pub conditioning: Option<f64>,
    /// Dimension of the space of admissible intertwiners.
    pub solution_dim: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub outcome: Outcome,
    pub residuals: Residuals,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, Outcome::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self.outcome, Outcome::Fails { .. })
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self.outcome, Outcome::Undetermined)
    }

    pub fn witness(&self) -> Option<&CMatrix> {
        match &self.outcome {
            Outcome::Holds { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.outcome {
            Outcome::Holds { .. } => "holds",
            Outcome::Fails { .. } => "fails",
            Outcome::Undetermined => "undetermined",
        }
    }

    pub fn to_json(&self) -> Value {
        let r = &self.residuals;
        let mut out = json!({
            "relation": self.relation.label(),
            "outcome": self.label(),
            "residuals": {
                "intertwining": r.intertwining,
                "inclusion": r.inclusion,
                "isometry": r.isometry,
                "conditioning": r.conditioning,
                "solution_dim": r.solution_dim,
            },
        });
        match &self.outcome {
            Outcome::Holds { witness } => {
                out["witness"] =
                    serde_json::to_value(CMatrixJson::from(witness)).expect("plain data");
            }
            Outcome::Fails { obstruction } => out["obstruction"] = json!(obstruction),
            Outcome::Undetermined => {}
        }
        out
    }

    fn new(relation: Relation, outcome: Outcome, residuals: Residuals) -> Self {
        Self {
            relation,
            outcome,
            residuals,
        }
    }
}

fn check_pair(a: &PartialIsometry, b: &PartialIsometry) -> Result<()> {
    let (na, ma) = a.deficiency_indices();
    let (nb, mb) = b.deficiency_indices();
    if na != ma {
        return Err(Error::UnequalIndices(na, ma));
    }
    if nb != mb {
        return Err(Error::UnequalIndices(nb, mb));
    }
    if na != nb {
        return Err(Error::DimensionMismatch(format!(
            "deficiency index {na} vs {nb}"
        )));
    }
    for v in [a, b] {
        if !v.is_completely_non_unitary()?.is_cnu() {
            return Err(Error::Invalid(
                "partial isometry is not completely non-unitary".into(),
            ));
        }
    }
    Ok(())
}

/// Relative residuals of the two defining constraints for `X: H_A -> H_B`.
pub fn intertwining_residuals(
    a: &PartialIsometry,
    b: &PartialIsometry,
    x: &CMatrix,
) -> Result<(f64, f64)> {
    if x.shape() != (b.dim(), a.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "witness is {}x{}, expected {}x{}",
            x.nrows(),
            x.ncols(),
            b.dim(),
            a.dim()
        )));
    }
    let scale = x.norm().max(f64::MIN_POSITIVE);
    let p = a.initial_projection();
    let inter = ((x * a.matrix() - b.matrix() * x) * &p).norm() / scale;
    let incl = (b.kernel_projection() * x * &p).norm() / scale;
    Ok((inter, incl))
}

// vec(L X R) = (R^T ⊗ L) vec(X) with column-major vec.
fn sandwich(l: &CMatrix, r: &CMatrix) -> CMatrix {
    r.transpose().kronecker(l)
}

fn stack(blocks: &[CMatrix]) -> CMatrix {
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    out
}

fn unvec(v: &DVector<Complex64>, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Orthonormal basis (as columns of vectorized `X`) of the intertwiners
/// admissible for `A ≼_q B`.
pub fn intertwiner_space(a: &PartialIsometry, b: &PartialIsometry) -> CMatrix {
    let (m, p) = (a.dim(), b.dim());
    let pa = a.initial_projection();
    let ap = a.matrix() * &pa;
    let id_b = CMatrix::identity(p, p);
    let system = stack(&[
        sandwich(&id_b, &ap) - sandwich(b.matrix(), &pa),
        sandwich(&b.kernel_projection(), &pa),
    ]);
    debug_assert_eq!(system.ncols(), m * p);
    numerics::onb_nullspace(&system, a.tol())
}

/// Best of `RANK_SAMPLES` random elements of the solution space, ranked by
/// `sigma_min / sigma_max` (zero when `X` cannot have full column rank).
fn generic_element(
    basis: &CMatrix,
    rows: usize,
    cols: usize,
    rng: &mut random::SeededRng,
) -> (CMatrix, f64) {
    let d = basis.ncols();
    let mut best = (CMatrix::zeros(rows, cols), 0.0);
    for _ in 0..RANK_SAMPLES {
        let coeffs = DVector::from_fn(d, |_, _| random::gaussian(rng));
        let x = unvec(&(basis * coeffs), rows, cols);
        let s = numerics::singular_values(&x);
        let ratio = if rows < cols || s[0] == 0.0 {
            0.0
        } else {
            s[cols - 1] / s[0]
        };
        if ratio > best.1 {
            best = (&x / Complex64::new(s[0], 0.0), ratio);
        }
    }
    best
}

/// `A ≼_q B`: an injective intertwiner exists.
///
/// Holds comes with a verified witness. Fails means the solution space is
/// zero, too small, or every sampled element is rank deficient; the generic
/// rank is attained off a measure-zero set, so the sampled maximum is the
/// true one with probability one.
pub fn leq_q(a: &PartialIsometry, b: &PartialIsometry, seed: u64) -> Result<OrderVerdict> {
    check_pair(a, b)?;
    let (m, p) = (a.dim(), b.dim());
    let basis = intertwiner_space(a, b);
    let d = basis.ncols();
    let mut res = Residuals {
        solution_dim: Some(d),
        ..Residuals::default()
    };
    if m > p {
        return Ok(OrderVerdict::new(
            Relation::Quasi,
            Outcome::Fails {
                obstruction: format!("no injective map from dimension {m} into dimension {p}"),
            },
            res,
        ));
    }
    if d == 0 {
        return Ok(OrderVerdict::new(
            Relation::Quasi,
            Outcome::Fails {
                obstruction: "the only admissible intertwiner is zero".into(),
            },
            res,
        ));
    }
    let mut rng = random::SeededRng::seed_from_u64(seed);
    let (x, ratio) = generic_element(&basis, p, m, &mut rng);
    res.conditioning = Some(ratio);
    if ratio <= a.tol().rank_eps {
        return Ok(OrderVerdict::new(
            Relation::Quasi,
            Outcome::Fails {
                obstruction: format!(
                    "every admissible intertwiner is rank deficient (best sigma_min/sigma_max = {ratio:.3e})"
                ),
            },
            res,
        ));
    }
    let (inter, incl) = intertwining_residuals(a, b, &x)?;
    res.intertwining = inter;
    res.inclusion = incl;
    let outcome = if inter.max(incl) <= a.tol().residual_eps {
        Outcome::Holds { witness: x }
    } else {
        Outcome::Undetermined
    };
    Ok(OrderVerdict::new(Relation::Quasi, outcome, res))
}

/// Whether `A` and `B` (same dimension) are unitarily equivalent, decided on
/// the linear space `{X : X A = B X, X A* = B* X}`, which contains an
/// invertible element iff it contains a unitary one.
fn unitary_equivalence(
    a: &PartialIsometry,
    b: &PartialIsometry,
    seed: u64,
) -> Result<OrderVerdict> {
    let n = a.dim();
    let id = CMatrix::identity(n, n);
    let (am, bm) = (a.matrix(), b.matrix());
    let system = stack(&[
        sandwich(&id, am) - sandwich(bm, &id),
        sandwich(&id, &am.adjoint()) - sandwich(&bm.adjoint(), &id),
    ]);
    let basis = numerics::onb_nullspace(&system, a.tol());
    let mut res = Residuals {
        solution_dim: Some(basis.ncols()),
        ..Residuals::default()
    };
    if basis.ncols() == 0 {
        return Ok(OrderVerdict::new(
            Relation::Iso,
            Outcome::Fails {
                obstruction: "equal dimensions: A and B are not unitarily equivalent (no intertwiner of A and A*)".into(),
            },
            res,
        ));
    }
    let mut rng = random::SeededRng::seed_from_u64(seed);
    let (x, ratio) = generic_element(&basis, n, n, &mut rng);
    res.conditioning = Some(ratio);
    if ratio <= a.tol().rank_eps {
        return Ok(OrderVerdict::new(
            Relation::Iso,
            Outcome::Fails {
                obstruction: "equal dimensions: A and B are not unitarily equivalent (intertwiners are singular)".into(),
            },
            res,
        ));
    }
    Ok(iso_candidate(a, b, numerics::polar_unitary(&x), res))
}

fn iso_candidate(
    a: &PartialIsometry,
    b: &PartialIsometry,
    u: CMatrix,
    mut res: Residuals,
) -> OrderVerdict {
    let (inter, incl) = intertwining_residuals(a, b, &u).expect("shape checked by construction");
    let iso = numerics::unitarity_defect(&u);
    res.intertwining = inter;
    res.inclusion = incl;
    res.isometry = Some(iso);
    res.conditioning = Some(1.0);
    let outcome = if inter.max(incl) <= a.tol().residual_eps && iso <= ISOMETRY_EPS {
        Outcome::Holds { witness: u }
    } else {
        Outcome::Undetermined
    };
    OrderVerdict::new(Relation::Iso, outcome, res)
}

/// Alternating projection between the intertwiner space and the isometries.
fn isometric_search(
    a: &PartialIsometry,
    b: &PartialIsometry,
    basis: &CMatrix,
    start: CMatrix,
) -> (CMatrix, f64) {
    let (p, m) = (b.dim(), a.dim());
    let mut u = numerics::polar_unitary(&start);
    let mut gap = f64::INFINITY;
    for _ in 0..PROJECTION_SWEEPS {
        let v = DVector::from_column_slice(u.as_slice());
        let inside = unvec(&(basis * (basis.adjoint() * &v)), p, m);
        let next_gap = (&inside - &u).norm();
        u = numerics::polar_unitary(&inside);
        // converged, or stalled at a positive distance
        if next_gap < 1e-13 || next_gap > gap * (1.0 - 1e-7) {
            gap = next_gap;
            break;
        }
        gap = next_gap;
    }
    (u, gap)
}

/// `A ≼ B`: an isometric intertwiner exists.
///
/// Equal dimensions reduce to unitary equivalence, which is decided
/// exactly. Otherwise the isometry is searched for by alternating projection
/// from `budget` starts, and only an `≼_q` failure counts as a proof of
/// failure.
pub fn leq(
    a: &PartialIsometry,
    b: &PartialIsometry,
    budget: usize,
    seed: u64,
) -> Result<OrderVerdict> {
    let q = leq_q(a, b, seed)?;
    if let Outcome::Fails { obstruction } = &q.outcome {
        return Ok(OrderVerdict::new(
            Relation::Iso,
            Outcome::Fails {
                obstruction: format!("no injective intertwiner: {obstruction}"),
            },
            q.residuals.clone(),
        ));
    }
    if a.dim() == b.dim() {
        return unitary_equivalence(a, b, seed);
    }
    let basis = intertwiner_space(a, b);
    let (p, m) = (b.dim(), a.dim());
    let mut rng = random::SeededRng::seed_from_u64(seed.wrapping_add(1));
    let mut best = Residuals {
        intertwining: f64::INFINITY,
        inclusion: f64::INFINITY,
        solution_dim: Some(basis.ncols()),
        ..Residuals::default()
    };
    for k in 0..budget.max(1) {
        let start = match (k, q.witness()) {
            (0, Some(x)) => x.clone(),
            _ => {
                let coeffs = DVector::from_fn(basis.ncols(), |_, _| random::gaussian(&mut rng));
                unvec(&(&basis * coeffs), p, m)
            }
        };
        let (u, _) = isometric_search(a, b, &basis, start);
        let verdict = iso_candidate(a, b, u, best.clone());
        if verdict.holds() {
            return Ok(verdict);
        }
        let r = verdict.residuals;
        if r.intertwining.max(r.inclusion) < best.intertwining.max(best.inclusion) {
            best = r;
        }
    }
    Ok(OrderVerdict::new(
        Relation::Iso,
        Outcome::Undetermined,
        best,
    ))
}

/// `≼` between the model operators `M_{B1}` and `M_{B2}` (multiplication by
/// `z` on the domain of each model space, in the orthonormal bases of
/// `tm_basis`). An isometric multiplier `phi` gives the witness
/// `U[k][j] = <phi e_j, f_k>` directly.
pub fn leq_blaschke(
    b1: &FiniteBlaschke,
    b2: &FiniteBlaschke,
    tol: Tolerance,
    budget: usize,
    seed: u64,
) -> Result<OrderVerdict> {
    let a = mult_partial_isometry(b1, tol)?;
    let b = mult_partial_isometry(b2, tol)?;
    match isometric_multiplier(b1, b2, budget, seed)? {
        IsometricMultiplier::Found { multiplier, .. } => {
            let e = tm_basis(b1)?;
            let f = tm_basis(b2)?;
            let images: Vec<_> = e.functions().iter().map(|ej| multiplier.mul(ej)).collect();
            let u = CMatrix::from_fn(f.dim(), e.dim(), |k, j| {
                h2_inner(&images[j], &f.functions()[k])
            });
            let res = Residuals {
                solution_dim: None,
                ..Residuals::default()
            };
            let verdict = iso_candidate(&a, &b, u, res);
            if verdict.holds() {
                return Ok(verdict);
            }
            leq(&a, &b, budget, seed)
        }
        IsometricMultiplier::NotFound { reason, gap } => Ok(OrderVerdict::new(
            Relation::Iso,
            Outcome::Fails {
                obstruction: format!("no isometric multiplier: {reason}"),
            },
            Residuals {
                isometry: Some(gap),
                ..Residuals::default()
            },
        )),
        IsometricMultiplier::Undetermined { .. } => leq(&a, &b, budget, seed),
    }
}

/// Halmos–McLaughlin order as a verdict with witness `I` and residual
/// `||A - B A* A||_F`.
pub fn hm_order(a: &PartialIsometry, b: &PartialIsometry) -> Result<OrderVerdict> {
    let holds = a.hm_leq(b)?;
    let am = a.matrix();
    let gap = (am - b.matrix() * am.adjoint() * am).norm();
    let n = a.dim();
    let res = Residuals {
        intertwining: gap,
        ..Residuals::default()
    };
    let outcome = if holds {
        Outcome::Holds {
            witness: CMatrix::identity(n, n),
        }
    } else {
        Outcome::Fails {
            obstruction: "B does not extend A on the initial space of A".into(),
        }
    };
    Ok(OrderVerdict::new(Relation::Hm, outcome, res))
}

/// Unitary equivalence for defect-one CNU partial isometries.
pub fn sim_check(a: &PartialIsometry, b: &PartialIsometry) -> Result<bool> {
    hml_equivalent(a, b)
}

/// `A ∼_q B` on spaces of equal dimension: an invertible `L` in the `≼_q`
/// solution space with `L ker(A)^⊥ = ker(B)^⊥`, cross-checked against
/// `B ≼_q A`. Disagreement between the two directions gives `Undetermined`.
pub fn simq_check(a: &PartialIsometry, b: &PartialIsometry, seed: u64) -> Result<OrderVerdict> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let forward = leq_q(a, b, seed)?;
    let backward = leq_q(b, a, seed.wrapping_add(1))?;
    let res = forward.residuals.clone();
    match (&forward.outcome, backward.holds()) {
        (Outcome::Holds { witness }, true) => {
            // square and injective, hence invertible; equal ranks turn the
            // inclusion of initial spaces into equality
            let image = witness * a.initial_space();
            let lost = (b.kernel_projection() * &image).norm() / witness.norm();
            let equal = numerics::rank(&image, a.tol()) == b.initial_space().ncols();
            if equal && lost <= a.tol().residual_eps {
                Ok(OrderVerdict::new(
                    Relation::Quasi,
                    forward.outcome.clone(),
                    res,
                ))
            } else {
                Ok(OrderVerdict::new(
                    Relation::Quasi,
                    Outcome::Undetermined,
                    res,
                ))
            }
        }
        (Outcome::Fails { obstruction }, _) => Ok(OrderVerdict::new(
            Relation::Quasi,
            Outcome::Fails {
                obstruction: format!("A ≼_q B fails: {obstruction}"),
            },
            res,
        )),
        (_, false) if backward.fails() => Ok(OrderVerdict::new(
            Relation::Quasi,
            Outcome::Fails {
                obstruction: match &backward.outcome {
                    Outcome::Fails { obstruction } => format!("B ≼_q A fails: {obstruction}"),
                    _ => unreachable!(),
                },
            },
            res,
        )),
        _ => Ok(OrderVerdict::new(
            Relation::Quasi,
            Outcome::Undetermined,
            res,
        )),
    }
}

/// The pair `[e_2|...|e_n|0]` and `[u_2|...|u_n|0]` for the orthonormal
/// basis `u` given as the columns of a unitary.
pub fn shift_pair(u: &CMatrix) -> (CMatrix, CMatrix) {
    let n = u.nrows();
    let mut v1 = CMatrix::zeros(n, n);
    let mut v2 = CMatrix::zeros(n, n);
    for j in 0..n - 1 {
        v1[(j + 1, j)] = numerics::ONE;
        v2.set_column(j, &u.column(j + 1));
    }
    (v1, v2)
}
