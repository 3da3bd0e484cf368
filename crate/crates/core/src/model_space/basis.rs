use num_complex::Complex64;

use super::blaschke::FiniteBlaschke;
use super::rational::{combine, h2_inner, Rational};
use crate::error::{Error, Result};
use nalgebra::DVector;

use crate::numerics::{CMatrix, Tolerance, ONE};
use crate::partial_isometry::PartialIsometry;

/// Orthonormal basis of `K_B = (B H^2)^perp`.
#[derive(Debug, Clone)]
pub struct ModelSpaceBasis {
    blaschke: FiniteBlaschke,
    basis: Vec<Rational>,
}

/// Takenaka–Malmquist chain
/// `e_k = sqrt(1 - |a_k|^2) / (1 - conj(a_k) z) prod_{j<k} (z - a_j) / (1 - conj(a_j) z)`.
pub fn tm_basis(b: &FiniteBlaschke) -> Result<ModelSpaceBasis> {
    if b.degree() == 0 {
        return Err(Error::Invalid(
            "model space of a constant is trivial".into(),
        ));
    }
    let zeros = b.zeros();
    let basis = (0..zeros.len())
        .map(|k| {
            let numer = super::poly::scale(
                &super::poly::from_roots(&zeros[..k]),
                Complex64::new((1.0 - zeros[k].norm_sqr()).sqrt(), 0.0),
            );
            Rational::new(numer, zeros[..=k].to_vec()).expect("zeros lie inside the disk")
        })
        .collect();
    Ok(ModelSpaceBasis {
        blaschke: b.clone(),
        basis,
    })
}

impl ModelSpaceBasis {
    pub fn blaschke(&self) -> &FiniteBlaschke {
        &self.blaschke
    }

    pub fn functions(&self) -> &[Rational] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.basis.iter().map(|e| e.eval(z)).collect()
    }

    /// `<f, e_k>` for each basis element.
    pub fn coefficients(&self, f: &Rational) -> Vec<Complex64> {
        self.basis.iter().map(|e| h2_inner(f, e)).collect()
    }

    pub fn function(&self, coeffs: &[Complex64]) -> Rational {
        combine(coeffs, &self.basis)
    }

    pub fn gram(&self) -> CMatrix {
        gram_of(&self.basis)
    }

    /// `max_k |<f, B z^k>|` over enough `k` to certify `f in K_B` for a
    /// rational `f`.
    pub fn membership_residual(&self, f: &Rational) -> f64 {
        membership_residual(&self.blaschke, f)
    }
}

pub fn gram_of(fs: &[Rational]) -> CMatrix {
    let n = fs.len();
    CMatrix::from_fn(n, n, |i, j| h2_inner(&fs[j], &fs[i]))
}

/// `max_k |<f, B z^k>|` for `k` up to the degree of `f`'s numerator plus the
/// number of its poles plus `2 deg B`.
pub fn membership_residual(b: &FiniteBlaschke, f: &Rational) -> f64 {
    let br = b.to_rational();
    let top = f.numer().len() + f.poles().len() + 2 * b.degree();
    (0..=top)
        .map(|k| h2_inner(f, &br.shift(k)).norm())
        .fold(0.0, f64::max)
}

/// `k_lambda(z) = (1 - conj(B(lambda)) B(z)) / (1 - conj(lambda) z)`.
pub fn kernel(b: &FiniteBlaschke, lambda: Complex64, z: Complex64) -> Complex64 {
    (ONE - b.eval(lambda).conj() * b.eval(z)) / (ONE - lambda.conj() * z)
}

/// Coefficients of `k_lambda` in the basis: `conj(e_k(lambda))`.
pub fn kernel_coefficients(basis: &ModelSpaceBasis, lambda: Complex64) -> Vec<Complex64> {
    basis.eval(lambda).iter().map(|v| v.conj()).collect()
}

/// Matrix `C` with `coeffs(C_B f) = C conj(coeffs(f))`, entries
/// `C[k][j] = <B, z e_j e_k>`.
pub fn conjugation_matrix(basis: &ModelSpaceBasis) -> CMatrix {
    let br = basis.blaschke.to_rational();
    let e = &basis.basis;
    let n = e.len();
    CMatrix::from_fn(n, n, |k, j| h2_inner(&br, &e[j].mul(&e[k]).shift(1)))
}

/// `C_B f = B conj(z f)` on the circle, in coefficients.
pub fn conjugation(basis: &ModelSpaceBasis, coeffs: &[Complex64]) -> Vec<Complex64> {
    let cm = conjugation_matrix(basis);
    let v = DVector::from_iterator(coeffs.len(), coeffs.iter().map(|c| c.conj()));
    (cm * v).iter().copied().collect()
}

/// Matrix of the compression of multiplication by `z`: `M[k][j] = <z e_j, e_k>`.
pub fn shift_matrix(basis: &ModelSpaceBasis) -> CMatrix {
    let e = &basis.basis;
    let n = e.len();
    CMatrix::from_fn(n, n, |k, j| h2_inner(&e[j].shift(1), &e[k]))
}

/// Compressed shift `S_B` on `K_B` for `B(0) = 0`.
pub fn compressed_shift(b: &FiniteBlaschke, tol: Tolerance) -> Result<PartialIsometry> {
    if !b.vanishes_at_zero() {
        return Err(Error::NotVanishingAtZero);
    }
    let basis = tm_basis(b)?;
    PartialIsometry::validate(shift_matrix(&basis), tol)
}

/// Coefficients of `(B - B(0)) / z`, which spans `K_B ⊖ {f : z f in K_B}`.
pub fn backward_shift_coefficients(basis: &ModelSpaceBasis) -> Vec<Complex64> {
    let b = &basis.blaschke;
    let br = b.to_rational();
    let b0 = b.eval(Complex64::new(0.0, 0.0));
    // (B - B(0)) / z = (N - B(0) D) / (z D), and N - B(0) D vanishes at 0
    let mut numer = super::poly::add(br.numer(), &super::poly::scale(&b.denominator(), -b0));
    numer.remove(0);
    let f = Rational::new(numer, b.zeros().to_vec()).expect("zeros lie inside the disk");
    basis.coefficients(&f)
}

/// Multiplication by `z` on `{f in K_B : z f in K_B}`, zero on the
/// orthogonal complement.
pub fn mult_partial_isometry(b: &FiniteBlaschke, tol: Tolerance) -> Result<PartialIsometry> {
    let basis = tm_basis(b)?;
    let n = basis.dim();
    let v = DVector::from_vec(backward_shift_coefficients(&basis));
    let v = &v / Complex64::new(v.norm(), 0.0);
    let p = CMatrix::identity(n, n) - &v * v.adjoint();
    PartialIsometry::validate(shift_matrix(&basis) * p, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::rng;
    use crate::numerics::{c, eigenvalues, ZERO};
    use crate::partial_isometry::jordan_block;

    #[test]
    fn basis_examples() {
        let b = tm_basis(&FiniteBlaschke::monomial(2)).unwrap();
        let z = c(0.3, -0.2);
        let v = b.eval(z);
        assert!((v[0] - ONE).norm() < 1e-15 && (v[1] - z).norm() < 1e-15);

        let a = c(0.5, 0.0);
        let b2 = FiniteBlaschke::from_zeros(vec![ZERO, a]).unwrap();
        let basis = tm_basis(&b2).unwrap();
        assert!((basis.gram() - CMatrix::identity(2, 2)).norm() < 1e-12);
        // both functions have the form (c0 + c1 z) / (1 - a z)
        for e in basis.functions() {
            let z = c(0.1, 0.7);
            let p = e.eval(z) * (ONE - a * z);
            let p0 = e.eval(ZERO);
            let slope = (p - p0) / z;
            let z2 = c(-0.4, 0.2);
            assert!((e.eval(z2) * (ONE - a * z2) - (p0 + slope * z2)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_gram_and_membership() {
        let mut g = rng(17);
        for deg in 1..=8 {
            let mut b = FiniteBlaschke::random(deg, 0.9, false, &mut g);
            if deg > 3 {
                // repeat one zero
                let mut z = b.zeros().to_vec();
                z[1] = z[0];
                b = FiniteBlaschke::new(z, b.constant()).unwrap();
            }
            let basis = tm_basis(&b).unwrap();
            assert!(
                (basis.gram() - CMatrix::identity(deg, deg)).norm() < 1e-10,
                "deg {deg}"
            );
            for e in basis.functions() {
                let r = basis.membership_residual(e);
                assert!(r < 1e-10, "deg {deg} residual {r:e}");
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let b = FiniteBlaschke::monomial(2);
        let v = kernel(&b, c(0.4, 0.0), c(0.2, 0.0));
        assert!((v - c((1.0 - 0.16 * 0.04) / 0.92, 0.0)).norm() < 1e-15);
        assert!((kernel(&b, ZERO, c(0.3, 0.3)) - ONE).norm() < 1e-15);

        let mut g = rng(3);
        let b = FiniteBlaschke::random(4, 0.8, false, &mut g);
        let basis = tm_basis(&b).unwrap();
        for _ in 0..10 {
            let l = crate::numerics::random::disk_point(0.95, &mut g);
            let z = crate::numerics::random::disk_point(0.95, &mut g);
            let sum: Complex64 = basis
                .eval(z)
                .iter()
                .zip(basis.eval(l))
                .map(|(ez, el)| ez * el.conj())
                .sum();
            assert!((sum - kernel(&b, l, z)).norm() < 1e-9);
        }
    }

    #[test]
    fn conjugation_examples() {
        let basis = tm_basis(&FiniteBlaschke::monomial(2)).unwrap();
        let cf = conjugation(&basis, &[ONE, ZERO]);
        assert!((cf[0]).norm() < 1e-15 && (cf[1] - ONE).norm() < 1e-15);

        let mut g = rng(5);
        let b = FiniteBlaschke::random(4, 0.8, false, &mut g);
        let basis = tm_basis(&b).unwrap();
        for _ in 0..50 {
            let f: Vec<Complex64> = (0..4)
                .map(|_| crate::numerics::random::gaussian(&mut g))
                .collect();
            let cf = conjugation(&basis, &f);
            let ccf = conjugation(&basis, &cf);
            let nf: f64 = f.iter().map(|x| x.norm_sqr()).sum();
            let ncf: f64 = cf.iter().map(|x| x.norm_sqr()).sum();
            assert!((nf - ncf).abs() < 1e-10 * nf);
            let back: f64 = f.iter().zip(&ccf).map(|(a, b)| (a - b).norm()).sum();
            assert!(back < 1e-10);
        }
        // kernel action (B(z) - B(l)) / (z - l)
        let l = c(0.2, -0.3);
        let ck = conjugation(&basis, &kernel_coefficients(&basis, l));
        let f = basis.function(&ck);
        let z = c(-0.5, 0.1);
        let want = (b.eval(z) - b.eval(l)) / (z - l);
        assert!((f.eval(z) - want).norm() < 1e-10);
    }

    #[test]
    fn compressed_shift_examples() {
        let s = compressed_shift(&FiniteBlaschke::monomial(4), Tolerance::default()).unwrap();
        assert!((s.matrix() - jordan_block(4).transpose()).norm() < 1e-12);
        let s1 = compressed_shift(&FiniteBlaschke::monomial(1), Tolerance::default()).unwrap();
        assert!(s1.matrix().norm() < 1e-15);

        let b = FiniteBlaschke::from_zeros(vec![ZERO, c(0.5, 0.0)]).unwrap();
        let s = compressed_shift(&b, Tolerance::default()).unwrap();
        assert_eq!(s.deficiency_indices(), (1, 1));
        assert!(s.is_completely_non_unitary().unwrap().is_cnu());
        let mut ev = eigenvalues(s.matrix()).unwrap();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!(ev[0].norm() < 1e-12 && (ev[1] - c(0.5, 0.0)).norm() < 1e-12);

        let nz = FiniteBlaschke::from_zeros(vec![c(0.3, 0.0)]).unwrap();
        assert!(matches!(
            compressed_shift(&nz, Tolerance::default()),
            Err(Error::NotVanishingAtZero)
        ));
    }

    #[test]
    fn mult_examples() {
        let b = FiniteBlaschke::from_zeros(vec![ZERO, c(0.3, 0.2), c(-0.1, 0.5)]).unwrap();
        let m = mult_partial_isometry(&b, Tolerance::default()).unwrap();
        let s = compressed_shift(&b, Tolerance::default()).unwrap();
        assert!((m.matrix() - s.matrix()).norm() < 1e-10);

        let one = FiniteBlaschke::from_zeros(vec![c(0.3, 0.0)]).unwrap();
        let m = mult_partial_isometry(&one, Tolerance::default()).unwrap();
        assert!(m.matrix().norm() < 1e-12);

        // defect spaces: ker M = C C_B k_0, (ran M)^perp = C k_0
        let b = FiniteBlaschke::from_zeros(vec![c(0.4, 0.1), c(-0.3, 0.3), c(0.2, -0.6)]).unwrap();
        let basis = tm_basis(&b).unwrap();
        let m = mult_partial_isometry(&b, Tolerance::default()).unwrap();
        assert_eq!(m.deficiency_indices(), (1, 1));
        let k0 = kernel_coefficients(&basis, ZERO);
        let ck0 = conjugation(&basis, &k0);
        let dm = m.defect_minus().column(0).into_owned();
        let dp = m.defect_plus().column(0).into_owned();
        let k0 = DVector::from_vec(k0);
        let ck0 = DVector::from_vec(ck0);
        assert!((dm.dotc(&k0).norm() - k0.norm()).abs() < 1e-10);
        assert!((dp.dotc(&ck0).norm() - ck0.norm()).abs() < 1e-10);
    }
}
