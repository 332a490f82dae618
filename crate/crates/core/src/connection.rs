//! Compatible connections `∇_k = D_k + π(h_k)` on the free module, with
//! skew-adjoint `h_k`, their curvature, the Yang-Mills functional and the
//! gauge action.
//!
//! Curvature is computed in coefficients:
//! `Θ_ij = δ_i(h_j) − δ_j(h_i) + h_i h_j − h_j h_i`, which is the coefficient
//! form of `[D_i + π(h_i), D_j + π(h_j)]` since `[D_i, π(a)] = π(δ_i a)`.
//! Under `γ_u`, `h_k ↦ u h_k u* + u δ_k(u*)` and `Θ ↦ uΘu*`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{NctError, Result};
use crate::matrix::{MatrixElement, ScalarMatrix};
use crate::scalar::{adjoint, complex_zeros, frobenius, Real};
use crate::torus::{same_theta, ThetaMatrix};

#[derive(Debug, Clone)]
pub struct Connection<T> {
    theta: Arc<ThetaMatrix<T>>,
    n: usize,
    h: Vec<MatrixElement<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureClass {
    NonConstant,
    ConstantScalar,
    Zero,
}

impl fmt::Display for CurvatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CurvatureClass::NonConstant => "NonConstant",
            CurvatureClass::ConstantScalar => "ConstantScalar",
            CurvatureClass::Zero => "Zero",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct CurvatureReport<T> {
    pub classification: CurvatureClass,
    /// `c_ij = (τ⊗tr)(Θ_ij)`, antisymmetric; present unless `NonConstant`.
    pub scalars: Option<DMatrix<Complex<T>>>,
    /// `max ‖Θ_ij‖` when `Zero`, otherwise `max ‖Θ_ij − c_ij·1‖`.
    pub residual: T,
}

impl<T: Real> Connection<T> {
    /// Admits `h` if every `h_k` is skew-adjoint to the admission tolerance.
    /// Inputs are never symmetrized.
    pub fn new(theta: &Arc<ThetaMatrix<T>>, n: usize, h: Vec<MatrixElement<T>>) -> Result<Self> {
        if h.len() != theta.dim() {
            return Err(NctError::DimensionMismatch { expected: theta.dim(), found: h.len() });
        }
        for (index, hk) in h.iter().enumerate() {
            if hk.n() != n {
                return Err(NctError::ShapeMismatch(format!("h_{index} is {0}x{0}, expected {n}x{n}", hk.n())));
            }
            if !same_theta(hk.theta(), theta) {
                return Err(NctError::ThetaMismatch);
            }
            let defect = hk.skew_defect();
            if defect > T::admission_tolerance() {
                return Err(NctError::NotSkewAdjoint { index, defect: defect.as_f64() });
            }
        }
        Ok(Self { theta: Arc::clone(theta), n, h })
    }

    pub(crate) fn from_parts_unchecked(theta: &Arc<ThetaMatrix<T>>, n: usize, h: Vec<MatrixElement<T>>) -> Self {
        Self { theta: Arc::clone(theta), n, h }
    }

    /// The reference connection `D` (all `h_k = 0`).
    pub fn trivial(theta: &Arc<ThetaMatrix<T>>, n: usize) -> Self {
        Self { theta: Arc::clone(theta), n, h: vec![MatrixElement::zero(theta, n); theta.dim()] }
    }

    /// `D_k + π(Λ_k)` for a skew-adjoint, pairwise commuting constant family.
    pub fn constant(theta: &Arc<ThetaMatrix<T>>, lambdas: &[ScalarMatrix<T>], tol: T) -> Result<Self> {
        if lambdas.len() != theta.dim() {
            return Err(NctError::DimensionMismatch { expected: theta.dim(), found: lambdas.len() });
        }
        let n = lambdas[0].nrows();
        check_commuting_skew(lambdas, n, tol)?;
        let h = lambdas.iter().map(|l| MatrixElement::from_scalar(theta, l)).collect();
        Ok(Self { theta: Arc::clone(theta), n, h })
    }

    pub fn theta(&self) -> &Arc<ThetaMatrix<T>> {
        &self.theta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn h(&self) -> &[MatrixElement<T>] {
        &self.h
    }

    /// Largest support degree over all `h_k`.
    pub fn degree(&self) -> i32 {
        self.h.iter().map(MatrixElement::degree).max().unwrap_or(0)
    }

    fn check_axis(&self, k: usize) -> Result<()> {
        if k >= self.dim() {
            Err(NctError::AxisOutOfRange { axis: k, dim: self.dim() })
        } else {
            Ok(())
        }
    }

    /// `Θ_ij` (0-based axes).
    pub fn curvature(&self, i: usize, j: usize) -> Result<MatrixElement<T>> {
        self.check_axis(i)?;
        self.check_axis(j)?;
        if i == j {
            return Ok(MatrixElement::zero(&self.theta, self.n));
        }
        let (hi, hj) = (&self.h[i], &self.h[j]);
        let deriv = &hj.mat_derive(i)? - &hi.mat_derive(j)?;
        let comm = &hi.mul_unchecked(hj) - &hj.mul_unchecked(hi);
        Ok(&deriv + &comm)
    }

    pub fn classify_curvature(&self, tol: T) -> CurvatureReport<T> {
        let dim = self.dim();
        let mut scalars = complex_zeros::<T>(dim, dim);
        let mut full = T::zero();
        let mut rest = T::zero();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let theta_ij = self.curvature(i, j).expect("axes in range");
                let c = theta_ij.mat_trace();
                scalars[(i, j)] = c;
                scalars[(j, i)] = -c;
                let id = MatrixElement::identity(&self.theta, self.n).scale(c);
                full = full.max(theta_ij.hs_norm());
                rest = rest.max((&theta_ij - &id).hs_norm());
            }
        }
        if full <= tol {
            CurvatureReport { classification: CurvatureClass::Zero, scalars: Some(scalars), residual: full }
        } else if rest <= tol {
            CurvatureReport { classification: CurvatureClass::ConstantScalar, scalars: Some(scalars), residual: rest }
        } else {
            CurvatureReport { classification: CurvatureClass::NonConstant, scalars: None, residual: rest }
        }
    }

    /// `Σ_{i<j} Re (τ⊗tr)(Θ_ij* Θ_ij)`
    pub fn yang_mills(&self) -> T {
        let dim = self.dim();
        let mut total = T::zero();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let theta_ij = self.curvature(i, j).expect("axes in range");
                let hs = theta_ij.hs_norm();
                total += hs * hs;
            }
        }
        total
    }

    /// `γ_u(∇)`: `h_k ↦ u h_k u* + u δ_k(u*)`. `u` must be unitary to `tol`.
    pub fn gauge_transform(&self, u: &MatrixElement<T>, tol: T) -> Result<Self> {
        if u.n() != self.n {
            return Err(NctError::ShapeMismatch(format!("gauge of size {} for rank {}", u.n(), self.n)));
        }
        if !same_theta(u.theta(), &self.theta) {
            return Err(NctError::ThetaMismatch);
        }
        let defect = u.unitarity_defect();
        if defect > tol {
            return Err(NctError::NotUnitary { defect: defect.as_f64() });
        }
        Ok(self.gauge_transform_unchecked(u))
    }

    /// The result is skew-adjoint up to the unitarity defect of `u`, so it
    /// is not re-admitted.
    pub(crate) fn gauge_transform_unchecked(&self, u: &MatrixElement<T>) -> Self {
        let u_adj = u.mat_adjoint();
        let h = (0..self.dim())
            .map(|k| {
                let conj = u.mul_unchecked(&self.h[k]).mul_unchecked(&u_adj);
                let shift = u.mul_unchecked(&u_adj.mat_derive(k).expect("axis in range"));
                &conj + &shift
            })
            .collect();
        Self::from_parts_unchecked(&self.theta, self.n, h)
    }

    /// `max_k hs_norm(h_k − other.h_k)`
    pub fn distance(&self, other: &Self) -> T {
        self.h.iter().zip(&other.h).fold(T::zero(), |acc, (a, b)| acc.max((a - b).hs_norm()))
    }

    /// `∇ + π(p)` with the perturbation family added to each `h_k`.
    pub fn perturbed(&self, p: &[MatrixElement<T>]) -> Result<Self> {
        if p.len() != self.dim() {
            return Err(NctError::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        let h = self.h.iter().zip(p).map(|(a, b)| a + b).collect();
        Self::new(&self.theta, self.n, h)
    }
}

/// Checks skew-adjointness and pairwise commutation of a constant family.
pub fn check_commuting_skew<T: Real>(lambdas: &[ScalarMatrix<T>], n: usize, tol: T) -> Result<()> {
    for (index, l) in lambdas.iter().enumerate() {
        if l.nrows() != n || l.ncols() != n {
            return Err(NctError::ShapeMismatch(format!("Λ_{index} is {}x{}, expected {n}x{n}", l.nrows(), l.ncols())));
        }
        let defect = frobenius(&(l + adjoint(l)));
        if defect > tol {
            return Err(NctError::NotSkewAdjoint { index, defect: defect.as_f64() });
        }
    }
    for (a, la) in lambdas.iter().enumerate() {
        for lb in &lambdas[a + 1..] {
            let defect = frobenius(&(la * lb - lb * la));
            if defect > tol {
                return Err(NctError::NotCommuting { defect: defect.as_f64() });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sample::{random_connection, random_gauge_word, random_skew, random_theta};
    use crate::torus::{MultiIndex, TorusElement};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn idiag(vals: &[f64]) -> ScalarMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vals.iter().map(|&v| c(0.0, v)).collect()))
    }

    /// `h_1 = 0`, `h_2 = i(u_1 + u_1^{-1})` on the rank-one module.
    pub(crate) fn cosine_connection(theta: &Arc<ThetaMatrix<f64>>) -> Connection<f64> {
        let u = TorusElement::generator(theta, 0);
        let h2 = (&u + &u.adjoint()).scale(c(0.0, 1.0));
        let h2 = MatrixElement::from_entries(theta, 1, vec![h2]).unwrap();
        Connection::new(theta, 1, vec![MatrixElement::zero(theta, 1), h2]).unwrap()
    }

    #[test]
    fn trivial_connection_is_flat() {
        let theta = Arc::new(ThetaMatrix::from_upper(3, &[0.2, 0.3, 0.4]).unwrap());
        let d = Connection::trivial(&theta, 2);
        for i in 0..3 {
            for j in 0..3 {
                assert!(d.curvature(i, j).unwrap().is_zero());
            }
        }
        assert_eq!(d.classify_curvature(1e-12).classification, CurvatureClass::Zero);
        assert_eq!(d.yang_mills(), 0.0);
        assert!(matches!(d.curvature(0, 3), Err(NctError::AxisOutOfRange { .. })));
    }

    #[test]
    fn cosine_example_curvature_and_ym() {
        let theta = Arc::new(ThetaMatrix::from_upper(2, &[0.31]).unwrap());
        let conn = cosine_connection(&theta);
        let t12 = conn.curvature(0, 1).unwrap();
        let u = TorusElement::generator(&theta, 0);
        let want = &u.adjoint() - &u;
        assert!(t12.get(0, 0).approx_eq(&want, 1e-15));
        let t21 = conn.curvature(1, 0).unwrap();
        assert!((&t12 + &t21).is_zero());
        assert!((conn.yang_mills() - 2.0).abs() < 1e-14);
        assert_eq!(conn.classify_curvature(1e-10).classification, CurvatureClass::NonConstant);
    }

    #[test]
    fn constant_connections() {
        let theta = Arc::new(ThetaMatrix::from_upper(2, &[0.12]).unwrap());
        let lam = vec![idiag(&[0.3, -1.2]), idiag(&[0.7, 0.25])];
        let conn = Connection::constant(&theta, &lam, 1e-12).unwrap();
        let rep = conn.classify_curvature(1e-12);
        assert_eq!(rep.classification, CurvatureClass::Zero);
        assert!(rep.scalars.unwrap().iter().all(|z| z.norm() == 0.0));

        let zero = Connection::constant(&theta, &[idiag(&[0.0, 0.0]), idiag(&[0.0, 0.0])], 1e-12).unwrap();
        assert_eq!(zero.distance(&Connection::trivial(&theta, 2)), 0.0);

        let noncomm = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let err = Connection::constant(&theta, &[idiag(&[0.3, -1.2]), noncomm], 1e-12).unwrap_err();
        assert!(matches!(err, NctError::NotCommuting { .. }));
        let herm = idiag(&[1.0, 1.0]).map(|z| z * c(0.0, 1.0));
        let err = Connection::constant(&theta, &[herm, idiag(&[0.0, 0.0])], 1e-12).unwrap_err();
        assert!(matches!(err, NctError::NotSkewAdjoint { index: 0, .. }));
    }

    #[test]
    fn curvature_at_three_axes_of_constant_family() {
        let theta = Arc::new(ThetaMatrix::from_upper(3, &[0.1, -0.4, 0.33]).unwrap());
        let lam = vec![idiag(&[0.3, 0.1, 0.2]), idiag(&[0.7, 0.25, -0.5]), idiag(&[1.5, 0.0, 0.9])];
        let conn = Connection::constant(&theta, &lam, 1e-12).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(conn.curvature(i, j).unwrap().hs_norm() < 1e-15);
            }
        }
    }

    #[test]
    fn non_skew_inputs_are_rejected() {
        let theta = Arc::new(ThetaMatrix::from_upper(2, &[0.12]).unwrap());
        let h = MatrixElement::identity(&theta, 1);
        let err = Connection::new(&theta, 1, vec![h, MatrixElement::zero(&theta, 1)]).unwrap_err();
        assert!(matches!(err, NctError::NotSkewAdjoint { index: 0, .. }));
        let err = Connection::new(&theta, 1, vec![MatrixElement::zero(&theta, 1)]).unwrap_err();
        assert!(matches!(err, NctError::DimensionMismatch { .. }));
    }

    #[test]
    fn monomial_gauge_of_trivial_gives_integer_shift() {
        let theta = Arc::new(ThetaMatrix::from_upper(2, &[0.27]).unwrap());
        let d = Connection::trivial(&theta, 1);
        let u = MatrixElement::diag_monomial(&theta, &[MultiIndex::unit(2, 0)]).unwrap();
        let g = d.gauge_transform(&u, 1e-12).unwrap();
        assert!(g.h()[0].get(0, 0).approx_eq(&TorusElement::scalar(&theta, c(0.0, -1.0)), 1e-15));
        assert!(g.h()[1].is_zero());
        assert_eq!(g.classify_curvature(1e-12).classification, CurvatureClass::Zero);

        let same = d.gauge_transform(&MatrixElement::identity(&theta, 1), 1e-12).unwrap();
        assert_eq!(same.distance(&d), 0.0);

        let two = MatrixElement::identity(&theta, 1).scale(c(2.0, 0.0));
        assert!(matches!(d.gauge_transform(&two, 1e-8), Err(NctError::NotUnitary { .. })));
    }

    #[test]
    fn gauge_action_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=2 {
            let theta = Arc::new(random_theta::<f64, _>(&mut rng, 2));
            let conn = random_connection(&mut rng, &theta, n, 3, 1);
            let u = random_gauge_word(&mut rng, &theta, n, 3);
            let v = random_gauge_word(&mut rng, &theta, n, 3);
            let uv = &u * &v;
            let lhs = conn.gauge_transform(&v, 1e-10).unwrap().gauge_transform(&u, 1e-10).unwrap();
            let rhs = conn.gauge_transform(&uv, 1e-10).unwrap();
            assert!(lhs.distance(&rhs) < 1e-10);
            assert!(lhs.h().iter().all(|h| h.is_skew_adjoint(1e-10)));
            assert!((lhs.yang_mills() - conn.yang_mills()).abs() < 1e-9);

            let before = conn.classify_curvature(1e-9).classification;
            assert_eq!(rhs.classify_curvature(1e-9).classification, before);
        }
    }

    #[test]
    fn flat_connections_minimize_ym() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta = Arc::new(random_theta::<f64, _>(&mut rng, 2));
        let lam = vec![idiag(&[0.3, -0.2]), idiag(&[0.1, 0.45])];
        let flat = Connection::constant(&theta, &lam, 1e-12).unwrap();
        assert_eq!(flat.yang_mills(), 0.0);
        for _ in 0..10 {
            let p: Vec<_> = (0..2).map(|_| random_skew(&mut rng, &theta, 2, 2, 1)).collect();
            let pert = flat.perturbed(&p).unwrap();
            assert!(pert.yang_mills() >= flat.yang_mills());
        }
    }
}
