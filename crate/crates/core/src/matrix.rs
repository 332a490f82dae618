//! `M_n` over the smooth torus algebra: the free module of rank `n²` with
//! the normalized trace `τ ⊗ tr` and its Hilbert-Schmidt norm.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{NctError, Result};
use crate::scalar::Real;
use crate::torus::{same_theta, MultiIndex, ThetaMatrix, TorusElement};

/// A constant `n×n` complex matrix, embedded at `α = 0`.
pub type ScalarMatrix<T> = DMatrix<Complex<T>>;

/// An `n×n` array of torus elements over one theta matrix.
#[derive(Debug, Clone)]
pub struct MatrixElement<T> {
    n: usize,
    theta: Arc<ThetaMatrix<T>>,
    entries: Vec<TorusElement<T>>,
}

impl<T: Real> MatrixElement<T> {
    /// Row-major entries.
    pub fn from_entries(theta: &Arc<ThetaMatrix<T>>, n: usize, entries: Vec<TorusElement<T>>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(NctError::ShapeMismatch(format!("{} entries for a {n}x{n} matrix", entries.len())));
        }
        if entries.iter().any(|e| !same_theta(e.theta(), theta)) {
            return Err(NctError::ThetaMismatch);
        }
        Ok(Self { n, theta: Arc::clone(theta), entries })
    }

    pub fn zero(theta: &Arc<ThetaMatrix<T>>, n: usize) -> Self {
        Self { n, theta: Arc::clone(theta), entries: vec![TorusElement::zero(theta); n * n] }
    }

    pub fn identity(theta: &Arc<ThetaMatrix<T>>, n: usize) -> Self {
        let mut m = Self::zero(theta, n);
        for p in 0..n {
            m.entries[p * n + p] = TorusElement::one(theta);
        }
        m
    }

    pub fn from_scalar(theta: &Arc<ThetaMatrix<T>>, s: &ScalarMatrix<T>) -> Self {
        assert_eq!(s.nrows(), s.ncols(), "scalar matrix must be square");
        let n = s.nrows();
        let entries = (0..n * n).map(|i| TorusElement::scalar(theta, s[(i / n, i % n)])).collect();
        Self { n, theta: Arc::clone(theta), entries }
    }

    /// `diag(u^{α_1}, …, u^{α_n})`
    pub fn diag_monomial(theta: &Arc<ThetaMatrix<T>>, alphas: &[MultiIndex]) -> Result<Self> {
        let n = alphas.len();
        if n == 0 {
            return Err(NctError::ShapeMismatch("empty diagonal".into()));
        }
        let mut m = Self::zero(theta, n);
        for (p, a) in alphas.iter().enumerate() {
            if a.len() != theta.dim() {
                return Err(NctError::DimensionMismatch { expected: theta.dim(), found: a.len() });
            }
            m.entries[p * n + p] = TorusElement::monomial(theta, a.clone(), Complex::new(T::one(), T::zero()));
        }
        Ok(m)
    }

    /// The scalar matrix sending `e_j` to `e_{ρ(j)}`, i.e. with ones at
    /// `(ρ(j), j)`.
    pub fn permutation_matrix(theta: &Arc<ThetaMatrix<T>>, rho: &[usize]) -> Result<Self> {
        let n = rho.len();
        let mut seen = vec![false; n];
        for &r in rho {
            if r >= n || seen[r] {
                return Err(NctError::NotPermutation(rho.to_vec()));
            }
            seen[r] = true;
        }
        if n == 0 {
            return Err(NctError::NotPermutation(Vec::new()));
        }
        let mut m = Self::zero(theta, n);
        for (j, &r) in rho.iter().enumerate() {
            m.entries[r * n + j] = TorusElement::one(theta);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &Arc<ThetaMatrix<T>> {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> &TorusElement<T> {
        &self.entries[p * self.n + q]
    }

    pub fn set(&mut self, p: usize, q: usize, e: TorusElement<T>) {
        assert!(same_theta(e.theta(), &self.theta), "entry over a different theta");
        self.entries[p * self.n + q] = e;
    }

    pub fn entries(&self) -> &[TorusElement<T>] {
        &self.entries
    }

    /// Largest entry degree.
    pub fn degree(&self) -> i32 {
        self.entries.iter().map(TorusElement::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TorusElement::is_zero)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(NctError::ShapeMismatch(format!("{}x{} vs {}x{}", self.n, self.n, other.n, other.n)));
        }
        if !same_theta(&self.theta, &other.theta) {
            return Err(NctError::ThetaMismatch);
        }
        Ok(())
    }

    pub fn mat_multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for p in 0..n {
            for q in 0..n {
                let mut acc = TorusElement::zero(&self.theta);
                for r in 0..n {
                    let (a, b) = (self.get(p, r), other.get(r, q));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &a.multiply_unchecked(b);
                }
                entries.push(acc);
            }
        }
        Self { n, theta: Arc::clone(&self.theta), entries }
    }

    /// Conjugate transpose with entrywise adjoint.
    pub fn mat_adjoint(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|i| self.get(i % n, i / n).adjoint()).collect();
        Self { n, theta: Arc::clone(&self.theta), entries }
    }

    /// `(τ ⊗ tr)(A) = (1/n) Σ_p τ(A_pp)`.
    pub fn mat_trace(&self) -> Complex<T> {
        let sum = (0..self.n).fold(Complex::default(), |acc, p| acc + self.get(p, p).trace());
        sum / T::lit(self.n as f64)
    }

    /// Entrywise `δ_k` (0-based axis).
    pub fn mat_derive(&self, k: usize) -> Result<Self> {
        let entries = self.entries.iter().map(|e| e.derive(k)).collect::<Result<Vec<_>>>()?;
        Ok(Self { n: self.n, theta: Arc::clone(&self.theta), entries })
    }

    /// `sqrt(Re (τ⊗tr)(X*X))`, computed from coefficients as
    /// `sqrt((1/n) ΣΣ |(X_pq)_α|²)`.
    pub fn hs_norm(&self) -> T {
        let total = self.entries.iter().fold(T::zero(), |acc, e| acc + e.l2_norm_sq());
        (total / T::lit(self.n as f64)).sqrt()
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Maximum of `hs_norm(AA* − I)` and `hs_norm(A*A − I)`.
    pub fn unitarity_defect(&self) -> T {
        let id = Self::identity(&self.theta, self.n);
        let adj = self.mat_adjoint();
        let left = (&self.mul_unchecked(&adj) - &id).hs_norm();
        let right = (&adj.mul_unchecked(self) - &id).hs_norm();
        left.max(right)
    }

    pub fn is_skew_adjoint(&self, tol: T) -> bool {
        self.skew_defect() <= tol
    }

    /// `hs_norm(A + A*)`
    pub fn skew_defect(&self) -> T {
        (self + &self.mat_adjoint()).hs_norm()
    }

    /// The coefficients at `α = 0`, as a constant matrix.
    pub fn scalar_part(&self) -> ScalarMatrix<T> {
        DMatrix::from_fn(self.n, self.n, |p, q| self.get(p, q).trace())
    }

    /// Hilbert-Schmidt norm of the part supported away from `α = 0`.
    pub fn nonconstant_norm(&self) -> T {
        let zero = MultiIndex::zero(self.dim());
        let total = self.entries.iter().fold(T::zero(), |acc, e| {
            acc + e.terms().filter(|(a, _)| **a != zero).fold(T::zero(), |s, (_, c)| s + c.norm_sqr())
        });
        (total / T::lit(self.n as f64)).sqrt()
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { n: self.n, theta: Arc::clone(&self.theta), entries: self.entries.iter().map(|e| e.scale(s)).collect() }
    }

    /// Multiply on the right by a constant matrix.
    pub fn mul_scalar_right(&self, s: &ScalarMatrix<T>) -> Self {
        self.mul_unchecked(&Self::from_scalar(&self.theta, s))
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.n == other.n
            && same_theta(&self.theta, &other.theta)
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a.sup_distance(b) <= tol)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&TorusElement<T>, &TorusElement<T>) -> TorusElement<T>) -> Self {
        assert_eq!(self.n, other.n, "matrix sizes differ");
        assert!(same_theta(&self.theta, &other.theta), "operands live over different theta matrices");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect();
        Self { n: self.n, theta: Arc::clone(&self.theta), entries }
    }
}

impl<T: Real> std::ops::Add for &MatrixElement<T> {
    type Output = MatrixElement<T>;
    fn add(self, rhs: Self) -> MatrixElement<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Real> std::ops::Sub for &MatrixElement<T> {
    type Output = MatrixElement<T>;
    fn sub(self, rhs: Self) -> MatrixElement<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Real> std::ops::Mul for &MatrixElement<T> {
    type Output = MatrixElement<T>;
    /// Panics on incompatible operands; see [`MatrixElement::mat_multiply`].
    fn mul(self, rhs: Self) -> MatrixElement<T> {
        self.mat_multiply(rhs).expect("incompatible matrix operands")
    }
}
