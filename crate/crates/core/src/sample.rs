//! Random instances for property checks: elements, skew connections,
//! commuting constant families and unitary gauge words.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;

use crate::connection::Connection;
use crate::matrix::{MatrixElement, ScalarMatrix};
use crate::scalar::{adjoint, Real};
use crate::torus::{MultiIndex, ThetaMatrix, TorusElement};

fn uniform<T: Real, R: Rng>(rng: &mut R, lo: f64, hi: f64) -> T {
    T::lit(rng.gen_range(lo..hi))
}

fn complex<T: Real, R: Rng>(rng: &mut R) -> Complex<T> {
    Complex::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))
}

/// Antisymmetric with upper entries uniform in `(-0.95, 0.95)`.
pub fn random_theta<T: Real, R: Rng>(rng: &mut R, dim: usize) -> ThetaMatrix<T> {
    let upper: Vec<T> = (0..dim * (dim - 1) / 2).map(|_| uniform(rng, -0.95, 0.95)).collect();
    ThetaMatrix::from_upper(dim, &upper).expect("valid random theta")
}

pub fn random_index<R: Rng>(rng: &mut R, dim: usize, degree: i32) -> MultiIndex {
    let comps: Vec<i32> = (0..dim).map(|_| rng.gen_range(-degree..=degree)).collect();
    MultiIndex::new(&comps)
}

/// Up to `terms` random terms with `‖α‖_∞ ≤ degree`, coefficients in the unit square.
pub fn random_element<T: Real, R: Rng>(
    rng: &mut R,
    theta: &Arc<ThetaMatrix<T>>,
    terms: usize,
    degree: i32,
) -> TorusElement<T> {
    let dim = theta.dim();
    let pairs: Vec<_> = (0..terms).map(|_| (random_index(rng, dim, degree), complex(rng))).collect();
    TorusElement::from_terms(theta, pairs).expect("dimensions agree")
}

pub fn random_matrix<T: Real, R: Rng>(
    rng: &mut R,
    theta: &Arc<ThetaMatrix<T>>,
    n: usize,
    terms: usize,
    degree: i32,
) -> MatrixElement<T> {
    let entries = (0..n * n).map(|_| random_element(rng, theta, terms, degree)).collect();
    MatrixElement::from_entries(theta, n, entries).expect("shape agrees")
}

/// `a − a*` for a random `a`; exactly skew-adjoint up to rounding.
pub fn random_skew<T: Real, R: Rng>(
    rng: &mut R,
    theta: &Arc<ThetaMatrix<T>>,
    n: usize,
    terms: usize,
    degree: i32,
) -> MatrixElement<T> {
    let a = random_matrix(rng, theta, n, terms, degree);
    &a - &a.mat_adjoint()
}

pub fn random_connection<T: Real, R: Rng>(
    rng: &mut R,
    theta: &Arc<ThetaMatrix<T>>,
    n: usize,
    terms: usize,
    degree: i32,
) -> Connection<T> {
    let h = (0..theta.dim()).map(|_| random_skew(rng, theta, n, terms, degree)).collect();
    Connection::new(theta, n, h).expect("random skew family is admissible")
}

/// A random constant unitary: the eigenvector matrix of a random Hermitian matrix.
pub fn random_constant_unitary<T: Real, R: Rng>(rng: &mut R, n: usize) -> ScalarMatrix<T> {
    let a = DMatrix::from_fn(n, n, |_, _| complex::<T, R>(rng));
    let herm = &a + adjoint(&a);
    T::hermitian_eigen(&herm).expect("small Hermitian eigenproblem").1
}

/// `N` skew diagonal matrices `i·diag(λ^k)` with `λ` uniform in `[-1.5, 1.5)`.
pub fn random_commuting_diagonals<T: Real, R: Rng>(rng: &mut R, dim: usize, n: usize) -> Vec<ScalarMatrix<T>> {
    (0..dim)
        .map(|_| {
            let d: Vec<Complex<T>> = (0..n).map(|_| Complex::new(T::zero(), uniform(rng, -1.5, 1.5))).collect();
            DMatrix::from_diagonal(&DVector::from_vec(d))
        })
        .collect()
}

/// Product of `len` random factors, each a diagonal of monomials with
/// entries in `{-1,0,1}^N`, a permutation matrix, or a constant unitary.
/// The degree of the result is at most `len`.
pub fn random_gauge_word<T: Real, R: Rng>(
    rng: &mut R,
    theta: &Arc<ThetaMatrix<T>>,
    n: usize,
    len: usize,
) -> MatrixElement<T> {
    let mut w = MatrixElement::identity(theta, n);
    for _ in 0..len {
        let factor = match rng.gen_range(0..3) {
            0 => {
                let alphas: Vec<_> = (0..n).map(|_| random_index(rng, theta.dim(), 1)).collect();
                MatrixElement::diag_monomial(theta, &alphas).expect("dimensions agree")
            }
            1 => {
                let mut rho: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    rho.swap(i, rng.gen_range(0..=i));
                }
                MatrixElement::permutation_matrix(theta, &rho).expect("valid permutation")
            }
            _ => MatrixElement::from_scalar(theta, &random_constant_unitary(rng, n)),
        };
        w = &w * &factor;
    }
    w
}
