//! Scalar types the algebra is generic over.
//!
//! Everything in the crate is written against [`Real`], implemented for
//! `f32` and `f64`. Coefficients are `Complex<T>`. Dense linear algebra that
//! needs an actual solver (Hermitian eigendecomposition, inversion, singular
//! values, determinants) goes through per-type hooks backed by nalgebra, so generic code
//! only ever sees num-traits arithmetic.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Coefficients with magnitude below this are deleted after every operation.
    fn drop_tolerance() -> Self;

    /// Default sup-norm tolerance for comparing elements.
    fn equality_tolerance() -> Self;

    /// Skew-adjointness tolerance (Hilbert-Schmidt) for admitting a connection.
    fn admission_tolerance() -> Self;

    /// Ascending eigenvalues and matching orthonormal eigenvectors (as
    /// columns) of a Hermitian matrix. `None` if the solver does not converge.
    fn hermitian_eigen(m: &DMatrix<Complex<Self>>) -> Option<(Vec<Self>, DMatrix<Complex<Self>>)>;

    fn try_inverse(m: &DMatrix<Self>) -> Option<DMatrix<Self>>;

    /// Singular values, unordered.
    fn singular_values(m: &DMatrix<Self>) -> Vec<Self>;

    fn determinant(m: &DMatrix<Self>) -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $drop:expr, $eq:expr, $adm:expr) => {
        impl Real for $t {
            fn drop_tolerance() -> Self {
                $drop
            }

            fn equality_tolerance() -> Self {
                $eq
            }

            fn admission_tolerance() -> Self {
                $adm
            }

            fn hermitian_eigen(
                m: &DMatrix<Complex<Self>>,
            ) -> Option<(Vec<Self>, DMatrix<Complex<Self>>)> {
                let dim = m.nrows();
                if dim == 0 {
                    return Some((Vec::new(), DMatrix::zeros(0, 0)));
                }
                let eig = SymmetricEigen::try_new(m.clone(), <$t>::EPSILON, 10_000)?;
                let mut order: Vec<usize> = (0..dim).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
                Some((values, vectors))
            }

            fn try_inverse(m: &DMatrix<Self>) -> Option<DMatrix<Self>> {
                m.clone().try_inverse()
            }

            fn singular_values(m: &DMatrix<Self>) -> Vec<Self> {
                SVD::new(m.clone(), false, false).singular_values.iter().copied().collect()
            }

            fn determinant(m: &DMatrix<Self>) -> Self {
                m.determinant()
            }
        }
    };
}

impl_real!(f64, 1e-14, 1e-10, 1e-10);
impl_real!(f32, 1e-6, 1e-4, 1e-4);

/// `exp(2πi x)`, with `x` reduced mod 1 before exponentiating.
#[inline]
pub fn unit_phase<T: Real>(x: T) -> Complex<T> {
    let reduced = x - x.round();
    let angle = T::TAU() * reduced;
    Complex::new(angle.cos(), angle.sin())
}

/// Conjugate transpose of a dense complex matrix.
pub fn adjoint<T: Real>(m: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(m.ncols(), m.nrows(), |r, c| m[(c, r)].conj())
}

/// Frobenius norm of a dense complex matrix.
pub fn frobenius<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn complex_identity<T: Real>(n: usize) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(n, n, |r, c| if r == c { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) })
}

pub fn complex_zeros<T: Real>(r: usize, c: usize) -> DMatrix<Complex<T>> {
    DMatrix::from_element(r, c, Complex::new(T::zero(), T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_is_ascending_and_orthonormal() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(2.0, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, -1.0), Complex::new(2.0, 0.0)],
        );
        let (vals, vecs) = f64::hermitian_eigen(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let gram = adjoint(&vecs) * &vecs;
        assert!(frobenius(&(gram - complex_identity::<f64>(2))) < 1e-12);
    }

    #[test]
    fn unit_phase_is_unimodular() {
        for x in [0.0, 0.3, -7.25, 1e6 + 0.1] {
            assert!((unit_phase(x).norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(unit_phase(0.0f64), Complex::new(1.0, 0.0));
    }
}
