//! Dense Hermitian eigensolving on truncations and simultaneous
//! diagonalization of commuting constant families.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex;

use super::TruncatedOperator;
use crate::connection::check_commuting_skew;
use crate::error::{NctError, Result};
use crate::matrix::ScalarMatrix;
use crate::scalar::{adjoint, complex_zeros, frobenius, Real};

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    pub values: Vec<T>,
    pub vectors: DMatrix<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    /// Columns `range` of the eigenvector matrix.
    pub fn basis(&self, range: Range<usize>) -> DMatrix<Complex<T>> {
        self.vectors.columns(range.start, range.len()).into_owned()
    }
}

pub fn spectrum<T: Real>(op: &TruncatedOperator<T>) -> Result<Spectrum<T>> {
    hermitian_spectrum(&op.to_dense())
}

pub(crate) fn hermitian_spectrum<T: Real>(m: &DMatrix<Complex<T>>) -> Result<Spectrum<T>> {
    let (values, vectors) =
        T::hermitian_eigen(m).ok_or_else(|| NctError::Eigen(format!("no convergence on a {0}x{0} matrix", m.nrows())))?;
    Ok(Spectrum { values, vectors })
}

/// Splits ascending `values` into maximal runs whose consecutive gaps are
/// at most `gap_tol`.
pub fn clusters<T: Real>(values: &[T], gap_tol: T) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap_tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Smallest eigenvalue and an orthonormal basis of its cluster.
pub fn lowest_eigenspace<T: Real>(op: &TruncatedOperator<T>, gap_tol: T) -> Result<(T, DMatrix<Complex<T>>)> {
    let spec = spectrum(op)?;
    let first = clusters(&spec.values, gap_tol)
        .into_iter()
        .next()
        .ok_or_else(|| NctError::Eigen("empty operator".into()))?;
    Ok((spec.values[0], spec.basis(first)))
}

/// Output of [`simdiag`]: `u_hat · Λ_k · u_hat*` is diagonal for every `k`,
/// and row `j` of `tuples` is `(λ_j^1, …, λ_j^N)`.
#[derive(Debug, Clone)]
pub struct SimDiag<T> {
    pub u_hat: ScalarMatrix<T>,
    pub tuples: Vec<Vec<Complex<T>>>,
    /// Largest off-diagonal Frobenius norm left over.
    pub off_diagonal: T,
}

const SIMDIAG_ATTEMPTS: usize = 5;

/// Diagonalizes a commuting skew-adjoint family through one generic linear
/// combination `Σ c_k iΛ_k`, with deterministic coefficients.
pub fn simdiag<T: Real>(lambdas: &[ScalarMatrix<T>], tol: T) -> Result<SimDiag<T>> {
    let n = lambdas.first().map(|l| l.nrows()).ok_or_else(|| NctError::Input("empty family".into()))?;
    check_commuting_skew(lambdas, n, tol)?;
    let i = Complex::new(T::zero(), T::one());
    let golden = T::lit(0.618_033_988_749_894_8);
    let mut best = T::infinity();
    for attempt in 0..SIMDIAG_ATTEMPTS {
        let mut combo = complex_zeros::<T>(n, n);
        for (k, l) in lambdas.iter().enumerate() {
            let x = T::lit((k + 1) as f64) * golden + T::lit(attempt as f64) * T::SQRT_2();
            let ck = T::one() + (x - x.floor());
            combo += l * (i * ck);
        }
        let combo = (&combo + adjoint(&combo)) * Complex::new(T::lit(0.5), T::zero());
        let v = standardize_columns(&hermitian_spectrum(&combo)?.vectors);
        let v_adj = adjoint(&v);
        let mut off = T::zero();
        let mut tuples = vec![Vec::with_capacity(lambdas.len()); n];
        for l in lambdas {
            let d = &v_adj * l * &v;
            let mut od = d.clone();
            for j in 0..n {
                tuples[j].push(d[(j, j)]);
                od[(j, j)] = Complex::default();
            }
            off = off.max(frobenius(&od));
        }
        if off <= tol {
            return Ok(SimDiag { u_hat: v_adj, tuples, off_diagonal: off });
        }
        best = best.min(off);
    }
    Err(NctError::NotCommuting { defect: best.as_f64() })
}

/// Orders eigenvector columns by the row of their largest entry and makes
/// that entry real positive, so diagonal input gives the identity.
fn standardize_columns<T: Real>(v: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let n = v.ncols();
    let peak: Vec<usize> = (0..n)
        .map(|j| (0..v.nrows()).fold(0, |best, r| if v[(r, j)].norm() > v[(best, j)].norm() { r } else { best }))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| peak[j]);
    let mut out = complex_zeros::<T>(v.nrows(), n);
    for (c, &j) in order.iter().enumerate() {
        let z = v[(peak[j], j)];
        let unit = if z.norm() > T::zero() { z.conj().unscale(z.norm()) } else { Complex::new(T::one(), T::zero()) };
        for r in 0..v.nrows() {
            out[(r, c)] = v[(r, j)] * unit;
        }
    }
    out
}
