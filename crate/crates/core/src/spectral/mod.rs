//! Finite Fourier truncation of the free module and the operators living on
//! it: `D_k`, `π(a)`, the Laplacian `Δ = −Σ D_k²` and `H = −Σ (D_k + π(h_k))²`.
//!
//! A vector of the module `M_n(A_θ^∞)` is expanded in the basis
//! `u^α ⊗ E_pq`; the window keeps `‖α‖_∞ ≤ M`. Since `π(a)` multiplies from
//! the left and `D_k` is diagonal, every operator here maps each matrix
//! column `q` to itself, so a single-column window is an exactly invariant
//! piece. Operators are stored as sparse columns and densified on demand.

mod eigen;
mod gauge_fix;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::connection::Connection;
use crate::error::{NctError, Result};
use crate::matrix::MatrixElement;
use crate::scalar::{complex_zeros, Real};
use crate::torus::{phase_unchecked, MultiIndex, ThetaMatrix, TorusElement};

pub use eigen::{clusters, lowest_eigenspace, simdiag, spectrum, SimDiag, Spectrum};
pub use gauge_fix::{
    common_eigenvector, gauge_fix, partial_isometry_from, GaugeFixFlag, GaugeFixOptions, GaugeFixResult, GaugeFixStep,
    JointEigenvector,
};

/// Basis label of `u^α ⊗ E_pq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub alpha: MultiIndex,
    pub p: usize,
    pub q: usize,
}

/// The labels `(α, p, q)` with `‖α‖_∞ ≤ M`, in lexicographic order, either
/// for all columns `q` or for a single one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationWindow {
    m: i32,
    n: usize,
    dim: usize,
    column: Option<usize>,
    labels: Vec<Label>,
}

impl TruncationWindow {
    /// All `n²·(2M+1)^N` labels.
    pub fn new(m: i32, n: usize, dim: usize) -> Self {
        Self::build(m, n, dim, None)
    }

    /// Only labels with `q = column`: `n·(2M+1)^N` of them.
    pub fn column(m: i32, n: usize, dim: usize, column: usize) -> Self {
        assert!(column < n, "column {column} out of range for rank {n}");
        Self::build(m, n, dim, Some(column))
    }

    fn build(m: i32, n: usize, dim: usize, column: Option<usize>) -> Self {
        assert!(m >= 0 && n > 0 && dim > 0, "window needs M ≥ 0, n ≥ 1, N ≥ 1");
        let side = (2 * m + 1) as usize;
        let count = side.pow(dim as u32);
        let qs: Vec<usize> = match column {
            Some(q) => vec![q],
            None => (0..n).collect(),
        };
        let mut labels = Vec::with_capacity(count * n * qs.len());
        let mut comps = vec![-m; dim];
        for _ in 0..count {
            let alpha = MultiIndex::new(&comps);
            for p in 0..n {
                for &q in &qs {
                    labels.push(Label { alpha: alpha.clone(), p, q });
                }
            }
            for c in comps.iter_mut().rev() {
                if *c < m {
                    *c += 1;
                    break;
                }
                *c = -m;
            }
        }
        Self { m, n, dim, column, labels }
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Some(q)` for a single-column window.
    pub fn single_column(&self) -> Option<usize> {
        self.column
    }

    /// The single-column window on column 0 with the same `M`, `n`, `N`.
    pub fn first_column(&self) -> Self {
        Self::column(self.m, self.n, self.dim, 0)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    fn columns_kept(&self) -> usize {
        if self.column.is_some() {
            1
        } else {
            self.n
        }
    }

    pub fn index_of(&self, alpha: &MultiIndex, p: usize, q: usize) -> Option<usize> {
        if alpha.len() != self.dim || p >= self.n || q >= self.n {
            return None;
        }
        let qi = match self.column {
            Some(c) if c != q => return None,
            Some(_) => 0,
            None => q,
        };
        let side = (2 * self.m + 1) as usize;
        let mut a = 0usize;
        for &c in alpha.components() {
            if c.abs() > self.m {
                return None;
            }
            a = a * side + (c + self.m) as usize;
        }
        Some((a * self.n + p) * self.columns_kept() + qi)
    }

    /// Labels on the outermost shell `‖α‖_∞ = M`.
    pub fn on_boundary(&self, i: usize) -> bool {
        self.labels[i].alpha.sup_norm() == self.m
    }

    /// `‖α‖_∞ ≤ M − margin`.
    pub fn is_interior(&self, i: usize, margin: i32) -> bool {
        self.labels[i].alpha.sup_norm() <= self.m - margin
    }

    /// ℓ² mass of `v` on the outermost shell.
    pub fn boundary_mass<T: Real>(&self, v: &[Complex<T>]) -> T {
        v.iter().enumerate().filter(|(i, _)| self.on_boundary(*i)).fold(T::zero(), |acc, (_, z)| acc + z.norm_sqr())
    }

    /// The element `X` with `(X_pq)_α = v[(α,p,q)]`; columns outside the
    /// window are zero.
    pub fn to_element<T: Real>(&self, theta: &Arc<ThetaMatrix<T>>, v: &[Complex<T>]) -> MatrixElement<T> {
        assert_eq!(v.len(), self.len(), "vector length does not match window");
        assert_eq!(theta.dim(), self.dim, "theta dimension does not match window");
        let n = self.n;
        let mut terms: Vec<Vec<(MultiIndex, Complex<T>)>> = vec![Vec::new(); n * n];
        for (label, z) in self.labels.iter().zip(v) {
            if *z != Complex::default() {
                terms[label.p * n + label.q].push((label.alpha.clone(), *z));
            }
        }
        let entries =
            terms.into_iter().map(|t| TorusElement::from_terms(theta, t).expect("dimensions agree")).collect();
        MatrixElement::from_entries(theta, n, entries).expect("shape agrees")
    }

    /// Coefficients of `x` on the window, plus the ℓ² mass left outside.
    pub fn from_element<T: Real>(&self, x: &MatrixElement<T>) -> (Vec<Complex<T>>, T) {
        assert_eq!(x.n(), self.n, "rank does not match window");
        let mut v = vec![Complex::default(); self.len()];
        let mut outside = T::zero();
        for p in 0..self.n {
            for q in 0..self.n {
                for (alpha, c) in x.get(p, q).terms() {
                    match self.index_of(alpha, p, q) {
                        Some(i) => v[i] = *c,
                        None => outside += c.norm_sqr(),
                    }
                }
            }
        }
        (v, outside)
    }
}

/// A linear operator on the window's span, stored as sparse columns sorted
/// by row.
#[derive(Debug, Clone)]
pub struct TruncatedOperator<T> {
    window: Arc<TruncationWindow>,
    cols: Vec<Vec<(usize, Complex<T>)>>,
}

impl<T: Real> TruncatedOperator<T> {
    pub fn zero(window: &Arc<TruncationWindow>) -> Self {
        Self { window: Arc::clone(window), cols: vec![Vec::new(); window.len()] }
    }

    pub fn identity(window: &Arc<TruncationWindow>) -> Self {
        Self::diagonal(window, |_| Complex::new(T::one(), T::zero()))
    }

    fn diagonal(window: &Arc<TruncationWindow>, f: impl Fn(&Label) -> Complex<T>) -> Self {
        let cols = window
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let z = f(l);
                if z == Complex::default() {
                    Vec::new()
                } else {
                    vec![(i, z)]
                }
            })
            .collect();
        Self { window: Arc::clone(window), cols }
    }

    pub fn window(&self) -> &Arc<TruncationWindow> {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Nonzero entries of column `j` as `(row, value)`.
    pub fn column(&self, j: usize) -> &[(usize, Complex<T>)] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        let col = &self.cols[j];
        match col.binary_search_by_key(&i, |e| e.0) {
            Ok(pos) => col[pos].1,
            Err(_) => Complex::default(),
        }
    }

    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.dim(), "vector length does not match operator");
        let mut y = vec![Complex::default(); self.dim()];
        for (xj, col) in x.iter().zip(&self.cols) {
            if *xj == Complex::default() {
                continue;
            }
            for &(i, a) in col {
                y[i] += a * *xj;
            }
        }
        y
    }

    /// Applies the operator to a sparse vector.
    pub fn apply_sparse(&self, x: &[(usize, Complex<T>)]) -> Vec<(usize, Complex<T>)> {
        let mut acc = Accumulator::new(self.dim());
        for &(j, xj) in x {
            for &(i, a) in &self.cols[j] {
                acc.add(i, a * xj);
            }
        }
        acc.drain()
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = complex_zeros::<T>(self.dim(), self.dim());
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                m[(i, j)] = a;
            }
        }
        m
    }

    /// `self · other`
    pub fn compose(&self, other: &Self) -> Self {
        assert!(same_window(&self.window, &other.window), "operators live on different windows");
        let cols = other.cols.iter().map(|col| self.apply_sparse(col)).collect();
        Self { window: Arc::clone(&self.window), cols }
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Self {
        assert!(same_window(&self.window, &other.window), "operators live on different windows");
        let mut acc = Accumulator::new(self.dim());
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(x, y)| {
                for &(i, z) in x {
                    acc.add(i, a * z);
                }
                for &(i, z) in y {
                    acc.add(i, b * z);
                }
                acc.drain()
            })
            .collect();
        Self { window: Arc::clone(&self.window), cols }
    }

    pub fn add(&self, other: &Self) -> Self {
        let one = Complex::new(T::one(), T::zero());
        self.combine(one, other, one)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let one = Complex::new(T::one(), T::zero());
        self.combine(one, other, -one)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let cols = self.cols.iter().map(|c| c.iter().map(|&(i, z)| (i, z * s)).collect()).collect();
        Self { window: Arc::clone(&self.window), cols }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut cols: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, z) in col {
                cols[i].push((j, z.conj()));
            }
        }
        Self { window: Arc::clone(&self.window), cols }
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Self {
        let half = Complex::new(T::lit(0.5), T::zero());
        self.combine(half, &self.adjoint(), half)
    }

    /// `max |A_ij − conj(A_ji)|`
    pub fn hermitian_defect(&self) -> T {
        let adj = self.adjoint();
        let diff = self.sub(&adj);
        diff.cols.iter().flatten().fold(T::zero(), |acc, (_, z)| acc.max(z.norm()))
    }
}

fn same_window(a: &Arc<TruncationWindow>, b: &Arc<TruncationWindow>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Dense scratch row used to sum sparse contributions.
struct Accumulator<T> {
    values: Vec<Complex<T>>,
    touched: Vec<usize>,
    seen: Vec<bool>,
}

impl<T: Real> Accumulator<T> {
    fn new(dim: usize) -> Self {
        Self { values: vec![Complex::default(); dim], touched: Vec::new(), seen: vec![false; dim] }
    }

    #[inline]
    fn add(&mut self, i: usize, z: Complex<T>) {
        if !self.seen[i] {
            self.seen[i] = true;
            self.touched.push(i);
        }
        self.values[i] += z;
    }

    fn drain(&mut self) -> Vec<(usize, Complex<T>)> {
        self.touched.sort_unstable();
        let drop = T::drop_tolerance();
        let mut out = Vec::with_capacity(self.touched.len());
        for &i in &self.touched {
            let z = std::mem::take(&mut self.values[i]);
            self.seen[i] = false;
            if z.norm() > drop {
                out.push((i, z));
            }
        }
        self.touched.clear();
        out
    }
}

/// `D_k`: the diagonal `i·α_k` (0-based axis).
pub fn build_d<T: Real>(k: usize, window: &Arc<TruncationWindow>) -> Result<TruncatedOperator<T>> {
    if k >= window.dim() {
        return Err(NctError::AxisOutOfRange { axis: k, dim: window.dim() });
    }
    Ok(TruncatedOperator::diagonal(window, |l| Complex::new(T::zero(), T::lit(l.alpha.components()[k] as f64))))
}

/// `π(h)`: left multiplication by `h`, with targets outside the window
/// dropped. Exact on sources with `‖α‖_∞ ≤ M − deg h`.
pub fn build_pi<T: Real>(h: &MatrixElement<T>, window: &Arc<TruncationWindow>) -> Result<TruncatedOperator<T>> {
    if h.n() != window.n() {
        return Err(NctError::ShapeMismatch(format!("{0}x{0} element on a rank-{1} window", h.n(), window.n())));
    }
    if h.dim() != window.dim() {
        return Err(NctError::DimensionMismatch { expected: window.dim(), found: h.dim() });
    }
    let theta = h.theta();
    let n = window.n();
    let mut acc = Accumulator::new(window.len());
    let cols = window
        .labels()
        .iter()
        .map(|src| {
            // (h_pr)_β u^β · u^α E_rq = (h_pr)_β φ(β,α) u^{α+β} E_pq
            for p in 0..n {
                for (beta, c) in h.get(p, src.p).terms() {
                    let target = beta + &src.alpha;
                    if let Some(i) = window.index_of(&target, p, src.q) {
                        acc.add(i, *c * phase_unchecked(theta, beta, &src.alpha));
                    }
                }
            }
            acc.drain()
        })
        .collect();
    Ok(TruncatedOperator { window: Arc::clone(window), cols })
}

/// `∇_k = D_k + π(h_k)` on the window.
pub fn build_nabla<T: Real>(
    conn: &Connection<T>,
    k: usize,
    window: &Arc<TruncationWindow>,
) -> Result<TruncatedOperator<T>> {
    if k >= conn.dim() {
        return Err(NctError::AxisOutOfRange { axis: k, dim: conn.dim() });
    }
    Ok(build_d(k, window)?.add(&build_pi(&conn.h()[k], window)?))
}

/// `Δ`: the diagonal `‖α‖₂²`.
pub fn build_laplacian<T: Real>(window: &Arc<TruncationWindow>) -> TruncatedOperator<T> {
    TruncatedOperator::diagonal(window, |l| Complex::new(T::lit(l.alpha.norm2_sq() as f64), T::zero()))
}

/// `H = −Σ_k ∇_k²` built from the truncated `∇_k`, then replaced by its
/// Hermitian part.
pub fn build_h<T: Real>(conn: &Connection<T>, window: &Arc<TruncationWindow>) -> Result<TruncatedOperator<T>> {
    let mut h = TruncatedOperator::zero(window);
    let minus = Complex::new(-T::one(), T::zero());
    for k in 0..conn.dim() {
        let t = build_nabla(conn, k, window)?;
        h = h.combine(Complex::new(T::one(), T::zero()), &t.compose(&t), minus);
    }
    Ok(h.hermitian_part())
}
