//! Constructive gauge fixing of a flat connection `∇` on `M_n(A_θ^∞)`.
//!
//! Joint eigenvectors `ξ` of the `∇_k` are taken from low eigenspaces of
//! `H`, reshaped to `x`, normalized to partial isometries `w = x·y^{-1/2}`
//! and rotated on the right by a constant `φ` so the ranges of
//! `v_i* v_i` are orthogonal. After `n` steps `u = Σ v_i` is unitary and
//! `u* ∇_k u = D_k + π(Λ_k)` with `Λ_k = Σ λ_k^i v_i* v_i`.
//!
//! Every `v_i` is built in matrix column 0; the column is invariant under
//! `D_k` and `π`, so the eigenproblem is solved on the single-column window.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eigen::hermitian_spectrum;
use super::{build_nabla, build_pi, clusters, TruncatedOperator, TruncationWindow};
use crate::connection::{Connection, CurvatureClass};
use crate::error::{NctError, Result};
use crate::matrix::{MatrixElement, ScalarMatrix};
use crate::scalar::{adjoint, complex_zeros, Real};

#[derive(Debug, Clone)]
pub struct GaugeFixOptions<T> {
    /// Consecutive eigenvalues of `H` closer than this share a cluster.
    pub gap_tol: T,
    /// Joint-eigenvector residual bound, per axis.
    pub eig_tol: T,
    /// Constancy and rank cutoff for `x*x`.
    pub isometry_tol: T,
    /// Curvature bound for the flatness precondition.
    pub flat_tol: T,
    /// Above this the result is flagged.
    pub residual_tol: T,
    /// Eigenvector mass allowed on the outermost shell before flagging.
    pub boundary_tol: T,
    pub unitary_tol: T,
    /// Fresh random combinations tried after the first one fails.
    pub max_retries: usize,
    /// Clusters of `H` searched per step, from the bottom.
    pub max_clusters: usize,
    pub seed: u64,
}

impl<T: Real> Default for GaugeFixOptions<T> {
    fn default() -> Self {
        Self {
            gap_tol: T::lit(1e-7),
            eig_tol: T::lit(1e-8),
            isometry_tol: T::lit(1e-6),
            flat_tol: T::lit(1e-8),
            residual_tol: T::lit(1e-6),
            boundary_tol: T::lit(1e-10),
            unitary_tol: T::lit(1e-8),
            max_retries: 5,
            max_clusters: 256,
            seed: 0,
        }
    }
}

/// A vector `ξ` of a window with `∇_k ξ ≈ λ_k ξ` for every `k`.
#[derive(Debug, Clone)]
pub struct JointEigenvector<T> {
    pub xi: Vec<Complex<T>>,
    /// Purely imaginary.
    pub lambdas: Vec<Complex<T>>,
    /// `max_k ‖∇_k ξ − λ_k ξ‖` on the window.
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeFixFlag {
    ResidualAboveTolerance,
    BoundaryMass,
    NotUnitary,
}

#[derive(Debug, Clone)]
pub struct GaugeFixStep<T> {
    /// Eigenvalue of `H` at the bottom of the cluster the vector came from.
    pub h_eigenvalue: T,
    pub lambdas: Vec<Complex<T>>,
    /// Joint residual measured on coefficients, without truncation.
    pub residual: T,
    pub boundary_mass: T,
}

#[derive(Debug, Clone)]
pub struct GaugeFixResult<T> {
    pub u: MatrixElement<T>,
    pub lambdas: Vec<ScalarMatrix<T>>,
    /// `max_k hs(h'_k − Λ_k)` for `h' = γ_{u*}(∇)`.
    pub residual: T,
    /// Unnormalized `tr(u_m* u_m)` after each step.
    pub isometry_log: Vec<T>,
    pub steps: Vec<GaugeFixStep<T>>,
    /// Lowest eigenvalue of the truncated `H`.
    pub ground_energy: T,
    pub unitarity_defect: T,
    pub boundary_mass: T,
    pub flags: Vec<GaugeFixFlag>,
}

impl<T: Real> GaugeFixResult<T> {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

fn require_flat<T: Real>(conn: &Connection<T>, tol: T) -> Result<()> {
    let report = conn.classify_curvature(tol);
    if report.classification != CurvatureClass::Zero {
        return Err(NctError::NotFlat { residual: report.residual.as_f64() });
    }
    Ok(())
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

fn apply_columns<T: Real>(op: &TruncatedOperator<T>, basis: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let mut out = complex_zeros::<T>(basis.nrows(), basis.ncols());
    for (j, col) in basis.column_iter().enumerate() {
        let y = op.apply(col.as_slice());
        out.column_mut(j).copy_from_slice(&y);
    }
    out
}

/// Eigendecomposes random real combinations `Σ c_k B*(i∇_k)B` and returns
/// the first candidate that passes the residual bound and `accept`.
fn joint_search<T: Real>(
    nablas: &[TruncatedOperator<T>],
    basis: &DMatrix<Complex<T>>,
    rng: &mut ChaCha8Rng,
    opts: &GaugeFixOptions<T>,
    mut accept: impl FnMut(&JointEigenvector<T>) -> bool,
) -> Result<JointEigenvector<T>> {
    let i = Complex::new(T::zero(), T::one());
    let images: Vec<DMatrix<Complex<T>>> = nablas.iter().map(|t| apply_columns(t, basis)).collect();
    let basis_adj = adjoint(basis);
    let reduced: Vec<DMatrix<Complex<T>>> = images.iter().map(|tb| &basis_adj * tb * i).collect();
    let d = basis.ncols();
    let attempts = opts.max_retries + 1;
    let mut best = T::infinity();
    for _ in 0..attempts {
        let mut combo = complex_zeros::<T>(d, d);
        for a in &reduced {
            let ck: f64 = rng.gen_range(-1.0..1.0);
            combo += a * Complex::new(T::lit(ck), T::zero());
        }
        let combo = (&combo + adjoint(&combo)) * Complex::new(T::lit(0.5), T::zero());
        let spec = hermitian_spectrum(&combo)?;
        for y in spec.vectors.column_iter() {
            let xi_vec = basis * y;
            let scale = Complex::new(norm(xi_vec.as_slice()).recip(), T::zero());
            let xi: Vec<Complex<T>> = xi_vec.iter().map(|z| *z * scale).collect();
            let mut lambdas = Vec::with_capacity(nablas.len());
            let mut residual = T::zero();
            for tb in &images {
                let txi: Vec<Complex<T>> = (tb * y).iter().map(|z| *z * scale).collect();
                let rayleigh = xi.iter().zip(&txi).fold(Complex::default(), |acc, (a, b)| acc + a.conj() * b);
                let lambda = Complex::new(T::zero(), rayleigh.im);
                let r: Vec<Complex<T>> = txi.iter().zip(&xi).map(|(t, x)| t - lambda * x).collect();
                residual = residual.max(norm(&r));
                lambdas.push(lambda);
            }
            best = best.min(residual);
            if residual <= opts.eig_tol {
                let cand = JointEigenvector { xi, lambdas, residual };
                if accept(&cand) {
                    return Ok(cand);
                }
            }
        }
    }
    Err(NctError::NoJointEigenvector { residual: best.as_f64(), attempts })
}

/// A joint eigenvector of the truncated `∇_k` inside the span of the
/// orthonormal columns of `subspace`.
pub fn common_eigenvector<T: Real>(
    conn: &Connection<T>,
    subspace: &DMatrix<Complex<T>>,
    window: &Arc<TruncationWindow>,
    opts: &GaugeFixOptions<T>,
) -> Result<JointEigenvector<T>> {
    require_flat(conn, opts.flat_tol)?;
    if subspace.nrows() != window.len() || subspace.ncols() == 0 {
        return Err(NctError::ShapeMismatch(format!(
            "subspace of shape {}x{} on a window of {} labels",
            subspace.nrows(),
            subspace.ncols(),
            window.len()
        )));
    }
    let nablas = (0..conn.dim()).map(|k| build_nabla(conn, k, window)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    joint_search(&nablas, subspace, &mut rng, opts, |_| true)
}

/// `v = x·y^{-1/2}` with `y = c + (1 − p)`, where `c = x*x` must be a
/// constant matrix and `p` is its spectral projection above `tol`.
pub fn partial_isometry_from<T: Real>(x: &MatrixElement<T>, tol: T) -> Result<MatrixElement<T>> {
    let c_full = x.mat_adjoint().mul_unchecked(x);
    let mut defect = T::zero();
    for k in 0..x.dim() {
        defect = defect.max(c_full.mat_derive(k)?.hs_norm());
    }
    if defect > tol {
        return Err(NctError::NotConstant { defect: defect.as_f64() });
    }
    let c = c_full.scalar_part();
    let c = (&c + adjoint(&c)) * Complex::new(T::lit(0.5), T::zero());
    let spec = hermitian_spectrum(&c)?;
    let (lo, hi) = (tol * T::lit(1e-2), tol * T::lit(1e2));
    let n = x.n();
    let mut y_inv_sqrt = complex_zeros::<T>(n, n);
    for (j, &eps) in spec.values.iter().enumerate() {
        if eps > lo && eps < hi {
            return Err(NctError::AmbiguousRank { value: eps.as_f64(), cutoff: tol.as_f64() });
        }
        let w = if eps > tol { eps.sqrt().recip() } else { T::one() };
        let v: Vec<Complex<T>> = spec.vectors.column(j).iter().copied().collect();
        y_inv_sqrt += outer(&v, &v) * Complex::new(w, T::zero());
    }
    Ok(x.mul_scalar_right(&y_inv_sqrt))
}

/// `γ_{u*}`-normal form of a flat connection: see the module docs.
pub fn gauge_fix<T: Real>(
    conn: &Connection<T>,
    window: &TruncationWindow,
    opts: &GaugeFixOptions<T>,
) -> Result<GaugeFixResult<T>> {
    require_flat(conn, opts.flat_tol)?;
    let n = conn.n();
    if window.n() != n || window.dim() != conn.dim() {
        return Err(NctError::ShapeMismatch(format!(
            "window for rank {} over {} axes, connection of rank {n} over {} axes",
            window.n(),
            window.dim(),
            conn.dim()
        )));
    }
    let theta = conn.theta();
    let win = Arc::new(window.first_column());
    let nablas = (0..conn.dim()).map(|k| build_nabla(conn, k, &win)).collect::<Result<Vec<_>>>()?;
    let mut h_op = TruncatedOperator::zero(&win);
    let one = Complex::new(T::one(), T::zero());
    for t in &nablas {
        h_op = h_op.combine(one, &t.compose(t), -one);
    }
    let spec = hermitian_spectrum(&h_op.hermitian_part().to_dense())?;
    let cls = clusters(&spec.values, opts.gap_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut u = MatrixElement::zero(theta, n);
    let mut proj = MatrixElement::zero(theta, n);
    let mut fs: Vec<Vec<Complex<T>>> = Vec::new();
    let mut steps: Vec<GaugeFixStep<T>> = Vec::new();
    let mut log = Vec::new();
    let mut prev_trace = T::zero();
    let rank_step = T::one() - T::lit(1e-6);
    let root_n = T::lit(n as f64).sqrt();

    while steps.len() < n {
        let pi_p = if steps.is_empty() { None } else { Some(build_pi(&proj, &win)?) };
        let mut found = None;
        for range in cls.iter().take(opts.max_clusters) {
            let mut basis = spec.basis(range.clone());
            if let Some(pp) = &pi_p {
                basis = &basis - apply_columns(pp, &basis);
                let gram = adjoint(&basis) * &basis;
                let gs = hermitian_spectrum(&gram)?;
                let keep: Vec<usize> = (0..gs.values.len()).filter(|&j| gs.values[j] > T::lit(0.5)).collect();
                if keep.is_empty() {
                    continue;
                }
                let mut y = complex_zeros::<T>(gram.nrows(), keep.len());
                for (c, &j) in keep.iter().enumerate() {
                    let s = Complex::new(gs.values[j].sqrt().recip(), T::zero());
                    y.column_mut(c).copy_from(&(gs.vectors.column(j) * s));
                }
                basis = &basis * y;
            }
            let mut measured = (T::zero(), T::zero());
            let accept = |cand: &JointEigenvector<T>| {
                let x = win.to_element(theta, &cand.xi);
                let mut worst = T::zero();
                for (k, lambda) in cand.lambdas.iter().enumerate() {
                    let r = &(&x.mat_derive(k).expect("axis in range") + &conn.h()[k].mul_unchecked(&x)) - &x.scale(*lambda);
                    worst = worst.max(r.hs_norm() * root_n);
                }
                let leak = proj.mul_unchecked(&x).hs_norm() * root_n;
                measured = (worst, win.boundary_mass(&cand.xi));
                worst <= opts.eig_tol && leak <= opts.isometry_tol
            };
            if let Ok(joint) = joint_search(&nablas, &basis, &mut rng, opts, accept) {
                found = Some((spec.values[range.start], joint, measured));
                break;
            }
        }
        let (h_eigenvalue, joint, (residual, boundary_mass)) = found.ok_or_else(|| {
            NctError::GaugeFixStalled(format!(
                "no admissible joint eigenvector in the lowest {} clusters at step {} (trace so far {})",
                cls.len().min(opts.max_clusters),
                steps.len() + 1,
                prev_trace
            ))
        })?;

        let x = win.to_element(theta, &joint.xi);
        let w = partial_isometry_from(&x, opts.isometry_tol)?;
        let f = next_free_direction(&fs, n)?;
        let g = first_range_vector(&w.mat_adjoint().mul_unchecked(&w).scalar_part());
        let phi = outer(&g, &f);
        let v = w.mul_scalar_right(&phi);
        u = &u + &v;
        proj = &proj + &v.mul_unchecked(&v.mat_adjoint());
        fs.push(f);

        let trace = (u.mat_adjoint().mul_unchecked(&u).mat_trace() * T::lit(n as f64)).re;
        if trace - prev_trace < rank_step {
            return Err(NctError::GaugeFixStalled(format!(
                "tr(u*u) moved from {prev_trace} to {trace} at step {}",
                steps.len() + 1
            )));
        }
        prev_trace = trace;
        log.push(trace);
        steps.push(GaugeFixStep { h_eigenvalue, lambdas: joint.lambdas, residual, boundary_mass });
    }

    let dim = conn.dim();
    let lambdas: Vec<ScalarMatrix<T>> = (0..dim)
        .map(|k| {
            let mut l = complex_zeros::<T>(n, n);
            for (f, step) in fs.iter().zip(&steps) {
                l += outer(f, f) * step.lambdas[k];
            }
            l
        })
        .collect();
    let fixed = conn.gauge_transform_unchecked(&u.mat_adjoint());
    let residual = (0..dim).fold(T::zero(), |acc, k| {
        acc.max((&fixed.h()[k] - &MatrixElement::from_scalar(theta, &lambdas[k])).hs_norm())
    });
    let unitarity_defect = u.unitarity_defect();
    let boundary_mass = steps.iter().fold(T::zero(), |acc, s| acc.max(s.boundary_mass));
    let mut flags = Vec::new();
    if !(residual <= opts.residual_tol) {
        flags.push(GaugeFixFlag::ResidualAboveTolerance);
    }
    if boundary_mass > opts.boundary_tol {
        flags.push(GaugeFixFlag::BoundaryMass);
    }
    if !(unitarity_defect <= opts.unitary_tol) {
        flags.push(GaugeFixFlag::NotUnitary);
    }
    Ok(GaugeFixResult {
        u,
        lambdas,
        residual,
        isometry_log: log,
        steps,
        ground_energy: spec.values[0],
        unitarity_defect,
        boundary_mass,
        flags,
    })
}

/// `a b*`
fn outer<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(a.len(), b.len(), |r, c| a[r] * b[c].conj())
}

/// First standard basis vector with a nonzero component orthogonal to the
/// orthonormal `fs`, after Gram-Schmidt, normalized.
fn next_free_direction<T: Real>(fs: &[Vec<Complex<T>>], n: usize) -> Result<Vec<Complex<T>>> {
    for j in 0..n {
        let mut r = vec![Complex::default(); n];
        r[j] = Complex::new(T::one(), T::zero());
        for f in fs {
            let c = f.iter().zip(&r).fold(Complex::default(), |acc, (a, b)| acc + a.conj() * b);
            for (ri, fi) in r.iter_mut().zip(f) {
                *ri -= *fi * c;
            }
        }
        let len = norm(&r);
        if len > T::lit(0.5) {
            return Ok(r.iter().map(|z| z.unscale(len)).collect());
        }
    }
    Err(NctError::GaugeFixStalled("no direction left orthogonal to the previous ranges".into()))
}

/// First column of the projection `s` whose norm is at least half the
/// largest column norm, normalized.
fn first_range_vector<T: Real>(s: &DMatrix<Complex<T>>) -> Vec<Complex<T>> {
    let cols: Vec<Vec<Complex<T>>> = s.column_iter().map(|c| c.iter().copied().collect()).collect();
    let norms: Vec<T> = cols.iter().map(|c| norm(c)).collect();
    let max = norms.iter().fold(T::zero(), |a, &b| a.max(b));
    let j = norms.iter().position(|&x| x >= max * T::lit(0.5)).unwrap_or(0);
    cols[j].iter().map(|z| z.unscale(norms[j])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_commuting_diagonals, random_gauge_word, random_theta};
    use crate::spectral::build_h;
    use crate::spectral::lowest_eigenspace;
    use crate::torus::{MultiIndex, ThetaMatrix, TorusElement};
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn idiag(vals: &[f64]) -> ScalarMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vals.iter().map(|&v| c(0.0, v)).collect()))
    }

    fn theta2(t: f64) -> Arc<ThetaMatrix<f64>> {
        Arc::new(ThetaMatrix::from_upper(2, &[t]).unwrap())
    }

    #[test]
    fn trivial_connection_joint_eigenvector() {
        let theta = theta2(0.31);
        let conn = Connection::trivial(&theta, 2);
        let w = Arc::new(TruncationWindow::new(2, 2, 2));
        let (_, basis) = lowest_eigenspace(&build_h(&conn, &w).unwrap(), 1e-7).unwrap();
        let j = common_eigenvector(&conn, &basis, &w, &GaugeFixOptions::default()).unwrap();
        assert!(j.lambdas.iter().all(|l| l.norm() < 1e-12));
        let mass: f64 = (0..w.len()).filter(|&i| w.label(i).alpha.is_zero()).map(|i| j.xi[i].norm_sqr()).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monomial_gauge_joint_eigenvector() {
        let theta = theta2(0.27);
        let beta = MultiIndex::new(&[2, -1]);
        let ub = MatrixElement::diag_monomial(&theta, std::slice::from_ref(&beta)).unwrap();
        let conn = Connection::trivial(&theta, 1).gauge_transform(&ub, 1e-12).unwrap();
        let w = Arc::new(TruncationWindow::new(5, 1, 2));
        let (_, basis) = lowest_eigenspace(&build_h(&conn, &w).unwrap(), 1e-7).unwrap();
        assert_eq!(basis.ncols(), 1);
        let j = common_eigenvector(&conn, &basis, &w, &GaugeFixOptions::default()).unwrap();
        assert!(j.lambdas.iter().all(|l| l.norm() < 1e-10));
        let at_beta = j.xi[w.index_of(&beta, 0, 0).unwrap()].norm();
        assert!((at_beta - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_connection_joint_eigenvector() {
        let theta = theta2(0.13);
        let l = vec![idiag(&[0.2, 0.4]), idiag(&[-0.1, 0.3])];
        let conn = Connection::constant(&theta, &l, 1e-12).unwrap();
        let w = Arc::new(TruncationWindow::new(2, 2, 2));
        let (_, basis) = lowest_eigenspace(&build_h(&conn, &w).unwrap(), 1e-7).unwrap();
        let j = common_eigenvector(&conn, &basis, &w, &GaugeFixOptions::default()).unwrap();
        assert!((j.lambdas[0] - c(0.0, 0.2)).norm() < 1e-10);
        assert!((j.lambdas[1] - c(0.0, -0.1)).norm() < 1e-10);
    }

    #[test]
    fn common_eigenvector_requires_flatness() {
        let theta = theta2(0.2);
        let conn = crate::connection::tests::cosine_connection(&theta);
        let w = Arc::new(TruncationWindow::new(2, 1, 2));
        let basis = DMatrix::from_fn(w.len(), 1, |r, _| if r == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(
            common_eigenvector(&conn, &basis, &w, &GaugeFixOptions::default()),
            Err(NctError::NotFlat { .. })
        ));
    }

    #[test]
    fn partial_isometry_examples() {
        let theta = theta2(0.4);
        let ub = MatrixElement::diag_monomial(&theta, &[MultiIndex::new(&[1, 3])]).unwrap();
        assert!(partial_isometry_from(&ub, 1e-8).unwrap().approx_eq(&ub, 1e-12));

        let mut two = MatrixElement::zero(&theta, 2);
        two.set(0, 0, TorusElement::scalar(&theta, c(2.0, 0.0)));
        let mut e11 = MatrixElement::zero(&theta, 2);
        e11.set(0, 0, TorusElement::one(&theta));
        assert!(partial_isometry_from(&two, 1e-8).unwrap().approx_eq(&e11, 1e-12));

        let mut bad = MatrixElement::zero(&theta, 1);
        bad.set(0, 0, &TorusElement::one(&theta) + &TorusElement::generator(&theta, 0));
        assert!(matches!(partial_isometry_from(&bad, 1e-8), Err(NctError::NotConstant { .. })));

        let mut tiny = MatrixElement::zero(&theta, 1);
        tiny.set(0, 0, TorusElement::scalar(&theta, c(1e-4, 0.0)));
        assert!(matches!(partial_isometry_from(&tiny, 1e-8), Err(NctError::AmbiguousRank { .. })));
    }

    #[test]
    fn partial_isometry_from_joint_eigenvector() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta = Arc::new(random_theta::<f64, _>(&mut rng, 2));
        let l = random_commuting_diagonals::<f64, _>(&mut rng, 2, 2);
        let word = random_gauge_word(&mut rng, &theta, 2, 3);
        let conn = Connection::constant(&theta, &l, 1e-12).unwrap().gauge_transform(&word, 1e-10).unwrap();
        let w = Arc::new(TruncationWindow::column(8, 2, 2, 0));
        let (_, basis) = lowest_eigenspace(&build_h(&conn, &w).unwrap(), 1e-7).unwrap();
        let j = common_eigenvector(&conn, &basis, &w, &GaugeFixOptions::default()).unwrap();
        let x = w.to_element(&theta, &j.xi);
        let v = partial_isometry_from(&x, 1e-6).unwrap();
        let p = v.mat_adjoint().mul_unchecked(&v);
        assert!((&p.mul_unchecked(&p) - &p).hs_norm() < 1e-8);
        assert!((&p - &p.mat_adjoint()).hs_norm() < 1e-8);
    }

    #[test]
    fn gauge_fix_of_trivial() {
        let theta = theta2(0.37);
        for n in 1..=3 {
            let conn = Connection::trivial(&theta, n);
            let res = gauge_fix(&conn, &TruncationWindow::new(3, n, 2), &GaugeFixOptions::default()).unwrap();
            assert!(!res.is_flagged(), "{:?}", res.flags);
            assert!(res.residual <= 1e-8);
            assert!(res.lambdas.iter().all(|l| crate::scalar::frobenius(l) < 1e-10));
            assert_eq!(res.isometry_log.len(), n);
            for (i, t) in res.isometry_log.iter().enumerate() {
                assert!((t - (i + 1) as f64).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gauge_fix_of_gauged_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in 1..=3 {
            let theta = Arc::new(random_theta::<f64, _>(&mut rng, 2));
            let l = random_commuting_diagonals::<f64, _>(&mut rng, 2, n);
            let word = random_gauge_word(&mut rng, &theta, n, 4);
            let conn = Connection::constant(&theta, &l, 1e-12).unwrap().gauge_transform(&word, 1e-10).unwrap();
            let res = gauge_fix(&conn, &TruncationWindow::new(8, n, 2), &GaugeFixOptions::default()).unwrap();
            assert!(!res.is_flagged(), "n={n}: {:?} residual {}", res.flags, res.residual);
            // every recovered λ differs from some original slot by an integer shift
            for step in &res.steps {
                let hit = (0..n).any(|p| {
                    (0..2).all(|k| {
                        let d = step.lambdas[k].im - l[k][(p, p)].im;
                        (d - d.round()).abs() < 1e-8
                    })
                });
                assert!(hit);
            }
        }
    }
}
