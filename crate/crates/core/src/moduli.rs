//! Points of `(T^N)^n/σ_n` classifying flat connections on the free module
//! up to gauge, and the bipartite matchings behind equivalence and the
//! marriage-lemma witness for unitaries.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::connection::Connection;
use crate::error::{NctError, Result};
use crate::matrix::{MatrixElement, ScalarMatrix};
use crate::scalar::Real;
use crate::spectral::{gauge_fix, simdiag, GaugeFixOptions, TruncationWindow};

/// `n` rows of `N` coordinates in `[0,1)`, rows in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuliPoint<T> {
    n: usize,
    dim: usize,
    coords: Vec<Vec<T>>,
}

impl<T: Real> ModuliPoint<T> {
    /// Reduces every coordinate mod 1 and sorts the rows. No snapping.
    pub fn new(coords: Vec<Vec<T>>) -> Result<Self> {
        let n = coords.len();
        let dim = coords.first().map_or(0, Vec::len);
        if n == 0 || dim == 0 || coords.iter().any(|r| r.len() != dim) {
            return Err(NctError::ShapeMismatch("moduli point needs n ≥ 1 rows of equal length N ≥ 1".into()));
        }
        if coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(NctError::Input("non-finite moduli coordinate".into()));
        }
        let mut coords: Vec<Vec<T>> = coords.into_iter().map(|r| r.into_iter().map(frac).collect()).collect();
        coords.sort_by(|a, b| lex(a, b));
        Ok(Self { n, dim, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Vec<T>] {
        &self.coords
    }

    pub fn zero(n: usize, dim: usize) -> Self {
        Self { n, dim, coords: vec![vec![T::zero(); dim]; n] }
    }
}

fn lex<T: Real>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// `x − ⌊x⌋`, with results that round to `1.0` sent to `0`.
fn frac<T: Real>(x: T) -> T {
    let f = x - x.floor();
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

/// Torus coordinate of `λ ∈ iℝ`: `frac(Re(iλ))`, snapped to the grid
/// `tol·ℤ` with `1` wrapped to `0`. The grid makes integer shifts and slot
/// permutations produce bit-identical points.
fn coordinate<T: Real>(lambda: num_complex::Complex<T>, tol: T) -> T {
    let t = frac(-lambda.im);
    let steps = (t / tol).round();
    let snapped = steps * tol;
    if snapped >= T::one() - tol * T::lit(0.5) {
        T::zero()
    } else {
        snapped
    }
}

/// The canonical point of a commuting skew-adjoint constant family.
pub fn canonicalize<T: Real>(lambdas: &[ScalarMatrix<T>], tol: T) -> Result<ModuliPoint<T>> {
    let sd = simdiag(lambdas, tol)?;
    let coords: Vec<Vec<T>> = sd.tuples.iter().map(|row| row.iter().map(|&l| coordinate(l, tol)).collect()).collect();
    let n = coords.len();
    let dim = lambdas.len();
    let mut coords = coords;
    coords.sort_by(|a, b| lex(a, b));
    Ok(ModuliPoint { n, dim, coords })
}

/// Gauge-fixes `conn` and canonicalizes the resulting constant family.
pub fn moduli_of<T: Real>(
    conn: &Connection<T>,
    window: &TruncationWindow,
    opts: &GaugeFixOptions<T>,
    tol: T,
) -> Result<ModuliPoint<T>> {
    let fixed = gauge_fix(conn, window, opts)?;
    canonicalize(&fixed.lambdas, tol)
}

/// Distance on `ℝ/ℤ`.
pub fn circular_distance<T: Real>(a: T, b: T) -> T {
    let d = frac(a - b);
    d.min(T::one() - d)
}

/// A row permutation `ρ` with `p.row(i) ≈ q.row(ρ(i))` coordinate-wise on
/// the circle, if one exists.
pub fn matching<T: Real>(p: &ModuliPoint<T>, q: &ModuliPoint<T>, tol: T) -> Result<Option<Vec<usize>>> {
    if p.n != q.n || p.dim != q.dim {
        return Err(NctError::ShapeMismatch(format!(
            "points of shape {}x{} and {}x{}",
            p.n, p.dim, q.n, q.dim
        )));
    }
    let allowed: Vec<Vec<bool>> = p
        .coords
        .iter()
        .map(|a| q.coords.iter().map(|b| a.iter().zip(b).all(|(x, y)| circular_distance(*x, *y) <= tol)).collect())
        .collect();
    Ok(perfect_matching(&allowed))
}

pub fn equivalent<T: Real>(p: &ModuliPoint<T>, q: &ModuliPoint<T>, tol: T) -> Result<bool> {
    Ok(matching(p, q, tol)?.is_some())
}

/// Perfect matching of a square bipartite graph by augmenting paths.
/// Returns `ρ` with `allowed[i][ρ(i)]` for all `i`.
pub fn perfect_matching(allowed: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = allowed.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, allowed, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut rho = vec![0; n];
    for (j, o) in owner.iter().enumerate() {
        rho[o.expect("perfect matching covers every column")] = j;
    }
    Some(rho)
}

fn augment(i: usize, allowed: &[Vec<bool>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
    for j in 0..allowed[i].len() {
        if allowed[i][j] && !seen[j] {
            seen[j] = true;
            if owner[j].is_none_or(|o| augment(o, allowed, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
    }
    false
}

/// Entries below this count as zero in [`hall_matching`].
pub const HALL_THRESHOLD: f64 = 1e-12;

/// `x_ij = τ(U_ij U_ij*) = Σ_α |(U_ij)_α|²`.
pub fn hall_weights<T: Real>(u: &MatrixElement<T>) -> DMatrix<T> {
    DMatrix::from_fn(u.n(), u.n(), |i, j| u.get(i, j).l2_norm_sq())
}

/// A permutation `ρ` with `x_{iρ(i)} > 10⁻¹²` for a unitary `U`.
pub fn hall_matching<T: Real>(u: &MatrixElement<T>, unitary_tol: T) -> Result<Vec<usize>> {
    let defect = u.unitarity_defect();
    if defect > unitary_tol {
        return Err(NctError::NotUnitary { defect: defect.as_f64() });
    }
    let x = hall_weights(u);
    let threshold = T::lit(HALL_THRESHOLD);
    let allowed: Vec<Vec<bool>> = (0..u.n()).map(|i| (0..u.n()).map(|j| x[(i, j)] > threshold).collect()).collect();
    perfect_matching(&allowed).ok_or(NctError::NoPerfectMatching { threshold: HALL_THRESHOLD })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_gauge_word, random_theta};
    use crate::torus::{MultiIndex, ThetaMatrix};
    use nalgebra::DVector;
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn idiag(vals: &[f64]) -> ScalarMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vals.iter().map(|&v| Complex::new(0.0, v)).collect()))
    }

    fn point(rows: &[&[f64]]) -> ModuliPoint<f64> {
        ModuliPoint::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn zero_family_gives_zero_point() {
        let p = canonicalize(&[idiag(&[0.0, 0.0]), idiag(&[0.0, 0.0])], 1e-10).unwrap();
        assert_eq!(p, ModuliPoint::zero(2, 2));
    }

    #[test]
    fn worked_example() {
        let p = canonicalize(&[idiag(&[0.25, 0.75]), idiag(&[0.5, 0.5])], 1e-10).unwrap();
        let want = [[0.25, 0.5], [0.75, 0.5]];
        for (row, w) in p.coords().iter().zip(want) {
            for (a, b) in row.iter().zip(w) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        let shifted = canonicalize(&[idiag(&[0.25 - 1.0, 0.75]), idiag(&[0.5, 0.5])], 1e-10).unwrap();
        assert_eq!(p, shifted);
    }

    #[test]
    fn quotient_moves_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n = rng.gen_range(1..=4);
            let vals: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let base = canonicalize(&vals.iter().map(|v| idiag(v)).collect::<Vec<_>>(), 1e-10).unwrap();
            let mut moved = vals.clone();
            let (k, j) = (rng.gen_range(0..2), rng.gen_range(0..n));
            moved[k][j] += rng.gen_range(-3..=3) as f64;
            let mut perm: Vec<usize> = (0..n).collect();
            perm.reverse();
            let moved: Vec<_> = moved.iter().map(|v| idiag(&perm.iter().map(|&p| v[p]).collect::<Vec<_>>())).collect();
            assert_eq!(canonicalize(&moved, 1e-10).unwrap(), base);
        }
    }

    #[test]
    fn equivalence_examples() {
        let p = point(&[&[0.1]]);
        assert!(equivalent(&p, &p, 1e-6).unwrap());
        assert!(!equivalent(&p, &point(&[&[0.3]]), 1e-6).unwrap());
        let a = point(&[&[0.1, 0.9], &[0.4, 0.0]]);
        let b = point(&[&[1.4, -1.0], &[0.1 + 1e-8, -0.1]]);
        assert_eq!(matching(&a, &b, 1e-6).unwrap(), Some(vec![0, 1]));
        assert!(equivalent(&point(&[&[0.0]]), &point(&[&[1.0 - 1e-9]]), 1e-6).unwrap());
        assert!(matching(&a, &point(&[&[0.1]]), 1e-6).is_err());
    }

    #[test]
    fn matching_needs_a_whole_permutation() {
        let a = point(&[&[0.1], &[0.1]]);
        let b = point(&[&[0.1], &[0.5]]);
        assert!(!equivalent(&a, &b, 1e-6).unwrap());
        let allowed = vec![vec![true, true], vec![true, false]];
        assert_eq!(perfect_matching(&allowed), Some(vec![1, 0]));
    }

    fn brute_force(x: &DMatrix<f64>) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, x: &DMatrix<f64>, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for j in 0..n {
                if !used[j] && x[(i, j)] > HALL_THRESHOLD {
                    used[j] = true;
                    cur.push(j);
                    rec(i + 1, n, used, cur, x, out);
                    cur.pop();
                    used[j] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(0, x.nrows(), &mut vec![false; x.nrows()], &mut Vec::new(), x, &mut out);
        out
    }

    #[test]
    fn hall_examples() {
        let theta = Arc::new(ThetaMatrix::<f64>::from_upper(2, &[0.3]).unwrap());
        assert_eq!(hall_matching(&MatrixElement::identity(&theta, 3), 1e-12).unwrap(), vec![0, 1, 2]);
        let anti = MatrixElement::permutation_matrix(&theta, &[2, 1, 0]).unwrap();
        assert_eq!(hall_matching(&anti, 1e-12).unwrap(), vec![2, 1, 0]);
        let not_unitary = MatrixElement::zero(&theta, 2);
        assert!(matches!(hall_matching(&not_unitary, 1e-10), Err(NctError::NotUnitary { .. })));
    }

    #[test]
    fn hall_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let theta = Arc::new(random_theta::<f64, _>(&mut rng, 2));
            let mut u = random_gauge_word(&mut rng, &theta, n, 3);
            if rng.gen_bool(0.5) {
                let alphas: Vec<_> = (0..n).map(|j| MultiIndex::new(&[j as i32, -1])).collect();
                u = &u * &MatrixElement::diag_monomial(&theta, &alphas).unwrap();
            }
            let rho = hall_matching(&u, 1e-10).unwrap();
            let x = hall_weights(&u);
            for i in 0..n {
                let row: f64 = (0..n).map(|j| x[(i, j)]).sum();
                let col: f64 = (0..n).map(|j| x[(j, i)]).sum();
                assert!((row - 1.0).abs() < 1e-10 && (col - 1.0).abs() < 1e-10);
            }
            assert!(brute_force(&x).contains(&rho));
        }
    }
}
