//! The smooth noncommutative torus as an algebra of finitely supported
//! twisted Fourier series.
//!
//! An element is `Σ c_α u^α` with `u^α = u_1^{α_1} ··· u_N^{α_N}` in this
//! fixed generator order. With `u_k u_l = e(θ_kl) u_l u_k`, `e(x) = exp(2πi x)`,
//! moving every `u_l^{β_l}` of the right factor left past the `u_k^{α_k}`
//! with `k > l` gives
//!
//! ```text
//! u^α · u^β = e(Σ_{k>l} α_k θ_kl β_l) · u^{α+β}
//! ```
//!
//! which is the only place the twist enters. Everything else (adjoint,
//! trace, derivations, torus action) is coefficientwise.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex;
use smallvec::SmallVec;

use crate::error::{NctError, Result};
use crate::scalar::{unit_phase, Real};

/// Antisymmetric real `N×N` matrix with entries in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Real> ThetaMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(NctError::InvalidTheta("torus dimension must be positive".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(NctError::InvalidTheta(format!("row {k} has {} entries, expected {dim}", row.len())));
            }
            entries.extend_from_slice(row);
        }
        for k in 0..dim {
            for l in 0..dim {
                let v = entries[k * dim + l];
                if !v.is_finite() || v.abs() >= T::one() {
                    return Err(NctError::InvalidTheta(format!("entry ({k},{l}) = {v} not inside (-1,1)")));
                }
                if v != -entries[l * dim + k] {
                    return Err(NctError::InvalidTheta(format!("not antisymmetric at ({k},{l})")));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds the antisymmetric matrix from its strict upper triangle, given
    /// row by row (`θ_01, θ_02, …, θ_12, …`).
    pub fn from_upper(dim: usize, upper: &[T]) -> Result<Self> {
        if upper.len() != dim * dim.saturating_sub(1) / 2 {
            return Err(NctError::InvalidTheta(format!(
                "expected {} upper entries for dimension {dim}",
                dim * dim.saturating_sub(1) / 2
            )));
        }
        let mut rows = vec![vec![T::zero(); dim]; dim];
        let mut it = upper.iter();
        for k in 0..dim {
            for l in (k + 1)..dim {
                let v = *it.next().unwrap();
                rows[k][l] = v;
                rows[l][k] = -v;
            }
        }
        Self::new(rows)
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "torus dimension must be positive");
        Self { dim, entries: vec![T::zero(); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> T {
        self.entries[k * self.dim + l]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero())
    }
}

/// A point of `ℤ^N`. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(SmallVec<[i32; 4]>);

impl MultiIndex {
    pub fn new(components: &[i32]) -> Self {
        Self(SmallVec::from_slice(components))
    }

    pub fn zero(dim: usize) -> Self {
        Self(SmallVec::from_elem(0, dim))
    }

    /// The standard basis vector `e_k` (0-based `k`).
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[k] = 1;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `‖α‖_∞`
    pub fn sup_norm(&self) -> i32 {
        self.0.iter().map(|a| a.abs()).max().unwrap_or(0)
    }

    /// `‖α‖_2²`
    pub fn norm2_sq(&self) -> i64 {
        self.0.iter().map(|&a| (a as i64) * (a as i64)).sum()
    }

    pub fn scaled(&self, s: i32) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), rhs.len());
        MultiIndex(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        self.scaled(-1)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Real exponent `Σ_{k>l} α_k θ_kl β_l` of the product phase, without
/// dimension checks.
#[inline]
pub(crate) fn phase_exponent<T: Real>(theta: &ThetaMatrix<T>, a: &MultiIndex, b: &MultiIndex) -> T {
    let (a, b) = (a.components(), b.components());
    let mut acc = T::zero();
    for (k, &ak) in a.iter().enumerate().skip(1) {
        if ak == 0 {
            continue;
        }
        let mut row = T::zero();
        for (l, &bl) in b.iter().enumerate().take(k) {
            if bl != 0 {
                row += theta.get(k, l) * T::lit(bl as f64);
            }
        }
        acc += T::lit(ak as f64) * row;
    }
    acc
}

#[inline]
pub(crate) fn phase_unchecked<T: Real>(theta: &ThetaMatrix<T>, a: &MultiIndex, b: &MultiIndex) -> Complex<T> {
    unit_phase(phase_exponent(theta, a, b))
}

/// The unit scalar `φ(α,β)` with `u^α u^β = φ(α,β) u^{α+β}`.
pub fn phase<T: Real>(theta: &ThetaMatrix<T>, a: &MultiIndex, b: &MultiIndex) -> Result<Complex<T>> {
    for idx in [a, b] {
        if idx.len() != theta.dim() {
            return Err(NctError::DimensionMismatch { expected: theta.dim(), found: idx.len() });
        }
    }
    Ok(phase_unchecked(theta, a, b))
}

pub(crate) fn same_theta<T: Real>(a: &Arc<ThetaMatrix<T>>, b: &Arc<ThetaMatrix<T>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A finitely supported element `Σ c_α u^α` of the smooth torus algebra.
#[derive(Debug, Clone)]
pub struct TorusElement<T> {
    theta: Arc<ThetaMatrix<T>>,
    coeffs: BTreeMap<MultiIndex, Complex<T>>,
}

impl<T: Real> TorusElement<T> {
    pub fn zero(theta: &Arc<ThetaMatrix<T>>) -> Self {
        Self { theta: Arc::clone(theta), coeffs: BTreeMap::new() }
    }

    pub fn one(theta: &Arc<ThetaMatrix<T>>) -> Self {
        Self::scalar(theta, Complex::new(T::one(), T::zero()))
    }

    pub fn scalar(theta: &Arc<ThetaMatrix<T>>, c: Complex<T>) -> Self {
        Self::monomial(theta, MultiIndex::zero(theta.dim()), c)
    }

    /// `c · u^α`. Panics if `α` has the wrong length.
    pub fn monomial(theta: &Arc<ThetaMatrix<T>>, alpha: MultiIndex, c: Complex<T>) -> Self {
        assert_eq!(alpha.len(), theta.dim(), "multi-index length");
        let mut e = Self::zero(theta);
        if c.norm() >= T::drop_tolerance() {
            e.coeffs.insert(alpha, c);
        }
        e
    }

    /// The generator `u_k` (0-based `k`).
    pub fn generator(theta: &Arc<ThetaMatrix<T>>, k: usize) -> Self {
        Self::monomial(theta, MultiIndex::unit(theta.dim(), k), Complex::new(T::one(), T::zero()))
    }

    /// Sums repeated indices.
    pub fn from_terms<I>(theta: &Arc<ThetaMatrix<T>>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex<T>)>,
    {
        let mut e = Self::zero(theta);
        for (alpha, c) in terms {
            if alpha.len() != theta.dim() {
                return Err(NctError::DimensionMismatch { expected: theta.dim(), found: alpha.len() });
            }
            *e.coeffs.entry(alpha).or_default() += c;
        }
        e.prune();
        Ok(e)
    }

    pub(crate) fn from_map(theta: &Arc<ThetaMatrix<T>>, coeffs: BTreeMap<MultiIndex, Complex<T>>) -> Self {
        let mut e = Self { theta: Arc::clone(theta), coeffs };
        e.prune();
        e
    }

    fn prune(&mut self) {
        let tol = T::drop_tolerance();
        self.coeffs.retain(|_, c| c.norm() >= tol);
    }

    pub fn theta(&self) -> &Arc<ThetaMatrix<T>> {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex<T> {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    /// Nonzero terms in lexicographic index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex<T>)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `max ‖α‖_∞` over the support (0 for the zero element).
    pub fn degree(&self) -> i32 {
        self.coeffs.keys().map(MultiIndex::sup_norm).max().unwrap_or(0)
    }

    fn check_theta(&self, other: &Self) -> Result<()> {
        if same_theta(&self.theta, &other.theta) {
            Ok(())
        } else {
            Err(NctError::ThetaMismatch)
        }
    }

    /// Twisted convolution `(ab)_γ = Σ_{α+β=γ} a_α b_β φ(α,β)`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_theta(other)?;
        Ok(self.multiply_unchecked(other))
    }

    pub(crate) fn multiply_unchecked(&self, other: &Self) -> Self {
        let mut out: BTreeMap<MultiIndex, Complex<T>> = BTreeMap::new();
        let theta = &*self.theta;
        let commutative = theta.is_zero();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let mut c = *ca * *cb;
                if !commutative {
                    c *= phase_unchecked(theta, a, b);
                }
                *out.entry(a + b).or_default() += c;
            }
        }
        Self::from_map(&self.theta, out)
    }

    /// `(a*)_{−α} = conj(a_α) · conj(φ(α,−α))`, from `(u^α)* = (u^α)^{-1}`.
    pub fn adjoint(&self) -> Self {
        let theta = &*self.theta;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, c)| {
                let neg = -a;
                let ph = phase_unchecked(theta, a, &neg);
                (neg, (*c * ph).conj())
            })
            .collect();
        Self::from_map(&self.theta, coeffs)
    }

    /// The canonical trace: the coefficient at `α = 0`.
    pub fn trace(&self) -> Complex<T> {
        self.coeff(&MultiIndex::zero(self.dim()))
    }

    /// `δ_k`, 0-based axis: `(δ_k a)_α = i α_k a_α`.
    pub fn derive(&self, k: usize) -> Result<Self> {
        if k >= self.dim() {
            return Err(NctError::AxisOutOfRange { axis: k, dim: self.dim() });
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(a, _)| a.components()[k] != 0)
            .map(|(a, c)| (a.clone(), *c * Complex::new(T::zero(), T::lit(a.components()[k] as f64))))
            .collect();
        Ok(Self::from_map(&self.theta, coeffs))
    }

    /// `σ_z`: multiplies `c_α` by `z^α`. Requires `|z_k| = 1` to within the
    /// equality tolerance.
    pub fn torus_act(&self, z: &[Complex<T>]) -> Result<Self> {
        if z.len() != self.dim() {
            return Err(NctError::DimensionMismatch { expected: self.dim(), found: z.len() });
        }
        for (index, zk) in z.iter().enumerate() {
            if (zk.norm() - T::one()).abs() > T::equality_tolerance() {
                return Err(NctError::NotUnimodular { index, modulus: zk.norm().as_f64() });
            }
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, c)| {
                let w = a
                    .components()
                    .iter()
                    .zip(z)
                    .fold(Complex::new(T::one(), T::zero()), |acc, (&ak, zk)| acc * zk.powi(ak));
                (a.clone(), *c * w)
            })
            .collect();
        Ok(Self::from_map(&self.theta, coeffs))
    }

    /// `τ(b* a)`, which equals `Σ_α a_α conj(b_α)`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_theta(other)?;
        Ok(other.adjoint().multiply_unchecked(self).trace())
    }

    /// `Σ |c_α|²`
    pub fn l2_norm_sq(&self) -> T {
        self.coeffs.values().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_map(&self.theta, self.coeffs.iter().map(|(a, c)| (a.clone(), *c * s)).collect())
    }

    /// Sup-norm distance of the coefficient maps.
    pub fn sup_distance(&self, other: &Self) -> T {
        let mut d = T::zero();
        for (a, c) in &self.coeffs {
            d = d.max((*c - other.coeff(a)).norm());
        }
        for (a, c) in &other.coeffs {
            if !self.coeffs.contains_key(a) {
                d = d.max(c.norm());
            }
        }
        d
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        same_theta(&self.theta, &other.theta) && self.sup_distance(other) <= tol
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        assert!(same_theta(&self.theta, &other.theta), "operands live over different theta matrices");
        let mut out = self.coeffs.clone();
        for (a, c) in &other.coeffs {
            *out.entry(a.clone()).or_default() += *c * sign;
        }
        Self::from_map(&self.theta, out)
    }
}

impl<T: Real> PartialEq for TorusElement<T> {
    /// Equality at the default tolerance.
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, T::equality_tolerance())
    }
}

impl<T: Real> Add for &TorusElement<T> {
    type Output = TorusElement<T>;
    /// Panics on mismatched theta.
    fn add(self, rhs: Self) -> TorusElement<T> {
        self.combine(rhs, T::one())
    }
}

impl<T: Real> Sub for &TorusElement<T> {
    type Output = TorusElement<T>;
    fn sub(self, rhs: Self) -> TorusElement<T> {
        self.combine(rhs, -T::one())
    }
}

impl<T: Real> Neg for &TorusElement<T> {
    type Output = TorusElement<T>;
    fn neg(self) -> TorusElement<T> {
        self.scale(Complex::new(-T::one(), T::zero()))
    }
}

impl<T: Real> Mul for &TorusElement<T> {
    type Output = TorusElement<T>;
    /// Panics on mismatched theta; see [`TorusElement::multiply`].
    fn mul(self, rhs: Self) -> TorusElement<T> {
        self.multiply(rhs).expect("operands live over different theta matrices")
    }
}

impl<T: Real> fmt::Display for TorusElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)u^{a}", c.re, c.im)?;
        }
        Ok(())
    }
}
