//! Lattices `H ≤ ℝ^p × ℝ̂^p` acting on `S(ℝ^p)` by
//! `(u_{(n,ψ)} f)(m) = e^{i m·ψ} f(m+n)`, and the connection
//! `∇_k = Σ_l C_kl s_l + Σ_l D_kl ∂_l` with `s_l = −i x_l`.
//!
//! The generator matrix `G` has the lattice generators `(r^k; φ^k)` as
//! columns. With `(C D) = −i G⁻¹` the coefficients are kept as the real
//! `K = G⁻¹`, so `C = −i K_L`, `D = −i K_R` for the left and right `p`
//! columns of `K`. Consequences, all in this convention:
//!
//! - `[∇_k, u_{(r,φ)}] = (K·(r;φ))_k · u_{(r,φ)}`
//! - `[∇_k, ∇_l] = i(C Dᵀ − D Cᵀ)_kl = −i·Q_kl` with `Q = K_L K_Rᵀ − K_R K_Lᵀ`
//! - `u_g u_h = e^{i(r_g·φ_h − r_h·φ_g)} u_h u_g`
//!
//! The pairing is `⟨r, φ⟩ = e^{i r·φ}`, so all `2π` factors are explicit.

use nalgebra::DMatrix;

use crate::error::{NctError, Result};
use crate::scalar::Real;
use crate::torus::ThetaMatrix;

/// Generator matrices with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Tolerance for `m_g·ψ_h − m_h·ψ_g ∈ 2πℤ` in [`dual_lattice`].
pub const PAIRING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergLattice<T> {
    p: usize,
    g: DMatrix<T>,
    condition: T,
}

fn condition_number<T: Real>(m: &DMatrix<T>) -> T {
    let sv = T::singular_values(m);
    let max = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    let min = sv.iter().fold(T::infinity(), |a, &b| a.min(b));
    if min > T::zero() {
        max / min
    } else {
        T::infinity()
    }
}

impl<T: Real> HeisenbergLattice<T> {
    /// `g` is `2p × 2p` with generator `k` in column `k`.
    pub fn new(p: usize, g: DMatrix<T>) -> Result<Self> {
        if p == 0 || g.nrows() != 2 * p || g.ncols() != 2 * p {
            return Err(NctError::ShapeMismatch(format!(
                "generator matrix of shape {}x{} for p = {p}",
                g.nrows(),
                g.ncols()
            )));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(NctError::Input("non-finite generator entry".into()));
        }
        let condition = condition_number(&g);
        if !(condition < T::lit(MAX_CONDITION)) {
            return Err(NctError::SingularLattice { condition: condition.as_f64() });
        }
        Ok(Self { p, g, condition })
    }

    /// Row-major `2p × 2p`.
    pub fn from_rows(p: usize, rows: &[Vec<T>]) -> Result<Self> {
        if rows.len() != 2 * p || rows.iter().any(|r| r.len() != 2 * p) {
            return Err(NctError::ShapeMismatch(format!("expected {0}x{0} rows for p = {p}", 2 * p)));
        }
        Self::new(p, DMatrix::from_fn(2 * p, 2 * p, |r, c| rows[r][c]))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn generators(&self) -> &DMatrix<T> {
        &self.g
    }

    pub fn condition(&self) -> T {
        self.condition
    }

    /// Column `k` as `(r; φ)`.
    pub fn generator(&self, k: usize) -> Vec<T> {
        self.g.column(k).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.g.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// The standard symplectic `J = [[0, 1], [−1, 0]]` in `p × p` blocks.
pub fn symplectic<T: Real>(p: usize) -> DMatrix<T> {
    DMatrix::from_fn(2 * p, 2 * p, |r, c| {
        if c == r + p {
            T::one()
        } else if r == c + p {
            -T::one()
        } else {
            T::zero()
        }
    })
}

/// `K = G⁻¹`, standing for `(C D) = −i K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients<T> {
    p: usize,
    k: DMatrix<T>,
    /// `max |(K·G − 1)_ij|`
    residual: T,
}

impl<T: Real> ConnectionCoefficients<T> {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> &DMatrix<T> {
        &self.k
    }

    /// First `p` columns: `C = −i·K_L`.
    pub fn k_left(&self) -> DMatrix<T> {
        self.k.columns(0, self.p).into_owned()
    }

    /// Last `p` columns: `D = −i·K_R`.
    pub fn k_right(&self) -> DMatrix<T> {
        self.k.columns(self.p, self.p).into_owned()
    }

    pub fn residual(&self) -> T {
        self.residual
    }
}

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

pub fn solve_connection<T: Real>(lat: &HeisenbergLattice<T>) -> Result<ConnectionCoefficients<T>> {
    let k = T::try_inverse(&lat.g).ok_or(NctError::SingularLattice { condition: f64::INFINITY })?;
    let n = 2 * lat.p;
    let residual = max_abs(&(&k * &lat.g - DMatrix::<T>::identity(n, n)));
    Ok(ConnectionCoefficients { p: lat.p, k, residual })
}

/// The real number `c` with `[∇_k, u_{(r,φ)}] = c·u_{(r,φ)}`, namely
/// `i(Cr + Dφ)_k = (K·(r;φ))_k` (0-based axis).
pub fn commutator_coefficient<T: Real>(cc: &ConnectionCoefficients<T>, k: usize, r: &[T], phi: &[T]) -> Result<T> {
    let n = 2 * cc.p;
    if k >= n {
        return Err(NctError::AxisOutOfRange { axis: k, dim: n });
    }
    if r.len() != cc.p || phi.len() != cc.p {
        return Err(NctError::DimensionMismatch { expected: cc.p, found: r.len().max(phi.len()) });
    }
    let v = r.iter().chain(phi);
    Ok(cc.k.row(k).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + *a * *b))
}

/// `Q = K_L K_Rᵀ − K_R K_Lᵀ`, with `[∇_k, ∇_l] = −i·Q_kl`. Antisymmetric by
/// construction; for `p = 1`, `Q_12 = det K`.
pub fn curvature_constant<T: Real>(cc: &ConnectionCoefficients<T>) -> DMatrix<T> {
    let (kl, kr) = (cc.k_left(), cc.k_right());
    let a = &kl * kr.transpose();
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| if i == j { T::zero() } else { a[(i, j)] - a[(j, i)] })
}

/// `max` over generator pairs of the distance of `g_aᵀ J h_b` from `2πℤ`.
pub fn pairing_defect<T: Real>(a: &HeisenbergLattice<T>, b: &HeisenbergLattice<T>) -> T {
    let j = symplectic::<T>(a.p);
    let pairs = a.g.transpose() * j * &b.g;
    let tau = T::TAU();
    pairs.iter().fold(T::zero(), |acc, &x| {
        let q = x / tau;
        acc.max((q - q.round()).abs() * tau)
    })
}

/// Generators of `H^⊥ = {g : m_g·ψ_h − m_h·ψ_g ∈ 2πℤ ∀h ∈ H}`, computed as
/// `2π·(JG)^{-T}` and accepted only if the pairing check passes.
pub fn dual_lattice<T: Real>(lat: &HeisenbergLattice<T>) -> Result<HeisenbergLattice<T>> {
    let jg = symplectic::<T>(lat.p) * &lat.g;
    let inv = T::try_inverse(&jg).ok_or(NctError::SingularLattice { condition: f64::INFINITY })?;
    let dual = HeisenbergLattice::new(lat.p, inv.transpose() * T::TAU())?;
    let defect = pairing_defect(&dual, lat);
    if !(defect <= T::lit(PAIRING_TOL)) {
        return Err(NctError::DualPairing { defect: defect.as_f64() });
    }
    Ok(dual)
}

/// `θ_kl = (r^k·φ^l − r^l·φ^k)/2π`, so that `u_k u_l = e^{2πiθ_kl} u_l u_k`.
/// For `k < l` the value is reduced into `[0,1)`; `θ_lk = −θ_kl`.
pub fn theta_of<T: Real>(lat: &HeisenbergLattice<T>) -> ThetaMatrix<T> {
    let n = 2 * lat.p;
    let omega = lat.g.transpose() * symplectic::<T>(lat.p) * &lat.g;
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for k in 0..n {
        for l in (k + 1)..n {
            let x = omega[(k, l)] / T::TAU();
            let mut t = x - x.floor();
            if t >= T::one() {
                t = T::zero();
            }
            upper.push(t);
        }
    }
    ThetaMatrix::from_upper(n, &upper).expect("reduced entries lie in [0,1)")
}

/// `ε = K̃·K⁻¹`, the frame change with `Σ_l ε_kl ∇_l = ∇̃_k`.
pub fn epsilon_of<T: Real>(dual_cc: &ConnectionCoefficients<T>, cc: &ConnectionCoefficients<T>) -> Result<DMatrix<T>> {
    if dual_cc.p != cc.p {
        return Err(NctError::ShapeMismatch(format!("p = {} against p = {}", dual_cc.p, cc.p)));
    }
    let k_inv = T::try_inverse(&cc.k).ok_or(NctError::SingularLattice { condition: f64::INFINITY })?;
    Ok(&dual_cc.k * k_inv)
}

#[derive(Debug, Clone)]
pub struct IntegrabilityReport<T> {
    pub p: usize,
    pub condition: T,
    pub dual: HeisenbergLattice<T>,
    pub theta: ThetaMatrix<T>,
    pub dual_theta: ThetaMatrix<T>,
    pub coefficients: ConnectionCoefficients<T>,
    pub dual_coefficients: ConnectionCoefficients<T>,
    /// `Q` and `Q̃`, see [`curvature_constant`].
    pub curvature: DMatrix<T>,
    pub dual_curvature: DMatrix<T>,
    pub epsilon: DMatrix<T>,
    pub epsilon_det: T,
    /// `max |ε·K − K̃|`
    pub epsilon_residual: T,
    pub pairing_defect: T,
    /// `max |Q_kl|`; `[∇_k, ∇_l] = −i·Q_kl` is a scalar in all cases.
    pub curvature_norm: T,
    pub curvature_constant: bool,
    pub epsilon_invertible: bool,
    pub pairing_integral: bool,
}

pub fn integrability_report<T: Real>(lat: &HeisenbergLattice<T>) -> Result<IntegrabilityReport<T>> {
    let dual = dual_lattice(lat)?;
    let cc = solve_connection(lat)?;
    let dual_cc = solve_connection(&dual)?;
    let epsilon = epsilon_of(&dual_cc, &cc)?;
    let epsilon_residual = max_abs(&(&epsilon * &cc.k - &dual_cc.k));
    let epsilon_det = T::determinant(&epsilon);
    let epsilon_invertible = condition_number(&epsilon) < T::lit(MAX_CONDITION) && epsilon_det.abs() > T::lit(1e-10);
    let pairing_defect = pairing_defect(&dual, lat);
    let curvature = curvature_constant(&cc);
    Ok(IntegrabilityReport {
        p: lat.p,
        condition: lat.condition,
        theta: theta_of(lat),
        dual_theta: theta_of(&dual),
        curvature_norm: max_abs(&curvature),
        dual_curvature: curvature_constant(&dual_cc),
        curvature,
        coefficients: cc,
        dual_coefficients: dual_cc,
        epsilon,
        epsilon_det,
        epsilon_residual,
        pairing_integral: pairing_defect <= T::lit(PAIRING_TOL),
        pairing_defect,
        curvature_constant: true,
        epsilon_invertible,
        dual,
    })
}
