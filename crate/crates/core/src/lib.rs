//! Smooth noncommutative tori as an executable algebra.
//!
//! Twisted Fourier series over `ℤ^N`, matrices over them, connections on the
//! free module with curvature and the Yang-Mills functional, gauge fixing of
//! flat connections to constant normal form and the resulting moduli point
//! in `(T^N)^n/σ_n`, plus the lattice data of the Heisenberg module over
//! `S(ℝ^p)`.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below are what the CLI and most callers use.
//!
//! ```
//! use std::sync::Arc;
//! use nct::spectral::{gauge_fix, GaugeFixOptions, TruncationWindow};
//! use nct::{canonicalize, Connection, MatrixElement, MultiIndex, ThetaMatrix};
//!
//! let theta = Arc::new(ThetaMatrix::from_upper(2, &[0.41421356237309503])?);
//! let d = Connection::trivial(&theta, 1);
//! let w = MatrixElement::diag_monomial(&theta, &[MultiIndex::new(&[2, -1])])?;
//! let conn = d.gauge_transform(&w, 1e-10)?;
//!
//! let fixed = gauge_fix(&conn, &TruncationWindow::new(8, 1, 2), &GaugeFixOptions::default())?;
//! let point = canonicalize(&fixed.lambdas, 1e-9)?;
//! assert_eq!(point.coords(), &[vec![0.0, 0.0]]);
//! # Ok::<(), nct::NctError>(())
//! ```

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod connection;
pub mod error;
pub mod heisenberg;
pub mod io;
pub mod matrix;
pub mod moduli;
pub mod sample;
pub mod spectral;
pub mod scalar;
pub mod torus;

pub use connection::{Connection, CurvatureClass, CurvatureReport};
pub use error::{NctError, Result};
pub use heisenberg::{HeisenbergLattice, IntegrabilityReport};
pub use matrix::{MatrixElement, ScalarMatrix};
pub use moduli::{canonicalize, equivalent, hall_matching, moduli_of, ModuliPoint};
pub use scalar::Real;
pub use spectral::{gauge_fix, GaugeFixOptions, GaugeFixResult, TruncationWindow};
pub use torus::{phase, MultiIndex, ThetaMatrix, TorusElement};

pub type ThetaMatrixF64 = ThetaMatrix<f64>;
pub type TorusElementF64 = TorusElement<f64>;
pub type MatrixElementF64 = MatrixElement<f64>;
pub type ConnectionF64 = Connection<f64>;
pub type ModuliPointF64 = ModuliPoint<f64>;
pub type HeisenbergLatticeF64 = HeisenbergLattice<f64>;

pub type ThetaMatrixF32 = ThetaMatrix<f32>;
pub type TorusElementF32 = TorusElement<f32>;
pub type MatrixElementF32 = MatrixElement<f32>;
pub type ConnectionF32 = Connection<f32>;
pub type ModuliPointF32 = ModuliPoint<f32>;
pub type HeisenbergLatticeF32 = HeisenbergLattice<f32>;
