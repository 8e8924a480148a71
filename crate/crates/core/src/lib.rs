//! Quantum Fisher information and Uhlmann curvature over Hermitian Lie algebras.
//!
//! The crate builds orthonormal generator bases (Gell-Mann, collective
//! symmetric-subspace, spin-1 dipole, full observable algebra), prepares probe
//! states, and computes the QFIM, the Uhlmann curvature tensor, the
//! metrological incompatibility and derived optimality criteria. The
//! [`invariance`] module checks that QFIM and curvature spectra are conserved
//! under unitaries generated by the same algebra, and [`dynamics`] runs the
//! one-axis-twisting / hyperfine-rotation parameter sweeps.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`, which is what the CLI uses.

pub mod cli;
pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod invariance;
pub mod lie_basis;
pub mod linalg;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};
pub use scalar::Real;

pub type LieBasis64 = lie_basis::LieBasis<f64>;
pub type Operator64 = lie_basis::Operator<f64>;
pub type PureState64 = states::PureState<f64>;
pub type DensityMatrix64 = states::DensityMatrix<f64>;
pub type Qfim64 = geometry::Qfim<f64>;
pub type Uct64 = geometry::Uct<f64>;
pub type GroupElement64 = invariance::GroupElement<f64>;
pub type HermitianMatrix64 = linalg::HermitianMatrix<f64>;

pub type LieBasis32 = lie_basis::LieBasis<f32>;
pub type PureState32 = states::PureState<f32>;
pub type Qfim32 = geometry::Qfim<f32>;
