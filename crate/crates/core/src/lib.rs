//! Numerical laboratory for spectral flow of twisted Dirac operators on the
//! flat 3-torus.
//!
//! The crate builds, for any integer `k`, a smooth gauge field
//! `F_k: T^3 -> SU(2) ⊂ U(N)` of winding number `k`, couples the Dirac
//! operator of a non-trivial spin structure to the affine path of connections
//! `d + t·F_k^{-1}dF_k`, and computes three independent integers that must
//! agree:
//!
//! * the mapping degree of the underlying map `T^3 -> S^3` (quadrature of the
//!   pulled-back volume form),
//! * the Chern-Simons winding number of `F_k` (equivalently the mapping-torus
//!   index of the suspended operator),
//! * the spectral flow of the operator path, counted by a window/Weyl
//!   stepping engine.
//!
//! All core math is generic over the real scalar (`f32` or `f64`) through the
//! [`Real`] trait; concrete `f64` aliases live at the crate root.

pub mod clifford;
pub mod dirac;
pub mod eigh;
pub mod error;
pub mod fieldio;
pub mod fields;
pub mod grid;
pub mod lobpcg;
pub mod profile;
pub mod quaternion;
pub mod scalar;
pub mod sfl;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex scalar built over the generic real type.
pub type Cx<T> = num_complex::Complex<T>;

// Concrete aliases for the common double-precision instantiation.
pub type CliffordModel64 = clifford::CliffordModel<f64>;
pub type FrequencyLattice64 = clifford::FrequencyLattice<f64>;
pub type CollapseProfile64 = profile::CollapseProfile<f64>;
pub type SphereMap64 = fields::SphereMap<f64>;
pub type UnitaryField64 = fields::UnitaryField<f64>;
pub type ConnectionForm64 = fields::ConnectionForm<f64>;
pub type DiracOperator64 = dirac::DiracOperator<f64>;
pub type SpectralWindow64 = eigh::SpectralWindow<f64>;
pub type SflResult64 = sfl::SflResult<f64>;
