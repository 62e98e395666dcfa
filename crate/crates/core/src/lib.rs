//! Exact decoherence of one and two qubits coupled to Lorentzian vacuum
//! reservoirs, without the rotating-wave approximation.
//!
//! The single-qubit master equation carries two commuting SU(2)-like
//! superoperator algebras (coherence sector `J`, population sector `K`).
//! Its time-ordered propagator is disentangled into ordered exponentials
//! whose coefficients obey Riccati equations; [`lie_channel`] integrates
//! those and assembles the channel. [`two_qubit`] lifts the channel to two
//! independent qubits and [`entanglement`] measures the result with the
//! Wootters concurrence.
//!
//! Every closed form has an independent brute-force counterpart in
//! [`oracle`]: direct Liouville integration, adaptive quadrature, and the
//! exact rotating-wave reference model.
//!
//! Basis conventions: a single-qubit density matrix is stored as
//! `[[ρ11, ρ10], [ρ01, ρ00]]` (excited state first), and the two-qubit
//! product basis is `{|11⟩, |10⟩, |01⟩, |00⟩}`.

#![forbid(unsafe_code)]
// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod kernels;
pub mod lie_channel;
pub mod ode;
pub mod oracle;
pub mod two_qubit;

pub use error::{Error, Result};
pub use kernels::{BathParams, CoefficientModel, CoefficientSet};
pub use lie_channel::{ChannelCoefficients, DisentangleState, IntegratorSettings};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Single-qubit density matrix, `[[ρ11, ρ10], [ρ01, ρ00]]`.
pub type Density2 = nalgebra::Matrix2<C64>;

/// Two-qubit density matrix in the product basis `{|11⟩, |10⟩, |01⟩, |00⟩}`.
pub type JointDensity = nalgebra::Matrix4<C64>;
