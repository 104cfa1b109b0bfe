//! Nonlinear spectral response of a driven two-level system.
//!
//! The Hamiltonian is `H(t) = -[Δ₁(t)σ₁ + Δ₃σ₃]` with a monochromatic drive
//! `Δ₁(t) = ε/2 + A·cos(wt)` and a static gap `Δ₃ = Δ/2`. The spin-spin
//! correlator `K(t,t') = ½ tr[U†σ₃Uσ₃]` is computed two independent ways:
//!
//! - **Frequency lattice** ([`kernel`], [`cfrac`]): the correlator's Fourier
//!   image is the diagonal-plus-hopping resolvent of a pentadiagonal operator
//!   on the lattice `{ω + k·w}`, solved by a matrix continued fraction and
//!   cross-checked against direct inversion of the truncated lattice matrix.
//! - **Time domain** ([`oracle`], [`spectrum`]): unitary propagation of the
//!   Schrödinger equation, damped Fourier transform, spectral peak detection.
//!
//! [`bcs`] carries the companion mean-field check: the same kernel machinery
//! applied to the pairing model reduces to the standard BCS gap equation.

// parameter guards are written `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bcs;
pub mod cfrac;
pub mod error;
pub mod kernel;
pub mod oracle;
pub mod spectrum;

pub use cfrac::{
    assemble_response, cf_iterate, gamma_chain, lattice_matrix_inverse, CfIterate, CfState,
    FrequencyLattice, LatticeInverse, MethodTag, ResponseSpectrum,
};
pub use error::{Error, Result};
pub use kernel::{f_reg, g_kernel_general, BandKernel, DriveSpec, Harmonic, KernelTerm, Regularization, Sign};
pub use oracle::{analytic_delta_zero, propagate, static_rabi_reference, PropagatorTrace};
pub use spectrum::{compare_peaks, damped_transform, find_peaks, MatchTable, Peak, PeakReport};
