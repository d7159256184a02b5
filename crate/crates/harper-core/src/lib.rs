//! Single-particle physics of a two-dimensional superconducting transmon
//! lattice threaded by a synthetic magnetic flux (Harper model).
//!
//! The crate covers the full chain from circuit electrodynamics to measurable
//! quantities:
//!
//! * [`circuit`]: junction inductances and flux biases to effective hopping
//!   strengths `g_x`, `g_y` and flux `γ` per plaquette.
//! * [`lattice`]: dense Hamiltonians in real space, mixed
//!   quasimomentum/lattice space, and magnetic-Bloch space.
//! * [`spectra`]: Hermitian eigendecomposition, band structures with edge
//!   weights, flux butterflies, perturbative three-leg cross-checks.
//! * [`chirality`]: bond currents, vortex counting, chiral currents, and the
//!   vortex/Meissner threshold map.
//! * [`topology`]: Berry curvature, Chern numbers via link variables, winding
//!   numbers, and bulk-edge correspondence.
//! * [`measure`]: closed-form simulation of the measurement protocols
//!   (state generation, Rabi current extraction, phase reconstruction,
//!   feature-function spectroscopy, time-signal spectrum recovery).
//!
//! Conventions shared by every module: `ħ = 1` (Hamiltonian entries are
//! angular frequencies in rad/s), sites indexed `(n, m)` with
//! `n ∈ [−N, N]`, `m ∈ [−M, M]`, flat index `(m+M)·L + (n+N)`, and the gauge
//! that puts the flux phase `e^{iγn}` on column bonds only.

pub mod bessel;
pub mod chirality;
pub mod circuit;
pub mod constants;
pub mod error;
pub mod lattice;
pub mod measure;
pub mod spectra;
pub mod topology;
pub mod units;

pub use error::CoreError;
pub use lattice::{HermitianMatrix, LatticeSpec, SiteIndex};
pub use spectra::EigenSystem;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
