//! Numerical core for finite-prime chiral Dirac gap spectra.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! - [`floquet`]: plane-wave Floquet–Bloch bands of an even Hill operator,
//!   band edges, open gaps and a mid-gap reference energy.
//! - [`arithmetic`]: primes, deterministic synthetic Hecke ensembles, the
//!   quadratic coefficient family, mass shifts and local factors.
//! - [`gapspec`]: fiber eigenvalues `±(E_n(κ_j) − E* + m)` filtered to the
//!   gaps of the symmetric Dirac band set, grouped with multiplicities.
//! - [`shift`]: odd spectral-shift staircases, pairings against probes,
//!   stationary-point scans and the prime-indexed shift density.
//! - [`tracekit`]: the fiber trace and its separated Fourier-side form.
//! - [`matmodel`]: explicit finite matrix models of the global and
//!   arithmetic Dirac operators with chiral and counting checks.
//! - [`zeta`]: zero ordinates, affine alignment and staircase mismatch.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod arithmetic;
pub mod eigen;
mod error;
pub mod floquet;
pub mod gapspec;
pub mod matmodel;
pub mod shift;
pub mod tracekit;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
