//! Propagation of slow-light optical vector vortices through a coherently
//! prepared four-level tripod medium.
//!
//! The crate is organised bottom-up:
//!
//! * [`beam`]: the entrance field, a superposition of `±l` Laguerre–Gaussian
//!   vortices carried by opposite circular polarizations.
//! * [`bloch`]: the tripod optical Bloch equations, the phaseonium ground
//!   state and the first-order steady-state probe coherences.
//! * [`propagation`]: the medium response `Q`, the coupling matrix `K` and
//!   the closed-form depth evolution of the field pair.
//! * [`response`]: polarization-dependent linear susceptibilities and the
//!   azimuth/detuning maps built from them.
//! * [`polarization`]: Stokes parameters, ellipticity and orientation,
//!   texture maps and cross-section averages.
//!
//! All frequencies are in units of the excited-state half-width `Γ`, depth is
//! the dimensionless `ζz`, and transverse coordinates are in units of the
//! beam waist `w`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod bloch;
mod error;
pub mod ode;
pub mod polarization;
pub mod propagation;
pub mod response;
mod scenario;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scenario::Scenario;
