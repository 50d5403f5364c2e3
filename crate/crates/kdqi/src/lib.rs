//! Desk-scale simulator and analysis toolkit for kernelized decoded quantum
//! interferometry: shaped spectra, programmable interference kernels, noise
//! channels with head-mass accounting, optimized phase instances, LDPC
//! density evolution and finite-length decoding, variational kernel tuning,
//! and circuit resource models.

pub mod cost;
pub mod error;
pub mod headmass;
pub mod io;
pub mod kernels;
pub mod ldpc;
pub mod noise;
pub mod opi;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
