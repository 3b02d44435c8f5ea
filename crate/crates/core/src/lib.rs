//! Simultaneous decoherence of position and momentum for a particle coupled
//! to two Von Neumann pointer environments through `H_int = x p₁ + p y₂`.
//!
//! The crate evaluates the system's reduced density matrix at arbitrary
//! times in either basis, checks it against Gaussian closed forms and a
//! brute-force tripartite oracle, and quantifies the approach to a uniform
//! ensemble (purity, entropy, widths, diagonal flatness).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod runner;
pub mod evolution;
pub mod wavepacket;

mod fourier;
mod linalg;

pub use error::{Error, Result};
pub use grid::{Basis, Grid};
pub use wavepacket::{
    autocorrelation, fourier_transform, sample_gaussian, DecoherenceFactor, GaussianSpec,
    WaveFunction, WavePacket,
};
