//! Nonlinear-interference (NLI) prediction and split-step simulation for
//! probabilistically shaped coherent WDM links.
//!
//! The crate has five parts:
//!
//! * [`shaping`] — fixed-to-fixed distribution matching (CCDM), permutation
//!   families over a base amplitude distribution, and the mapper that turns
//!   amplitude streams into dual-polarization 4D symbols.
//! * [`moments`] — joint 4D moment/cumulant statistics of symbol sequences,
//!   including windowed variants that retain short-blocklength energy
//!   correlations, and the scalar coefficients consumed by the models.
//! * [`nli`] — the interference models themselves: collision-kernel lattices
//!   from first-order perturbation of the Manakov equation, frequency-domain
//!   Gaussian-baseline integrals, χ tables with on-disk caching, and SNR
//!   prediction.
//! * [`ssfm`] — the split-step Fourier ground-truth simulator with matched
//!   receiver and SNR measurement.
//! * [`harness`] — experiment configs, sweeps, CSV emission, resume cache,
//!   and everything the `fourwave` CLI exposes.

pub mod combinatorics;
pub mod harness;
pub mod moments;
pub mod nli;
pub mod shaping;
pub mod ssfm;
pub mod util;

pub use num_complex::Complex64;
