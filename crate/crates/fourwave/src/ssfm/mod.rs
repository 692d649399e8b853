//! Split-step Fourier ground-truth simulator for the WDM link.
//!
//! The simulator propagates one cyclic frame of samples holding every
//! channel of the grid through the amplified line and measures the
//! effective SNR of a selected channel after an ideal coherent receiver.
//! It shares no code with the analytic models beyond the configuration
//! types, so agreement between the two is evidence, not tautology.
//!
//! Conventions, fixed once and used consistently everywhere:
//!
//! * Analytic signal `A(t) = Σ_m Â_m e^{+i 2π f_m t}`, so the forward DFT
//!   of the sample vector gives `Â` and dispersion over `dz` multiplies
//!   bin `m` by `exp(+i (β₂/2) ω_m² dz)`.
//! * `α` attenuates **power**: `P(z) = P(0) e^{−αz}`, amplitudes decay at
//!   `α/2`. Each span's amplifier applies exactly the inverse amplitude
//!   gain `e^{αL_s/2}`.
//! * Nonlinearity is the Manakov average: both polarizations rotate by
//!   the common phase `(8/9)·γ·(|A_x|² + |A_y|²)` per unit length.
//! * The frame is periodic. Linear steps act on the discrete spectrum,
//!   so dispersion wrap-around is exact rather than an edge artifact;
//!   the frame must still be longer than the walk-off memory of the
//!   line for the cyclic statistics to stand in for a continuous stream
//!   (enforced by [`propagate`]).
//! * Launch power is the total over both polarizations of one channel,
//!   matching the power convention of the analytic predictors.
//!
//! The pipeline is [`generate_waveform`] → [`propagate`] → [`receive`] →
//! [`measure_snr`].

mod engine;
mod receiver;
mod waveform;

pub use engine::{propagate, SsfmConfig, StepRule};
pub use receiver::{measure_snr, receive, SNR_SENTINEL_DB};
pub use waveform::{generate_waveform, rrc_response, Waveform};

use crate::nli::ConfigError;
use thiserror::Error;

/// Failure modes of waveform synthesis, propagation, and reception.
#[derive(Debug, Error)]
pub enum SsfmError {
    /// Link or grid configuration failed validation.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Inputs are structurally unusable (wrong channel count, unequal or
    /// empty sequences, zero-power channels, non-finite sample rate, …).
    #[error("invalid simulation input: {0}")]
    Setup(String),
    /// The sample rate cannot represent the occupied band.
    #[error(
        "sample rate {sample_rate_ghz:.3} GHz cannot carry the occupied band \
         (needs ≥ {required_ghz:.3} GHz); raise samples_per_symbol"
    )]
    Aliasing {
        required_ghz: f64,
        sample_rate_ghz: f64,
    },
    /// A channel offset does not fall on the cyclic frame's frequency
    /// lines, which would break periodicity.
    #[error(
        "channel offset {offset_ghz:.6} GHz is not an integer multiple of the \
         frame line spacing {line_ghz:.9} GHz; choose a symbol count that \
         aligns the grid"
    )]
    BinMisaligned { offset_ghz: f64, line_ghz: f64 },
    /// The frame is shorter than the dispersion memory of the line.
    #[error(
        "frame of {samples} samples is shorter than the line's walk-off \
         memory (~{required} samples); lengthen the sequence"
    )]
    FrameTooShort { samples: usize, required: usize },
    /// The step-size rule is unusable or was driven past its refinement
    /// limit.
    #[error("step rule violated: {0}")]
    StepRule(String),
    /// Channel index outside the grid.
    #[error("channel index {index} out of range for {count} channels")]
    UnknownChannel { index: usize, count: usize },
    /// Transmitted and received sequences differ in length.
    #[error("length mismatch: {tx} transmitted vs {rx} received symbols")]
    LengthMismatch { tx: usize, rx: usize },
    /// Launch power must be strictly positive.
    #[error("launch power {0} W must be > 0")]
    NonPositivePower(f64),
}
