//! Joint 4D moment statistics and the modulation coefficients derived from
//! them.
//!
//! A [`MomentSet`] holds every normalized joint moment
//! E[X_x^p X_x*^q X_y^r X_y*^s] up to total order six, estimated from a
//! symbol sequence or evaluated analytically from a constellation.
//! [`windowed_moments`] produces the finite-blocklength variant whose
//! energy-balanced fourth-order entries absorb the within-codeword energy
//! correlations of short CCDM blocks. [`coefficients_4d`] and
//! [`coefficients_egn`] reduce a moment set to the scalar coefficients the
//! interference models consume.

mod coefficients;
mod cumulants;
mod set;
#[cfg(test)]
pub(crate) mod testutil;
mod windowed;

pub use coefficients::{
    coefficients_4d, coefficients_egn, default_window, CoefficientSet, EgnCoefficients,
};
pub use cumulants::{joint_cumulant, Op, Pol};
pub use set::{MomentIndex, MomentSet};
pub use windowed::{windowed_moments, windowed_moments_with, WindowConfig, WindowNormalization, WindowWeights};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("empty symbol sequence")]
    EmptySequence,
    #[error("window length {w} exceeds sequence length {len}")]
    WindowTooLarge { w: usize, len: usize },
    #[error("window length must be at least 1")]
    WindowTooSmall,
    #[error("missing moment entry ({0}, {1}, {2}, {3})")]
    MissingEntry(u8, u8, u8, u8),
    #[error("second moment is zero; cannot normalize")]
    ZeroSecondMoment,
    #[error("malformed moment text: {0}")]
    Parse(String),
}
