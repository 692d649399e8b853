//! Finite-blocklength 4D probabilistic shaping.
//!
//! The pipeline is: a target amplitude distribution ([`Distribution1D`]) is
//! quantized to an integer [`Composition`], a constant-composition
//! distribution matcher ([`ccdm_encode`]/[`ccdm_decode`]) turns information
//! bits into amplitude codewords with exactly that composition, and the 4D
//! mapper ([`map_4d`]) spreads consecutive amplitudes over the four real
//! dimensions of a dual-polarization symbol with i.i.d. signs. Level
//! relabelings ([`PermutationAssignment`]) produce families of shaped
//! formats that share one entropy and one codebook.

mod ccdm;
mod dist;
mod mapper;

pub use ccdm::{ccdm_decode, ccdm_encode, ccdm_rate, multinomial, Composition};
pub use dist::{
    composition_for, entropy, permutations_4d, Distribution1D, PermutationAssignment,
};
pub use mapper::{
    iid_sequence, map_4d, shaped_sequence, shaped_sequence_covering, Sign, SymbolSequence,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShapingError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("input has {got} bits but the composition admits exactly {expected}")]
    WrongBitLength { expected: usize, got: usize },
    #[error("codeword does not match the declared composition (synchronization loss?)")]
    CompositionMismatch,
    #[error("amplitude count {0} is not divisible by 4")]
    NotDivisibleBy4(usize),
    #[error("{0}")]
    LengthMismatch(String),
    #[error("amplitude {0} is not one of the distribution levels")]
    UnknownLevel(f64),
}
