//! Constant-composition distribution matching.
//!
//! Fixed-length bits in, fixed-length amplitude codeword out, realized as
//! exact-integer arithmetic coding on the shrinking composition: the k-bit
//! input is read as the lexicographic rank of the codeword among all
//! arrangements of the composition, and rank/unrank walk the composition
//! one position at a time. Exact integers (rather than finite-precision
//! interval arithmetic) are what make the full rate k = ⌊log₂ multinomial⌋
//! achievable.

use super::ShapingError;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Occurrence counts per amplitude level over one codeword.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    counts: Vec<usize>,
}

impl Composition {
    pub fn new(counts: Vec<usize>) -> Result<Self, ShapingError> {
        if counts.is_empty() {
            return Err(ShapingError::InvalidComposition("no levels".into()));
        }
        if counts.iter().sum::<usize>() == 0 {
            return Err(ShapingError::InvalidComposition("blocklength 0".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Blocklength N (amplitudes per codeword).
    pub fn blocklength(&self) -> usize {
        self.counts.iter().sum()
    }

    /// The empirical distribution counts/N.
    pub fn empirical_probs(&self) -> Vec<f64> {
        let n = self.blocklength() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Number of arrangements N! / Π counts!. Exact.
pub fn multinomial(comp: &Composition) -> BigUint {
    // Product of binomials over prefix sums; each binomial is built by the
    // multiply/divide ladder, which stays exact at every step.
    let mut m = BigUint::one();
    let mut total = 0usize;
    for &c in comp.counts() {
        total += c;
        m *= binomial(total, c);
    }
    m
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k.min(n));
    let mut b = BigUint::one();
    for i in 0..k {
        b = b * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    b
}

/// Input bit budget k = ⌊log₂ multinomial(N; counts)⌋.
///
/// Exact big-integer arithmetic below a size threshold; above it, a
/// Stirling-series log evaluation with a guard band that falls back to the
/// exact path whenever log₂ lands within 1e-6 of an integer, so the floor
/// is always correct for N ≤ 10⁶.
pub fn ccdm_rate(comp: &Composition) -> usize {
    const EXACT_LIMIT: usize = 20_000;
    let n = comp.blocklength();
    if n <= EXACT_LIMIT {
        return rate_exact(comp);
    }
    let log2_m = log2_multinomial_stirling(comp);
    let frac = log2_m - log2_m.floor();
    if frac < 1e-6 || frac > 1.0 - 1e-6 {
        return rate_exact(comp);
    }
    log2_m.floor() as usize
}

fn rate_exact(comp: &Composition) -> usize {
    let m = multinomial(comp);
    // bits() is ⌊log₂ m⌋ + 1 for m ≥ 1.
    (m.bits() - 1) as usize
}

fn log2_multinomial_stirling(comp: &Composition) -> f64 {
    let n = comp.blocklength();
    let mut ln = ln_factorial(n);
    for &c in comp.counts() {
        ln -= ln_factorial(c);
    }
    ln / std::f64::consts::LN_2
}

fn ln_factorial(n: usize) -> f64 {
    if n < 1024 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    // Stirling series; truncation error < 1/(1188 n^7), far below f64
    // rounding at this size.
    let x = n as f64;
    (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// Encodes `bits` (big-endian) into the codeword of that lexicographic rank.
/// The output contains level index `i` exactly `counts[i]` times.
pub fn ccdm_encode(bits: &[bool], comp: &Composition) -> Result<Vec<usize>, ShapingError> {
    let k = ccdm_rate(comp);
    if bits.len() != k {
        return Err(ShapingError::WrongBitLength {
            expected: k,
            got: bits.len(),
        });
    }
    let mut rank = BigUint::zero();
    for &b in bits {
        rank <<= 1;
        if b {
            rank += 1u32;
        }
    }
    let n = comp.blocklength();
    let mut remaining = comp.counts().to_vec();
    let mut m = multinomial(comp);
    let mut out = Vec::with_capacity(n);
    for pos in 0..n {
        let n_rem = n - pos;
        for s in 0..remaining.len() {
            if remaining[s] == 0 {
                continue;
            }
            // Codewords starting with s at this position.
            let m_s = &m * BigUint::from(remaining[s]) / BigUint::from(n_rem);
            if rank < m_s {
                out.push(s);
                remaining[s] -= 1;
                m = m_s;
                break;
            }
            rank -= m_s;
        }
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

/// Inverse of [`ccdm_encode`]: recovers the bit string from a codeword.
pub fn ccdm_decode(codeword: &[usize], comp: &Composition) -> Result<Vec<bool>, ShapingError> {
    let n = comp.blocklength();
    let mut observed = vec![0usize; comp.counts().len()];
    for &s in codeword {
        if s >= observed.len() {
            return Err(ShapingError::CompositionMismatch);
        }
        observed[s] += 1;
    }
    if codeword.len() != n || observed != comp.counts() {
        return Err(ShapingError::CompositionMismatch);
    }
    let mut remaining = comp.counts().to_vec();
    let mut m = multinomial(comp);
    let mut rank = BigUint::zero();
    for (pos, &sym) in codeword.iter().enumerate() {
        let n_rem = n - pos;
        for s in 0..sym {
            if remaining[s] == 0 {
                continue;
            }
            rank += &m * BigUint::from(remaining[s]) / BigUint::from(n_rem);
        }
        m = &m * BigUint::from(remaining[sym]) / BigUint::from(n_rem);
        remaining[sym] -= 1;
    }
    let k = ccdm_rate(comp);
    if rank.bits() > k as u64 {
        // Valid composition, but not a rank the k-bit encoder can emit.
        return Err(ShapingError::CompositionMismatch);
    }
    let mut bits = vec![false; k];
    for i in 0..k {
        bits[k - 1 - i] = rank.bit(i as u64);
    }
    Ok(bits)
}
