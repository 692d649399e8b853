//! Small numeric and bookkeeping helpers shared across the crate.

use num_complex::Complex64;
use sha2::{Digest, Sha256};

/// Neumaier-compensated accumulator. Sums stay reproducible to ~1e-16
/// relative regardless of how callers order their loops.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex accumulator (independent Neumaier sums per part).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanC {
    re: Kahan,
    im: Kahan,
}

impl KahanC {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Power ratio to decibels.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Decibels to power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * from_db(dbm)
}

/// Watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    to_db(w / 1e-3)
}

/// Derives a child RNG seed from a base seed and a role label, so that every
/// consumer (per channel, per sweep point, per noise source) draws from an
/// independent, reproducible stream.
pub fn derive_seed(base: u64, role: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update([0u8]);
    h.update(role.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is long enough"))
}

/// SHA-256 of a canonical string key, hex-encoded. Used for cache file names.
pub fn hex_digest(key: &str) -> String {
    let mut h = Sha256::new();
    h.update(key.as_bytes());
    let d = h.finalize();
    let mut s = String::with_capacity(64);
    for b in d {
        use std::fmt::Write;
        write!(s, "{b:02x}").expect("writing to a String cannot fail");
    }
    s
}
