//! Joint cumulants of the 4D symbol from its moment table.

use super::{MomentError, MomentSet};
use crate::combinatorics::set_partitions;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Polarization component of one operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    X,
    Y,
}

/// One operand of a joint cumulant: a polarization component, conjugated or
/// not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Op {
    pub pol: Pol,
    pub conj: bool,
}

impl Op {
    pub const fn new(pol: Pol, conj: bool) -> Self {
        Self { pol, conj }
    }
}

fn partitions_up_to_6() -> &'static [Vec<Vec<Vec<usize>>>] {
    static CACHE: OnceLock<Vec<Vec<Vec<Vec<usize>>>>> = OnceLock::new();
    CACHE.get_or_init(|| (0..=6).map(set_partitions).collect())
}

/// Joint cumulant Cum(v₁, …, v_k) of up to six operands, each X_x, X_x*,
/// X_y, or X_y*, by moment-partition expansion:
/// κ = Σ_π (−1)^{|π|−1} (|π|−1)! Π_{B∈π} E[Π_{i∈B} v_i].
pub fn joint_cumulant(m: &MomentSet, ops: &[Op]) -> Result<Complex64, MomentError> {
    assert!(ops.len() <= 6, "cumulants carried only up to order six");
    let mut total = Complex64::new(0.0, 0.0);
    for partition in &partitions_up_to_6()[ops.len()] {
        let blocks = partition.len();
        let sign = if (blocks - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let fact: f64 = (1..blocks as u64).product::<u64>() as f64;
        let mut prod = Complex64::new(sign * fact, 0.0);
        for block in partition {
            let (mut p, mut q, mut r, mut s) = (0u8, 0u8, 0u8, 0u8);
            for &i in block {
                match (ops[i].pol, ops[i].conj) {
                    (Pol::X, false) => p += 1,
                    (Pol::X, true) => q += 1,
                    (Pol::Y, false) => r += 1,
                    (Pol::Y, true) => s += 1,
                }
            }
            prod *= m.get(p, q, r, s)?;
        }
        total += prod;
    }
    Ok(total)
}
