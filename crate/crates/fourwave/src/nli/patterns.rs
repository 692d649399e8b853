//! Enumeration of the variance terms of first-order nonlinear
//! interference.
//!
//! # Where the terms come from
//!
//! First-order perturbation of the Manakov equation writes the received
//! interference sample on polarization a as a sum over frequency
//! triplets: two unconjugated field factors (polarizations b and a) and
//! one conjugated factor (polarization b), each drawn from some channel,
//! summed over b ∈ {x, y} and over every channel combination
//! (c1, c2, c3) whose center frequencies satisfy f_c1 − f_c2 + f_c3 = 0.
//! Its variance E|ΔY|² − |E[ΔY·X₀*]|²/μ₂ therefore involves a joint
//! expectation over *six* field slots — three from ΔY, three conjugated
//! from ΔY* — which the Leonov–Shiryaev formula expands over even
//! partitions of the six slots into joint cumulants.
//!
//! Slot layout (0..6): slots 0,1,2 come from ΔY (unconjugated b,
//! conjugated b, unconjugated a); slots 3,4,5 from ΔY* (conjugated b′,
//! unconjugated b′, conjugated a).
//!
//! Each partition block constrains its slots' symbol times to coincide
//! (symbols are independent across time), which in the frequency domain
//! makes the block's signed frequency sum vanish; partitions therefore
//! map one-to-one onto nested frequency integrals over the spectral
//! islands. This module enumerates the partitions and classifies them;
//! the quadrature lives in the χ builder.
//!
//! # Why so few terms survive
//!
//! * A pair block is a second-order moment. For the supported formats
//!   (second-order proper: no cross-polarization correlation, no
//!   conjugate-free correlation) a pair must join one conjugated and one
//!   unconjugated slot of the *same* polarization and channel.
//! * Pairs internal to one side of the variance (both slots in ΔY, or
//!   both in ΔY*) describe the *mean* nonlinear distortion: with
//!   rectangle spectra and β₂-only dispersion their kernels are exactly
//!   phase matched (Δβ ≡ 0 on the paired manifold), so the mean
//!   distortion is frequency flat — a pure complex scale on the symbol —
//!   and is removed exactly by the receiver's least-squares scalar. All
//!   partitions containing such a pair cancel against the
//!   |E[ΔY·X₀*]|²/μ₂ subtraction and are skipped; the only residue of
//!   that subtraction is −|fourth-order mean|², a (coefficient)² term of
//!   relative size ~1e-4 that is truncated to keep η linear in the
//!   coefficients. The toy-lattice oracle test below verifies the
//!   cancellation numerically against a brute-force variance.
//! * The polarization labels b, b′, a each contribute one conjugated and
//!   one unconjugated slot, so once the proper pairs are removed, every
//!   remaining block is per-polarization conjugation-balanced: improper
//!   fourth-order signatures (the Λ/Ξ coefficient slots) never couple to
//!   a kernel, and the sixth-order signatures that arise are exactly the
//!   four Ψ slots.
//!
//! The survivors: two pure-pair matchings (the GN integrals — the
//! familiar diagonal one and the "wired" exchange pairing), five
//! fourth-order families distinguished by which proper pair is left
//! outside the cumulant block, and one sixth-order term. Everything else
//! is either zero or cancelled.

#[cfg(test)]
use crate::moments::Op;
use crate::moments::Pol;

/// Whether each slot's field factor appears conjugated.
pub(crate) const SLOT_CONJ: [bool; 6] = [false, true, false, true, false, true];

/// Interference family, split by the channels a term draws from:
/// self-channel, cross-channel (two channels), or multi-channel (three).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChiKind {
    Sci,
    Xci,
    Mci,
}

/// Coefficient slot a term's cumulant block resolves to. `Gn` marks the
/// pure second-order (Gaussian) terms whose coefficient is identically 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum CoeffSlot {
    Gn,
    Phi1,
    Phi2,
    Phi3,
    Psi1,
    Psi2,
    Psi3,
    Psi4,
}

/// Tie topology of a surviving partition: which frequency integral
/// evaluates it. The `Beat*`/`Sum` names record which proper pair sits
/// outside the fourth-order block (identified by its slot indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Topology {
    /// Pairs (0,3)(1,4)(2,5): the diagonal GN island integral.
    Diag,
    /// Pairs (0,5)(1,4)(2,3): the exchange GN pairing (same island and
    /// integrand by kernel symmetry; kept separate for the audit trail).
    Wired,
    /// Pair (0,3) + block {1,2,4,5}: difference-beat family.
    Beat03,
    /// Pair (0,5) + block {1,2,3,4}: difference-beat, exchange-tied.
    Beat05,
    /// Pair (2,3) + block {0,1,4,5}: difference-beat, exchange-tied.
    Beat23,
    /// Pair (2,5) + block {0,1,3,4}: the classical fourth-order
    /// correction (pump-side cumulant, receive pair intact).
    Beat25,
    /// Pair (1,4) + block {0,2,3,5}: sum-beat family (both unconjugated
    /// pump slots in the block).
    Sum14,
    /// Single sixth-order block of all six slots.
    Six,
}

impl Topology {
    /// Number of cumulant blocks in the partition (sets the 1/T power in
    /// the term's normalization).
    pub(crate) fn block_count(self) -> usize {
        match self {
            Topology::Diag | Topology::Wired => 3,
            Topology::Six => 1,
            _ => 2,
        }
    }
}

/// One surviving variance term: evaluate `topology`'s integral on the
/// channel combination, multiply by the polarization weight and the
/// named coefficient.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TermSpec {
    pub kind: ChiKind,
    pub slot: CoeffSlot,
    pub topology: Topology,
    /// Channel indices (c1, c2, c3) of the unconjugated side.
    pub combo: [i32; 3],
    /// Channel indices of the conjugated side.
    pub combo_p: [i32; 3],
    /// Summed polarization multiplicity.
    pub weight: f64,
}

/// Channel index carried by each slot for a combo pair.
fn slot_channel(slot: usize, combo: &[i32; 3], combo_p: &[i32; 3]) -> i32 {
    if slot < 3 {
        combo[slot]
    } else {
        combo_p[slot - 3]
    }
}

/// Polarization label of each slot given the summation variables
/// (b, b′, a).
fn slot_pol(slot: usize, b: Pol, bp: Pol, a: Pol) -> Pol {
    match slot {
        0 | 1 => b,
        3 | 4 => bp,
        _ => a,
    }
}

/// Classify a channel combination. `c2 = c1 + c3` always holds, so the
/// degenerate cases are exactly c3 = 0 (conjugate pump on the receive
/// channel's partner… i.e. pump pair self-beats) and c1 = 0.
pub(crate) fn classify_kind(combo: &[i32; 3]) -> ChiKind {
    let [c1, c2, c3] = *combo;
    if c1 == 0 && c2 == 0 && c3 == 0 {
        ChiKind::Sci
    } else if (c1 == c2 && c3 == 0) || (c2 == c3 && c1 == 0) {
        ChiKind::Xci
    } else {
        ChiKind::Mci
    }
}

/// All ordered channel combinations (c1, c2, c3) on a grid of
/// `channel_count` channels (odd, centered) with c1 − c2 + c3 = 0 drawn
/// relative to the receive channel: c2 = c1 + c3 must lie on the grid.
pub(crate) fn channel_combos(channel_count: usize) -> Vec<[i32; 3]> {
    let half = (channel_count as i32 - 1) / 2;
    let mut combos = Vec::new();
    for c1 in -half..=half {
        for c3 in -half..=half {
            let c2 = c1 + c3;
            if c2.abs() <= half {
                combos.push([c1, c2, c3]);
            }
        }
    }
    combos
}

/// Map a conjugation-balanced block signature to its coefficient slot.
/// Returns `None` for unbalanced signatures (they cannot survive; the
/// caller treats `None` as a hard error to catch enumeration bugs).
fn slot_for_block(ops: &[(Pol, bool)]) -> Option<CoeffSlot> {
    let count = |pol: Pol, conj: bool| ops.iter().filter(|o| o.0 == pol && o.1 == conj).count();
    let (xu, xc) = (count(Pol::X, false), count(Pol::X, true));
    let (yu, yc) = (count(Pol::Y, false), count(Pol::Y, true));
    if xu != xc || yu != yc {
        return None;
    }
    match (ops.len(), xu, yu) {
        (4, 2, 0) => Some(CoeffSlot::Phi1),
        (4, 0, 2) => Some(CoeffSlot::Phi2),
        (4, 1, 1) => Some(CoeffSlot::Phi3),
        (6, 3, 0) => Some(CoeffSlot::Psi1),
        (6, 0, 3) => Some(CoeffSlot::Psi2),
        (6, 2, 1) => Some(CoeffSlot::Psi3),
        (6, 1, 2) => Some(CoeffSlot::Psi4),
        _ => None,
    }
}

/// The cumulant operand list of a block, for feeding `joint_cumulant`
/// when a term must be evaluated against measured statistics (the
/// lattice-field oracle below).
#[cfg(test)]
pub(crate) fn block_ops(block: &[usize], b: Pol, bp: Pol, a: Pol) -> Vec<Op> {
    block
        .iter()
        .map(|&s| Op::new(slot_pol(s, b, bp, a), SLOT_CONJ[s]))
        .collect()
}

fn pair_topology(pair: (usize, usize)) -> Option<Topology> {
    match pair {
        (0, 3) => Some(Topology::Beat03),
        (0, 5) => Some(Topology::Beat05),
        (2, 3) => Some(Topology::Beat23),
        (2, 5) => Some(Topology::Beat25),
        (1, 4) => Some(Topology::Sum14),
        _ => None,
    }
}

/// Enumerate every surviving variance term on the given channel grid.
///
/// Walks ordered combo pairs × even slot partitions × polarization
/// assignments, applying the selection rules from the module doc, and
/// merges identical terms by summing their polarization weights.
pub(crate) fn enumerate_terms(channel_count: usize) -> Vec<TermSpec> {
    let combos = channel_combos(channel_count);
    let partitions = crate::combinatorics::even_set_partitions(6);
    let pols = [Pol::X, Pol::Y];
    let mut terms: Vec<TermSpec> = Vec::new();

    for combo in &combos {
        for combo_p in &combos {
            'partition: for partition in &partitions {
                // Blocks must be channel-uniform; pairs must join one
                // conjugated and one unconjugated slot from opposite
                // sides of the variance (same-side pairs are the
                // cancelled mean-distortion terms).
                for block in partition {
                    let ch0 = slot_channel(block[0], combo, combo_p);
                    if block
                        .iter()
                        .any(|&s| slot_channel(s, combo, combo_p) != ch0)
                    {
                        continue 'partition;
                    }
                    if block.len() == 2 {
                        let (i, j) = (block[0], block[1]);
                        if SLOT_CONJ[i] == SLOT_CONJ[j] {
                            continue 'partition; // improper pair: zero
                        }
                        if (i < 3) == (j < 3) {
                            continue 'partition; // mean-distortion family
                        }
                    }
                }

                // Identify the topology from the block structure.
                let pairs: Vec<(usize, usize)> = partition
                    .iter()
                    .filter(|b| b.len() == 2)
                    .map(|b| (b[0], b[1]))
                    .collect();
                let big_block = partition.iter().find(|b| b.len() > 2);
                let topology = match (pairs.len(), big_block) {
                    (3, None) => {
                        let mut sorted = pairs.clone();
                        sorted.sort_unstable();
                        if sorted == [(0, 3), (1, 4), (2, 5)] {
                            Topology::Diag
                        } else if sorted == [(0, 5), (1, 4), (2, 3)] {
                            Topology::Wired
                        } else {
                            unreachable!("cross pairings admit only two matchings: {sorted:?}")
                        }
                    }
                    (1, Some(_)) => pair_topology(pairs[0])
                        .unwrap_or_else(|| unreachable!("unexpected pair {:?}", pairs[0])),
                    (0, Some(_)) => Topology::Six,
                    _ => unreachable!("even partitions of 6 have 1–3 blocks"),
                };

                // Polarization sum.
                for &b in &pols {
                    for &bp in &pols {
                        'receive: for &a in &pols {
                            for pair in &pairs {
                                if slot_pol(pair.0, b, bp, a) != slot_pol(pair.1, b, bp, a) {
                                    continue 'receive;
                                }
                            }
                            let slot = match big_block {
                                None => CoeffSlot::Gn,
                                Some(block) => {
                                    let sig: Vec<(Pol, bool)> = block
                                        .iter()
                                        .map(|&s| (slot_pol(s, b, bp, a), SLOT_CONJ[s]))
                                        .collect();
                                    slot_for_block(&sig).expect(
                                        "proper pairing leaves blocks conjugation-balanced",
                                    )
                                }
                            };
                            let spec = TermSpec {
                                kind: classify_kind(combo),
                                slot,
                                topology,
                                combo: *combo,
                                combo_p: *combo_p,
                                weight: 1.0,
                            };
                            match terms.iter_mut().find(|t| {
                                t.kind == spec.kind
                                    && t.slot == spec.slot
                                    && t.topology == spec.topology
                                    && t.combo == spec.combo
                                    && t.combo_p == spec.combo_p
                            }) {
                                Some(t) => t.weight += 1.0,
                                None => terms.push(spec),
                            }
                        }
                    }
                }
            }
        }
    }
    terms.sort_by(|l, r| {
        (l.kind, l.combo, l.combo_p, l.topology, l.slot).cmp(&(
            r.kind,
            r.combo,
            r.combo_p,
            r.topology,
            r.slot,
        ))
    });
    terms
}
