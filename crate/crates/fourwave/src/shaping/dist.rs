//! Target amplitude distributions, their permutation families, and
//! quantization to integer compositions.

use super::{Composition, ShapingError};
use crate::combinatorics::distinct_permutations;
use serde::{Deserialize, Serialize};

/// A probability distribution over ordered positive amplitude levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution1D {
    /// Strictly increasing, all positive (e.g. `[1, 3, 5, 7]`).
    pub levels: Vec<f64>,
    /// One probability per level; nonnegative, sums to 1 within 1e-12.
    pub probs: Vec<f64>,
}

impl Distribution1D {
    pub fn new(levels: Vec<f64>, probs: Vec<f64>) -> Result<Self, ShapingError> {
        let d = Self { levels, probs };
        d.validate()?;
        Ok(d)
    }

    /// The four-level family used throughout: levels {1,3,5,7}.
    pub fn four_level(probs: [f64; 4]) -> Result<Self, ShapingError> {
        Self::new(vec![1.0, 3.0, 5.0, 7.0], probs.to_vec())
    }

    pub fn validate(&self) -> Result<(), ShapingError> {
        if self.levels.is_empty() || self.levels.len() != self.probs.len() {
            return Err(ShapingError::InvalidDistribution(format!(
                "{} levels vs {} probabilities",
                self.levels.len(),
                self.probs.len()
            )));
        }
        if !self.levels.windows(2).all(|w| w[0] < w[1]) || self.levels[0] <= 0.0 {
            return Err(ShapingError::InvalidDistribution(
                "levels must be strictly increasing and positive".into(),
            ));
        }
        if self.probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(ShapingError::InvalidDistribution(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ShapingError::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// The distribution with probabilities relabeled by `perm`: level `j`
    /// receives the probability that level `perm.slot_for_level(j)` had.
    pub fn permuted(&self, perm: &PermutationAssignment) -> Distribution1D {
        let mut probs = vec![0.0; self.probs.len()];
        for (slot, &level_idx) in perm.level_for_slot.iter().enumerate() {
            probs[level_idx] = self.probs[slot];
        }
        Distribution1D {
            levels: self.levels.clone(),
            probs,
        }
    }

    /// Second moment Σ p·a² of the amplitude law.
    pub fn second_moment(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.levels)
            .map(|(p, a)| p * a * a)
            .sum()
    }

    /// k-th moment Σ p·a^k.
    pub fn moment(&self, k: u32) -> f64 {
        self.probs
            .iter()
            .zip(&self.levels)
            .map(|(p, a)| p * a.powi(k as i32))
            .sum()
    }
}

/// Entropy in bits per amplitude; zero-probability levels contribute 0.
pub fn entropy(dist: &Distribution1D) -> f64 {
    dist.probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// A relabeling of probability slots onto amplitude levels, shared by all
/// four real dimensions of the 4D symbol.
///
/// Slot `i` is the i-th entry of the base probability vector; the assignment
/// sends the amplitude drawn in slot `i` to level `level_for_slot[i]`. The
/// identity assignment leaves the base distribution unchanged. Every
/// assignment preserves entropy exactly, so the 24 assignments of a
/// four-level distribution form an equal-entropy format family.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationAssignment {
    pub level_for_slot: Vec<usize>,
}

impl PermutationAssignment {
    pub fn identity(num_levels: usize) -> Self {
        Self {
            level_for_slot: (0..num_levels).collect(),
        }
    }

    pub fn new(level_for_slot: Vec<usize>) -> Result<Self, ShapingError> {
        let mut seen = vec![false; level_for_slot.len()];
        for &l in &level_for_slot {
            if l >= level_for_slot.len() || seen[l] {
                return Err(ShapingError::InvalidDistribution(format!(
                    "{level_for_slot:?} is not a permutation"
                )));
            }
            seen[l] = true;
        }
        Ok(Self { level_for_slot })
    }

    /// Compact label such as "2031" for sweep output.
    pub fn label(&self) -> String {
        self.level_for_slot
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("")
    }
}

/// All assignments that produce distinct relabeled distributions.
///
/// For four distinct probabilities this is the full set of 24; repeated
/// probabilities collapse assignments that induce the same distribution and
/// the deduplicated set is returned (callers can detect the collapse from
/// the length).
pub fn permutations_4d(dist: &Distribution1D) -> Vec<PermutationAssignment> {
    let n = dist.num_levels();
    let mut out: Vec<PermutationAssignment> = Vec::new();
    let mut seen: Vec<Vec<u64>> = Vec::new();
    for perm in distinct_permutations(&(0..n).collect::<Vec<usize>>()) {
        let assignment = PermutationAssignment {
            level_for_slot: perm,
        };
        // Key on the induced probability vector, bit-exact.
        let key: Vec<u64> = dist
            .permuted(&assignment)
            .probs
            .iter()
            .map(|p| p.to_bits())
            .collect();
        if !seen.contains(&key) {
            seen.push(key);
            out.push(assignment);
        }
    }
    out
}

/// Quantizes target probabilities to integer counts summing to `n`:
/// largest-remainder allocation, with ties at the quota boundary resolved
/// toward the composition of minimum KL divergence from the target
/// (then lexicographically, for determinism).
pub fn composition_for(dist: &Distribution1D, n: usize) -> Result<Composition, ShapingError> {
    if n == 0 {
        return Err(ShapingError::InvalidComposition("blocklength 0".into()));
    }
    let l = dist.num_levels();
    let mut counts: Vec<usize> = Vec::with_capacity(l);
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(l);
    let mut assigned = 0usize;
    for (i, &p) in dist.probs.iter().enumerate() {
        let quota = p * n as f64;
        let floor = quota.floor() as usize;
        counts.push(floor);
        assigned += floor;
        remainders.push((quota - floor as f64, i));
    }
    let mut leftover = n - assigned;
    // Hand out leftovers by descending remainder. Remainders equal at the
    // cutoff compete; try each way and keep the KL-minimal assignment.
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("remainders are finite"));
    while leftover > 0 {
        let best = remainders[0].0;
        let tied: Vec<usize> = remainders
            .iter()
            .filter(|(r, _)| (best - r).abs() < 1e-12)
            .map(|&(_, i)| i)
            .collect();
        let take = leftover.min(tied.len());
        if take == tied.len() {
            for &i in &tied {
                counts[i] += 1;
            }
        } else {
            // Choose the `take` tied levels minimizing KL of the final
            // composition; the candidate count is tiny (≤ C(4, k)).
            let mut best_choice: Option<(f64, Vec<usize>)> = None;
            for combo in k_subsets(&tied, take) {
                let mut trial = counts.clone();
                for &i in &combo {
                    trial[i] += 1;
                }
                let kl = kl_divergence(&trial, n, &dist.probs);
                let better = match &best_choice {
                    None => true,
                    Some((bkl, bc)) => kl < bkl - 1e-15 || ((kl - bkl).abs() <= 1e-15 && combo < *bc),
                };
                if better {
                    best_choice = Some((kl, combo));
                }
            }
            let (_, choice) = best_choice.expect("at least one subset exists");
            for &i in &choice {
                counts[i] += 1;
            }
        }
        leftover -= take;
        remainders.retain(|(_, i)| !tied.contains(i));
    }
    Composition::new(counts)
}

/// KL divergence of counts/n from target probabilities, in nats.
fn kl_divergence(counts: &[usize], n: usize, probs: &[f64]) -> f64 {
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            if c == 0 {
                0.0
            } else if p == 0.0 {
                f64::INFINITY
            } else {
                let q = c as f64 / n as f64;
                q * (q / p).ln()
            }
        })
        .sum()
}

/// All k-element subsets of `items`, lexicographic.
fn k_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // Advance the combination index vector.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + items.len() - k {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
