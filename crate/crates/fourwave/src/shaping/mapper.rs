//! The 4D mapper: block-interleaves shaped amplitudes over (I_x, Q_x, I_y,
//! Q_y) with i.i.d. signs, optionally relabeling levels through a
//! [`PermutationAssignment`]. Also the sequence generators used by the
//! harness and the simulator.

use super::{
    ccdm_encode, ccdm_rate, composition_for, Composition, Distribution1D, PermutationAssignment,
    ShapingError,
};
use crate::util::derive_seed;
use num_complex::Complex64;
use rand::distributions::{Distribution as _, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sign bit for one real dimension; `true` is +.
pub type Sign = bool;

/// Time-indexed dual-polarization 4D symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence {
    pub x_pol: Vec<Complex64>,
    pub y_pol: Vec<Complex64>,
    /// 4D symbols per CCDM codeword when the sequence is codeword-aligned;
    /// `None` for i.i.d. or externally supplied sequences.
    pub codeword_symbols: Option<usize>,
}

impl SymbolSequence {
    pub fn new(
        x_pol: Vec<Complex64>,
        y_pol: Vec<Complex64>,
        codeword_symbols: Option<usize>,
    ) -> Result<Self, ShapingError> {
        if x_pol.len() != y_pol.len() {
            return Err(ShapingError::LengthMismatch(format!(
                "x has {} symbols, y has {}",
                x_pol.len(),
                y_pol.len()
            )));
        }
        Ok(Self {
            x_pol,
            y_pol,
            codeword_symbols,
        })
    }

    pub fn len(&self) -> usize {
        self.x_pol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_pol.is_empty()
    }

    /// Mean 4D symbol energy E[|X_x|² + |X_y|²].
    pub fn mean_energy(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let mut acc = crate::util::Kahan::new();
        for (x, y) in self.x_pol.iter().zip(&self.y_pol) {
            acc.add(x.norm_sqr() + y.norm_sqr());
        }
        acc.value() / self.len() as f64
    }

    /// Copy rescaled to mean 4D energy exactly 2 (unit power per
    /// polarization on average), the normalization the models and the
    /// simulator both assume.
    pub fn unit_power(&self) -> SymbolSequence {
        let e = self.mean_energy();
        assert!(e > 0.0, "cannot normalize an all-zero sequence");
        let s = (2.0 / e).sqrt();
        SymbolSequence {
            x_pol: self.x_pol.iter().map(|v| v * s).collect(),
            y_pol: self.y_pol.iter().map(|v| v * s).collect(),
            codeword_symbols: self.codeword_symbols,
        }
    }

    /// CSV export with columns `index, Ix, Qx, Iy, Qy`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["index", "Ix", "Qx", "Iy", "Qy"])?;
        for (i, (x, y)) in self.x_pol.iter().zip(&self.y_pol).enumerate() {
            wtr.write_record([
                i.to_string(),
                x.re.to_string(),
                x.im.to_string(),
                y.re.to_string(),
                y.im.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Maps consecutive groups of four shaped amplitudes into one 4D symbol
/// (I_x, Q_x, I_y, Q_y), each multiplied by its sign. Amplitudes are base
/// level values; `perm` relabels them onto the permuted levels, so the
/// per-dimension marginal follows the permuted distribution.
pub fn map_4d(
    amplitudes: &[f64],
    signs: &[Sign],
    perm: &PermutationAssignment,
    dist: &Distribution1D,
) -> Result<SymbolSequence, ShapingError> {
    if amplitudes.len() % 4 != 0 {
        return Err(ShapingError::NotDivisibleBy4(amplitudes.len()));
    }
    if signs.len() != amplitudes.len() {
        return Err(ShapingError::LengthMismatch(format!(
            "{} amplitudes vs {} signs",
            amplitudes.len(),
            signs.len()
        )));
    }
    let relabeled: Vec<f64> = amplitudes
        .iter()
        .zip(signs)
        .map(|(&a, &sign)| {
            let slot = dist
                .levels
                .iter()
                .position(|&l| l == a)
                .ok_or(ShapingError::UnknownLevel(a))?;
            let v = dist.levels[perm.level_for_slot[slot]];
            Ok(if sign { v } else { -v })
        })
        .collect::<Result<_, ShapingError>>()?;
    let n = relabeled.len() / 4;
    let mut x_pol = Vec::with_capacity(n);
    let mut y_pol = Vec::with_capacity(n);
    for g in relabeled.chunks_exact(4) {
        x_pol.push(Complex64::new(g[0], g[1]));
        y_pol.push(Complex64::new(g[2], g[3]));
    }
    Ok(SymbolSequence {
        x_pol,
        y_pol,
        codeword_symbols: None,
    })
}

/// Generates a CCDM-shaped sequence: `codewords` codewords of the given
/// composition, each encoded from fresh uniform bits, mapped to 4D symbols
/// with i.i.d. signs. Deterministic in `seed`.
pub fn shaped_sequence(
    dist: &Distribution1D,
    perm: &PermutationAssignment,
    comp: &Composition,
    codewords: usize,
    seed: u64,
) -> Result<SymbolSequence, ShapingError> {
    let n = comp.blocklength();
    if n % 4 != 0 {
        return Err(ShapingError::NotDivisibleBy4(n));
    }
    if comp.counts().len() != dist.num_levels() {
        return Err(ShapingError::InvalidComposition(format!(
            "composition has {} levels, distribution has {}",
            comp.counts().len(),
            dist.num_levels()
        )));
    }
    let k = ccdm_rate(comp);
    let mut bit_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "ccdm-bits"));
    let mut sign_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "signs"));
    let mut amplitudes = Vec::with_capacity(codewords * n);
    let mut signs = Vec::with_capacity(codewords * n);
    for _ in 0..codewords {
        let bits: Vec<bool> = (0..k).map(|_| bit_rng.gen()).collect();
        let cw = ccdm_encode(&bits, comp)?;
        amplitudes.extend(cw.iter().map(|&s| dist.levels[s]));
        signs.extend((0..n).map(|_| sign_rng.gen::<bool>()));
    }
    let mut seq = map_4d(&amplitudes, &signs, perm, dist)?;
    seq.codeword_symbols = Some(n / 4);
    Ok(seq)
}

/// Generates `symbols` 4D symbols with all four dimensions drawn i.i.d.
/// from the (permuted) distribution — the infinite-blocklength reference.
pub fn iid_sequence(
    dist: &Distribution1D,
    perm: &PermutationAssignment,
    symbols: usize,
    seed: u64,
) -> Result<SymbolSequence, ShapingError> {
    let weights = WeightedIndex::new(dist.probs.iter().map(|&p| p.max(0.0)))
        .map_err(|e| ShapingError::InvalidDistribution(e.to_string()))?;
    let mut amp_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "iid-amplitudes"));
    let mut sign_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "signs"));
    let amplitudes: Vec<f64> = (0..4 * symbols)
        .map(|_| dist.levels[weights.sample(&mut amp_rng)])
        .collect();
    let signs: Vec<bool> = (0..4 * symbols).map(|_| sign_rng.gen()).collect();
    map_4d(&amplitudes, &signs, perm, dist)
}

/// Convenience: shaped sequence at blocklength `n` covering at least
/// `min_symbols` 4D symbols (whole codewords, so the result may be longer).
pub fn shaped_sequence_covering(
    dist: &Distribution1D,
    perm: &PermutationAssignment,
    n: usize,
    min_symbols: usize,
    seed: u64,
) -> Result<SymbolSequence, ShapingError> {
    let comp = composition_for(dist, n)?;
    let symbols_per_cw = n / 4;
    if n % 4 != 0 {
        return Err(ShapingError::NotDivisibleBy4(n));
    }
    let codewords = min_symbols.div_ceil(symbols_per_cw);
    shaped_sequence(dist, perm, &comp, codewords, seed)
}
