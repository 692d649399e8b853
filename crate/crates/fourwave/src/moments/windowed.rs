//! Windowed joint-moment estimation.
//!
//! The blockwise estimator treats every symbol of a sequence as an
//! independent draw, which erases the energy correlations a finite-length
//! shaping code imposes *between* the symbols of one codeword: a fixed
//! composition makes high-energy symbols crowd out other high-energy
//! symbols nearby. The windowed estimator folds those correlations back
//! into the moment table. Fourth-order energy entries receive the lag
//! covariance of the per-symbol energies, weighted over lags shorter than
//! the window, so a model evaluated on the windowed table sees the joint
//! statistics of the symbol pairs that actually beat against each other
//! inside the channel's nonlinear memory.
//!
//! Only the energy-balanced fourth-order entries are corrected:
//! m(2,2,0,0), m(0,0,2,2) and m(1,1,1,1). Pairs of *distinct* symbols can
//! contribute to an expectation only through products of per-symbol
//! energies — any unbalanced split leaves an odd sign factor whose average
//! over the i.i.d. sign bits is zero — and at sixth order the available
//! splits of one conjugate pair across two symbols are sign-odd as well,
//! so the sixth-order entries stay blockwise.

use super::{MomentError, MomentIndex, MomentSet};
use crate::shaping::SymbolSequence;
use crate::util::{Kahan, KahanC};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Lag weighting applied inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WindowWeights {
    /// Triangular taper 1 − |τ|/w — the relative frequency of lag τ among
    /// the ordered symbol pairs of one length-w window.
    #[default]
    Triangular,
    /// Uniform weight for every lag shorter than the window.
    Flat,
}

/// How window statistics are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WindowNormalization {
    /// One power unit for the whole sequence; the lag covariances of the
    /// normalized symbol energies are added to the energy-balanced
    /// fourth-order entries.
    #[default]
    Global,
    /// Every sliding window is normalized by its own mean power and the
    /// per-window moment tables are averaged entry-wise. Kept as a
    /// comparison mode: the self-normalization cancels almost all of the
    /// correlation signal, leaving only an O(1/w) ratio bias.
    PerWindow,
}

/// Configuration of the windowed estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub weights: WindowWeights,
    pub normalization: WindowNormalization,
    /// Restrict lag pairs (or windows) to symbols of the same codeword.
    /// Off by default: pairs that straddle a codeword boundary are
    /// genuinely uncorrelated, and keeping them reproduces the statistics
    /// of the transmitted stream rather than of an isolated codeword.
    pub per_codeword: bool,
}

/// Windowed joint moments with the default configuration (global
/// normalization, triangular lag weights, boundary-crossing pairs kept).
pub fn windowed_moments(seq: &SymbolSequence, w: usize) -> Result<MomentSet, MomentError> {
    windowed_moments_with(seq, w, &WindowConfig::default())
}

/// Windowed joint moments with an explicit [`WindowConfig`].
///
/// `w` is the window length in symbols, 1 ≤ w ≤ seq.len(). At w equal to
/// the sequence length the estimator degenerates to the blockwise one and
/// returns exactly [`MomentSet::from_sequence`] (with the window recorded).
pub fn windowed_moments_with(
    seq: &SymbolSequence,
    w: usize,
    cfg: &WindowConfig,
) -> Result<MomentSet, MomentError> {
    let n = seq.len();
    if n == 0 {
        return Err(MomentError::EmptySequence);
    }
    if w == 0 {
        return Err(MomentError::WindowTooSmall);
    }
    if w > n {
        return Err(MomentError::WindowTooLarge { w, len: n });
    }
    if w == n {
        let mut m = MomentSet::from_sequence(seq)?;
        m.window = Some(w);
        return Ok(m);
    }
    match cfg.normalization {
        WindowNormalization::Global => global_windowed(seq, w, cfg),
        WindowNormalization::PerWindow => per_window_average(seq, w, cfg),
    }
}

/// Blockwise table plus lag-covariance corrections under one global
/// power unit.
fn global_windowed(
    seq: &SymbolSequence,
    w: usize,
    cfg: &WindowConfig,
) -> Result<MomentSet, MomentError> {
    let mut m = MomentSet::from_sequence(seq)?;
    let n = seq.len();
    // Per-polarization power unit; e_x, e_y average to ~1 each.
    let unit = seq.mean_energy() / 2.0;
    let ex: Vec<f64> = seq.x_pol.iter().map(|v| v.norm_sqr() / unit).collect();
    let ey: Vec<f64> = seq.y_pol.iter().map(|v| v.norm_sqr() / unit).collect();
    let mean = |v: &[f64]| {
        let mut k = Kahan::new();
        for &t in v {
            k.add(t);
        }
        k.value() / n as f64
    };
    let (mx, my) = (mean(&ex), mean(&ey));
    let codeword_len = cfg
        .per_codeword
        .then_some(seq.codeword_symbols)
        .flatten()
        .filter(|&l| l > 0);

    let mut corr_xx = 0.0;
    let mut corr_yy = 0.0;
    let mut corr_cross = 0.0;
    for tau in 1..w {
        let lam = match cfg.weights {
            WindowWeights::Triangular => 1.0 - tau as f64 / w as f64,
            WindowWeights::Flat => 1.0,
        };
        let mut sxx = Kahan::new();
        let mut syy = Kahan::new();
        let mut sxy = Kahan::new();
        let mut syx = Kahan::new();
        let mut pairs = 0usize;
        for t in 0..n - tau {
            if let Some(l) = codeword_len {
                if t / l != (t + tau) / l {
                    continue;
                }
            }
            let (dx0, dy0) = (ex[t] - mx, ey[t] - my);
            let (dx1, dy1) = (ex[t + tau] - mx, ey[t + tau] - my);
            sxx.add(dx0 * dx1);
            syy.add(dy0 * dy1);
            sxy.add(dx0 * dy1);
            syx.add(dy0 * dx1);
            pairs += 1;
        }
        if pairs == 0 {
            continue;
        }
        let c = pairs as f64;
        // Lags ±τ both contribute: the auto terms are symmetric in the lag
        // sign, the cross term picks up the two orderings explicitly.
        corr_xx += lam * 2.0 * sxx.value() / c;
        corr_yy += lam * 2.0 * syy.value() / c;
        corr_cross += lam * (sxy.value() + syx.value()) / c;
    }
    bump(&mut m, (2, 2, 0, 0), corr_xx)?;
    bump(&mut m, (0, 0, 2, 2), corr_yy)?;
    bump(&mut m, (1, 1, 1, 1), corr_cross)?;
    m.window = Some(w);
    Ok(m)
}

fn bump(m: &mut MomentSet, idx: MomentIndex, dv: f64) -> Result<(), MomentError> {
    let v = m.get(idx.0, idx.1, idx.2, idx.3)?;
    m.set(idx, v + Complex64::new(dv, 0.0));
    Ok(())
}

/// Literal sliding-window average: every length-w window is normalized by
/// its own mean power and the resulting tables are averaged entry-wise.
/// O(n·w) per entry — intended for short sequences and comparisons.
fn per_window_average(
    seq: &SymbolSequence,
    w: usize,
    cfg: &WindowConfig,
) -> Result<MomentSet, MomentError> {
    let n = seq.len();
    let codeword_len = cfg
        .per_codeword
        .then_some(seq.codeword_symbols)
        .flatten()
        .filter(|&l| l > 0);
    let idx = super::set::all_indices();
    let mut acc = vec![KahanC::new(); idx.len()];
    let mut windows = 0usize;
    for t0 in 0..=n - w {
        if let Some(l) = codeword_len {
            if t0 / l != (t0 + w - 1) / l {
                continue;
            }
        }
        let win = SymbolSequence::new(
            seq.x_pol[t0..t0 + w].to_vec(),
            seq.y_pol[t0..t0 + w].to_vec(),
            None,
        )
        .expect("slices of one sequence have equal length");
        let mw = MomentSet::from_sequence(&win)?;
        for (k, &(p, q, r, s)) in idx.iter().enumerate() {
            acc[k].add(mw.get(p, q, r, s)?);
        }
        windows += 1;
    }
    if windows == 0 {
        // Only possible when per-codeword windows are longer than a codeword.
        return Err(MomentError::WindowTooLarge {
            w,
            len: codeword_len.unwrap_or(0),
        });
    }
    let entries = idx
        .into_iter()
        .zip(acc)
        .map(|(i, a)| (i, a.value() / windows as f64))
        .collect();
    Ok(MomentSet::from_entries(entries, Some(w)))
}
