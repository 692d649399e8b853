//! The normalized joint-moment table of a dual-polarization symbol.

use super::MomentError;
use crate::shaping::SymbolSequence;
use crate::util::KahanC;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Exponents (p, q, r, s) of E[X_x^p X_x*^q X_y^r X_y*^s].
pub type MomentIndex = (u8, u8, u8, u8);

/// Maximum total moment order carried by a [`MomentSet`].
pub const MAX_ORDER: u8 = 6;

/// Normalized joint moments m(p,q,r,s) = E[X_x^p X_x*^q X_y^r X_y*^s] / u^((p+q+r+s)/2)
/// for all p+q+r+s ≤ 6, where u = E[(|X_x|² + |X_y|²)/2] is the per-polarization
/// power unit. The normalization makes m(1,1,0,0) + m(0,0,1,1) = 2 exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    entries: BTreeMap<MomentIndex, Complex64>,
    /// Window length in symbols when produced by the windowed estimator.
    pub window: Option<usize>,
}

/// All exponent tuples with total order ≤ MAX_ORDER, in BTreeMap order.
pub(crate) fn all_indices() -> Vec<MomentIndex> {
    let mut v = Vec::new();
    for p in 0..=MAX_ORDER {
        for q in 0..=MAX_ORDER - p {
            for r in 0..=MAX_ORDER - p - q {
                for s in 0..=MAX_ORDER - p - q - r {
                    v.push((p, q, r, s));
                }
            }
        }
    }
    v
}

impl MomentSet {
    /// Empirical joint moments of a symbol sequence (the blockwise
    /// estimator). Normalization is internal, so the caller may pass a
    /// sequence at any power scale.
    pub fn from_sequence(seq: &SymbolSequence) -> Result<Self, MomentError> {
        if seq.is_empty() {
            return Err(MomentError::EmptySequence);
        }
        let e = seq.mean_energy();
        if e <= 0.0 {
            return Err(MomentError::ZeroSecondMoment);
        }
        let scale = (2.0 / e).sqrt();
        let idx = all_indices();
        let mut acc: Vec<KahanC> = vec![KahanC::new(); idx.len()];
        let mut pow_x = [Complex64::new(1.0, 0.0); (MAX_ORDER + 1) as usize];
        let mut pow_xc = pow_x;
        let mut pow_y = pow_x;
        let mut pow_yc = pow_x;
        for (x0, y0) in seq.x_pol.iter().zip(&seq.y_pol) {
            let x = x0 * scale;
            let y = y0 * scale;
            fill_powers(&mut pow_x, x);
            fill_powers(&mut pow_xc, x.conj());
            fill_powers(&mut pow_y, y);
            fill_powers(&mut pow_yc, y.conj());
            for (k, &(p, q, r, s)) in idx.iter().enumerate() {
                acc[k].add(
                    pow_x[p as usize] * pow_xc[q as usize] * pow_y[r as usize] * pow_yc[s as usize],
                );
            }
        }
        let n = seq.len() as f64;
        let entries = idx
            .into_iter()
            .zip(acc)
            .map(|(i, a)| (i, a.value() / n))
            .collect();
        Ok(Self {
            entries,
            window: None,
        })
    }

    /// Analytic moments of a weighted dual-polarization constellation.
    pub fn from_constellation(
        points: &[(Complex64, Complex64)],
        probs: &[f64],
    ) -> Result<Self, MomentError> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(MomentError::EmptySequence);
        }
        let u: f64 = points
            .iter()
            .zip(probs)
            .map(|((x, y), w)| w * (x.norm_sqr() + y.norm_sqr()) / 2.0)
            .sum();
        if u <= 0.0 {
            return Err(MomentError::ZeroSecondMoment);
        }
        let scale = (1.0 / u).sqrt();
        let idx = all_indices();
        let mut acc: Vec<KahanC> = vec![KahanC::new(); idx.len()];
        let mut pow_x = [Complex64::new(1.0, 0.0); (MAX_ORDER + 1) as usize];
        let mut pow_xc = pow_x;
        let mut pow_y = pow_x;
        let mut pow_yc = pow_x;
        for ((x0, y0), &w) in points.iter().zip(probs) {
            let x = x0 * scale;
            let y = y0 * scale;
            fill_powers(&mut pow_x, x);
            fill_powers(&mut pow_xc, x.conj());
            fill_powers(&mut pow_y, y);
            fill_powers(&mut pow_yc, y.conj());
            for (k, &(p, q, r, s)) in idx.iter().enumerate() {
                acc[k].add(
                    pow_x[p as usize]
                        * pow_xc[q as usize]
                        * pow_y[r as usize]
                        * pow_yc[s as usize]
                        * w,
                );
            }
        }
        let entries = idx.into_iter().zip(acc).map(|(i, a)| (i, a.value())).collect();
        Ok(Self {
            entries,
            window: None,
        })
    }

    /// Product law of two independent per-polarization constellations.
    pub fn from_independent_pols(
        points_x: &[Complex64],
        probs_x: &[f64],
        points_y: &[Complex64],
        probs_y: &[f64],
    ) -> Result<Self, MomentError> {
        let mut points = Vec::with_capacity(points_x.len() * points_y.len());
        let mut probs = Vec::with_capacity(points.capacity());
        for (x, wx) in points_x.iter().zip(probs_x) {
            for (y, wy) in points_y.iter().zip(probs_y) {
                points.push((*x, *y));
                probs.push(wx * wy);
            }
        }
        Self::from_constellation(&points, &probs)
    }

    /// Analytic i.i.d. 4D law of a shaped amplitude distribution: all four
    /// real dimensions drawn independently from the (permuted) distribution
    /// with uniform signs. This is what the unwindowed models see when a
    /// sweep is driven by a target distribution rather than a realized
    /// sequence.
    pub fn iid_shaped(
        dist: &crate::shaping::Distribution1D,
        perm: &crate::shaping::PermutationAssignment,
    ) -> Result<Self, MomentError> {
        let d = dist.permuted(perm);
        let n = d.num_levels();
        let total = (2 * n).pow(4);
        let mut points = Vec::with_capacity(total);
        let mut probs = Vec::with_capacity(total);
        for code in 0..total {
            let mut c = code;
            let mut vals = [0.0f64; 4];
            let mut w = 1.0;
            for v in &mut vals {
                let k = c % (2 * n);
                c /= 2 * n;
                let level = k / 2;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                *v = sign * d.levels[level];
                w *= d.probs[level] / 2.0;
            }
            points.push((
                Complex64::new(vals[0], vals[1]),
                Complex64::new(vals[2], vals[3]),
            ));
            probs.push(w);
        }
        Self::from_constellation(&points, &probs)
    }

    /// Circularly symmetric Gaussian 4D law with equal per-polarization
    /// power: m(p,p,r,r) = p!·r!, everything else zero.
    pub fn gaussian() -> Self {
        let fact = |k: u8| -> f64 { (1..=k as u64).product::<u64>() as f64 };
        let entries = all_indices()
            .into_iter()
            .map(|(p, q, r, s)| {
                let v = if p == q && r == s {
                    fact(p) * fact(r)
                } else {
                    0.0
                };
                ((p, q, r, s), Complex64::new(v, 0.0))
            })
            .collect();
        Self {
            entries,
            window: None,
        }
    }

    /// The factorized (per-polarization independent) law with the same
    /// marginals: m_f(p,q,r,s) = m(p,q,0,0)·m(0,0,r,s). This is the moment
    /// source of the EGN-style paths.
    pub fn factorized(&self) -> Result<Self, MomentError> {
        let mut entries = BTreeMap::new();
        for (p, q, r, s) in all_indices() {
            let mx = self.get(p, q, 0, 0)?;
            let my = self.get(0, 0, r, s)?;
            entries.insert((p, q, r, s), mx * my);
        }
        Ok(Self {
            entries,
            window: self.window,
        })
    }

    pub(crate) fn from_entries(
        entries: BTreeMap<MomentIndex, Complex64>,
        window: Option<usize>,
    ) -> Self {
        Self { entries, window }
    }

    pub fn get(&self, p: u8, q: u8, r: u8, s: u8) -> Result<Complex64, MomentError> {
        self.entries
            .get(&(p, q, r, s))
            .copied()
            .ok_or(MomentError::MissingEntry(p, q, r, s))
    }

    pub(crate) fn set(&mut self, idx: MomentIndex, v: Complex64) {
        self.entries.insert(idx, v);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MomentIndex, &Complex64)> {
        self.entries.iter()
    }

    /// Largest |m(p,q,r,s) − conj(m(q,p,s,r))| over all entries; zero for
    /// any law produced by the constructors here.
    pub fn conjugate_symmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&(p, q, r, s), &v) in &self.entries {
            if let Some(&w) = self.entries.get(&(q, p, s, r)) {
                worst = worst.max((v - w.conj()).norm());
            }
        }
        worst
    }

    /// Documented key-value text form: one `m_p_q_r_s = re im` line per
    /// entry plus a `window` header. Stable ordering, round-trips exactly.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        s.push_str("format = momentset/1\n");
        match self.window {
            Some(w) => {
                let _ = writeln!(s, "window = {w}");
            }
            None => s.push_str("window = none\n"),
        }
        for (&(p, q, r, s_), &v) in &self.entries {
            let _ = writeln!(s, "m_{p}_{q}_{r}_{s_} = {:?} {:?}", v.re, v.im);
        }
        s
    }

    pub fn from_kv_str(text: &str) -> Result<Self, MomentError> {
        let mut entries = BTreeMap::new();
        let mut window = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| MomentError::Parse(format!("line {}: no '='", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "format" => {
                    if value != "momentset/1" {
                        return Err(MomentError::Parse(format!("unknown format {value}")));
                    }
                }
                "window" => {
                    window = match value {
                        "none" => None,
                        v => Some(
                            v.parse::<usize>()
                                .map_err(|e| MomentError::Parse(e.to_string()))?,
                        ),
                    };
                }
                k if k.starts_with("m_") => {
                    let idx: Vec<u8> = k[2..]
                        .split('_')
                        .map(|t| t.parse::<u8>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| MomentError::Parse(e.to_string()))?;
                    let vals: Vec<f64> = value
                        .split_whitespace()
                        .map(|t| t.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| MomentError::Parse(e.to_string()))?;
                    if idx.len() != 4 || vals.len() != 2 {
                        return Err(MomentError::Parse(format!("line {}: malformed", lineno + 1)));
                    }
                    entries.insert(
                        (idx[0], idx[1], idx[2], idx[3]),
                        Complex64::new(vals[0], vals[1]),
                    );
                }
                other => return Err(MomentError::Parse(format!("unknown key {other}"))),
            }
        }
        if entries.is_empty() {
            return Err(MomentError::Parse("no moment entries".into()));
        }
        Ok(Self { entries, window })
    }
}

#[inline]
fn fill_powers(pow: &mut [Complex64; (MAX_ORDER + 1) as usize], base: Complex64) {
    pow[0] = Complex64::new(1.0, 0.0);
    for k in 1..pow.len() {
        pow[k] = pow[k - 1] * base;
    }
}
