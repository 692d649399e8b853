//! Modulation-dependent NLI coefficients.
//!
//! The analytical models split η into link-dependent χ integrals and
//! modulation-dependent coefficients; this module computes the latter.
//! The factorized (per-polarization) paths use two scalar excesses per
//! polarization, the joint paths use the full fourth/sixth-order cumulant
//! table of the 4D symbol. Windowed variants come from feeding windowed
//! moments through the *same* formulas — only the moment source changes.

use super::cumulants::{joint_cumulant, Op, Pol};
use super::{MomentError, MomentSet};
use crate::nli::{LinkConfig, WdmConfig};
use std::fmt::Write as _;

const XU: Op = Op::new(Pol::X, false);
const XC: Op = Op::new(Pol::X, true);
const YU: Op = Op::new(Pol::Y, false);
const YC: Op = Op::new(Pol::Y, true);

/// The fourteen modulation coefficients of the joint-statistics NLI paths,
/// evaluated on the unit-power normalized 4D law.
///
/// Swapping the two polarizations of the input maps the set onto itself:
/// φ₁↔φ₂, ψ₁↔ψ₂, ψ₃↔ψ₄, λ₂→−λ₂, (λ₃,λ₄)↔(λ₅,−λ₆); φ₃, λ₁ and ξ₁ are
/// fixed. Every slot is real for conjugate-symmetric input (imaginary
/// parts cancel in the cumulant expansion).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientSet {
    /// κ₄(X, X̄, X, X̄) — fourth-order energy excess of the x polarization.
    pub phi1: f64,
    /// κ₄(Y, Ȳ, Y, Ȳ).
    pub phi2: f64,
    /// κ₄(X, X̄, Y, Ȳ) — cross-polarization energy cumulant.
    pub phi3: f64,
    /// κ₆(X, X̄, X, X̄, X, X̄) — sixth-order excess of the x polarization.
    pub psi1: f64,
    /// κ₆(Y, Ȳ, Y, Ȳ, Y, Ȳ).
    pub psi2: f64,
    /// κ₆(X, X̄, X, X̄, Y, Ȳ).
    pub psi3: f64,
    /// κ₆(X, X̄, Y, Ȳ, Y, Ȳ).
    pub psi4: f64,
    /// Re κ₄(X, X, Ȳ, Ȳ) — improper cross-polarization cumulant.
    pub lambda1: f64,
    /// Im κ₄(X, X, Ȳ, Ȳ).
    pub lambda2: f64,
    /// Re κ₄(X, X, X̄, Ȳ).
    pub lambda3: f64,
    /// Im κ₄(X, X, X̄, Ȳ).
    pub lambda4: f64,
    /// Re κ₄(X, Y, Ȳ, Ȳ).
    pub lambda5: f64,
    /// Im κ₄(X, Y, Ȳ, Ȳ).
    pub lambda6: f64,
    /// Re κ₄(X, X, Y, Y) — doubly improper cross term. The imaginary part
    /// never reaches η: its kernel vanishes by the f₁↔f₂ symmetry of the
    /// χ integrals.
    pub xi1: f64,
}

impl CoefficientSet {
    /// Documented key-value text form; round-trips exactly.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::from("format = coefficientset/1\n");
        for (name, v) in self.fields() {
            let _ = writeln!(s, "{name} = {v:?}");
        }
        s
    }

    pub fn from_kv_str(text: &str) -> Result<Self, MomentError> {
        let mut out = Self::default();
        let mut seen = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| MomentError::Parse(format!("line {}: no '='", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "format" {
                if value != "coefficientset/1" {
                    return Err(MomentError::Parse(format!("unknown format {value}")));
                }
                continue;
            }
            let v: f64 = value
                .parse()
                .map_err(|e: std::num::ParseFloatError| MomentError::Parse(e.to_string()))?;
            let slot = out
                .fields_mut()
                .into_iter()
                .find(|(name, _)| *name == key)
                .ok_or_else(|| MomentError::Parse(format!("unknown key {key}")))?;
            *slot.1 = v;
            seen += 1;
        }
        if seen == 0 {
            return Err(MomentError::Parse("no coefficient entries".into()));
        }
        Ok(out)
    }

    /// All coefficients as (name, value) pairs, in the canonical slot
    /// order shared with the χ table.
    pub fn fields(&self) -> [(&'static str, f64); 14] {
        [
            ("phi1", self.phi1),
            ("phi2", self.phi2),
            ("phi3", self.phi3),
            ("psi1", self.psi1),
            ("psi2", self.psi2),
            ("psi3", self.psi3),
            ("psi4", self.psi4),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
            ("lambda5", self.lambda5),
            ("lambda6", self.lambda6),
            ("xi1", self.xi1),
        ]
    }

    fn fields_mut(&mut self) -> [(&'static str, &mut f64); 14] {
        [
            ("phi1", &mut self.phi1),
            ("phi2", &mut self.phi2),
            ("phi3", &mut self.phi3),
            ("psi1", &mut self.psi1),
            ("psi2", &mut self.psi2),
            ("psi3", &mut self.psi3),
            ("psi4", &mut self.psi4),
            ("lambda1", &mut self.lambda1),
            ("lambda2", &mut self.lambda2),
            ("lambda3", &mut self.lambda3),
            ("lambda4", &mut self.lambda4),
            ("lambda5", &mut self.lambda5),
            ("lambda6", &mut self.lambda6),
            ("xi1", &mut self.xi1),
        ]
    }

    /// Largest |coefficient| — handy for "all excesses vanish" checks.
    pub fn max_abs(&self) -> f64 {
        self.fields()
            .into_iter()
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates the full coefficient table on a (standard or windowed)
/// moment set.
pub fn coefficients_4d(m: &MomentSet) -> Result<CoefficientSet, MomentError> {
    let k4 = |a, b, c, d| joint_cumulant(m, &[a, b, c, d]);
    let k6 = |a, b, c, d, e, f| joint_cumulant(m, &[a, b, c, d, e, f]);
    let l12 = k4(XU, XU, YC, YC)?;
    let l34 = k4(XU, XU, XC, YC)?;
    let l56 = k4(XU, YU, YC, YC)?;
    Ok(CoefficientSet {
        phi1: k4(XU, XC, XU, XC)?.re,
        phi2: k4(YU, YC, YU, YC)?.re,
        phi3: k4(XU, XC, YU, YC)?.re,
        psi1: k6(XU, XC, XU, XC, XU, XC)?.re,
        psi2: k6(YU, YC, YU, YC, YU, YC)?.re,
        psi3: k6(XU, XC, XU, XC, YU, YC)?.re,
        psi4: k6(XU, XC, YU, YC, YU, YC)?.re,
        lambda1: l12.re,
        lambda2: l12.im,
        lambda3: l34.re,
        lambda4: l34.im,
        lambda5: l56.re,
        lambda6: l56.im,
        xi1: k4(XU, XU, YU, YU)?.re,
    })
}

/// Scalar per-polarization excesses of the factorized paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgnCoefficients {
    pub phi_x: f64,
    pub psi_x: f64,
    pub phi_y: f64,
    pub psi_y: f64,
}

impl From<EgnCoefficients> for CoefficientSet {
    /// Embeds the factorized per-polarization excesses into the joint
    /// coefficient table. For a factorized proper law every
    /// cross-polarization and improper cumulant vanishes, so those slots
    /// are identically zero and the lift is exact.
    fn from(e: EgnCoefficients) -> Self {
        Self {
            phi1: e.phi_x,
            phi2: e.phi_y,
            psi1: e.psi_x,
            psi2: e.psi_y,
            ..Self::default()
        }
    }
}

/// Per-polarization excesses over the circular-Gaussian baseline,
/// Φ = μ₄/μ₂² − 2 and Ψ = μ₆/μ₂³ − 9 μ₄/μ₂² + 12, computed directly from
/// moment ratios (deliberately not via the cumulant machinery, so the two
/// coefficient paths stay independent checks of one another).
pub fn coefficients_egn(m: &MomentSet) -> Result<EgnCoefficients, MomentError> {
    let pol = |mu2: f64, mu4: f64, mu6: f64| -> Result<(f64, f64), MomentError> {
        if mu2 <= 0.0 {
            return Err(MomentError::ZeroSecondMoment);
        }
        let r4 = mu4 / (mu2 * mu2);
        let r6 = mu6 / (mu2 * mu2 * mu2);
        Ok((r4 - 2.0, r6 - 9.0 * r4 + 12.0))
    };
    let (phi_x, psi_x) = pol(
        m.get(1, 1, 0, 0)?.re,
        m.get(2, 2, 0, 0)?.re,
        m.get(3, 3, 0, 0)?.re,
    )?;
    let (phi_y, psi_y) = pol(
        m.get(0, 0, 1, 1)?.re,
        m.get(0, 0, 2, 2)?.re,
        m.get(0, 0, 3, 3)?.re,
    )?;
    Ok(EgnCoefficients {
        phi_x,
        psi_x,
        phi_y,
        psi_y,
    })
}

/// Dispersion-induced channel memory in symbols: the walk-off accumulated
/// across one channel bandwidth over the whole link,
/// w = round(2π |β₂| L_total · B_ch · R_sym), clamped to [1, 4096].
pub fn default_window(link: &LinkConfig, grid: &WdmConfig) -> usize {
    let w = 2.0
        * std::f64::consts::PI
        * link.beta2_si().abs()
        * link.total_length_m()
        * grid.channel_bandwidth_hz()
        * grid.symbol_rate_hz();
    (w.round() as i64).clamp(1, 4096) as usize
}
