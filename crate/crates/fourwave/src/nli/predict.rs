//! Effective-SNR prediction under the five interference models.
//!
//! A prediction combines three ingredients: the link's χ integral table
//! (symbol-independent, see [`chi_table`](super::chi_table)), a modulation
//! coefficient set chosen by the model, and the launch power. The
//! effective SNR on the channel of interest is
//!
//! ```text
//! SNR_eff = P / (σ²_ASE + η_total · P³)
//! ```
//!
//! with P the total dual-polarization launch power per channel, σ²_ASE the
//! amplifier noise power in the matched-filter bandwidth over both
//! polarizations, and η_total the NLI power coefficient. The cubic power
//! law is the first-order perturbation accounting of the Kerr interaction;
//! it gives the closed-form optimum P_opt = (σ²_ASE/(2η))^{1/3}.

use super::chi::{chi_table, ChiError, ChiIntegrals, ChiOptions};
use super::config::{ConfigError, LinkConfig, WdmConfig, PLANCK};
use super::eta::{eta_coefficients, EtaCoefficients};
use crate::moments::{
    coefficients_4d, coefficients_egn, default_window, joint_cumulant, windowed_moments,
    CoefficientSet, MomentError, MomentSet, Op, Pol,
};
use crate::shaping::SymbolSequence;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// The five analytical interference models: the Gaussian baseline plus the
/// two statistics-aware coefficient routes (factorized per-polarization
/// and joint 4D), each in a blockwise and a windowed variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Gaussian-noise baseline: modulation-independent, all correction
    /// coefficients zero.
    Gn,
    /// Factorized per-polarization excesses from blockwise moments.
    Egn,
    /// Factorized per-polarization excesses from windowed moments.
    Wegn,
    /// Full joint fourth/sixth-order cumulants from blockwise moments.
    #[serde(rename = "4d")]
    FourD,
    /// Full joint cumulants from windowed moments.
    W4d,
}

impl Model {
    pub const ALL: [Model; 5] = [Model::Gn, Model::Egn, Model::Wegn, Model::FourD, Model::W4d];

    /// Whether the coefficient route reads windowed moments.
    pub fn windowed(self) -> bool {
        matches!(self, Model::Wegn | Model::W4d)
    }

    /// The machine token used on command lines and in config files.
    pub fn name(self) -> &'static str {
        match self {
            Model::Gn => "gn",
            Model::Egn => "egn",
            Model::Wegn => "wegn",
            Model::FourD => "4d",
            Model::W4d => "w4d",
        }
    }

    /// Human-facing label for tables and reports.
    pub fn label(self) -> &'static str {
        match self {
            Model::Gn => "GN",
            Model::Egn => "EGN",
            Model::Wegn => "W-EGN",
            Model::FourD => "4D",
            Model::W4d => "W-4D",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = PredictError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gn" => Ok(Model::Gn),
            "egn" => Ok(Model::Egn),
            "wegn" | "w-egn" => Ok(Model::Wegn),
            "4d" => Ok(Model::FourD),
            "w4d" | "w-4d" => Ok(Model::W4d),
            other => Err(PredictError::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Chi(#[from] ChiError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error("unknown model '{0}' (expected gn, egn, wegn, 4d or w4d)")]
    UnknownModel(String),
    #[error("launch power must be positive, got {0} W")]
    NonPositivePower(f64),
    #[error("unsupported input format: {0}")]
    UnsupportedFormat(String),
    #[error("model {model} reads windowed moments but the moment source is blockwise")]
    MissingWindow { model: Model },
    #[error("model {model} reads blockwise moments but the moment source is windowed")]
    UnexpectedWindow { model: Model },
    #[error("no finite optimal power: η_total must be positive, got {0} 1/W²")]
    NoOptimum(f64),
}

/// One model evaluation with its intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub model: Model,
    /// Window length actually applied; `None` on the blockwise routes.
    pub window: Option<usize>,
    pub coefficients: CoefficientSet,
    pub eta: EtaCoefficients,
    pub ase_power_w: f64,
    pub launch_power_w: f64,
    /// Effective SNR, linear.
    pub snr: f64,
    pub snr_db: f64,
}

impl Prediction {
    /// Closed-form launch power maximizing this prediction's SNR curve.
    pub fn optimal_power_w(&self) -> Result<f64, PredictError> {
        optimal_power(self.eta.total(), self.ase_power_w)
    }
}

/// Total ASE power across both polarizations in the matched-filter
/// bandwidth (the symbol rate, for a root-raised-cosine matched filter):
/// σ² = N_s · hν · NF · (G − 1) · R_sym, which is a per-span,
/// per-polarization noise PSD of (G−1)·hν·NF/2.
pub fn ase_power(link: &LinkConfig, grid: &WdmConfig) -> f64 {
    link.span_count as f64
        * PLANCK
        * link.center_frequency_hz()
        * link.nf_linear()
        * (link.gain_linear() - 1.0)
        * grid.symbol_rate_hz()
}

/// SNR_eff = P/(σ²_ASE + η_total·P³) in dB.
pub fn effective_snr_db(power_w: f64, ase_w: f64, eta_total: f64) -> f64 {
    10.0 * (power_w / (ase_w + eta_total * power_w.powi(3))).log10()
}

/// Closed-form launch power maximizing P/(σ² + ηP³):
/// P_opt = (σ²/(2η))^{1/3}. Errors when η ≤ 0 (no finite optimum — the
/// linear-channel SNR grows without bound).
pub fn optimal_power(eta_total: f64, ase_w: f64) -> Result<f64, PredictError> {
    if !(eta_total > 0.0) {
        return Err(PredictError::NoOptimum(eta_total));
    }
    Ok((ase_w / (2.0 * eta_total)).cbrt())
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Coarse-to-fine grid refinement of a unimodal objective over launch
/// power: a 1 dB pass over ±`span_db` around `start_w`, then a 0.25 dB
/// pass over ±1 dB around the coarse best. Returns (power in W, objective
/// value). This is the simulator-side launch-power optimizer; the models
/// use [`optimal_power`] directly.
pub fn refine_power_grid<F: FnMut(f64) -> f64>(
    start_w: f64,
    span_db: f64,
    mut objective: F,
) -> (f64, f64) {
    let mut best_over = |center_dbm: f64, span: f64, step: f64| -> (f64, f64) {
        let n = (2.0 * span / step).round() as usize;
        let mut best = (center_dbm, f64::NEG_INFINITY);
        for k in 0..=n {
            let dbm = center_dbm - span + step * k as f64;
            let v = objective(dbm_to_watts(dbm));
            if v > best.1 {
                best = (dbm, v);
            }
        }
        best
    };
    let (coarse_dbm, _) = best_over(watts_to_dbm(start_w), span_db, 1.0);
    let (fine_dbm, value) = best_over(coarse_dbm, 1.0, 0.25);
    (dbm_to_watts(fine_dbm), value)
}

/// Everything the models have no χ slot for must be absent from the
/// input: mean offsets, polarization power imbalance, improper or
/// cross-polarization second-order correlations, and improper fourth-order
/// cumulants. Inputs where any of these is materially nonzero would be
/// silently mispredicted, so they are rejected instead.
const FORMAT_TOLERANCE: f64 = 0.05;

fn check_format(m: &MomentSet) -> Result<(), PredictError> {
    const XU: Op = Op::new(Pol::X, false);
    const XC: Op = Op::new(Pol::X, true);
    const YU: Op = Op::new(Pol::Y, false);
    const YC: Op = Op::new(Pol::Y, true);
    let k4 = |ops: [Op; 4]| -> Result<f64, MomentError> {
        Ok(joint_cumulant(m, &ops)?.norm())
    };
    let checks = [
        ("mean E[X]", m.get(1, 0, 0, 0)?.norm()),
        ("mean E[Y]", m.get(0, 0, 1, 0)?.norm()),
        (
            "x-polarization power imbalance |E[|X|²] − 1|",
            (m.get(1, 1, 0, 0)? - 1.0).norm(),
        ),
        (
            "y-polarization power imbalance |E[|Y|²] − 1|",
            (m.get(0, 0, 1, 1)? - 1.0).norm(),
        ),
        ("improper second moment E[X²]", m.get(2, 0, 0, 0)?.norm()),
        ("improper second moment E[Y²]", m.get(0, 0, 2, 0)?.norm()),
        ("improper cross moment E[XY]", m.get(1, 0, 1, 0)?.norm()),
        ("cross-polarization correlation E[XY*]", m.get(1, 0, 0, 1)?.norm()),
        ("improper cumulant κ₄(X,X,Y*,Y*)", k4([XU, XU, YC, YC])?),
        ("improper cumulant κ₄(X,X,X*,Y*)", k4([XU, XU, XC, YC])?),
        ("improper cumulant κ₄(X,Y,Y*,Y*)", k4([XU, YU, YC, YC])?),
        ("improper cumulant κ₄(X,X,Y,Y)", k4([XU, XU, YU, YU])?),
    ];
    let (label, worst) = checks
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty check list");
    if worst > FORMAT_TOLERANCE {
        return Err(PredictError::UnsupportedFormat(format!(
            "{label} = {worst:.4} exceeds the supported-format tolerance {FORMAT_TOLERANCE} \
             (the models carry no interference slot for this statistic)"
        )));
    }
    Ok(())
}

/// The model's coefficient route applied to a prepared moment source.
fn coefficients_for(model: Model, moments: &MomentSet) -> Result<CoefficientSet, PredictError> {
    Ok(match model {
        Model::Gn => CoefficientSet::default(),
        Model::Egn | Model::Wegn => coefficients_egn(moments)?.into(),
        Model::FourD | Model::W4d => coefficients_4d(moments)?,
    })
}

fn assemble(
    table: &ChiIntegrals,
    link: &LinkConfig,
    grid: &WdmConfig,
    model: Model,
    window: Option<usize>,
    coefficients: CoefficientSet,
    power_w: f64,
) -> Prediction {
    let eta = eta_coefficients(table, &coefficients);
    let ase = ase_power(link, grid);
    let snr = power_w / (ase + eta.total() * power_w.powi(3));
    Prediction {
        model,
        window,
        coefficients,
        eta,
        ase_power_w: ase,
        launch_power_w: power_w,
        snr,
        snr_db: 10.0 * snr.log10(),
    }
}

fn validate_inputs(
    link: &LinkConfig,
    grid: &WdmConfig,
    power_w: f64,
) -> Result<(), PredictError> {
    link.validate()?;
    grid.validate()?;
    if !(power_w > 0.0) {
        return Err(PredictError::NonPositivePower(power_w));
    }
    Ok(())
}

/// Full model evaluation on a symbol sequence against a precomputed χ
/// table (see [`chi_table`](super::chi_table) and
/// [`ChiCache`](super::ChiCache); the table depends only on link and
/// grid). `window` applies to the windowed routes and defaults to the
/// dispersion-memory window [`default_window`]; the blockwise routes
/// ignore it.
pub fn predict_detail(
    table: &ChiIntegrals,
    link: &LinkConfig,
    grid: &WdmConfig,
    model: Model,
    seq: &SymbolSequence,
    power_w: f64,
    window: Option<usize>,
) -> Result<Prediction, PredictError> {
    validate_inputs(link, grid, power_w)?;
    let blockwise = MomentSet::from_sequence(seq)?;
    check_format(&blockwise)?;
    let (coefficients, used_window) = if model.windowed() {
        let w = window.unwrap_or_else(|| default_window(link, grid));
        let windowed = windowed_moments(seq, w)?;
        (coefficients_for(model, &windowed)?, Some(w))
    } else {
        (coefficients_for(model, &blockwise)?, None)
    };
    Ok(assemble(table, link, grid, model, used_window, coefficients, power_w))
}

/// Model evaluation from an explicit moment source — an analytic law
/// (e.g. the i.i.d. law of a target distribution) or a precomputed moment
/// table. The source's windowing must match the model: windowed routes
/// require a windowed set, blockwise routes a blockwise one (the Gaussian
/// baseline accepts either, it reads no moments).
pub fn predict_from_moments(
    table: &ChiIntegrals,
    link: &LinkConfig,
    grid: &WdmConfig,
    model: Model,
    moments: &MomentSet,
    power_w: f64,
) -> Result<Prediction, PredictError> {
    validate_inputs(link, grid, power_w)?;
    if model != Model::Gn {
        match (model.windowed(), moments.window) {
            (true, None) => return Err(PredictError::MissingWindow { model }),
            (false, Some(_)) => return Err(PredictError::UnexpectedWindow { model }),
            _ => {}
        }
    }
    check_format(moments)?;
    let coefficients = coefficients_for(model, moments)?;
    Ok(assemble(table, link, grid, model, moments.window, coefficients, power_w))
}

/// Convenience entry point that computes the χ table itself (at the
/// default quadrature tolerance) and returns the effective SNR in dB.
/// Prefer [`predict_detail`] with a cached table when evaluating more than
/// one model or power on the same link.
pub fn predict_snr(
    link: &LinkConfig,
    grid: &WdmConfig,
    model: Model,
    seq: &SymbolSequence,
    power_w: f64,
    window: Option<usize>,
) -> Result<f64, PredictError> {
    let table = chi_table(link, grid, &ChiOptions::default())?;
    Ok(predict_detail(&table, link, grid, model, seq, power_w, window)?.snr_db)
}
