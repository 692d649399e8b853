//! Analytical nonlinear-interference prediction.
//!
//! The engine is a three-stage pipeline. Link-dependent χ integrals are
//! computed once per (link, grid) pair by deterministic quadrature and
//! cached; modulation-dependent coefficients come from
//! [`crate::moments`]; their dot product gives the NLI power coefficients
//! η so that the NLI power is η·P³ and
//! SNR_eff = P / (σ²_ASE + η_total·P³).

pub mod cache;
pub mod chi;
mod config;
pub mod eta;
pub mod kernel;
pub(crate) mod patterns;
pub mod predict;
pub mod quad;

pub use cache::ChiCache;
pub use chi::{
    chi_cache_key, chi_integrals, chi_table, ChiError, ChiIntegrals, ChiOptions, ChiVector,
};
pub use config::{ConfigError, LinkConfig, WdmConfig, PLANCK, SPEED_OF_LIGHT};
pub use eta::{coefficient_vector, eta, eta_coefficients, EtaCoefficients, EtaError};
pub use patterns::ChiKind;
pub use predict::{
    ase_power, dbm_to_watts, effective_snr_db, optimal_power, predict_detail,
    predict_from_moments, predict_snr, refine_power_grid, watts_to_dbm, Model, Prediction,
    PredictError,
};
