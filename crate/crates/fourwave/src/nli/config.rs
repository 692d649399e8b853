//! Fiber-link and WDM-grid parameters shared by the models and the
//! simulator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// A multi-span fiber link with identical spans, each followed by an EDFA
/// whose gain exactly compensates the span loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Attenuation, dB/km.
    pub alpha_db_per_km: f64,
    /// Dispersion parameter D, ps/(nm·km). Ignored when
    /// `beta2_ps2_per_km` is set.
    pub dispersion_ps_per_nm_km: f64,
    /// Direct β₂ override, ps²/km (signed). `None` derives β₂ from D.
    pub beta2_ps2_per_km: Option<f64>,
    /// Kerr nonlinear coefficient γ, 1/(W·km).
    pub gamma_per_w_km: f64,
    /// Span length, km.
    pub span_length_km: f64,
    /// Number of identical spans.
    pub span_count: usize,
    /// EDFA noise figure, dB.
    pub noise_figure_db: f64,
    /// Center wavelength, nm.
    pub wavelength_nm: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            alpha_db_per_km: 0.2,
            dispersion_ps_per_nm_km: 17.0,
            beta2_ps2_per_km: None,
            gamma_per_w_km: 1.3,
            span_length_km: 80.0,
            span_count: 4,
            noise_figure_db: 5.0,
            wavelength_nm: 1550.0,
        }
    }
}

impl LinkConfig {
    /// Power attenuation coefficient, 1/m: P(z) = P(0)·e^(−αz).
    pub fn alpha_np_per_m(&self) -> f64 {
        self.alpha_db_per_km * std::f64::consts::LN_10 / 10.0 / 1000.0
    }

    /// Group-velocity dispersion β₂ in s²/m, derived from D unless
    /// overridden: β₂ = −D λ² / (2πc).
    pub fn beta2_si(&self) -> f64 {
        if let Some(b) = self.beta2_ps2_per_km {
            return b * 1e-27;
        }
        let d_si = self.dispersion_ps_per_nm_km * 1e-6; // s/m²
        let lambda = self.wavelength_nm * 1e-9;
        -d_si * lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
    }

    pub fn gamma_per_w_m(&self) -> f64 {
        self.gamma_per_w_km * 1e-3
    }

    pub fn span_length_m(&self) -> f64 {
        self.span_length_km * 1e3
    }

    pub fn total_length_m(&self) -> f64 {
        self.span_length_m() * self.span_count as f64
    }

    /// EDFA power gain, linear; exactly compensates one span.
    pub fn gain_linear(&self) -> f64 {
        10f64.powf(self.alpha_db_per_km * self.span_length_km / 10.0)
    }

    pub fn nf_linear(&self) -> f64 {
        10f64.powf(self.noise_figure_db / 10.0)
    }

    pub fn center_frequency_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (self.wavelength_nm * 1e-9)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.span_length_km > 0.0) {
            return bad(format!("span length {} km must be > 0", self.span_length_km));
        }
        if self.span_count < 1 {
            return bad("span count must be ≥ 1".into());
        }
        if !(self.gamma_per_w_km >= 0.0) {
            return bad(format!("γ = {} must be ≥ 0", self.gamma_per_w_km));
        }
        // α = 0 (lossless fiber) is a legitimate diagnostic regime: the
        // amplifier gain degenerates to 1 and the ASE power to 0.
        if !(self.alpha_db_per_km >= 0.0) {
            return bad(format!("attenuation {} dB/km must be ≥ 0", self.alpha_db_per_km));
        }
        if !(self.wavelength_nm > 0.0) {
            return bad("wavelength must be > 0".into());
        }
        if !(self.noise_figure_db >= 0.0) {
            return bad(format!("noise figure {} dB must be ≥ 0", self.noise_figure_db));
        }
        for (name, v) in [
            ("alpha", self.alpha_db_per_km),
            ("beta2", self.beta2_si()),
            ("gamma", self.gamma_per_w_km),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} is not finite"));
            }
        }
        Ok(())
    }
}

/// The WDM grid: equally spaced, equally powered channels with the
/// channel of interest at the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WdmConfig {
    /// Number of channels; must be odd so a center channel exists.
    pub channel_count: usize,
    /// Symbol rate, GBd.
    pub symbol_rate_gbd: f64,
    /// Channel spacing Δf, GHz.
    pub channel_spacing_ghz: f64,
    /// Root-raised-cosine roll-off ρ; B_ch = R_sym·(1+ρ).
    pub rolloff: f64,
}

impl Default for WdmConfig {
    fn default() -> Self {
        Self {
            channel_count: 9,
            symbol_rate_gbd: 45.0,
            channel_spacing_ghz: 50.0,
            rolloff: 0.01,
        }
    }
}

impl WdmConfig {
    pub fn symbol_rate_hz(&self) -> f64 {
        self.symbol_rate_gbd * 1e9
    }

    pub fn symbol_period_s(&self) -> f64 {
        1.0 / self.symbol_rate_hz()
    }

    pub fn channel_spacing_hz(&self) -> f64 {
        self.channel_spacing_ghz * 1e9
    }

    /// Occupied bandwidth per channel, B_ch = R_sym·(1+ρ).
    pub fn channel_bandwidth_hz(&self) -> f64 {
        self.symbol_rate_hz() * (1.0 + self.rolloff)
    }

    pub fn channel_bandwidth_ghz(&self) -> f64 {
        self.symbol_rate_gbd * (1.0 + self.rolloff)
    }

    /// Center-channel index, `channel_count / 2`.
    pub fn center_channel(&self) -> usize {
        self.channel_count / 2
    }

    /// Signed channel offsets relative to the center channel.
    pub fn channel_offsets(&self) -> impl Iterator<Item = i64> + '_ {
        let half = (self.channel_count / 2) as i64;
        -half..=half
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.channel_count < 1 {
            return bad("channel count must be ≥ 1".into());
        }
        if self.channel_count % 2 == 0 {
            return bad(format!(
                "channel count {} must be odd (center channel of interest)",
                self.channel_count
            ));
        }
        if !(self.symbol_rate_gbd > 0.0) {
            return bad("symbol rate must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return bad(format!("roll-off {} outside [0, 1]", self.rolloff));
        }
        if self.channel_spacing_ghz < self.channel_bandwidth_ghz() {
            return bad(format!(
                "channel spacing {} GHz below channel bandwidth {} GHz (spectral overlap)",
                self.channel_spacing_ghz,
                self.channel_bandwidth_ghz()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_link_validates() {
        LinkConfig::default().validate().expect("link");
        WdmConfig::default().validate().expect("grid");
    }

    #[test]
    fn beta2_conversion_matches_hand_value() {
        // D = 17 ps/(nm·km) at 1550 nm → β₂ = −D λ²/(2πc) ≈ −21.68 ps²/km.
        let link = LinkConfig::default();
        let b_ps2_km = link.beta2_si() * 1e27;
        assert!((b_ps2_km + 21.6825).abs() < 5e-3, "{b_ps2_km}");
        let with_override = LinkConfig {
            beta2_ps2_per_km: Some(-5.0),
            ..LinkConfig::default()
        };
        assert!((with_override.beta2_si() * 1e27 + 5.0).abs() < 1e-12);
    }

    #[test]
    fn gain_compensates_span_loss() {
        let link = LinkConfig::default();
        // 0.2 dB/km × 80 km = 16 dB.
        assert!((link.gain_linear() - 10f64.powf(1.6)).abs() < 1e-9);
        // Consistency between dB and Naperian forms.
        let loss = (-link.alpha_np_per_m() * link.span_length_m()).exp();
        assert!((link.gain_linear() * loss - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut link = LinkConfig::default();
        link.span_count = 0;
        assert!(link.validate().is_err());

        let mut grid = WdmConfig::default();
        grid.channel_count = 8;
        assert!(grid.validate().is_err());

        let mut tight = WdmConfig::default();
        tight.channel_spacing_ghz = 45.0; // below 45·1.01 = 45.45 GHz
        assert!(tight.validate().is_err());

        let mut neg = LinkConfig::default();
        neg.gamma_per_w_km = -1.0;
        assert!(neg.validate().is_err());
    }

    #[test]
    fn toml_round_trip_rejects_unknown_keys() {
        let link = LinkConfig::default();
        let text = toml::to_string(&link).expect("serialize");
        let back: LinkConfig = toml::from_str(&text).expect("parse");
        assert_eq!(link, back);
        assert!(toml::from_str::<LinkConfig>("alpha_db_per_mile = 0.3").is_err());
        // Partial tables fill from defaults.
        let partial: WdmConfig = toml::from_str("channel_count = 3").expect("parse");
        assert_eq!(partial.channel_count, 3);
        assert_eq!(partial.symbol_rate_gbd, 45.0);
    }

    #[test]
    fn channel_offsets_are_centered() {
        let grid = WdmConfig::default();
        let offsets: Vec<i64> = grid.channel_offsets().collect();
        assert_eq!(offsets.len(), 9);
        assert_eq!(offsets[0], -4);
        assert_eq!(offsets[8], 4);
        assert_eq!(offsets[grid.center_channel()], 0);
    }
}
