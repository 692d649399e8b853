//! The link kernel: frequency-domain four-wave-mixing efficiency of the
//! whole amplified line.
//!
//! For a triplet that deposits interference at receive frequency ν, with
//! unconjugated spectral components at ν + f1 and ν + f2, the phase
//! mismatch accumulated per unit length is Δβ = 4π²β₂·f1·f2 (β₂-only
//! dispersion). One lossy span contributes
//!
//! ```text
//! μ(Δβ) = ∫₀^{Ls} e^{(−α + jΔβ) z} dz = (e^{(−α+jΔβ)Ls} − 1) / (−α + jΔβ)
//! ```
//!
//! and N identical spans with per-span attenuation exactly compensated add
//! coherently with the phased-array factor Σ_{k<N} e^{jkΔβLs}. The full
//! kernel is their product; its squared magnitude weights the GN-type
//! integrals and the complex value enters the fourth- and sixth-order
//! factor integrals.

use super::config::LinkConfig;
use num_complex::Complex64;

/// Phase mismatch per unit length (rad/m) for unconjugated frequency
/// offsets `f1`, `f2` (Hz) measured from the receive frequency.
pub fn delta_beta(link: &LinkConfig, f1: f64, f2: f64) -> f64 {
    4.0 * std::f64::consts::PI.powi(2) * link.beta2_si() * f1 * f2
}

/// (e^w − 1)/w, stable near w = 0.
fn expm1_over(w: Complex64) -> Complex64 {
    if w.norm() < 1e-6 {
        // Series: 1 + w/2 + w²/6 (next term ~1e-26 relative at the cut).
        Complex64::new(1.0, 0.0) + w * 0.5 + w * w / 6.0
    } else {
        (w.exp() - 1.0) / w
    }
}

/// Single-span four-wave-mixing efficiency μ(Δβ) in meters.
pub fn span_kernel(link: &LinkConfig, delta_beta: f64) -> Complex64 {
    let ls = link.span_length_m();
    let w = Complex64::new(-link.alpha_np_per_m(), delta_beta) * ls;
    expm1_over(w) * ls
}

/// Coherent multi-span accumulation Σ_{k=0}^{Ns−1} e^{jkΔβLs}
/// (dimensionless; equals Ns at phase matching).
pub fn phased_array(link: &LinkConfig, delta_beta: f64) -> Complex64 {
    let ns = link.span_count;
    let theta = delta_beta * link.span_length_m();
    // Geometric closed form breaks down near θ = 2πm; the direct sum is
    // exact and cheap enough there.
    if (0.5 * theta).sin().abs() < 1e-9 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..ns {
            acc += Complex64::new(0.0, k as f64 * theta).exp();
        }
        acc
    } else {
        let num = 1.0 - Complex64::new(0.0, ns as f64 * theta).exp();
        let den = 1.0 - Complex64::new(0.0, theta).exp();
        num / den
    }
}

/// Full-link kernel: single-span efficiency times the phased-array
/// factor, in meters. `f1`, `f2` are the unconjugated frequency offsets
/// from the receive frequency.
pub fn link_kernel(f1: f64, f2: f64, link: &LinkConfig) -> Complex64 {
    let db = delta_beta(link, f1, f2);
    span_kernel(link, db) * phased_array(link, db)
}
