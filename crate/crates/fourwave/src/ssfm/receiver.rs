//! Ideal coherent receiver for one channel of the propagated frame, and
//! the data-aided SNR measurement.
//!
//! The chain is: downconvert the channel slot (circular spectral shift),
//! compensate the accumulated dispersion of the whole line at the
//! channel's absolute frequencies (so inter-channel walk-off is undone
//! along with intra-channel dispersion), apply the matched root-raised-
//! cosine filter, fold the spectrum onto the symbol-rate grid (exact
//! decimation on the cyclic frame), and inverse-transform to symbols.
//!
//! Scale and mean phase are deliberately left uncalibrated: the SNR
//! measurement fits one complex scalar per polarization against the
//! known transmitted symbols, which absorbs the transmit normalization
//! and the mean nonlinear phase rotation without biasing the noise
//! estimate.

use super::waveform::{bin_freq_hz, fft_forward, offset_bins, rrc_response};
use super::{SsfmError, Waveform};
use crate::nli::{LinkConfig, WdmConfig};
use crate::shaping::SymbolSequence;
use crate::util::{Kahan, KahanC};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Returned when the residual after equalization is numerically zero.
pub const SNR_SENTINEL_DB: f64 = 200.0;

/// Demodulates `channel` (0-based grid index) from the frame back to
/// symbol-rate samples. The output keeps the transmit scale and any
/// common phase; [`measure_snr`] calibrates both.
pub fn receive(
    wave: &Waveform,
    channel: usize,
    grid: &WdmConfig,
    link: &LinkConfig,
) -> Result<SymbolSequence, SsfmError> {
    grid.validate()?;
    link.validate()?;
    if channel >= grid.channel_count {
        return Err(SsfmError::UnknownChannel {
            index: channel,
            count: grid.channel_count,
        });
    }
    let n = wave.len();
    if n == 0 || wave.y.len() != n {
        return Err(SsfmError::Setup("waveform is empty or lopsided".into()));
    }
    let fs = wave.sample_rate_hz;
    let r = grid.symbol_rate_hz();
    let n_sym_f = n as f64 * r / fs;
    let n_sym = n_sym_f.round() as usize;
    if n_sym == 0 || (n_sym_f - n_sym as f64).abs() > 1e-6 {
        return Err(SsfmError::Setup(format!(
            "frame of {n} samples at {fs} Hz does not hold a whole number of \
             {r} Hz symbols"
        )));
    }
    let line_hz = fs / n as f64;
    let half = (grid.channel_count / 2) as i64;
    let offset_hz =
        (channel as i64 - half) as f64 * grid.channel_spacing_hz() - wave.center_offset_hz;
    let shift = offset_bins(offset_hz, line_hz)?;

    let mut spec_x = wave.x.clone();
    let mut spec_y = wave.y.clone();
    fft_forward(&mut spec_x);
    fft_forward(&mut spec_y);

    // Accumulate matched-filtered bins onto the symbol-rate grid. Bin m
    // sits at baseband frequency f_m − offset and folds onto symbol bin
    // (m − shift) mod n_sym; the transmit and matched RRC responses pair
    // to a raised cosine whose folded sum is exactly one.
    let total_m = link.total_length_m();
    let beta2 = link.beta2_si();
    let band_half = 0.5 * (1.0 + grid.rolloff) * r;
    let half_bins = (band_half / line_hz).floor() as i64;
    let mut sym_x = vec![Complex64::default(); n_sym];
    let mut sym_y = vec![Complex64::default(); n_sym];
    for k in -half_bins..=half_bins {
        let h = rrc_response(k as f64 * line_hz, r, grid.rolloff);
        if h == 0.0 {
            continue;
        }
        let m = (k + shift).rem_euclid(n as i64) as usize;
        // Guard against bands that wrap past Nyquist: the absolute bin
        // frequency must equal offset + baseband frequency.
        let f_abs = bin_freq_hz(m, n, line_hz);
        if (f_abs - (offset_hz + k as f64 * line_hz)).abs() > 0.5 * line_hz {
            return Err(SsfmError::Aliasing {
                required_ghz: 2.0 * (offset_hz.abs() + band_half) / 1e9,
                sample_rate_ghz: fs / 1e9,
            });
        }
        let cdc = Complex64::from_polar(
            h,
            -0.5 * beta2 * (std::f64::consts::TAU * f_abs).powi(2) * total_m,
        );
        let j = k.rem_euclid(n_sym as i64) as usize;
        sym_x[j] += spec_x[m] * cdc;
        sym_y[j] += spec_y[m] * cdc;
    }

    let inv = FftPlanner::new().plan_fft_inverse(n_sym);
    inv.process(&mut sym_x);
    inv.process(&mut sym_y);
    let s = 1.0 / n_sym as f64;
    for v in sym_x.iter_mut().chain(sym_y.iter_mut()) {
        *v *= s;
    }
    Ok(SymbolSequence::new(sym_x, sym_y, None).expect("lengths match by construction"))
}

/// Effective SNR (dB) of `received` against the known `transmitted`
/// symbols, totalled over the four real dimensions:
/// Σ|X|² / Σ|Ŷ − X|², where Ŷ is the received sequence after one complex
/// least-squares scalar per polarization (joint scale and phase, fitted
/// against the transmitted symbols). One percent of the symbols at each
/// end is excluded. A numerically zero residual returns
/// [`SNR_SENTINEL_DB`].
pub fn measure_snr(
    transmitted: &SymbolSequence,
    received: &SymbolSequence,
) -> Result<f64, SsfmError> {
    if transmitted.len() != received.len() {
        return Err(SsfmError::LengthMismatch {
            tx: transmitted.len(),
            rx: received.len(),
        });
    }
    let len = transmitted.len();
    if len == 0 {
        return Err(SsfmError::Setup("sequences are empty".into()));
    }
    let trim = len / 100;
    let range = trim..len - trim;

    let mut signal = Kahan::new();
    let mut noise = Kahan::new();
    for (tx, rx) in [
        (&transmitted.x_pol, &received.x_pol),
        (&transmitted.y_pol, &received.y_pol),
    ] {
        let mut sxx = Kahan::new();
        let mut syy = Kahan::new();
        let mut sxy = KahanC::new();
        for i in range.clone() {
            sxx.add(tx[i].norm_sqr());
            syy.add(rx[i].norm_sqr());
            sxy.add(tx[i].conj() * rx[i]);
        }
        let (sxx, syy, sxy) = (sxx.value(), syy.value(), sxy.value());
        if !(sxx > 0.0) {
            return Err(SsfmError::Setup(
                "transmitted sequence has zero power in one polarization".into(),
            ));
        }
        // Decompose rx = a·tx + e with e ⊥ tx; the equalized received
        // sequence is rx/a, so the residual power is |e|²/|a|².
        let a = sxy / sxx;
        let resid = (syy - sxy.norm_sqr() / sxx).max(0.0);
        signal.add(sxx);
        noise.add(resid / a.norm_sqr());
    }
    let (signal, noise) = (signal.value(), noise.value());
    if !(noise > signal * 1e-20) {
        return Ok(SNR_SENTINEL_DB);
    }
    Ok(crate::util::to_db(signal / noise))
}
