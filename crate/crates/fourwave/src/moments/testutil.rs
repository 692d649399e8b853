//! Shared constellation builders for moment/coefficient tests.

use num_complex::Complex64;

/// Uniform square QAM with the given per-axis levels (e.g. `[1.0]` for
/// QPSK, `[1.0, 3.0]` for 16QAM, `[1.0, 3.0, 5.0, 7.0]` for 64QAM).
pub(crate) fn square_qam(levels: &[f64]) -> (Vec<Complex64>, Vec<f64>) {
    let mut pts = Vec::new();
    for &i in levels {
        for &q in levels {
            for (si, sq) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                pts.push(Complex64::new(si * i, sq * q));
            }
        }
    }
    let w = vec![1.0 / pts.len() as f64; pts.len()];
    (pts, w)
}
