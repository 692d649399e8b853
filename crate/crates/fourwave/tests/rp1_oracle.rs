//! Monte-Carlo cross-validation of the analytic interference
//! coefficients against the split-step simulator.
//!
//! At perturbative launch power the simulator's received distortion is
//! the first-order nonlinear interference, so `noise/signal = η·P²`
//! inverts to an independent measurement of η. The simulator shares no
//! integration code with the χ tables — only the configuration types —
//! so agreement here pins the absolute normalization (the (8/9)γ Manakov
//! factor, span accounting, power conventions) of both routes at once.
//!
//! Two input laws probe different coefficient slots: circular Gaussian
//! symbols exercise the baseline alone (every excess-cumulant correction
//! vanishes), and PM-QPSK adds the fourth/sixth-order corrections at
//! full strength (Φ = −1, Ψ = 4 per polarization).

use fourwave::moments::{coefficients_4d, CoefficientSet, MomentSet};
use fourwave::nli::{chi_table, eta_coefficients, ChiIntegrals, ChiOptions, LinkConfig, WdmConfig};
use fourwave::shaping::SymbolSequence;
use fourwave::ssfm::{
    generate_waveform, measure_snr, propagate, receive, rrc_response, SsfmConfig, StepRule,
};
use fourwave::util::derive_seed;
use fourwave::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::OnceLock;

/// Two spans keep runtime low while still exercising coherent span
/// accumulation; the grid is the desk-scale 3-channel multiplex.
fn link() -> LinkConfig {
    LinkConfig {
        span_count: 2,
        ..LinkConfig::default()
    }
}

fn grid() -> WdmConfig {
    WdmConfig {
        channel_count: 3,
        channel_spacing_ghz: 50.625,
        ..WdmConfig::default()
    }
}

fn table() -> &'static ChiIntegrals {
    static TABLE: OnceLock<ChiIntegrals> = OnceLock::new();
    TABLE.get_or_init(|| {
        chi_table(&link(), &grid(), &ChiOptions::default()).expect("χ table")
    })
}

/// 8 samples/symbol puts Nyquist at ±180 GHz; mixing products reach
/// ~220 GHz and alias, but the folded copies land far outside the
/// measured center-channel band, so the estimate stays clean.
///
/// The step rule is fixed-length rather than the nonlinear-phase
/// heuristic: at perturbative launch power the phase criterion allows
/// steps of tens of kilometres, far coarser than the shortest
/// phase-mismatch beat (~1 km across this grid), and the interference
/// integral is then mis-sampled even though the total nonlinear phase
/// is tiny. The step-convergence probe below documents the residual.
fn sim_config(step_km: f64) -> SsfmConfig {
    SsfmConfig {
        samples_per_symbol: 8,
        ase: false,
        step: StepRule::FixedKm(step_km),
        ..SsfmConfig::default()
    }
}

const STEP_KM: f64 = 0.5;

const SYMBOLS: usize = 8192;
const LAUNCH_W: f64 = 2.5e-4; // −6 dBm: deep in the perturbative regime
const SEEDS: [u64; 4] = [11, 12, 13, 14];

fn qpsk(n: usize, seed: u64) -> SymbolSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dim = || {
        (0..n)
            .map(|_| {
                let re = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let im = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect::<Vec<_>>()
    };
    let (x, y) = (dim(), dim());
    SymbolSequence::new(x, y, None).expect("equal lengths")
}

fn gaussian(n: usize, seed: u64) -> SymbolSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dim = || {
        (0..n)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect::<Vec<_>>()
    };
    let (x, y) = (dim(), dim());
    SymbolSequence::new(x, y, None).expect("equal lengths")
}

/// One simulator run: independent sequences per channel, propagate at
/// `LAUNCH_W`, demodulate the center channel, return noise/signal.
fn distortion_ratio(
    make: &dyn Fn(usize, u64) -> SymbolSequence,
    seed: u64,
    cfg: &SsfmConfig,
) -> f64 {
    let channels: Vec<_> = (0..3)
        .map(|c| make(SYMBOLS, derive_seed(seed, &format!("channel-{c}"))))
        .collect();
    let wave = generate_waveform(&channels, &grid(), LAUNCH_W, cfg).expect("generate");
    let out = propagate(wave, &link(), cfg).expect("propagate");
    let rx = receive(&out, 1, &grid(), &link()).expect("receive");
    let snr_db = measure_snr(&channels[1], &rx).expect("snr");
    10f64.powf(-snr_db / 10.0)
}

/// Seed-averaged Monte-Carlo estimate of η = (noise/signal)/P².
fn measured_eta(make: &dyn Fn(usize, u64) -> SymbolSequence) -> f64 {
    let cfg = sim_config(STEP_KM);
    let mean: f64 = SEEDS
        .iter()
        .map(|&s| distortion_ratio(make, s, &cfg))
        .sum::<f64>()
        / SEEDS.len() as f64;
    mean / (LAUNCH_W * LAUNCH_W)
}

fn average_coefficients(sets: &[CoefficientSet]) -> CoefficientSet {
    if sets.is_empty() {
        return CoefficientSet::default();
    }
    let n = sets.len() as f64;
    let mean = |f: &dyn Fn(&CoefficientSet) -> f64| sets.iter().map(|s| f(s)).sum::<f64>() / n;
    CoefficientSet {
        phi1: mean(&|s| s.phi1),
        phi2: mean(&|s| s.phi2),
        phi3: mean(&|s| s.phi3),
        psi1: mean(&|s| s.psi1),
        psi2: mean(&|s| s.psi2),
        psi3: mean(&|s| s.psi3),
        psi4: mean(&|s| s.psi4),
        lambda1: mean(&|s| s.lambda1),
        lambda2: mean(&|s| s.lambda2),
        lambda3: mean(&|s| s.lambda3),
        lambda4: mean(&|s| s.lambda4),
        lambda5: mean(&|s| s.lambda5),
        lambda6: mean(&|s| s.lambda6),
        xi1: mean(&|s| s.xi1),
    }
}

/// Analytic η evaluated at the *realized* statistics of one drawn frame:
/// the self-channel slot takes the center channel's empirical cumulants,
/// the cross-channel slot the neighbors' average. This removes the part
/// of the Monte-Carlo scatter that comes from the finite draw's moments
/// wandering around their ensemble values.
fn eta_at_realized_with(channels: &[SymbolSequence], t: &ChiIntegrals) -> f64 {
    let coeffs: Vec<CoefficientSet> = channels
        .iter()
        .map(|ch| {
            let moments = MomentSet::from_sequence(ch).expect("moments");
            coefficients_4d(&moments).expect("coefficients")
        })
        .collect();
    let center = channels.len() / 2;
    let others: Vec<CoefficientSet> = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != center)
        .map(|(_, c)| *c)
        .collect();
    let neighbors = average_coefficients(&others);
    let all = average_coefficients(&coeffs);
    t.sci.dot(&coeffs[center]) + t.xci.dot(&neighbors) + t.mci.dot(&all)
}

fn eta_at_realized_moments(channels: &[SymbolSequence]) -> f64 {
    eta_at_realized_with(channels, table())
}

/// Diagnostic, not a gate: scans span count with per-count χ tables.
/// One span has no coherent accumulation machinery at all, so a gap
/// that survives at one span indicts the single-span kernel, while a
/// gap that appears with span count indicts the span summation. Run
/// with `cargo test --test rp1_oracle span_probe -- --ignored --nocapture`.
#[test]
#[ignore = "span accumulation probe; prints values for manual inspection"]
fn span_probe() {
    let cfg = sim_config(1.0);
    for span_count in [1usize, 2, 4] {
        let link = LinkConfig {
            span_count,
            ..LinkConfig::default()
        };
        let t = chi_table(&link, &grid(), &ChiOptions::default()).expect("χ table");
        let gn = eta_coefficients(&t, &CoefficientSet::default()).total();
        for (label, make) in [
            ("gaussian", &gaussian as &dyn Fn(usize, u64) -> SymbolSequence),
            ("qpsk", &qpsk),
        ] {
            let seeds: &[u64] = if label == "gaussian" {
                &[11, 12, 13, 14, 15, 16]
            } else {
                &[11, 12, 13, 14]
            };
            let mut ratios = Vec::new();
            for &seed in seeds {
                let channels: Vec<_> = (0..3)
                    .map(|c| make(SYMBOLS, derive_seed(seed, &format!("channel-{c}"))))
                    .collect();
                let wave =
                    generate_waveform(&channels, &grid(), LAUNCH_W, &cfg).expect("generate");
                let out = propagate(wave, &link, &cfg).expect("propagate");
                let rx = receive(&out, 1, &grid(), &link).expect("receive");
                let snr_db = measure_snr(&channels[1], &rx).expect("snr");
                let mc = 10f64.powf(-snr_db / 10.0) / (LAUNCH_W * LAUNCH_W);
                ratios.push(mc / eta_at_realized_with(&channels, &t));
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            eprintln!(
                "spans {span_count} {label:8} gn {gn:7.2}: mean mc/realized {mean:.4}  ({})",
                ratios
                    .iter()
                    .map(|r| format!("{r:.3}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
    }
}

/// Diagnostic, not a gate: isolates the source of any residual gap by
/// scaling launch power (first-order η̂ is power-independent; any
/// second-order contamination grows as P²), oversampling, and frame
/// length for a fixed seed. Run with
/// `cargo test --test rp1_oracle bias_probe -- --ignored --nocapture`.
#[test]
#[ignore = "bias isolation probe; prints values for manual inspection"]
fn bias_probe() {
    let cfg = sim_config(1.0);
    for seed in [11u64, 12] {
        for power_w in [1.0e-4, 2.5e-4, 5.0e-4] {
            let channels: Vec<_> = (0..3)
                .map(|c| gaussian(SYMBOLS, derive_seed(seed, &format!("channel-{c}"))))
                .collect();
            let wave = generate_waveform(&channels, &grid(), power_w, &cfg).expect("generate");
            let out = propagate(wave, &link(), &cfg).expect("propagate");
            let rx = receive(&out, 1, &grid(), &link()).expect("receive");
            let snr_db = measure_snr(&channels[1], &rx).expect("snr");
            let mc = 10f64.powf(-snr_db / 10.0) / (power_w * power_w);
            let realized = eta_at_realized_moments(&channels);
            eprintln!(
                "seed {seed} P {:.2e} W: mc {mc:7.2} realized {realized:7.2} ratio {:.4}",
                power_w,
                mc / realized
            );
        }
    }
    // Oversampling and frame-length checks at the reference power.
    for (sps, n_sym) in [(8usize, 16384usize), (16, 8192)] {
        let cfg = SsfmConfig {
            samples_per_symbol: sps,
            ase: false,
            step: StepRule::FixedKm(1.0),
            ..SsfmConfig::default()
        };
        let channels: Vec<_> = (0..3)
            .map(|c| gaussian(n_sym, derive_seed(11, &format!("channel-{c}"))))
            .collect();
        let wave = generate_waveform(&channels, &grid(), LAUNCH_W, &cfg).expect("generate");
        let out = propagate(wave, &link(), &cfg).expect("propagate");
        let rx = receive(&out, 1, &grid(), &link()).expect("receive");
        let snr_db = measure_snr(&channels[1], &rx).expect("snr");
        let mc = 10f64.powf(-snr_db / 10.0) / (LAUNCH_W * LAUNCH_W);
        let realized = eta_at_realized_moments(&channels);
        eprintln!(
            "sps {sps} n_sym {n_sym}: mc {mc:7.2} realized {realized:7.2} ratio {:.4}",
            mc / realized
        );
    }
}

/// Diagnostic, not a gate: single-channel runs isolate the self-channel
/// entries from the cross-channel term bookkeeping. Run with
/// `cargo test --test rp1_oracle single_channel_probe -- --ignored --nocapture`.
#[test]
#[ignore = "single-channel isolation probe; prints values for manual inspection"]
fn single_channel_probe() {
    let grid1 = WdmConfig {
        channel_count: 1,
        channel_spacing_ghz: 50.625,
        ..WdmConfig::default()
    };
    let cfg = sim_config(1.0);
    for span_count in [1usize, 2] {
        let link = LinkConfig {
            span_count,
            ..LinkConfig::default()
        };
        let t = chi_table(&link, &grid1, &ChiOptions::default()).expect("χ table");
        let gn = eta_coefficients(&t, &CoefficientSet::default()).total();
        for (label, make) in [
            ("gaussian", &gaussian as &dyn Fn(usize, u64) -> SymbolSequence),
            ("qpsk", &qpsk),
        ] {
            let mut ratios = Vec::new();
            for seed in [11u64, 12, 13, 14, 15, 16] {
                let channels = vec![make(SYMBOLS, derive_seed(seed, "channel-0"))];
                let wave =
                    generate_waveform(&channels, &grid1, LAUNCH_W, &cfg).expect("generate");
                let out = propagate(wave, &link, &cfg).expect("propagate");
                let rx = receive(&out, 0, &grid1, &link).expect("receive");
                let snr_db = measure_snr(&channels[0], &rx).expect("snr");
                let mc = 10f64.powf(-snr_db / 10.0) / (LAUNCH_W * LAUNCH_W);
                ratios.push(mc / eta_at_realized_with(&channels, &t));
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            eprintln!(
                "1ch spans {span_count} {label:8} gn {gn:7.2}: mean mc/realized {mean:.4}  ({})",
                ratios
                    .iter()
                    .map(|r| format!("{r:.3}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
    }
}

/// Exact first-order interference statistics on the cyclic frame,
/// computed by direct enumeration over discrete tone triples with an
/// independently written link kernel — no adaptive quadrature, no
/// Monte-Carlo noise, no shared integration code. Returns the η-slot
/// values (gn, φ₁, ψ₁) for a single-channel grid.
///
/// The construction mirrors the simulator exactly: `n` symbols per
/// frame, root-raised-cosine tone weights, receiver fold at the true
/// tone frequency, least-squares scalar removal (the mean-distortion
/// partitions are exactly scalar on this frame and are omitted). Each
/// surviving cumulant-partition topology reduces, by Parseval over the
/// free lattice offsets, to a dense contraction of the folded tone
/// kernel.
/// Folded tone kernel K̃(r1, r2, r3): residues mod `n` of the true tone
/// triple (m1, m2, m3), root-raised-cosine weights at true frequencies
/// (transmit three times, receive once at mν = m1 − m2 + m3), and an
/// independently written link kernel — per-span ∫₀^L e^{(−α+iΔβ)z} dz
/// times the inter-span phase ladder e^{iΔβ·L·s}.
fn folded_kernel(link: &LinkConfig, n: usize, symbol_rate_hz: f64, rolloff: f64) -> Vec<Complex64> {
    let ls = link.span_length_m();
    let alpha = link.alpha_np_per_m();
    let k4 = 4.0 * std::f64::consts::PI * std::f64::consts::PI * link.beta2_si();
    let spans = link.span_count;
    let delta = symbol_rate_hz / n as f64;
    let h_max = (n as f64 * (1.0 + rolloff) / 2.0).floor() as i64;

    let mu = |db: f64| -> Complex64 {
        let a = Complex64::new(-alpha, db);
        let span = ((a * ls).exp() - 1.0) / a;
        let mut ladder = Complex64::new(0.0, 0.0);
        for s in 0..spans {
            ladder += Complex64::new(0.0, db * ls * s as f64).exp();
        }
        span * ladder
    };
    let h = |m: i64| rrc_response(m as f64 * delta, symbol_rate_hz, rolloff);
    let ridx = |m: i64| m.rem_euclid(n as i64) as usize;

    let nn = n * n;
    let mut kt = vec![Complex64::new(0.0, 0.0); n * nn];
    for m1 in -h_max..=h_max {
        let h1 = h(m1);
        if h1 == 0.0 {
            continue;
        }
        for m2 in -h_max..=h_max {
            let h2 = h(m2);
            if h2 == 0.0 {
                continue;
            }
            for m3 in -h_max..=h_max {
                let h3 = h(m3);
                if h3 == 0.0 {
                    continue;
                }
                let mv = m1 - m2 + m3;
                let hv = h(mv);
                if hv == 0.0 {
                    continue;
                }
                let db = k4 * delta * delta * ((m2 - m3) * (m2 - m1)) as f64;
                kt[ridx(m1) * nn + ridx(m2) * n + ridx(m3)] += h1 * h2 * h3 * hv * mu(db);
            }
        }
    }
    kt
}

fn discrete_slots(link: &LinkConfig, n: usize, symbol_rate_hz: f64, rolloff: f64) -> [f64; 3] {
    let gamma_t = link.gamma_per_w_m() * 8.0 / 9.0;
    let nn = n * n;
    let kt = folded_kernel(link, n, symbol_rate_hz, rolloff);

    // Contractions. Free-offset Parseval turns each topology into a
    // reduced-kernel energy: p free lattice sums give a factor n^p.
    let mut diag = 0.0f64;
    let mut wired = Complex64::new(0.0, 0.0);
    let mut ka = vec![Complex64::new(0.0, 0.0); nn]; // (r1, r3−r2)
    let mut kb = vec![Complex64::new(0.0, 0.0); nn]; // (r1−r2, r3)
    let mut kc = vec![Complex64::new(0.0, 0.0); nn]; // (r1+r3, r2)
    let mut tv = vec![Complex64::new(0.0, 0.0); n]; // r1−r2+r3
    for r1 in 0..n {
        for r2 in 0..n {
            for r3 in 0..n {
                let k = kt[r1 * nn + r2 * n + r3];
                if k == Complex64::new(0.0, 0.0) {
                    continue;
                }
                diag += k.norm_sqr();
                wired += k * kt[r3 * nn + r2 * n + r1].conj();
                ka[r1 * n + (r3 + n - r2) % n] += k;
                kb[((r1 + n - r2) % n) * n + r3] += k;
                kc[((r1 + r3) % n) * n + r2] += k;
                tv[(r1 + n - r2 + r3) % n] += k;
            }
        }
    }
    let v03: f64 = ka.iter().map(|k| k.norm_sqr()).sum();
    let v25: f64 = kb.iter().map(|k| k.norm_sqr()).sum();
    let v14: f64 = kc.iter().map(|k| k.norm_sqr()).sum();
    let mut v05 = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for q in 0..n {
            v05 += ka[r * n + q] * kb[q * n + r].conj();
        }
    }
    let v6: f64 = tv.iter().map(|k| k.norm_sqr()).sum();

    let nf = n as f64;
    let scale = gamma_t * gamma_t / 8.0 / nf.powi(6);
    // Polarization-census weights: GN diag 4 + wired 2; φ₁ takes each
    // difference beat once except the receive-pair one twice, plus the
    // degenerate sum beat; ψ₁ is the single sixth-order block.
    let gn = scale * nf.powi(3) * (4.0 * diag + 2.0 * wired.re);
    let phi1 = scale * nf.powi(2) * (v03 + 2.0 * v25 + v14 + 2.0 * v05.re);
    let psi1 = scale * nf * v6;
    [gn, phi1, psi1]
}

/// Diagnostic, not a gate: triangulates the χ table against the exact
/// discrete ensemble and the simulator on the same single-channel frame.
/// Run with `cargo test --test rp1_oracle discrete_probe -- --ignored --nocapture`.
#[test]
#[ignore = "discrete ensemble triangulation; prints values for manual inspection"]
fn discrete_probe() {
    let grid1 = WdmConfig {
        channel_count: 1,
        channel_spacing_ghz: 50.625,
        ..WdmConfig::default()
    };
    let r = grid1.symbol_rate_hz();
    for spans in [1usize, 2] {
        let link = LinkConfig {
            span_count: spans,
            ..LinkConfig::default()
        };
        let t = chi_table(&link, &grid1, &ChiOptions::default()).expect("χ table");
        eprintln!(
            "--- spans {spans}: table gn {:.4} phi1 {:.4} psi1 {:.4} ---",
            t.sci.gn, t.sci.phi1, t.sci.psi1
        );
        for n in [128usize, 192] {
            let [gn, phi1, psi1] = discrete_slots(&link, n, r, grid1.rolloff);
            eprintln!(
                "discrete n={n}: gn {gn:.4} ({:+.2}%)  phi1 {phi1:.4} ({:+.2}%)  psi1 {psi1:.4} ({:+.2}%)",
                (gn / t.sci.gn - 1.0) * 100.0,
                (phi1 / t.sci.phi1 - 1.0) * 100.0,
                (psi1 / t.sci.psi1 - 1.0) * 100.0
            );
        }
        // Simulator on the same frame: η for QPSK (fast-converging) at
        // n = 256. One channel keeps all mixing products far inside
        // Nyquist even at 4 samples/symbol, and the shorter frame then
        // clears the dispersion-spread guard at both span counts.
        let n = 256usize;
        let [gn, phi1, psi1] = discrete_slots(&link, n, r, grid1.rolloff);
        let eta_qpsk_discrete = gn - 2.0 * phi1 + 8.0 * psi1;
        let cfg = SsfmConfig {
            samples_per_symbol: 4,
            ..sim_config(0.5)
        };
        let mut acc = 0.0;
        let seeds = 24u64;
        for seed in 0..seeds {
            let channels = vec![qpsk(n, 7000 + seed)];
            let wave = generate_waveform(&channels, &grid1, LAUNCH_W, &cfg).expect("generate");
            let out = propagate(wave, &link, &cfg).expect("propagate");
            let rx = receive(&out, 0, &grid1, &link).expect("receive");
            let snr_db = measure_snr(&channels[0], &rx).expect("snr");
            acc += 10f64.powf(-snr_db / 10.0) / (LAUNCH_W * LAUNCH_W);
        }
        let eta_qpsk_mc = acc / seeds as f64;
        let eta_qpsk_table = t.sci.gn - 2.0 * t.sci.phi1 + 8.0 * t.sci.psi1;
        eprintln!(
            "qpsk eta: discrete {eta_qpsk_discrete:.3}  simulator {eta_qpsk_mc:.3} ({:+.2}% vs discrete)  table {eta_qpsk_table:.3}",
            (eta_qpsk_mc / eta_qpsk_discrete - 1.0) * 100.0
        );
    }
}

/// Draws one polarization of a proper two-point-radius law: radius^2
/// takes value `a2` with probability `p`, else `b2`; phase is uniform.
/// Moments: E|x|^2 = p*a2+q*b2, E|x|^4 = p*a2^2+q*b2^2, and all
/// non-circular moments vanish.
fn two_ring_pol(n: usize, seed: u64, a2: f64, b2: f64, p: f64) -> Vec<Complex64> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r2 = if rng.gen_range(0.0..1.0) < p { a2 } else { b2 };
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r2.sqrt(), th)
        })
        .collect()
}

/// Solves for a two-point radius-squared distribution with unit mean,
/// excess-kurtosis slot `phi` = E|x|^4 - 2 and sixth-order cumulant slot
/// `psi` = E|x|^6 - 9 E|x|^4 + 12. Returns (a2, b2, p).
fn two_ring_params(phi: f64, psi: f64) -> (f64, f64, f64) {
    let var = 1.0 + phi;
    assert!(var > 0.0, "fourth moment below the proper-law floor");
    let third_central = psi + 6.0 * phi + 2.0;
    let skew = third_central / var.powf(1.5);
    let g2 = skew * skew;
    let p = 0.5 * (1.0 + (1.0 - 4.0 / (4.0 + g2)).sqrt());
    let p = if skew >= 0.0 { p } else { 1.0 - p };
    let q = 1.0 - p;
    let s1 = -(q / p).sqrt();
    let s2 = (p / q).sqrt();
    let a2 = 1.0 + var.sqrt() * s1;
    let b2 = 1.0 + var.sqrt() * s2;
    assert!(a2 > 0.0 && b2 > 0.0, "two-ring law infeasible for ({phi},{psi})");
    (a2, b2, p)
}

/// Diagnostic, not a gate: ensemble statistics of the exact per-frame
/// first-order predictor (field-validated against the simulator), with
/// and without removal of the fitted per-polarization scalar. Separates
/// "variance partitions wrong" from "projection accounting wrong" in the
/// coefficient assembly, and fits the empirical law-dependence
/// eta = gn + a*phi + b*psi + c*phi^2 over a designed set of proper laws.
#[test]
#[ignore = "ensemble statistics of the exact frame predictor; prints values"]
fn predictor_ensemble_probe() {
    let grid1 = WdmConfig {
        channel_count: 1,
        channel_spacing_ghz: 50.625,
        ..WdmConfig::default()
    };
    let r = grid1.symbol_rate_hz();
    let n = 128usize;
    let nn = n * n;
    let frames = 400u64;
    for spans in [1usize, 2] {
        let link = LinkConfig {
            span_count: spans,
            ..LinkConfig::default()
        };
        let gamma_t = link.gamma_per_w_m() * 8.0 / 9.0;
        let kt = folded_kernel(&link, n, r, grid1.rolloff);
        let [gn, phi1, psi1] = discrete_slots(&link, n, r, grid1.rolloff);

        type Sampler = Box<dyn Fn(usize, u64) -> SymbolSequence>;
        let ring_law = |phi: f64, psi: f64| -> Sampler {
            let (a2, b2, p) = two_ring_params(phi, psi);
            Box::new(move |n, s| {
                SymbolSequence::new(
                    two_ring_pol(n, s, a2, b2, p),
                    two_ring_pol(n, s + 5_000_000, a2, b2, p),
                    None,
                )
                .expect("equal lengths")
            })
        };
        let laws: Vec<(&str, f64, f64, Sampler)> = vec![
            ("gauss", 0.0, 0.0, Box::new(|n, s| gaussian(n, s))),
            ("qpsk", -1.0, 4.0, Box::new(|n, s| qpsk(n, s))),
            (
                "ring1",
                -1.0,
                4.0,
                Box::new(|n, s| SymbolSequence {
                    x_pol: two_ring_pol(n, s, 1.0, 1.0, 1.0),
                    y_pol: two_ring_pol(n, s + 5_000_000, 1.0, 1.0, 1.0),
                }),
            ),
            ("r(0,2)", 0.0, 2.0, ring_law(0.0, 2.0)),
            ("r(0,4)", 0.0, 4.0, ring_law(0.0, 4.0)),
            ("r(-.5,2)", -0.5, 2.0, ring_law(-0.5, 2.0)),
            ("r(+.5,2)", 0.5, 2.0, ring_law(0.5, 2.0)),
        ];
        let mut rows: Vec<([f64; 4], f64)> = Vec::new();
        for (li, (law, phi_t, psi_t, make)) in laws.iter().enumerate() {
            let mut raw = 0.0f64;
            let mut proj = 0.0f64;
            let mut num_sum = [Complex64::new(0.0, 0.0); 2];
            let mut den_sum = [0.0f64; 2];
            let mut num_sq = [0.0f64; 2];
            for f in 0..frames {
                let seq = make(n, 90_000 + li as u64 * 10_000 + f);
                let dft = |sym: &[Complex64]| -> Vec<Complex64> {
                    (0..n)
                        .map(|m| {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (k, s) in sym.iter().enumerate() {
                                let ph = -2.0 * std::f64::consts::PI * (k * m % n) as f64
                                    / n as f64;
                                acc += s * Complex64::new(0.0, ph).exp();
                            }
                            acc
                        })
                        .collect()
                };
                let xx = dft(&seq.x_pol);
                let xy = dft(&seq.y_pol);
                let mut spec_x = vec![Complex64::new(0.0, 0.0); n];
                let mut spec_y = vec![Complex64::new(0.0, 0.0); n];
                for r1 in 0..n {
                    for r2 in 0..n {
                        let q = xx[r1] * xx[r2].conj() + xy[r1] * xy[r2].conj();
                        let base = r1 * nn + r2 * n;
                        let row = (r1 + n - r2) % n;
                        for r3 in 0..n {
                            let k = kt[base + r3];
                            if k == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let rv = (row + r3) % n;
                            spec_x[rv] += q * xx[r3] * k;
                            spec_y[rv] += q * xy[r3] * k;
                        }
                    }
                }
                let scale = Complex64::new(0.0, -1.0) * gamma_t * (LAUNCH_W / 2.0)
                    / (n as f64).powi(3);
                let idft = |spec: &[Complex64]| -> Vec<Complex64> {
                    (0..n)
                        .map(|k| {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (m, s) in spec.iter().enumerate() {
                                let ph = 2.0 * std::f64::consts::PI * (k * m % n) as f64
                                    / n as f64;
                                acc += s * Complex64::new(0.0, ph).exp();
                            }
                            acc * scale
                        })
                        .collect()
                };
                for (p, (tx, d)) in [(&seq.x_pol, idft(&spec_x)), (&seq.y_pol, idft(&spec_y))]
                    .into_iter()
                    .enumerate()
                {
                    let num: Complex64 = tx.iter().zip(&d).map(|(t, v)| t.conj() * v).sum();
                    let den: f64 = tx.iter().map(|t| t.norm_sqr()).sum();
                    let a = num / den;
                    raw += d.iter().map(|v| v.norm_sqr()).sum::<f64>();
                    proj += d
                        .iter()
                        .zip(tx.iter())
                        .map(|(v, t)| (v - a * t).norm_sqr())
                        .sum::<f64>();
                    num_sum[p] += num;
                    den_sum[p] += den;
                    num_sq[p] += num.norm_sqr();
                }
            }
            let to_eta = 1.0 / (frames as f64 * 2.0 * n as f64 * LAUNCH_W * LAUNCH_W);
            // Noise about the pooled (ensemble-mean) scalar: removes only the
            // deterministic rotation, keeping the fluctuating common-mode
            // component as noise.
            let mut pooled = raw;
            for p in 0..2 {
                let c = num_sum[p] / den_sum[p];
                pooled += -2.0 * (c.conj() * num_sum[p]).re + c.norm_sqr() * den_sum[p];
            }
            // Per-frame scalar fluctuation strength, in the same eta units.
            let fluct: f64 = (0..2)
                .map(|p| num_sq[p] / (den_sum[p] / frames as f64)
                    - num_sum[p].norm_sqr() / den_sum[p])
                .sum();
            let assembled = gn + 2.0 * phi_t * phi1 + 2.0 * psi_t * psi1;
            eprintln!(
                "spans {spans} {law:>9}: raw {:9.3}  per-frame-fit {:8.3}  pooled-fit {:8.3}  \
                 scalar-fluct {:7.3}  census {assembled:8.3}",
                raw * to_eta,
                proj * to_eta,
                pooled * to_eta,
                fluct * to_eta,
            );
            rows.push((
                [1.0, *phi_t, *psi_t, phi_t * phi_t],
                pooled * to_eta,
            ));
        }
        // Least-squares fit of eta(law) = g + a*phi + b*psi + c*phi^2.
        let mut ata = [[0.0f64; 4]; 4];
        let mut aty = [0.0f64; 4];
        for (x, y) in &rows {
            for i in 0..4 {
                for j in 0..4 {
                    ata[i][j] += x[i] * x[j];
                }
                aty[i] += x[i] * y;
            }
        }
        let mut m = ata;
        let mut v = aty;
        for col in 0..4 {
            let piv = (col..4)
                .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
                .unwrap();
            m.swap(col, piv);
            v.swap(col, piv);
            for row in 0..4 {
                if row != col {
                    let f = m[row][col] / m[col][col];
                    for k in 0..4 {
                        m[row][k] -= f * m[col][k];
                    }
                    v[row] -= f * v[col];
                }
            }
        }
        let coef: Vec<f64> = (0..4).map(|i| v[i] / m[i][i]).collect();
        eprintln!(
            "spans {spans} fit: g {:.3} (census {gn:.3})  a {:.3} (census {:.3})  \
             b {:.3} (census {:.3})  c {:.3} (census 0)",
            coef[0],
            coef[1],
            2.0 * phi1,
            coef[2],
            2.0 * psi1,
            coef[3],
        );
        for (x, y) in &rows {
            let fit: f64 = (0..4).map(|i| coef[i] * x[i]).sum();
            eprintln!(
                "spans {spans}   law ({:+.1},{:+.1}) pooled {y:8.3} fit {fit:8.3} resid {:+7.3}",
                x[1],
                x[2],
                y - fit
            );
        }
    }
}

/// Diagnostic, not a gate: field-level comparison on one exact symbol
/// draw. The discrete kernel predicts the first-order distortion for the
/// realized symbols; the simulator's received frame minus its fitted
/// scalar should reproduce it sample for sample if (and only if) the
/// integrator's first-order response matches the analytic kernel.
#[test]
#[ignore = "single-frame first-order field comparison; prints values"]
fn field_probe() {
    let grid1 = WdmConfig {
        channel_count: 1,
        channel_spacing_ghz: 50.625,
        ..WdmConfig::default()
    };
    let r = grid1.symbol_rate_hz();
    let n = 256usize;
    let nn = n * n;
    for spans in [1usize, 2] {
        let link = LinkConfig {
            span_count: spans,
            ..LinkConfig::default()
        };
        let gamma_t = link.gamma_per_w_m() * 8.0 / 9.0;
        let kt = folded_kernel(&link, n, r, grid1.rolloff);

        let channels = vec![qpsk(n, 424_242)];
        let seq = &channels[0];
        let dft = |sym: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|m| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, s) in sym.iter().enumerate() {
                        let ph = -2.0 * std::f64::consts::PI * (k * m % n) as f64 / n as f64;
                        acc += s * Complex64::new(0.0, ph).exp();
                    }
                    acc
                })
                .collect()
        };
        let xx = dft(&seq.x_pol);
        let xy = dft(&seq.y_pol);

        // Δŷ_a(rν) = Σ K̃(r1,r2,r3)·[Σ_b X_b(r1)X̄_b(r2)]·X_a(r3) over the
        // residue triples, rν = r1 − r2 + r3 mod n. Both kernel
        // conjugations are evaluated: the ensemble slot values cannot
        // distinguish the sign of the phase mismatch (every contraction
        // is a magnitude square), but the realized field can.
        let mut spec_x = vec![Complex64::new(0.0, 0.0); 2 * n];
        let mut spec_y = vec![Complex64::new(0.0, 0.0); 2 * n];
        for r1 in 0..n {
            for r2 in 0..n {
                let q = xx[r1] * xx[r2].conj() + xy[r1] * xy[r2].conj();
                let base = r1 * nn + r2 * n;
                let row = (r1 + n - r2) % n;
                for r3 in 0..n {
                    let k = kt[base + r3];
                    if k == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let rv = (row + r3) % n;
                    spec_x[rv] += q * xx[r3] * k;
                    spec_y[rv] += q * xy[r3] * k;
                    spec_x[n + rv] += q * xx[r3] * k.conj();
                    spec_y[n + rv] += q * xy[r3] * k.conj();
                }
            }
        }
        let scale = Complex64::new(0.0, -1.0) * gamma_t * (LAUNCH_W / 2.0)
            / (n as f64).powi(3);
        let idft = |spec: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (m, s) in spec.iter().enumerate() {
                        let ph = 2.0 * std::f64::consts::PI * (k * m % n) as f64 / n as f64;
                        acc += s * Complex64::new(0.0, ph).exp();
                    }
                    acc * scale
                })
                .collect()
        };
        let pred_x = idft(&spec_x[..n]);
        let pred_y = idft(&spec_y[..n]);
        let pred_xc = idft(&spec_x[n..]);
        let pred_yc = idft(&spec_y[n..]);

        // Simulator pass on the same frame.
        let cfg = SsfmConfig {
            samples_per_symbol: 4,
            ..sim_config(0.5)
        };
        let wave = generate_waveform(&channels, &grid1, LAUNCH_W, &cfg).expect("generate");
        let out = propagate(wave, &link, &cfg).expect("propagate");
        let rx = receive(&out, 0, &grid1, &link).expect("receive");

        // The received frame carries an arbitrary linear gain; dividing
        // the residual by the fitted scalar puts it in symbol units.
        let residual = |tx: &[Complex64], rx: &[Complex64]| -> Vec<Complex64> {
            let num: Complex64 = tx.iter().zip(rx).map(|(t, r)| t.conj() * r).sum();
            let den: f64 = tx.iter().map(|t| t.norm_sqr()).sum();
            let a = num / den;
            tx.iter().zip(rx).map(|(t, r)| (r - a * t) / a).collect()
        };
        let project_out = |tx: &[Complex64], d: &[Complex64]| -> Vec<Complex64> {
            let num: Complex64 = tx.iter().zip(d).map(|(t, r)| t.conj() * r).sum();
            let den: f64 = tx.iter().map(|t| t.norm_sqr()).sum();
            let a = num / den;
            tx.iter().zip(d).map(|(t, r)| r - a * t).collect()
        };
        for (pol, tx, rxp, pred, pred_c) in [
            ("x", &seq.x_pol, &rx.x_pol, &pred_x, &pred_xc),
            ("y", &seq.y_pol, &rx.y_pol, &pred_y, &pred_yc),
        ] {
            let r_sim = residual(tx, rxp);
            for (tag, p) in [("kernel", pred), ("conj kernel", pred_c)] {
                let r_pred = project_out(tx, p);
                let dot: Complex64 =
                    r_pred.iter().zip(&r_sim).map(|(p, s)| p.conj() * s).sum();
                let np: f64 = r_pred.iter().map(|p| p.norm_sqr()).sum();
                let ns: f64 = r_sim.iter().map(|s| s.norm_sqr()).sum();
                eprintln!(
                    "spans {spans} pol {pol} {tag}: corr {:.4} (phase {:+.1}°)  \
                     |sim|/|pred| {:.4}  per-sym noise/sig: sim {:.3e} pred {:.3e}",
                    dot.norm() / (np * ns).sqrt(),
                    dot.arg().to_degrees(),
                    (ns / np).sqrt(),
                    ns / n as f64,
                    np / n as f64,
                );
            }
        }
    }
}

/// Diagnostic, not a gate: prints the Monte-Carlo η for successively
/// finer steps (plus the adaptive phase rule), then per-seed comparisons
/// against the realized-moment prediction, so the pinned `STEP_KM` and
/// tolerances can be justified by observed behaviour. Run with
/// `cargo test --test rp1_oracle -- --ignored --nocapture`.
#[test]
#[ignore = "step-size convergence probe; prints values for manual inspection"]
fn step_convergence_probe() {
    let adaptive = SsfmConfig {
        samples_per_symbol: 8,
        ase: false,
        ..SsfmConfig::default()
    };
    let eta = |cfg: &SsfmConfig| distortion_ratio(&gaussian, SEEDS[0], cfg) / (LAUNCH_W * LAUNCH_W);
    eprintln!("adaptive phase rule: eta = {:.2} 1/W^2", eta(&adaptive));
    for step_km in [2.0, 1.0, 0.5, 0.25] {
        eprintln!(
            "fixed {step_km} km:       eta = {:.2} 1/W^2",
            eta(&sim_config(step_km))
        );
    }

    let cfg = sim_config(1.0);
    for (label, make) in [
        ("gaussian", &gaussian as &dyn Fn(usize, u64) -> SymbolSequence),
        ("qpsk", &qpsk),
    ] {
        eprintln!("--- {label} ---");
        for seed in 11..=18u64 {
            let channels: Vec<_> = (0..3)
                .map(|c| make(SYMBOLS, derive_seed(seed, &format!("channel-{c}"))))
                .collect();
            let wave = generate_waveform(&channels, &grid(), LAUNCH_W, &cfg).expect("generate");
            let out = propagate(wave, &link(), &cfg).expect("propagate");
            let rx = receive(&out, 1, &grid(), &link()).expect("receive");
            let snr_db = measure_snr(&channels[1], &rx).expect("snr");
            let mc = 10f64.powf(-snr_db / 10.0) / (LAUNCH_W * LAUNCH_W);
            let realized = eta_at_realized_moments(&channels);
            eprintln!(
                "seed {seed}: mc {mc:7.2}  realized {realized:7.2}  mc/realized {:.4}",
                mc / realized
            );
        }
    }
}

#[test]
fn gamma_off_baseline_is_numerically_silent() {
    // The on/off subtraction argument: with γ = 0 the same chain returns
    // the transmitted symbols to numerical precision, so the γ-on
    // residual is attributable to nonlinearity alone.
    let silent = LinkConfig {
        gamma_per_w_km: 0.0,
        ..link()
    };
    let channels: Vec<_> = (0..3).map(|c| qpsk(SYMBOLS, 900 + c as u64)).collect();
    let cfg = sim_config(STEP_KM);
    let wave = generate_waveform(&channels, &grid(), LAUNCH_W, &cfg).expect("generate");
    let out = propagate(wave, &silent, &cfg).expect("propagate");
    let rx = receive(&out, 1, &grid(), &silent).expect("receive");
    let snr_db = measure_snr(&channels[1], &rx).expect("snr");
    assert!(
        snr_db > 120.0,
        "linear chain leaves residual at {snr_db:.1} dB"
    );
}

#[test]
fn gaussian_symbols_reproduce_the_baseline_eta() {
    let analytic = eta_coefficients(table(), &CoefficientSet::default()).total();
    let measured = measured_eta(&gaussian);
    let rel = measured / analytic - 1.0;
    assert!(
        rel.abs() < 0.08,
        "Gaussian η: simulator {measured:.1} vs analytic {analytic:.1} 1/W² ({:+.1}%)",
        rel * 100.0
    );
}

#[test]
fn qpsk_symbols_reproduce_the_corrected_eta() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let points: Vec<Complex64> = [(s, s), (s, -s), (-s, s), (-s, -s)]
        .iter()
        .map(|&(a, b)| Complex64::new(a, b))
        .collect();
    let probs = [0.25; 4];
    let moments =
        MomentSet::from_independent_pols(&points, &probs, &points, &probs).expect("moments");
    let coeffs = coefficients_4d(&moments).expect("coefficients");
    let analytic = eta_coefficients(table(), &coeffs).total();
    let baseline = eta_coefficients(table(), &CoefficientSet::default()).total();

    let measured = measured_eta(&qpsk);
    let rel = measured / analytic - 1.0;
    assert!(
        rel.abs() < 0.08,
        "QPSK η: simulator {measured:.1} vs analytic {analytic:.1} 1/W² ({:+.1}%)",
        rel * 100.0
    );
    // The corrections must matter: QPSK interference sits well below the
    // Gaussian baseline, and the simulator resolves that gap.
    assert!(
        analytic < 0.75 * baseline,
        "QPSK η {analytic:.1} should sit well below the baseline {baseline:.1}"
    );
    assert!(
        measured < 0.75 * baseline,
        "simulator should see the sub-Gaussian interference: {measured:.1} vs baseline {baseline:.1}"
    );
}
