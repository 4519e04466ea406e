//! Independent oracles for the integration tests. Nothing here calls the
//! estimators or signal paths under test.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

/// Delay-interferometer intensity written out term by term from the two arm
/// fields `√(1 + cos(ω0·t + ε))·e^{iφ(t)}` and
/// `√(1 + cos(ω0·(t+τ) + ε))·e^{i(ω_c·τ + φ(t+τ))}`, summed and halved.
pub fn interferometer_literal(t: f64, w0: f64, tau: f64, eps: f64, wc_tau: f64, dphi: f64) -> f64 {
    let common = (2.0 * w0 * t + 2.0 * eps + w0 * tau) / 2.0;
    let half = w0 * tau / 2.0;
    1.0 + half.cos() * common.cos() + (common.cos() + half.cos()).abs() * (wc_tau + dphi).cos()
}

/// Overlapping ADEV from averaged fractional frequencies:
/// `ȳ_k = (x[k+m] − x[k])/τ`, `σ² = Σ (ȳ_{k+m} − ȳ_k)² / (2(N − 2m))`.
pub fn adev_by_frequency(x: &[f64], tau0: f64, m: usize) -> f64 {
    let tau = m as f64 * tau0;
    let y: Vec<f64> = (0..x.len() - m).map(|k| (x[k + m] - x[k]) / tau).collect();
    let terms = x.len() - 2 * m;
    let mut sum = 0.0;
    for k in 0..terms {
        let d = y[k + m] - y[k];
        sum += d * d;
    }
    (sum / (2.0 * terms as f64)).sqrt()
}

/// Non-overlapping ADEV from the same averaged frequencies, stride `m`.
pub fn adev_nonoverlapping_by_frequency(x: &[f64], tau0: f64, m: usize) -> f64 {
    let tau = m as f64 * tau0;
    let y: Vec<f64> = (0..x.len() - m).step_by(m).map(|k| (x[k + m] - x[k]) / tau).collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for k in 0..y.len() - 1 {
        let d = y[k + 1] - y[k];
        sum += d * d;
        count += 1;
    }
    (sum / (2.0 * count as f64)).sqrt()
}

/// MDEV from phase averaged over `m` samples, then second-differenced:
/// `x̄_j = Σ_{i<m} x[j+i] / m`, `σ² = Σ (x̄_{j+2m} − 2x̄_{j+m} + x̄_j)² / (2τ²(N − 3m + 1))`.
pub fn mdev_by_phase_average(x: &[f64], tau0: f64, m: usize) -> f64 {
    let tau = m as f64 * tau0;
    let avg: Vec<f64> = (0..=x.len() - m)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..m {
                s += x[j + i];
            }
            s / m as f64
        })
        .collect();
    let terms = x.len() - 3 * m + 1;
    let mut sum = 0.0;
    for j in 0..terms {
        let d = avg[j + 2 * m] - 2.0 * avg[j + m] + avg[j];
        sum += d * d;
    }
    (sum / (2.0 * tau * tau * terms as f64)).sqrt()
}

/// ADEV of white FM with `S_y(f) = h0`.
pub fn wfm_adev(h0: f64, tau: f64) -> f64 {
    (h0 / (2.0 * tau)).sqrt()
}

pub fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
