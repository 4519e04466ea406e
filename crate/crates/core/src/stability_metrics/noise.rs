use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use super::{MetricsError, PhaseSeries};
use crate::rng::keyed_normal;

/// Power-law noise types, by the exponent α of `S_y(f) = h_α·f^α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NoiseKind {
    /// White phase, α = 2.
    Wpm,
    /// Flicker phase, α = 1.
    Fpm,
    /// White frequency, α = 0.
    Wfm,
    /// Flicker frequency, α = −1.
    Ffm,
    /// Random-walk frequency, α = −2.
    Rwfm,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 5] = [NoiseKind::Wpm, NoiseKind::Fpm, NoiseKind::Wfm, NoiseKind::Ffm, NoiseKind::Rwfm];

    /// `α` in `S_y(f) = h_α·f^α`.
    pub fn alpha(self) -> i32 {
        match self {
            NoiseKind::Wpm => 2,
            NoiseKind::Fpm => 1,
            NoiseKind::Wfm => 0,
            NoiseKind::Ffm => -1,
            NoiseKind::Rwfm => -2,
        }
    }

    fn stream(self) -> u64 {
        0x4e00 + (2 - self.alpha()) as u64
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NoiseKind::Wpm => "WPM",
            NoiseKind::Fpm => "FPM",
            NoiseKind::Wfm => "WFM",
            NoiseKind::Ffm => "FFM",
            NoiseKind::Rwfm => "RWFM",
        };
        f.write_str(s)
    }
}

impl FromStr for NoiseKind {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NoiseKind::ALL.into_iter().find(|k| k.to_string().eq_ignore_ascii_case(s)).ok_or_else(|| {
            MetricsError::InvalidSeries(format!("unknown noise kind {s:?}; use WPM, FPM, WFM, FFM or RWFM"))
        })
    }
}

/// Seeded power-law time-offset noise `x(t)`.
///
/// `level` is `h_α` of the one-sided fractional-frequency PSD
/// `S_y(f) = h_α·f^α` (Hz^−1 scaled by `f^−α`), so the phase PSD is
/// `S_x(f) = h_α·f^(α−2)/(4π²)`. A white Gaussian sequence of variance
/// `Q = h_α·τ0^(2d−1) / (2·(2π)^(2−2d))`, `d = (2 − α)/2`, is shaped by the
/// fractional-integration filter `h_0 = 1, h_k = h_{k−1}·(k − 1 + d)/k`.
/// For WFM this gives `σ_y(τ) = √(h_0/(2τ))`.
pub fn gen_power_law_noise(
    kind: NoiseKind,
    level: f64,
    n: usize,
    tau0: f64,
    seed: u64,
) -> Result<PhaseSeries, MetricsError> {
    if n < 16 {
        return Err(MetricsError::InvalidSeries(format!("need at least 16 samples, got {n}")));
    }
    if !(level.is_finite() && level >= 0.0) {
        return Err(MetricsError::InvalidSeries(format!("noise level must be non-negative, got {level}")));
    }
    if !(tau0.is_finite() && tau0 > 0.0) {
        return Err(MetricsError::InvalidSeries(format!("tau0 must be positive, got {tau0}")));
    }
    if level == 0.0 {
        return PhaseSeries::new(tau0, vec![0.0; n]);
    }
    let d = (2 - kind.alpha()) as f64 / 2.0;
    let q = level * tau0.powf(2.0 * d - 1.0) / (2.0 * TAU.powf(2.0 - 2.0 * d));
    let sigma = q.sqrt();

    let size = (2 * n).next_power_of_two();
    let mut filter = vec![Complex64::default(); size];
    let mut white = vec![Complex64::default(); size];
    let mut hk = 1.0;
    for k in 0..n {
        if k > 0 {
            hk *= (k as f64 - 1.0 + d) / k as f64;
        }
        filter[k] = Complex64::new(hk, 0.0);
        white[k] = Complex64::new(sigma * keyed_normal(seed, kind.stream(), k as u64), 0.0);
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    fwd.process(&mut filter);
    fwd.process(&mut white);
    for (w, h) in white.iter_mut().zip(&filter) {
        *w *= h;
    }
    inv.process(&mut white);
    let scale = 1.0 / size as f64;
    PhaseSeries::new(tau0, white[..n].iter().map(|z| z.re * scale).collect())
}
