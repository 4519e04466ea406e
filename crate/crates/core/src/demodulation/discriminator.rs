use serde::{Deserialize, Serialize};
use std::ops::Range;

use super::DemodError;
use crate::signal_core::{wrap_phase, RealSignal};

/// RF phase discriminator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    /// Frequency of the compared tones, Hz.
    pub tone_frequency: f64,
    /// Readings with |phase| below this are reported as 0, rad.
    pub dead_zone: f64,
    /// Tones weaker than this are flagged low-confidence.
    pub min_amplitude: f64,
}

impl DiscriminatorSpec {
    pub fn new(tone_frequency: f64) -> Self {
        Self { tone_frequency, dead_zone: 0.0, min_amplitude: 1e-9 }
    }
}

/// Discriminator output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReading {
    /// Wrapped lag of `b` behind `a`, rad in (−π, π]; positive when `b` is delayed.
    pub phase: f64,
    /// The raw lag fell inside the dead zone and `phase` was zeroed.
    pub in_dead_zone: bool,
    pub low_confidence: bool,
    pub amplitude_a: f64,
    pub amplitude_b: f64,
}

/// Amplitude, phase and DC offset of the best-fit `offset + A·sin(2πft + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneEstimate {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
}

/// Least-squares fit of a sinusoid of known frequency plus a constant over
/// `range`. The phase refers to absolute time, so fits of signals on
/// different grids are directly comparable.
pub fn estimate_tone(signal: &RealSignal, frequency: f64, range: Range<usize>) -> Result<ToneEstimate, DemodError> {
    if range.len() < 3 {
        return Err(DemodError::NoValidSamples);
    }
    // normal equations for the basis [1, sin θ, cos θ]
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for i in range {
        let th = signal.grid().tone_phase(frequency, i);
        let (s, c) = th.sin_cos();
        let basis = [1.0, s, c];
        let x = signal.samples()[i];
        for a in 0..3 {
            r[a] += basis[a] * x;
            for b in 0..3 {
                m[a][b] += basis[a] * basis[b];
            }
        }
    }
    let [offset, bs, bc] = solve3(m, r).ok_or(DemodError::NoValidSamples)?;
    Ok(ToneEstimate { amplitude: bs.hypot(bc), phase: bc.atan2(bs), offset })
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col] == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        r.swap(col, pivot);
        for row in col + 1..3 {
            let k = m[row][col] / m[col][col];
            for j in col..3 {
                m[row][j] -= k * m[col][j];
            }
            r[row] -= k * r[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|j| m[row][j] * x[j]).sum();
        x[row] = (r[row] - tail) / m[row][row];
    }
    Some(x)
}

/// Longest run of valid samples, trimmed symmetrically to a whole number of
/// tone periods when it spans at least one.
fn analysis_window(mask: impl Iterator<Item = bool>, samples_per_period: f64) -> Option<Range<usize>> {
    let mut best: Option<Range<usize>> = None;
    let mut start = None;
    let mut n = 0;
    for (i, v) in mask.enumerate() {
        n = i + 1;
        match (v, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.as_ref().is_none_or(|b| i - s > b.len()) {
                    best = Some(s..i);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if best.as_ref().is_none_or(|b| n - s > b.len()) {
            best = Some(s..n);
        }
    }
    let run = best?;
    let periods = (run.len() as f64 / samples_per_period).floor();
    if periods < 1.0 {
        return Some(run);
    }
    let n = ((periods * samples_per_period).round() as usize).min(run.len());
    let lead = (run.len() - n) / 2;
    Some(run.start + lead..run.start + lead + n)
}

/// Phase of `b` relative to `a` at the tone frequency.
///
/// Both tones are fitted over an integer number of periods, with their DC
/// removed. Signals on the same grid share their common valid region;
/// signals on different grids are each fitted over their own valid region,
/// which is exact for steady tones.
pub fn phase_discriminate(
    a: &RealSignal,
    b: &RealSignal,
    spec: &DiscriminatorSpec,
) -> Result<PhaseReading, DemodError> {
    if !(spec.tone_frequency > 0.0) || !(spec.dead_zone >= 0.0) {
        return Err(DemodError::InvalidParameter(format!("invalid discriminator settings {spec:?}")));
    }
    let f = spec.tone_frequency;
    let (ra, rb) = if a.grid() == b.grid() {
        let spp = a.grid().sample_rate() / f;
        let common = a.valid_mask().iter().zip(b.valid_mask()).map(|(&x, &y)| x && y);
        let w = analysis_window(common, spp).ok_or(DemodError::NoValidSamples)?;
        (w.clone(), w)
    } else {
        let wa = analysis_window(a.valid_mask().iter().copied(), a.grid().sample_rate() / f);
        let wb = analysis_window(b.valid_mask().iter().copied(), b.grid().sample_rate() / f);
        (wa.ok_or(DemodError::NoValidSamples)?, wb.ok_or(DemodError::NoValidSamples)?)
    };
    let ta = estimate_tone(a, f, ra)?;
    let tb = estimate_tone(b, f, rb)?;
    let lag = wrap_phase(ta.phase - tb.phase);
    let in_dead_zone = lag.abs() < spec.dead_zone;
    Ok(PhaseReading {
        phase: if in_dead_zone { 0.0 } else { lag },
        in_dead_zone,
        low_confidence: ta.amplitude < spec.min_amplitude || tb.amplitude < spec.min_amplitude,
        amplitude_a: ta.amplitude,
        amplitude_b: tb.amplitude,
    })
}
