use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::DemodError;
use crate::optics_chain::OpticalField;
use crate::rng::keyed_normal;
use crate::signal_core::{RealSignal, Signal};

/// Electrical passband of a photodetector. `low == 0` means DC-coupled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

/// Photodetector model: responsivity, passband and additive white noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    /// A/W, normalized to 1 by default.
    pub responsivity: f64,
    pub band: Band,
    /// Additive noise density, V/√Hz.
    pub noise_density: f64,
    /// Seed of the additive noise; the draw for sample `i` is keyed by `(seed, i)`.
    #[serde(default)]
    pub noise_seed: u64,
}

/// Order of the Butterworth magnitude used for both band edges.
const BAND_ORDER: i32 = 4;

/// Guard length at each end of a filtered run, in multiples of `1 / band.high`.
const GUARD_PERIODS: f64 = 6.0;

const STREAM_DD_NOISE: u64 = 0x0dd;
const STREAM_PDU_NOISE: u64 = 0x0b0;

impl DetectorSpec {
    /// AC-coupled RF detector, 30 kHz to 1 GHz.
    pub fn rf_default() -> Self {
        Self { responsivity: 1.0, band: Band { low: 30e3, high: 1e9 }, noise_density: 0.0, noise_seed: 0 }
    }

    /// DC-coupled low-band detector, DC to 125 MHz, used ahead of the PDU.
    pub fn pulse_default() -> Self {
        Self { responsivity: 1.0, band: Band { low: 0.0, high: 125e6 }, noise_density: 0.0, noise_seed: 0 }
    }

    pub fn validate(&self) -> Result<(), DemodError> {
        let b = self.band;
        if !(b.low >= 0.0 && b.low < b.high && b.high.is_finite()) {
            return Err(DemodError::InvalidParameter(format!(
                "detector band must satisfy 0 <= low < high, got {} .. {}",
                b.low, b.high
            )));
        }
        if !(self.responsivity.is_finite() && self.responsivity > 0.0) {
            return Err(DemodError::InvalidParameter(format!(
                "responsivity must be positive, got {}",
                self.responsivity
            )));
        }
        if !(self.noise_density.is_finite() && self.noise_density >= 0.0) {
            return Err(DemodError::InvalidParameter(format!(
                "noise density must be non-negative, got {}",
                self.noise_density
            )));
        }
        Ok(())
    }

    /// Amplitude response at `f` Hz (zero phase).
    pub fn gain(&self, f: f64) -> f64 {
        let f = f.abs();
        let lp = 1.0 / (1.0 + (f / self.band.high).powi(2 * BAND_ORDER)).sqrt();
        let hp = if self.band.low > 0.0 {
            if f == 0.0 {
                0.0
            } else {
                let r = (self.band.low / f).powi(2 * BAND_ORDER);
                1.0 / (1.0 + r).sqrt()
            }
        } else {
            1.0
        };
        lp * hp
    }

    /// RMS of the additive noise on a grid sampled at `fs`.
    pub fn noise_rms(&self, fs: f64) -> f64 {
        self.noise_density * (fs / 2.0).sqrt()
    }

    pub(crate) fn check_grid(&self, fs: f64) -> Result<(), DemodError> {
        self.validate()?;
        if fs / 2.0 <= self.band.high {
            return Err(DemodError::GridTooCoarse { sample_rate: fs, band_high: self.band.high });
        }
        Ok(())
    }

    pub(crate) fn add_noise(&self, samples: &mut [f64], fs: f64, pulse_path: bool) {
        let sigma = self.noise_rms(fs);
        if sigma == 0.0 {
            return;
        }
        let stream = if pulse_path { STREAM_PDU_NOISE } else { STREAM_DD_NOISE };
        for (i, s) in samples.iter_mut().enumerate() {
            *s += sigma * keyed_normal(self.noise_seed, stream, i as u64);
        }
    }
}

/// Square-law detection followed by the detector passband.
///
/// The band filter is applied with zero phase in the frequency domain over
/// each valid run, so a tone's detected phase equals its optical-intensity
/// phase. Samples within `6 / band.high` of a run end are flagged invalid.
/// The carrier phase offset of the field plays no role.
pub fn direct_detect(field: &OpticalField, det: &DetectorSpec) -> Result<RealSignal, DemodError> {
    let grid = *field.grid();
    let fs = grid.sample_rate();
    det.check_grid(fs)?;
    let intensity = field.intensity();
    let mut out = vec![0.0; grid.len()];
    let mut valid = vec![false; grid.len()];
    let guard = (GUARD_PERIODS * fs / det.band.high).ceil() as usize;
    let mut planner = FftPlanner::<f64>::new();

    for run in intensity.valid_runs() {
        if run.len() <= 2 * guard {
            continue;
        }
        let n = run.len();
        let mut buf: Vec<Complex64> =
            intensity.samples()[run.clone()].iter().map(|&x| Complex64::new(det.responsivity * x, 0.0)).collect();
        planner.plan_fft_forward(n).process(&mut buf);
        for (k, z) in buf.iter_mut().enumerate() {
            let bin = k.min(n - k) as f64;
            *z *= det.gain(bin * fs / n as f64) / n as f64;
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        for (j, z) in buf.iter().enumerate() {
            out[run.start + j] = z.re;
        }
        for v in &mut valid[run.start + guard..run.end - guard] {
            *v = true;
        }
    }
    det.add_noise(&mut out, fs, false);
    Ok(Signal::with_mask(grid, out, valid)?)
}
