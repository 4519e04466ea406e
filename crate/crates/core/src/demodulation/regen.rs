use serde::{Deserialize, Serialize};

use super::{DemodError, DetectorSpec};
use crate::signal_core::{filter_lowpass, RealSignal, Signal};

/// Pulse distribution unit settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegenConfig {
    /// Trigger level as a fraction of the peak detector output, in (0, 1).
    pub threshold: f64,
    /// Dead time after a trigger during which further crossings belong to
    /// the same pulse group, s.
    pub holdoff: f64,
    /// Detector output at or above this level counts as saturated.
    #[serde(default)]
    pub saturation_level: Option<f64>,
}

impl Default for RegenConfig {
    fn default() -> Self {
        Self { threshold: 0.5, holdoff: 1e-6, saturation_level: None }
    }
}

/// One regenerated 1PPS edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    /// First upward threshold crossing, interpolated between samples, s.
    pub timestamp: f64,
    /// Pulse peak relative to the largest peak in the record.
    pub peak_amplitude: f64,
    /// Time above threshold, s.
    pub width: f64,
    /// Invalid or saturated samples inside the pulse, or no falling edge.
    pub degraded: bool,
}

// A record only carries pulses if its peak stands this far above the
// baseline; CW leakage and ripple never do.
const MIN_CONTRAST: f64 = 10.0;

/// Low-band detection of the interferometer output followed by threshold
/// triggering.
///
/// The intensity passes the DC-coupled detector (`det.band.high` as a
/// zero-phase Butterworth low-pass) and its additive noise; each group of
/// crossings within `holdoff` yields one event.
pub fn regenerate_pps(
    intensity: &RealSignal,
    det: &DetectorSpec,
    cfg: &RegenConfig,
) -> Result<Vec<PulseEvent>, DemodError> {
    if !(cfg.threshold > 0.0 && cfg.threshold < 1.0) {
        return Err(DemodError::InvalidParameter(format!("threshold must lie in (0, 1), got {}", cfg.threshold)));
    }
    if !(cfg.holdoff >= 0.0) {
        return Err(DemodError::InvalidParameter(format!("holdoff must be non-negative, got {}", cfg.holdoff)));
    }
    let grid = *intensity.grid();
    let fs = grid.sample_rate();
    det.check_grid(fs)?;

    let mut raw: Vec<f64> = intensity.samples().iter().map(|&x| det.responsivity * x).collect();
    det.add_noise(&mut raw, fs, true);
    let detected = filter_lowpass(&Signal::with_mask(grid, raw, intensity.valid_mask().to_vec())?, det.band.high, 2)?;
    let y = detected.samples();
    let valid = detected.valid_mask();

    let mut levels: Vec<f64> = y.iter().zip(valid).filter(|(_, &v)| v).map(|(&s, _)| s).collect();
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    let peak = levels.iter().cloned().fold(f64::MIN, f64::max);
    levels.sort_by(f64::total_cmp);
    let baseline = levels[levels.len() / 2].abs();
    let floor = det.noise_density * det.band.high.sqrt();
    if !(peak > 0.0 && peak > MIN_CONTRAST * (baseline + floor)) {
        return Ok(Vec::new());
    }
    let level = cfg.threshold * peak;
    let saturated = |s: f64| cfg.saturation_level.is_some_and(|l| s >= l);

    let mut events = Vec::new();
    let mut last: Option<f64> = None;
    let mut i = 1;
    while i < y.len() {
        if !(valid[i - 1] && valid[i] && y[i - 1] < level && y[i] >= level) {
            i += 1;
            continue;
        }
        let pos = (i - 1) as f64 + (level - y[i - 1]) / (y[i] - y[i - 1]);
        let timestamp = grid.start() + pos / fs;
        if last.is_some_and(|t| timestamp - t <= cfg.holdoff) {
            i += 1;
            continue;
        }
        last = Some(timestamp);

        let mut j = i;
        let mut local_peak = y[i];
        let mut degraded = saturated(y[i - 1]);
        while j < y.len() && y[j] >= level {
            local_peak = local_peak.max(y[j]);
            degraded |= !valid[j] || saturated(y[j]);
            j += 1;
        }
        let width = if j < y.len() {
            degraded |= !valid[j];
            let fall = (j - 1) as f64 + (y[j - 1] - level) / (y[j - 1] - y[j]);
            (fall - pos) / fs
        } else {
            degraded = true;
            (j as f64 - pos) / fs
        };
        events.push(PulseEvent { timestamp, peak_amplitude: local_peak / peak, width, degraded });
        i = j.max(i + 1);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demodulation::{mzi_interfere, MziSpec};
    use crate::optics_chain::{laser_field, phase_modulate, pps_phase_waveform, PpsWaveform, LAMBDA_FORWARD_NM};
    use crate::signal_core::TimeGrid;
    use std::f64::consts::PI;

    fn pulse_intensity(grid: TimeGrid, epochs: Vec<f64>) -> RealSignal {
        let f = laser_field(grid, 1.0, 0.0, LAMBDA_FORWARD_NM).unwrap();
        let pps = PpsWaveform::new(epochs, 10e-9, PI).unwrap();
        let pm = phase_modulate(&f, &pps_phase_waveform(&pps, grid)).unwrap();
        mzi_interfere(&pm, &MziSpec::ideal(10e-9)).unwrap()
    }

    #[test]
    fn cw_gives_no_events() {
        let g = TimeGrid::new(4e9, 0.0, 4096).unwrap();
        let i = pulse_intensity(g, vec![]);
        assert!(regenerate_pps(&i, &DetectorSpec::pulse_default(), &RegenConfig::default()).unwrap().is_empty());
        let flat = RealSignal::constant(g, 0.3).unwrap();
        assert!(regenerate_pps(&flat, &DetectorSpec::pulse_default(), &RegenConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn single_pulse_is_found_once() {
        let g = TimeGrid::new(4e9, 0.0, 4096).unwrap();
        let i = pulse_intensity(g, vec![400e-9]);
        let ev = regenerate_pps(&i, &DetectorSpec::pulse_default(), &RegenConfig::default()).unwrap();
        assert_eq!(ev.len(), 1);
        let e = ev[0];
        assert!(!e.degraded);
        assert_eq!(e.peak_amplitude, 1.0);
        // half-maximum of a symmetric 20 ns blob centred on the epoch: leading
        // edge within a couple of ns of epoch - τ
        assert!((e.timestamp - 390e-9).abs() < 2e-9, "{}", e.timestamp);
        assert!((e.width - 20e-9).abs() < 2e-9, "{}", e.width);
    }

    #[test]
    fn translation_moves_timestamps_equally() {
        let g = TimeGrid::new(4e9, 0.0, 4096).unwrap();
        let i = pulse_intensity(g, vec![300e-9, 700e-9]);
        let det = DetectorSpec::pulse_default();
        let cfg = RegenConfig { holdoff: 100e-9, ..RegenConfig::default() };
        let a = regenerate_pps(&i, &det, &cfg).unwrap();
        let b = regenerate_pps(&i.retimed(0.25), &det, &cfg).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert!((y.timestamp - x.timestamp - 0.25).abs() < 1e-16);
        }
    }

    #[test]
    fn threshold_is_validated() {
        let g = TimeGrid::new(4e9, 0.0, 256).unwrap();
        let s = RealSignal::constant(g, 0.0).unwrap();
        let cfg = RegenConfig { threshold: 1.0, ..RegenConfig::default() };
        assert!(regenerate_pps(&s, &DetectorSpec::pulse_default(), &cfg).is_err());
    }
}
