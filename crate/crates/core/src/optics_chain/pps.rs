use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::OpticsError;
use crate::signal_core::{RealSignal, Signal, TimeGrid};

/// Phase-encoded 1PPS train: a `phase_high` step of width `width` at each epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpsWaveform {
    epochs: Vec<f64>,
    width: f64,
    phase_high: f64,
}

impl PpsWaveform {
    pub fn new(epochs: Vec<f64>, width: f64, phase_high: f64) -> Result<Self, OpticsError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(OpticsError::InvalidParameter(format!("pulse width must be positive, got {width}")));
        }
        if !phase_high.is_finite() {
            return Err(OpticsError::InvalidParameter("pulse phase must be finite".into()));
        }
        if let Some(e) = epochs.iter().find(|e| !e.is_finite()) {
            return Err(OpticsError::InvalidParameter(format!("non-finite epoch {e}")));
        }
        for w in epochs.windows(2) {
            if w[1] - w[0] <= 2.0 * width {
                return Err(OpticsError::InvalidParameter(format!(
                    "epochs {} and {} closer than twice the pulse width",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { epochs, width, phase_high })
    }

    /// `count` epochs spaced by `period`, with the default π step.
    pub fn periodic(first: f64, period: f64, count: usize, width: f64) -> Result<Self, OpticsError> {
        Self::new((0..count).map(|k| first + k as f64 * period).collect(), width, PI)
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn phase_high(&self) -> f64 {
        self.phase_high
    }

    /// Phase at time `t`: `phase_high` on `[epoch, epoch + width)`.
    pub fn phase_at(&self, t: f64) -> f64 {
        let idx = self.epochs.partition_point(|&e| e <= t);
        if idx > 0 && t < self.epochs[idx - 1] + self.width {
            self.phase_high
        } else {
            0.0
        }
    }
}

// Sample positions within this many samples of a boundary round onto it.
const EDGE_SNAP: f64 = 1e-9;

/// Samples the pulse train on `grid`. Grids without any epoch give zeros.
pub fn pps_phase_waveform(pps: &PpsWaveform, grid: TimeGrid) -> RealSignal {
    let n = grid.len();
    let mut samples = vec![0.0; n];
    let first_index = |t: f64| -> usize {
        let p = (grid.position_of(t) - EDGE_SNAP).ceil();
        p.clamp(0.0, n as f64) as usize
    };
    for &e in pps.epochs() {
        let lo = first_index(e);
        let hi = first_index(e + pps.width());
        for s in &mut samples[lo..hi.max(lo)] {
            *s = pps.phase_high();
        }
    }
    Signal::from_parts_unchecked(grid, samples, vec![true; n])
}
