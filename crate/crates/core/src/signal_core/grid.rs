use serde::{Deserialize, Serialize};

use std::f64::consts::TAU;

use super::{tone_phase, SignalError};

/// Uniform sampling grid: sample `i` sits at `start + i / sample_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    sample_rate: f64,
    start: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(sample_rate: f64, start: f64, n_samples: usize) -> Result<Self, SignalError> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(SignalError::InvalidGrid(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if !start.is_finite() {
            return Err(SignalError::InvalidGrid(format!("start time must be finite, got {start}")));
        }
        if n_samples == 0 {
            return Err(SignalError::InvalidGrid("grid needs at least one sample".into()));
        }
        Ok(Self { sample_rate, start, n_samples })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Time of sample `i`.
    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 / self.sample_rate
    }

    /// Phase of a zero-phase tone at sample `i`, in [0, 2π).
    ///
    /// Origin and offset are reduced separately, so the result does not
    /// inherit the rounding of `time(i)` when the grid starts far from zero.
    pub fn tone_phase(&self, freq: f64, i: usize) -> f64 {
        let phi = tone_phase(freq, self.start) + tone_phase(freq, i as f64 / self.sample_rate);
        phi.rem_euclid(TAU)
    }

    /// Duration covered by the grid, `n_samples / sample_rate`.
    pub fn span(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate
    }

    pub fn end(&self) -> f64 {
        self.time(self.n_samples - 1)
    }

    /// Same spacing and length, different origin.
    pub fn with_start(&self, start: f64) -> Self {
        Self { start, ..*self }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |i| self.time(i))
    }

    /// Fractional sample position of time `t` relative to this grid.
    pub fn position_of(&self, t: f64) -> f64 {
        (t - self.start) * self.sample_rate
    }

    pub(crate) fn ensure_same(&self, other: &TimeGrid) -> Result<(), SignalError> {
        if self == other {
            Ok(())
        } else {
            Err(SignalError::GridMismatch { left: *self, right: *other })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(-1.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, f64::NAN, 10).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 0).is_err());
    }

    #[test]
    fn sample_times_are_uniform() {
        let g = TimeGrid::new(4.0, 1.0, 5).unwrap();
        let t: Vec<f64> = g.times().collect();
        assert_eq!(t, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(g.span(), 1.25);
        assert_eq!(g.position_of(1.5), 2.0);
    }
}
