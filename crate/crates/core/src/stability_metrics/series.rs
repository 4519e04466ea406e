use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::MetricsError;

/// Uniformly sampled time-offset series `x(t)` in seconds.
///
/// Samples can be marked missing; deviation estimators reject such series
/// unless gap-tolerant mode is switched on, in which case every term that
/// touches a missing sample is skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeries {
    tau0: f64,
    values: Vec<f64>,
    missing: Vec<bool>,
    gap_tolerant: bool,
    /// Equivalent measurement bandwidth, Hz, if the series has been prefiltered.
    bandwidth: Option<f64>,
}

impl PhaseSeries {
    pub fn new(tau0: f64, values: Vec<f64>) -> Result<Self, MetricsError> {
        let n = values.len();
        Self::with_gaps(tau0, values, vec![false; n])
    }

    /// `missing[i]` marks sample `i` as absent; its value is ignored.
    pub fn with_gaps(tau0: f64, mut values: Vec<f64>, missing: Vec<bool>) -> Result<Self, MetricsError> {
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(MetricsError::InvalidSeries(format!("tau0 must be positive, got {tau0}")));
        }
        if values.len() < 3 {
            return Err(MetricsError::InvalidSeries(format!("need at least 3 samples, got {}", values.len())));
        }
        if missing.len() != values.len() {
            return Err(MetricsError::InvalidSeries(format!(
                "gap mask has {} entries for {} samples",
                missing.len(),
                values.len()
            )));
        }
        for (i, (v, &gap)) in values.iter_mut().zip(&missing).enumerate() {
            if gap {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(MetricsError::InvalidSeries(format!("non-finite value at index {i}")));
            }
        }
        Ok(Self { tau0, values, missing, gap_tolerant: false, bandwidth: None })
    }

    /// Allows deviation estimators to run over gaps.
    pub fn gap_tolerant(mut self) -> Self {
        self.gap_tolerant = true;
        self
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    pub fn gap_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn is_gap_tolerant(&self) -> bool {
        self.gap_tolerant
    }

    pub fn bandwidth(&self) -> Option<f64> {
        self.bandwidth
    }

    /// Same samples, offset by `c`.
    pub fn offset(&self, c: f64) -> Self {
        self.map(|_, v| v + c)
    }

    /// Same samples, scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        self.map(|_, v| v * c)
    }

    fn map(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&self.missing)
            .enumerate()
            .map(|(i, (&v, &gap))| if gap { 0.0 } else { f(i, v) })
            .collect();
        Self { values, ..self.clone() }
    }

    pub(crate) fn check_usable(&self) -> Result<(), MetricsError> {
        let gaps = self.gap_count();
        if gaps > 0 && !self.gap_tolerant {
            return Err(MetricsError::GapsPresent { count: gaps });
        }
        Ok(())
    }

    /// Single-pole low-pass `y[n] = y[n−1] + α·(x[n] − y[n−1])` with
    /// `α = 1 − exp(−2π·f·τ0)`, standing in for an instrument's measurement
    /// bandwidth. Gaps hold the filter state.
    pub fn prefiltered(&self, bandwidth: f64) -> Result<Self, MetricsError> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(MetricsError::InvalidSeries(format!("bandwidth must be positive, got {bandwidth}")));
        }
        let alpha = 1.0 - (-TAU * bandwidth * self.tau0).exp();
        let mut state: Option<f64> = None;
        let mut out = self.map(|_, v| v);
        for (v, &gap) in out.values.iter_mut().zip(&self.missing) {
            if gap {
                continue;
            }
            let y = match state {
                None => *v,
                Some(prev) => prev + alpha * (*v - prev),
            };
            state = Some(y);
            *v = y;
        }
        out.bandwidth = Some(bandwidth);
        Ok(out)
    }
}

/// Pairs remote pulse timestamps with reference timestamps.
///
/// References must be evenly spaced; the spacing becomes `tau0`. Each
/// reference takes the first unused remote event within half a period of it,
/// giving `x[i] = rx − ref`; a reference with no partner is a gap.
pub fn tic_offsets(ref_events: &[f64], rx_events: &[f64]) -> Result<PhaseSeries, MetricsError> {
    if ref_events.len() < 3 {
        return Err(MetricsError::InvalidSeries(format!("need at least 3 reference events, got {}", ref_events.len())));
    }
    if ref_events.iter().chain(rx_events).any(|t| !t.is_finite()) {
        return Err(MetricsError::InvalidSeries("event times must be finite".into()));
    }
    let period = (ref_events[ref_events.len() - 1] - ref_events[0]) / (ref_events.len() - 1) as f64;
    if !(period > 0.0) {
        return Err(MetricsError::InvalidSeries("reference events must increase".into()));
    }
    for (k, w) in ref_events.windows(2).enumerate() {
        if ((w[1] - w[0]) - period).abs() > 1e-6 * period {
            return Err(MetricsError::InvalidSeries(format!("reference spacing is not uniform at event {}", k + 1)));
        }
    }
    if rx_events.windows(2).any(|w| w[1] < w[0]) {
        return Err(MetricsError::InvalidSeries("remote events must be in time order".into()));
    }
    let half = 0.5 * period;
    let mut values = Vec::with_capacity(ref_events.len());
    let mut missing = Vec::with_capacity(ref_events.len());
    let mut j = 0;
    for &r in ref_events {
        while j < rx_events.len() && rx_events[j] <= r - half {
            j += 1;
        }
        if j < rx_events.len() && rx_events[j] - r < half {
            values.push(rx_events[j] - r);
            missing.push(false);
            j += 1;
        } else {
            values.push(0.0);
            missing.push(true);
        }
    }
    PhaseSeries::with_gaps(period, values, missing)
}
