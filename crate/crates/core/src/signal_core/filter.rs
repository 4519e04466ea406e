//! Zero-phase Butterworth low-pass filtering.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{RealSignal, Signal, SignalError};

/// One second-order section in transposed direct form II.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn run(&self, x: &[f64], y: &mut Vec<f64>) {
        // Steady-state start for a constant input x[0] (unit DC gain).
        let x0 = x[0];
        let mut s1 = (1.0 - self.b[0]) * x0;
        let mut s2 = (self.b[2] - self.a[1]) * x0;
        y.clear();
        for &xn in x {
            let yn = self.b[0] * xn + s1;
            s1 = self.b[1] * xn - self.a[0] * yn + s2;
            s2 = self.b[2] * xn - self.a[1] * yn;
            y.push(yn);
        }
    }
}

/// Digital Butterworth low-pass as cascaded sections, unit DC gain.
fn butterworth_sections(cutoff: f64, sample_rate: f64, order: usize) -> Vec<Biquad> {
    let warped = 2.0 * sample_rate * (PI * cutoff / sample_rate).tan();
    let k = 2.0 * sample_rate;
    let bilinear = |p: Complex64| (k + p) / (k - p);
    let mut sections = Vec::new();
    for i in 0..order / 2 {
        let theta = PI * (2 * i + order + 1) as f64 / (2 * order) as f64;
        let pole = bilinear(Complex64::from_polar(warped, theta));
        let a1 = -2.0 * pole.re;
        let a2 = pole.norm_sqr();
        let g = (1.0 + a1 + a2) / 4.0;
        sections.push(Biquad { b: [g, 2.0 * g, g], a: [a1, a2] });
    }
    if order % 2 == 1 {
        let pole = bilinear(Complex64::new(-warped, 0.0)).re;
        let g = (1.0 - pole) / 2.0;
        sections.push(Biquad { b: [g, g, 0.0], a: [-pole, 0.0] });
    }
    sections
}

/// Zero-phase (forward–backward) Butterworth low-pass.
///
/// Each contiguous run of valid samples is filtered independently with odd
/// reflection padding and steady-state initial conditions, so a constant
/// input passes unchanged and pulse epochs are not skewed. Invalid samples
/// are passed through untouched and stay invalid.
pub fn filter_lowpass(signal: &RealSignal, cutoff: f64, order: usize) -> Result<RealSignal, SignalError> {
    let fs = signal.grid().sample_rate();
    if !(cutoff > 0.0 && cutoff < fs / 2.0) {
        return Err(SignalError::CutoffOutOfRange { cutoff, nyquist: fs / 2.0 });
    }
    if order == 0 {
        return Err(SignalError::InvalidFilterOrder(order));
    }
    let sections = butterworth_sections(cutoff, fs, order);
    // Settling length of the slowest pole, in samples.
    let settle = (3.0 * fs / cutoff).ceil() as usize;

    let mut out = signal.samples().to_vec();
    for run in signal.valid_runs() {
        let data = &signal.samples()[run.clone()];
        let filtered = filtfilt(&sections, data, settle.max(3 * (order + 1)));
        out[run].copy_from_slice(&filtered);
    }
    Signal::with_mask(*signal.grid(), out, signal.valid_mask().to_vec())
}

fn filtfilt(sections: &[Biquad], x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return x.to_vec();
    }
    let pad = pad.min(n - 1);
    let first = x[0];
    let last = x[n - 1];
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

    let mut buf = Vec::with_capacity(ext.len());
    // forward pass, then the same cascade over the reversed output
    for _ in 0..2 {
        for s in sections {
            s.run(&ext, &mut buf);
            std::mem::swap(&mut ext, &mut buf);
        }
        ext.reverse();
    }
    ext[pad..pad + n].to_vec()
}

/// Squared magnitude of an analog-prototype Butterworth low-pass, which is
/// the response of the forward–backward filter.
pub fn butterworth_power_gain(f: f64, cutoff: f64, order: usize) -> f64 {
    1.0 / (1.0 + (f / cutoff).abs().powi(2 * order as i32))
}
