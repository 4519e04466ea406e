use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Wraps a phase into `(−π, π]`.
///
/// Inputs that differ from an odd multiple of π by rounding error only map to
/// `+π`, so `wrap_phase(3π) == π` despite `3π` not being representable.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    let snap = 4.0 * f64::EPSILON * phi.abs().max(1.0);
    if (r - PI).abs() <= snap {
        PI
    } else if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Phase `2π·frac(freq·t)` in `[0, 2π)`.
///
/// The product is formed with its rounding error recovered, so the result
/// stays accurate to ~1e-15 rad even when `freq·t` is many millions of cycles.
pub fn tone_phase(freq: f64, t: f64) -> f64 {
    let p = freq * t;
    let err = freq.mul_add(t, -p);
    let frac = (p - p.floor()) + err;
    TAU * (frac - frac.floor())
}

/// `exp(iφ)`, exact when φ is an exact multiple of π/2.
pub fn unit_phasor(phi: f64) -> Complex64 {
    let quarters = (phi / FRAC_PI_2).round();
    if quarters * FRAC_PI_2 == phi && quarters.abs() < 1e15 {
        return match (quarters as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = phi.sin_cos();
    Complex64::new(c, s)
}

/// Result of unwrapping a phase series.
#[derive(Debug, Clone, PartialEq)]
pub struct Unwrapped {
    pub values: Vec<f64>,
    /// Indices `i` where the step from `i - 1` was a full ±π and the branch
    /// choice is therefore ambiguous.
    pub ambiguous: Vec<usize>,
}

impl Unwrapped {
    pub fn is_clean(&self) -> bool {
        self.ambiguous.is_empty()
    }
}

/// Removes 2π jumps so consecutive outputs differ by less than π.
pub fn unwrap_phase(series: &[f64]) -> Unwrapped {
    let mut values = Vec::with_capacity(series.len());
    let mut ambiguous = Vec::new();
    let mut prev_in = 0.0;
    let mut prev_out = 0.0;
    for (i, &phi) in series.iter().enumerate() {
        let out = if i == 0 {
            phi
        } else {
            let step = wrap_phase(phi - prev_in);
            if step.abs() >= PI - 1e-12 {
                ambiguous.push(i);
            }
            prev_out + step
        };
        values.push(out);
        prev_in = phi;
        prev_out = out;
    }
    Unwrapped { values, ambiguous }
}

/// Streaming counterpart of [`unwrap_phase`], fed one wrapped sample at a time.
#[derive(Debug, Clone, Default)]
pub struct PhaseUnwrapper {
    last: Option<(f64, f64)>,
}

impl PhaseUnwrapper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, wrapped: f64) -> f64 {
        let out = match self.last {
            None => wrapped,
            Some((prev_in, prev_out)) => prev_out + wrap_phase(wrapped - prev_in),
        };
        self.last = Some((wrapped, out));
        out
    }
}
