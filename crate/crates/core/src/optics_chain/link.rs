use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{OpticalField, OpticsError, SPEED_OF_LIGHT};
use crate::rng::keyed_normal;
use crate::signal_core::{delay_retimed, fractional_delay};

/// Slow thermal delay variation of the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalDrift {
    /// Peak delay excursion of the sinusoidal component, s.
    pub amplitude: f64,
    /// Period of the sinusoidal component, s.
    pub period: f64,
    /// Random-walk coefficient, s/√s.
    pub random_walk_coeff: f64,
}

impl ThermalDrift {
    pub fn none() -> Self {
        Self { amplitude: 0.0, period: 86_400.0, random_walk_coeff: 0.0 }
    }
}

/// One-way link delay `t_link(t)`: static + sinusoidal drift + random walk +
/// sample-and-hold white jitter.
///
/// Sampling is a pure function of `(rng_seed, t)`; the same process is used
/// for both directions of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkNoiseProcess {
    pub static_delay: f64,
    pub thermal_drift: ThermalDrift,
    /// One-sided PSD of the white delay jitter, s²/Hz.
    pub jitter_psd_level: f64,
    /// Hold time of each jitter value, s.
    #[serde(default = "default_jitter_interval")]
    pub jitter_interval: f64,
    pub rng_seed: u64,
}

fn default_jitter_interval() -> f64 {
    1e-3
}

/// Group delay of `length_m` of fiber with group index `group_index`.
pub fn fiber_delay(length_m: f64, group_index: f64) -> f64 {
    length_m * group_index / SPEED_OF_LIGHT
}

impl LinkNoiseProcess {
    /// A link with no variation at all.
    pub fn noiseless(static_delay: f64) -> Self {
        Self {
            static_delay,
            thermal_drift: ThermalDrift::none(),
            jitter_psd_level: 0.0,
            jitter_interval: default_jitter_interval(),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), OpticsError> {
        let bad = |m: String| Err(OpticsError::InvalidParameter(m));
        if !(self.static_delay.is_finite() && self.static_delay > 0.0) {
            return bad(format!("static delay must be positive, got {}", self.static_delay));
        }
        let d = &self.thermal_drift;
        if !(d.amplitude.is_finite() && d.amplitude >= 0.0) {
            return bad(format!("drift amplitude must be non-negative, got {}", d.amplitude));
        }
        if !(d.period.is_finite() && d.period > 0.0) {
            return bad(format!("drift period must be positive, got {}", d.period));
        }
        if !(d.random_walk_coeff.is_finite() && d.random_walk_coeff >= 0.0) {
            return bad(format!("random-walk coefficient must be non-negative, got {}", d.random_walk_coeff));
        }
        if !(self.jitter_psd_level.is_finite() && self.jitter_psd_level >= 0.0) {
            return bad(format!("jitter PSD must be non-negative, got {}", self.jitter_psd_level));
        }
        if !(self.jitter_interval.is_finite() && self.jitter_interval > 0.0) {
            return bad(format!("jitter interval must be positive, got {}", self.jitter_interval));
        }
        Ok(())
    }

    /// Deterministic sinusoidal part of the drift.
    pub fn sinusoidal_drift(&self, t: f64) -> f64 {
        let d = &self.thermal_drift;
        if d.amplitude == 0.0 {
            0.0
        } else {
            d.amplitude * (TAU * t / d.period).sin()
        }
    }

    fn jitter(&self, t: f64) -> f64 {
        if self.jitter_psd_level == 0.0 {
            return 0.0;
        }
        let sigma = (self.jitter_psd_level / (2.0 * self.jitter_interval)).sqrt();
        let slot = (t / self.jitter_interval).floor() as u64;
        sigma * keyed_normal(self.rng_seed, STREAM_JITTER, slot)
    }
}

/// `t_link(t)`. Negative times are treated as `t = 0`.
pub fn sample_link_delay(process: &LinkNoiseProcess, t: f64) -> f64 {
    LinkDelaySampler::new(*process).sample(t)
}

const STREAM_JITTER: u64 = 1;
const STREAM_WALK_BLOCK: u64 = 2;
const STREAM_WALK_BRIDGE: u64 = 3;

// Random-walk lattice: 1/8 s cells, 2^20 cells per block.
const WALK_CELL: f64 = 0.125;
const WALK_LEVELS: u32 = 20;
const WALK_BLOCK: f64 = WALK_CELL * (1u64 << WALK_LEVELS) as f64;

/// Evaluates a link process efficiently along a mostly increasing time axis.
///
/// The random walk is built by Brownian-bridge refinement of a fixed lattice,
/// so any `t` can be evaluated on its own; the sampler only caches the
/// lattice cell it last visited.
#[derive(Debug, Clone)]
pub struct LinkDelaySampler {
    process: LinkNoiseProcess,
    // block index -> walk value at the block start
    block_starts: Vec<f64>,
    cell: Option<(u64, u64, f64, f64)>,
}

impl LinkDelaySampler {
    pub fn new(process: LinkNoiseProcess) -> Self {
        Self { process, block_starts: vec![0.0], cell: None }
    }

    pub fn process(&self) -> &LinkNoiseProcess {
        &self.process
    }

    pub fn sample(&mut self, t: f64) -> f64 {
        let t = t.max(0.0);
        self.process.static_delay + self.variation(t)
    }

    /// `t_link(t) − static_delay`, without the cancellation error of
    /// subtracting two nearly equal numbers.
    pub fn variation(&mut self, t: f64) -> f64 {
        let t = t.max(0.0);
        self.process.sinusoidal_drift(t) + self.walk(t) + self.process.jitter(t)
    }

    fn walk(&mut self, t: f64) -> f64 {
        let c = self.process.thermal_drift.random_walk_coeff;
        if c == 0.0 {
            return 0.0;
        }
        let block = (t / WALK_BLOCK).floor() as u64;
        let offset = t - block as f64 * WALK_BLOCK;
        let cell = ((offset / WALK_CELL).floor() as u64).min((1 << WALK_LEVELS) - 1);
        let (wl, wr) = match self.cell {
            Some((b, k, wl, wr)) if b == block && k == cell => (wl, wr),
            _ => {
                let ends = self.cell_ends(block, cell, c);
                self.cell = Some((block, cell, ends.0, ends.1));
                ends
            }
        };
        let frac = (offset / WALK_CELL - cell as f64).clamp(0.0, 1.0);
        wl + (wr - wl) * frac
    }

    fn block_start(&mut self, block: u64, c: f64) -> f64 {
        let seed = self.process.rng_seed;
        while self.block_starts.len() as u64 <= block {
            let b = self.block_starts.len() as u64 - 1;
            let prev = self.block_starts[b as usize];
            self.block_starts.push(prev + c * WALK_BLOCK.sqrt() * keyed_normal(seed, STREAM_WALK_BLOCK, b));
        }
        self.block_starts[block as usize]
    }

    fn cell_ends(&mut self, block: u64, cell: u64, c: f64) -> (f64, f64) {
        let seed = self.process.rng_seed;
        let mut left = self.block_start(block, c);
        let mut right = self.block_start(block + 1, c);
        // heap-numbered bridge nodes, root = 1
        let mut node: u64 = 1;
        let mut span = WALK_BLOCK;
        for level in (0..WALK_LEVELS).rev() {
            let key = (block << (WALK_LEVELS + 1)) | node;
            let mid = 0.5 * (left + right) + 0.5 * c * span.sqrt() * keyed_normal(seed, STREAM_WALK_BRIDGE, key);
            span *= 0.5;
            if (cell >> level) & 1 == 0 {
                right = mid;
                node *= 2;
            } else {
                left = mid;
                node = 2 * node + 1;
            }
        }
        (left, right)
    }
}

fn check_delay(delay: f64, what: &str) -> Result<(), OpticsError> {
    if delay.is_finite() {
        Ok(())
    } else {
        Err(OpticsError::InvalidParameter(format!("{what} delay must be finite, got {delay}")))
    }
}

/// Delays the field by `t_link` on its own grid.
///
/// The envelope is interpolated; the carrier phase offset advances by
/// `ω_c·t_link`. Delays of a grid span or more are rejected; see
/// [`propagate_link_retimed`] for long fibers.
pub fn propagate_link(field: &OpticalField, t_link: f64) -> Result<OpticalField, OpticsError> {
    check_delay(t_link, "link")?;
    if t_link < 0.0 {
        return Err(OpticsError::InvalidParameter(format!("link delay must be non-negative, got {t_link}")));
    }
    let mut out = field.with_envelope(fractional_delay(&field.envelope, t_link)?);
    out.advance_carrier(t_link);
    Ok(out)
}

/// Like [`propagate_link`] but moves the grid origin forward by the bulk of
/// the delay, so the sample count and the valid region survive any fiber
/// length.
pub fn propagate_link_retimed(field: &OpticalField, t_link: f64) -> Result<OpticalField, OpticsError> {
    check_delay(t_link, "link")?;
    if t_link < 0.0 {
        return Err(OpticsError::InvalidParameter(format!("link delay must be non-negative, got {t_link}")));
    }
    delay_field_retimed(field, t_link)
}

pub(crate) fn delay_field_retimed(field: &OpticalField, delay: f64) -> Result<OpticalField, OpticsError> {
    let mut out = field.with_envelope(delay_retimed(&field.envelope, delay)?);
    out.advance_carrier(delay);
    Ok(out)
}

pub(crate) fn delay_field(field: &OpticalField, delay: f64) -> Result<OpticalField, OpticsError> {
    let mut out = field.with_envelope(fractional_delay(&field.envelope, delay)?);
    out.advance_carrier(delay);
    Ok(out)
}
