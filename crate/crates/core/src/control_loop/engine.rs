use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;

use super::{pid_step, ActuatorConfig, ActuatorState, LoopError, PidConfig, PidState};
use crate::optics_chain::{LinkDelaySampler, LinkNoiseProcess, OdlStage, SaturationEvent};
use crate::signal_core::{tone_phase, wrap_phase, PhaseUnwrapper};

/// Loop operating mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopMode {
    /// Actuator held at zero; the trace shows the free-running link.
    Open,
    Closed,
}

/// Run settings of the slow-time engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// RF tone frequency `ω0 / 2π`, Hz.
    pub rf_frequency: f64,
    pub duration: f64,
    pub mode: LoopMode,
    /// Discriminator dead zone on the round-trip phase, rad.
    #[serde(default)]
    pub dead_zone: f64,
    /// Spacing of recorded trace rows, s. Rounded to whole ticks.
    pub record_interval: f64,
    /// Summary statistics ignore ticks before this time, s.
    pub settle_time: f64,
    /// A run stops once both actuator stages stay saturated this long, s.
    pub max_saturation_time: f64,
}

impl LoopConfig {
    pub fn new(rf_frequency: f64, duration: f64, mode: LoopMode) -> Self {
        Self {
            rf_frequency,
            duration,
            mode,
            dead_zone: 0.0,
            record_interval: 1e-3,
            settle_time: 0.0,
            max_saturation_time: 1.0,
        }
    }
}

/// Full-rate statistics of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSummary {
    pub ticks: u64,
    /// The run stopped early on persistent saturation.
    pub truncated: bool,
    pub saturated_ticks: u64,
    pub out_of_range_ticks: u64,
    /// Peak-to-peak of `t_link − static`, whole run, s.
    pub link_variation_pp: f64,
    /// Peak-to-peak of `t_link + t_ODL` after settling, s.
    pub remote_offset_pp: f64,
    /// Peak-to-peak of the remote RF phase after settling, rad.
    pub remote_phase_pp: f64,
    /// Largest `|ω0·offset − phase|` over all ticks, rad.
    pub max_identity_error: f64,
    /// Largest `|offset − (t_link − static)|` over all ticks, s.
    pub max_open_loop_mismatch: f64,
}

/// Decimated record of a run plus full-rate summary.
///
/// `t_link` is the absolute one-way delay; `remote_time_offset` and
/// `remote_rf_phase` are taken relative to the static delay, i.e. what the
/// remote site sees move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopTrace {
    pub mode: LoopMode,
    pub tick_interval: f64,
    pub static_delay: f64,
    pub time: Vec<f64>,
    pub t_link: Vec<f64>,
    pub t_odl: Vec<f64>,
    /// Unwrapped discriminator output fed to the PID, rad.
    pub error: Vec<f64>,
    pub remote_rf_phase: Vec<f64>,
    pub remote_time_offset: Vec<f64>,
    /// First tick of each saturation episode, per stage.
    pub saturation_events: Vec<SaturationEvent>,
    pub summary: LoopSummary,
}

impl LoopTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Writes the trace as CSV with columns
    /// `time_s,t_link_s,t_odl_s,error_rad,remote_phase_rad,remote_offset_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "t_link_s", "t_odl_s", "error_rad", "remote_phase_rad", "remote_offset_s"])?;
        for i in 0..self.len() {
            w.write_record([
                format!("{:e}", self.time[i]),
                format!("{:e}", self.t_link[i]),
                format!("{:e}", self.t_odl[i]),
                format!("{:e}", self.error[i]),
                format!("{:e}", self.remote_rf_phase[i]),
                format!("{:e}", self.remote_time_offset[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// PD1 output for given one-way RF phases: `Δφ_err = 2φ'_ODL + 2φ'_1`.
pub fn error_signal(odl_phase: f64, link_phase: f64) -> f64 {
    2.0 * odl_phase + 2.0 * link_phase
}

/// One-way correction that nulls a round-trip error: `−Δφ_err / 2`.
pub fn one_way_correction(error: f64) -> f64 {
    -0.5 * error
}

/// Wrapped round-trip RF phase `2ω0·(t_link + t_ODL)` in (−π, π].
///
/// Each delay is reduced separately so long fibers keep full precision.
pub fn round_trip_phase(t_link: f64, t_odl: f64, rf_frequency: f64) -> f64 {
    wrap_phase(tone_phase(2.0 * rf_frequency, t_link) + tone_phase(2.0 * rf_frequency, t_odl))
}

/// `t = φ / 2π · T_fre`.
pub fn phase_to_delay(phase: f64, period: f64) -> f64 {
    phase / TAU * period
}

/// `φ = 2π · t / T_fre`.
pub fn delay_to_phase(delay: f64, period: f64) -> f64 {
    TAU * delay / period
}

struct Extent(f64, f64);

impl Extent {
    fn new() -> Self {
        Self(f64::INFINITY, f64::NEG_INFINITY)
    }

    fn push(&mut self, v: f64) {
        self.0 = self.0.min(v);
        self.1 = self.1.max(v);
    }

    fn pp(&self) -> f64 {
        if self.1 >= self.0 {
            self.1 - self.0
        } else {
            0.0
        }
    }
}

/// Slow-time loop simulation at the PID tick rate.
///
/// Per tick: sample the link, form the round-trip phase `2ω0·(t_link + t_ODL)`
/// referenced to its value at the first tick, apply the dead zone, unwrap,
/// then (closed mode) run the PID and step the actuator. The actuator's new
/// delay takes effect on the next tick.
pub fn simulate_closed_loop(
    link: &LinkNoiseProcess,
    pid: &PidConfig,
    act: &ActuatorConfig,
    cfg: &LoopConfig,
) -> Result<LoopTrace, LoopError> {
    link.validate()?;
    pid.validate()?;
    let dt = pid.dt();
    if !(cfg.rf_frequency.is_finite() && cfg.rf_frequency > 0.0) {
        return Err(LoopError::InvalidConfig(format!("RF frequency must be positive, got {}", cfg.rf_frequency)));
    }
    if !(cfg.duration.is_finite() && cfg.duration > 10.0 * dt) {
        return Err(LoopError::InvalidConfig(format!(
            "duration must exceed ten control ticks ({:e} s), got {}",
            10.0 * dt,
            cfg.duration
        )));
    }
    if !(cfg.dead_zone >= 0.0 && cfg.dead_zone < std::f64::consts::PI) {
        return Err(LoopError::InvalidConfig(format!("dead zone must lie in [0, π), got {}", cfg.dead_zone)));
    }
    if !(cfg.record_interval.is_finite() && cfg.record_interval > 0.0) {
        return Err(LoopError::InvalidConfig(format!("record interval must be positive, got {}", cfg.record_interval)));
    }
    if !(cfg.settle_time >= 0.0 && cfg.max_saturation_time > 0.0) {
        return Err(LoopError::InvalidConfig("settle and saturation times must be non-negative".into()));
    }
    let mut actuator = ActuatorState::new(*act, dt)?;

    let ticks = (cfg.duration * pid.update_rate).round() as u64;
    let record_every = ((cfg.record_interval / dt).round() as u64).max(1);
    let settle_tick = (cfg.settle_time / dt).ceil() as u64;
    let max_out_of_range = (cfg.max_saturation_time / dt).ceil() as u64;
    let omega = TAU * cfg.rf_frequency;
    let static_delay = link.static_delay;

    let capacity = (ticks / record_every + 1) as usize;
    let mut trace = LoopTrace {
        mode: cfg.mode,
        tick_interval: dt,
        static_delay,
        time: Vec::with_capacity(capacity),
        t_link: Vec::with_capacity(capacity),
        t_odl: Vec::with_capacity(capacity),
        error: Vec::with_capacity(capacity),
        remote_rf_phase: Vec::with_capacity(capacity),
        remote_time_offset: Vec::with_capacity(capacity),
        saturation_events: Vec::new(),
        summary: LoopSummary {
            ticks: 0,
            truncated: false,
            saturated_ticks: 0,
            out_of_range_ticks: 0,
            link_variation_pp: 0.0,
            remote_offset_pp: 0.0,
            remote_phase_pp: 0.0,
            max_identity_error: 0.0,
            max_open_loop_mismatch: 0.0,
        },
    };

    let mut sampler = LinkDelaySampler::new(*link);
    let mut pid_state = PidState::default();
    let mut unwrapper = PhaseUnwrapper::new();
    let mut reference = None;
    let mut command = 0.0;
    let mut saturated = [false, false];
    let mut out_of_range_run = 0u64;
    let (mut link_ext, mut offset_ext, mut phase_ext) = (Extent::new(), Extent::new(), Extent::new());
    let s = &mut trace.summary;

    for n in 0..ticks {
        let t = n as f64 * dt;
        let t_link = sampler.sample(t);
        let variation = t_link - static_delay;
        let t_odl = actuator.total();
        let offset = variation + t_odl;
        let round_trip = 2.0 * omega * offset;
        let reference = *reference.get_or_insert(round_trip);
        let mut raw = wrap_phase(round_trip - reference);
        if raw.abs() < cfg.dead_zone {
            raw = 0.0;
        }
        let error = unwrapper.push(raw);
        let remote_phase = omega * variation + omega * t_odl;

        link_ext.push(variation);
        if n >= settle_tick {
            offset_ext.push(offset);
            phase_ext.push(remote_phase);
        }
        s.max_identity_error = s.max_identity_error.max((omega * offset - remote_phase).abs());
        if cfg.mode == LoopMode::Open {
            s.max_open_loop_mismatch = s.max_open_loop_mismatch.max((offset - variation).abs());
        }
        if n % record_every == 0 {
            trace.time.push(t);
            trace.t_link.push(t_link);
            trace.t_odl.push(t_odl);
            trace.error.push(error);
            trace.remote_rf_phase.push(remote_phase);
            trace.remote_time_offset.push(offset);
        }
        s.ticks = n + 1;

        if cfg.mode == LoopMode::Closed {
            command -= pid_step(&mut pid_state, error, dt, pid)?;
            let update = actuator.step(command, t)?;
            let now = [OdlStage::Thermal, OdlStage::Pzt].map(|st| update.saturation.iter().find(|e| e.stage == st));
            for (k, ev) in now.iter().enumerate() {
                if let Some(ev) = ev {
                    if !saturated[k] {
                        trace.saturation_events.push(**ev);
                    }
                }
                saturated[k] = ev.is_some();
            }
            if !update.saturation.is_empty() {
                s.saturated_ticks += 1;
            }
            if update.out_of_range {
                s.out_of_range_ticks += 1;
                out_of_range_run += 1;
                if out_of_range_run >= max_out_of_range {
                    s.truncated = true;
                    break;
                }
            } else {
                out_of_range_run = 0;
            }
        }
    }
    s.link_variation_pp = link_ext.pp();
    s.remote_offset_pp = offset_ext.pp();
    s.remote_phase_pp = phase_ext.pp();
    Ok(trace)
}
