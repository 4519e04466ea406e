use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::LoopError;
use crate::optics_chain::{OdlStage, OdlState, SaturationEvent};

/// Bandwidth and symmetric range of one delay stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub bandwidth: f64,
    pub range: f64,
}

/// Two-stage delay actuator: a slow thermal spool and a fast PZT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorConfig {
    pub thermal: StageConfig,
    pub pzt: StageConfig,
    /// Corner of the low-pass that selects the thermal share of the command, Hz.
    pub crossover: f64,
}

impl Default for ActuatorConfig {
    fn default() -> Self {
        Self {
            thermal: StageConfig { bandwidth: 1.0, range: 50e-9 },
            pzt: StageConfig { bandwidth: 2000.0, range: 20e-12 },
            crossover: 10.0,
        }
    }
}

impl ActuatorConfig {
    pub fn validate(&self) -> Result<(), LoopError> {
        for (name, s) in [("thermal", self.thermal), ("pzt", self.pzt)] {
            if !(s.bandwidth.is_finite() && s.bandwidth > 0.0 && s.range.is_finite() && s.range > 0.0) {
                return Err(LoopError::InvalidConfig(format!(
                    "{name} stage needs positive bandwidth and range, got {s:?}"
                )));
            }
        }
        if !(self.thermal.bandwidth < self.crossover && self.crossover < self.pzt.bandwidth) {
            return Err(LoopError::InvalidConfig(format!(
                "need thermal bandwidth < crossover < pzt bandwidth, got {} / {} / {}",
                self.thermal.bandwidth, self.crossover, self.pzt.bandwidth
            )));
        }
        Ok(())
    }

    /// Pole factors `exp(−2π·f·dt)` of crossover, thermal and PZT lags.
    pub(crate) fn poles(&self, dt: f64) -> (f64, f64, f64) {
        let p = |f: f64| (-TAU * f * dt).exp();
        (p(self.crossover), p(self.thermal.bandwidth), p(self.pzt.bandwidth))
    }
}

/// Result of one actuator update.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorUpdate {
    pub odl: OdlState,
    /// Stages that hit their range on this update.
    pub saturation: Vec<SaturationEvent>,
    /// Both stages saturated: the requested correction is out of reach.
    pub out_of_range: bool,
}

/// Discrete-time state of the actuator at a fixed update interval.
///
/// Per update: the command is low-passed at the crossover to form the thermal
/// target, the thermal stage follows it through its own first-order lag, and
/// the PZT is driven with whatever the thermal stage has not yet realized.
/// A standing PZT deflection is therefore absorbed by the thermal stage
/// over time. Lags are discretized exactly for piecewise-constant inputs.
#[derive(Debug, Clone)]
pub struct ActuatorState {
    cfg: ActuatorConfig,
    dt: f64,
    poles: (f64, f64, f64),
    selected: f64,
    thermal: f64,
    pzt: f64,
}

impl ActuatorState {
    pub fn new(cfg: ActuatorConfig, dt: f64) -> Result<Self, LoopError> {
        cfg.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(LoopError::InvalidConfig(format!("actuator interval must be positive, got {dt}")));
        }
        Ok(Self { cfg, dt, poles: cfg.poles(dt), selected: 0.0, thermal: 0.0, pzt: 0.0 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn config(&self) -> &ActuatorConfig {
        &self.cfg
    }

    pub fn odl(&self) -> OdlState {
        OdlState::new(self.thermal, self.pzt, self.cfg.thermal.range, self.cfg.pzt.range)
    }

    /// Realized `t_ODL`.
    pub fn total(&self) -> f64 {
        self.thermal + self.pzt
    }

    pub fn step(&mut self, command: f64, time: f64) -> Result<ActuatorUpdate, LoopError> {
        if !command.is_finite() {
            return Err(LoopError::NonFiniteError { value: command });
        }
        let (ac, at, ap) = self.poles;
        self.selected = ac * self.selected + (1.0 - ac) * command;
        let thermal = at * self.thermal + (1.0 - at) * self.selected;
        let pzt = ap * self.pzt + (1.0 - ap) * (command - thermal);
        let (odl, saturation) = OdlState::new(thermal, pzt, self.cfg.thermal.range, self.cfg.pzt.range).clamped(time);
        self.thermal = odl.thermal_delay;
        self.pzt = odl.pzt_delay;
        let out_of_range = saturation.iter().any(|e| e.stage == OdlStage::Thermal)
            && saturation.iter().any(|e| e.stage == OdlStage::Pzt);
        Ok(ActuatorUpdate { odl, saturation, out_of_range })
    }
}

/// One actuator update from `state` with `command`; see [`ActuatorState::step`].
pub fn actuator_dispatch(command: f64, state: &mut ActuatorState, time: f64) -> Result<ActuatorUpdate, LoopError> {
    state.step(command, time)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_command_ends_on_thermal_stage() {
        let mut a = ActuatorState::new(ActuatorConfig::default(), 1e-3).unwrap();
        let mut last = None;
        for n in 0..20_000 {
            last = Some(a.step(1e-9, n as f64 * 1e-3).unwrap());
        }
        let odl = last.unwrap().odl;
        assert!((odl.thermal_delay - 1e-9).abs() < 0.01e-9);
        assert!(odl.pzt_delay.abs() < 0.01e-9);
    }

    #[test]
    fn fast_command_rides_on_pzt() {
        let dt = 1e-5;
        let mut a = ActuatorState::new(ActuatorConfig::default(), dt).unwrap();
        let (mut pzt_amp, mut total_amp) = (0.0f64, 0.0f64);
        for n in 0..200_000 {
            let t = n as f64 * dt;
            let odl = a.step(5e-12 * (TAU * 1000.0 * t).sin(), t).unwrap().odl;
            if t > 1.0 {
                pzt_amp = pzt_amp.max(odl.pzt_delay.abs());
                total_amp = total_amp.max(odl.total().abs());
            }
        }
        assert!(pzt_amp / total_amp >= 0.9, "share {}", pzt_amp / total_amp);
    }

    #[test]
    fn out_of_range_command_saturates() {
        let mut a = ActuatorState::new(ActuatorConfig::default(), 1e-3).unwrap();
        let mut saw_thermal = false;
        for n in 0..20_000 {
            let u = a.step(100e-9, n as f64 * 1e-3).unwrap();
            saw_thermal |= u.saturation.iter().any(|e| e.stage == OdlStage::Thermal);
        }
        assert!(saw_thermal);
        assert_eq!(a.odl().thermal_delay, 50e-9);
    }

    #[test]
    fn invalid_ordering_is_rejected() {
        let cfg = ActuatorConfig { crossover: 0.5, ..ActuatorConfig::default() };
        assert!(ActuatorState::new(cfg, 1e-3).is_err());
    }
}
