use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::LoopError;

/// Discrete PID mapping discriminator phase (rad) to delay-line increments (s).
///
/// `ki2` adds a second (double) integrator. With the loop's own accumulation
/// of increments this makes a type-3 loop, which is what it takes to keep
/// ≥ 40 dB of suppression a decade below crossover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidConfig {
    pub kp: f64,
    pub ki: f64,
    #[serde(default)]
    pub ki2: f64,
    pub kd: f64,
    pub update_rate: f64,
    /// Bound on each integral contribution to the output, s.
    pub integrator_limit: f64,
}

// Both integrator zeros sit at crossover / ZERO_RATIO.
const ZERO_RATIO: f64 = 2.4;

impl PidConfig {
    /// Gains placing the open-loop crossover near `bandwidth` Hz for a
    /// round-trip discriminator at `rf_frequency`.
    ///
    /// The proportional term alone sets `|L| = 1` at `bandwidth`; a double zero
    /// at `bandwidth / 2.4` adds the integral terms. The realized crossover is
    /// slightly higher; [`LoopModel::unity_gain_frequency`] gives the exact value.
    pub fn for_bandwidth(bandwidth: f64, update_rate: f64, rf_frequency: f64) -> Self {
        let dt = 1.0 / update_rate;
        let kp = TAU * bandwidth * dt / (2.0 * TAU * rf_frequency);
        let a = TAU * bandwidth / ZERO_RATIO;
        Self { kp, ki: 2.0 * a * kp, ki2: a * a * kp, kd: 0.0, update_rate, integrator_limit: 1e-9 }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.update_rate
    }

    pub fn validate(&self) -> Result<(), LoopError> {
        let gains = [self.kp, self.ki, self.ki2, self.kd];
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(LoopError::InvalidConfig("PID gains must be finite".into()));
        }
        if !(self.update_rate.is_finite() && self.update_rate > 0.0) {
            return Err(LoopError::InvalidConfig(format!("update rate must be positive, got {}", self.update_rate)));
        }
        if !(self.integrator_limit.is_finite() && self.integrator_limit > 0.0) {
            return Err(LoopError::InvalidConfig(format!(
                "integrator limit must be positive, got {}",
                self.integrator_limit
            )));
        }
        Ok(())
    }
}

/// Integrator and derivative memory of the PID.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    /// ∫e dt, rad·s.
    pub integral: f64,
    /// ∫∫e dt², rad·s².
    pub double_integral: f64,
    pub prev_error: Option<f64>,
}

fn clamp_term(value: f64, gain: f64, limit: f64) -> f64 {
    if gain == 0.0 {
        return value;
    }
    let bound = limit / gain.abs();
    value.clamp(-bound, bound)
}

/// One controller update; returns the requested `t_ODL` increment in s.
///
/// Each integral is clamped so its contribution stays within
/// `±integrator_limit` (anti-windup).
pub fn pid_step(state: &mut PidState, error: f64, dt: f64, cfg: &PidConfig) -> Result<f64, LoopError> {
    if !error.is_finite() {
        return Err(LoopError::NonFiniteError { value: error });
    }
    if !(dt > 0.0) || (dt * cfg.update_rate - 1.0).abs() > 1e-9 {
        return Err(LoopError::InvalidConfig(format!(
            "dt {dt:e} s does not match the update rate {} Hz",
            cfg.update_rate
        )));
    }
    state.integral = clamp_term(state.integral + error * dt, cfg.ki, cfg.integrator_limit);
    state.double_integral = clamp_term(state.double_integral + state.integral * dt, cfg.ki2, cfg.integrator_limit);
    let derivative = state.prev_error.map_or(0.0, |p| (error - p) / dt);
    state.prev_error = Some(error);
    Ok(cfg.kp * error + cfg.ki * state.integral + cfg.ki2 * state.double_integral + cfg.kd * derivative)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrator_only() -> PidConfig {
        PidConfig { kp: 0.0, ki: 2.0, ki2: 0.0, kd: 0.0, update_rate: 1000.0, integrator_limit: 0.05 }
    }

    #[test]
    fn zero_error_gives_zero_command() {
        let cfg = PidConfig::for_bandwidth(8.0, 1000.0, 1e9);
        let mut s = PidState::default();
        for _ in 0..10 {
            assert_eq!(pid_step(&mut s, 0.0, 1e-3, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn integrator_ramps_then_clamps() {
        let cfg = integrator_only();
        let mut s = PidState::default();
        let e = 0.5;
        let mut prev = 0.0;
        for n in 1..=100 {
            let u = pid_step(&mut s, e, 1e-3, &cfg).unwrap();
            let expect = (cfg.ki * e * 1e-3 * n as f64).min(cfg.integrator_limit);
            assert!((u - expect).abs() < 1e-15);
            if u < cfg.integrator_limit {
                assert!((u - prev - cfg.ki * e * 1e-3).abs() < 1e-15);
            }
            prev = u;
        }
        assert_eq!(prev, cfg.integrator_limit);
    }

    #[test]
    fn nan_error_is_rejected() {
        let mut s = PidState::default();
        assert!(matches!(pid_step(&mut s, f64::NAN, 1e-3, &integrator_only()), Err(LoopError::NonFiniteError { .. })));
    }

    #[test]
    fn mismatched_dt_is_rejected() {
        let mut s = PidState::default();
        assert!(pid_step(&mut s, 0.1, 2e-3, &integrator_only()).is_err());
    }

    #[test]
    fn default_tuning_values() {
        let cfg = PidConfig::for_bandwidth(8.0, 1000.0, 1e9);
        assert!((cfg.kp - 4.0e-12).abs() < 1e-24);
        assert!((cfg.ki / cfg.kp - 2.0 * TAU * 8.0 / 2.4).abs() < 1e-9);
        assert!((cfg.ki2 / cfg.kp - (TAU * 8.0 / 2.4).powi(2)).abs() < 1e-9);
    }
}
