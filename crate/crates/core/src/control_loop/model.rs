use num_complex::Complex64;
use std::f64::consts::TAU;

use super::{ActuatorConfig, LoopError, PidConfig};

/// Linear frequency-domain model of the slow-time loop at its tick rate.
///
/// The open-loop gain is `L(z) = 2ω0 · z⁻¹ · A(z) · C(z) / (1 − z⁻¹)`: the
/// PID output is accumulated into the delay command, the actuator realizes
/// it through `A(z)`, and the new delay is seen by the next discriminator
/// sample. Saturation and the dead zone are ignored.
#[derive(Debug, Clone, Copy)]
pub struct LoopModel {
    pub pid: PidConfig,
    pub actuator: ActuatorConfig,
    pub rf_frequency: f64,
}

impl LoopModel {
    pub fn new(pid: PidConfig, actuator: ActuatorConfig, rf_frequency: f64) -> Result<Self, LoopError> {
        pid.validate()?;
        actuator.validate()?;
        if !(rf_frequency.is_finite() && rf_frequency > 0.0) {
            return Err(LoopError::InvalidConfig(format!("RF frequency must be positive, got {rf_frequency}")));
        }
        Ok(Self { pid, actuator, rf_frequency })
    }

    fn nyquist(&self) -> f64 {
        0.5 * self.pid.update_rate
    }

    /// Actuator transfer from command to realized `t_ODL`.
    pub fn actuator_response(&self, f: f64) -> Complex64 {
        let dt = self.pid.dt();
        let zi = Complex64::from_polar(1.0, -TAU * f * dt);
        let (ac, at, ap) = self.actuator.poles(dt);
        let lag = |a: f64| Complex64::new(1.0 - a, 0.0) / (1.0 - a * zi);
        let slow = lag(at) * lag(ac);
        slow + lag(ap) * (1.0 - slow)
    }

    /// Open-loop gain `L` at `f` Hz.
    pub fn open_loop_gain(&self, f: f64) -> Complex64 {
        let p = &self.pid;
        let dt = p.dt();
        let zi = Complex64::from_polar(1.0, -TAU * f * dt);
        let acc = 1.0 / (1.0 - zi);
        let c = p.kp + p.ki * dt * acc + p.ki2 * dt * dt * acc * acc + p.kd * (1.0 - zi) / dt;
        2.0 * TAU * self.rf_frequency * zi * self.actuator_response(f) * c * acc
    }

    /// `|1 / (1 + L)|`: residual over injected delay for a sinusoid at `f`.
    pub fn sensitivity(&self, f: f64) -> f64 {
        (1.0 / (1.0 + self.open_loop_gain(f))).norm()
    }

    /// Suppression `−20·log10 |1/(1+L)|` in dB.
    pub fn suppression_db(&self, f: f64) -> f64 {
        -20.0 * self.sensitivity(f).log10()
    }

    /// Lowest frequency where `|L|` falls through 1, or `None` if it never
    /// does below Nyquist.
    pub fn unity_gain_frequency(&self) -> Option<f64> {
        let lo = 1e-6 * self.nyquist();
        let steps = 4000;
        let ratio = (self.nyquist() / lo).powf(1.0 / steps as f64);
        let above = |f: f64| self.open_loop_gain(f).norm() > 1.0;
        let mut a = lo;
        if !above(a) {
            return None;
        }
        for _ in 0..steps {
            let b = (a * ratio).min(self.nyquist() * (1.0 - 1e-12));
            if !above(b) {
                let (mut x, mut y) = (a, b);
                for _ in 0..100 {
                    let m = (x * y).sqrt();
                    if above(m) {
                        x = m;
                    } else {
                        y = m;
                    }
                }
                return Some((x * y).sqrt());
            }
            a = b;
        }
        None
    }

    /// Phase margin at the unity-gain frequency, degrees.
    pub fn phase_margin_deg(&self) -> Option<f64> {
        let f = self.unity_gain_frequency()?;
        Some(180.0 + self.open_loop_gain(f).arg().to_degrees())
    }
}
