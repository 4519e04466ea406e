use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::DemodError;
use crate::optics_chain::OpticalField;
use crate::signal_core::{fractional_delay, unit_phasor, RealSignal};

/// How the interferometer bias is held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasLock {
    /// Bias servoed to exactly π: CW light interferes destructively.
    IdealDestructive,
    /// Bias held at `MziSpec::bias`.
    FixedValue,
}

/// Unbalanced (delay-line) Mach–Zehnder interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MziSpec {
    /// Arm delay difference τ, s.
    pub path_difference: f64,
    /// Relative carrier phase of the long arm (`ω_c·τ mod 2π`), used with
    /// [`BiasLock::FixedValue`].
    pub bias: f64,
    pub bias_lock: BiasLock,
}

impl MziSpec {
    pub fn ideal(path_difference: f64) -> Self {
        Self { path_difference, bias: PI, bias_lock: BiasLock::IdealDestructive }
    }

    pub fn effective_bias(&self) -> f64 {
        match self.bias_lock {
            BiasLock::IdealDestructive => PI,
            BiasLock::FixedValue => self.bias,
        }
    }

    pub fn validate(&self) -> Result<(), DemodError> {
        if !(self.path_difference.is_finite() && self.path_difference > 0.0) {
            return Err(DemodError::InvalidParameter(format!(
                "MZI path difference must be positive, got {}",
                self.path_difference
            )));
        }
        if !self.bias.is_finite() {
            return Err(DemodError::InvalidParameter("MZI bias must be finite".into()));
        }
        Ok(())
    }
}

/// Output intensity `|E(t) + E(t+τ)·e^{i·bias}|² / 4` of the interferometer.
///
/// The 1/4 accounts for the two 50/50 couplers, so the output never exceeds
/// the summed intensity of the two arms. The field's carrier phase offset is
/// common to both arms and drops out. Samples whose `t + τ` partner is off
/// the grid are flagged invalid.
pub fn mzi_interfere(field: &OpticalField, mzi: &MziSpec) -> Result<RealSignal, DemodError> {
    mzi.validate()?;
    let span = field.grid().span();
    if span <= 3.0 * mzi.path_difference {
        return Err(DemodError::SpanTooShort { span, needed: 3.0 * mzi.path_difference });
    }
    let advanced = fractional_delay(&field.envelope, -mzi.path_difference)?;
    let rot = unit_phasor(mzi.effective_bias());
    let out = field.envelope.zip_map(&advanced, |a, b| 0.25 * (a + b * rot).norm_sqr())?;
    Ok(out)
}
