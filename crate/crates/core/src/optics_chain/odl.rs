use serde::{Deserialize, Serialize};
use std::fmt;

use super::link::{delay_field, delay_field_retimed};
use super::{OpticalField, OpticsError};

/// The two delay stages of the optical delay line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdlStage {
    /// Temperature-controlled fiber spool.
    Thermal,
    /// Piezo fiber stretcher.
    Pzt,
}

impl fmt::Display for OdlStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdlStage::Thermal => f.write_str("thermal"),
            OdlStage::Pzt => f.write_str("pzt"),
        }
    }
}

/// A stage was asked for more delay than it can produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationEvent {
    pub time: f64,
    pub stage: OdlStage,
    pub requested: f64,
    /// Signed limit that was applied instead.
    pub limit: f64,
    /// `requested − limit`.
    pub overflow: f64,
}

/// Delay settings of the ODL stages and their ranges (symmetric, ±range).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdlState {
    pub thermal_delay: f64,
    pub pzt_delay: f64,
    pub thermal_range: f64,
    pub pzt_range: f64,
}

impl OdlState {
    pub fn new(thermal_delay: f64, pzt_delay: f64, thermal_range: f64, pzt_range: f64) -> Self {
        Self { thermal_delay, pzt_delay, thermal_range, pzt_range }
    }

    /// `t_ODL = thermal + pzt`.
    pub fn total(&self) -> f64 {
        self.thermal_delay + self.pzt_delay
    }

    /// The state with each stage clamped to its range, plus one event per
    /// stage that had to be clamped.
    pub fn clamped(&self, time: f64) -> (OdlState, Vec<SaturationEvent>) {
        let mut events = Vec::new();
        let mut clamp = |stage, value: f64, range: f64| {
            if value.abs() > range {
                let limit = range.copysign(value);
                events.push(SaturationEvent { time, stage, requested: value, limit, overflow: value - limit });
                limit
            } else {
                value
            }
        };
        let thermal = clamp(OdlStage::Thermal, self.thermal_delay, self.thermal_range);
        let pzt = clamp(OdlStage::Pzt, self.pzt_delay, self.pzt_range);
        (OdlState { thermal_delay: thermal, pzt_delay: pzt, ..*self }, events)
    }
}

/// Field after the ODL, with any saturation that limited the applied delay.
#[derive(Debug, Clone, PartialEq)]
pub struct OdlOutput {
    pub field: OpticalField,
    pub saturation: Vec<SaturationEvent>,
}

fn check(odl: &OdlState) -> Result<(), OpticsError> {
    let all = [odl.thermal_delay, odl.pzt_delay, odl.thermal_range, odl.pzt_range];
    if all.iter().any(|v| !v.is_finite()) || odl.thermal_range < 0.0 || odl.pzt_range < 0.0 {
        return Err(OpticsError::InvalidParameter(format!("invalid ODL state {odl:?}")));
    }
    Ok(())
}

/// Applies `t_ODL` to the field on its own grid. Out-of-range stages are
/// clamped and reported.
pub fn odl_apply(field: &OpticalField, odl: &OdlState) -> Result<OdlOutput, OpticsError> {
    check(odl)?;
    let (applied, saturation) = odl.clamped(field.grid().start());
    Ok(OdlOutput { field: delay_field(field, applied.total())?, saturation })
}

/// [`odl_apply`] with the bulk of the delay taken by moving the grid origin.
pub fn odl_apply_retimed(field: &OpticalField, odl: &OdlState) -> Result<OdlOutput, OpticsError> {
    check(odl)?;
    let (applied, saturation) = odl.clamped(field.grid().start());
    Ok(OdlOutput { field: delay_field_retimed(field, applied.total())?, saturation })
}
