//! Local transmit chain and fiber medium: CW laser, phase EOM carrying the
//! 1PPS, intensity EOM carrying the RF, the optical delay line and the noisy
//! link delay process.

mod field;
mod link;
mod odl;
mod pps;

pub use field::{
    intensity_modulate, intensity_modulate_signal, laser_field, phase_modulate, OpticalField, RfSignalSpec,
    LAMBDA_FORWARD_NM, LAMBDA_RETURN_NM, SPEED_OF_LIGHT,
};
pub use link::{
    fiber_delay, propagate_link, propagate_link_retimed, sample_link_delay, LinkDelaySampler, LinkNoiseProcess,
    ThermalDrift,
};
pub use odl::{odl_apply, odl_apply_retimed, OdlOutput, OdlStage, OdlState, SaturationEvent};
pub use pps::{pps_phase_waveform, PpsWaveform};

use thiserror::Error;

use crate::signal_core::SignalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("sample rate {sample_rate:e} Hz too low, need more than {needed:e} Hz")]
    GridTooCoarse { sample_rate: f64, needed: f64 },
    #[error(transparent)]
    Signal(#[from] SignalError),
}
