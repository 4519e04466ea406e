//! Round-trip stabilization: error signal, PID, two-stage delay actuator,
//! the slow-time loop engine and the sampled-waveform round trip.

mod actuator;
mod engine;
mod model;
mod pid;
mod waveform;

pub use actuator::{actuator_dispatch, ActuatorConfig, ActuatorState, ActuatorUpdate, StageConfig};
pub use engine::{
    delay_to_phase, error_signal, one_way_correction, phase_to_delay, round_trip_phase, simulate_closed_loop,
    LoopConfig, LoopMode, LoopSummary, LoopTrace,
};
pub use model::LoopModel;
pub use pid::{pid_step, PidConfig, PidState};
pub use waveform::{waveform_pps, waveform_round_trip, RoundTrip, WaveformConfig};

use thiserror::Error;

use crate::demodulation::DemodError;
use crate::optics_chain::OpticsError;
use crate::signal_core::SignalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    #[error("{0}")]
    InvalidConfig(String),
    #[error("non-finite loop value {value}; loop halted")]
    NonFiniteError { value: f64 },
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Demod(#[from] DemodError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}
