//! Sampled-signal primitives: time grids, signals with validity masks,
//! fractional delay, zero-phase low-pass filtering and phase wrapping.

mod delay;
mod filter;
mod grid;
mod phase;
mod signal;

pub use delay::{delay_retimed, fractional_delay, FractionalDelay, RETIME_QUANTUM};
pub use filter::{butterworth_power_gain, filter_lowpass};
pub use grid::TimeGrid;
pub use phase::{tone_phase, unit_phasor, unwrap_phase, wrap_phase, PhaseUnwrapper, Unwrapped};
pub use signal::{ComplexSignal, RealSignal, Sample, Signal};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("signals live on different grids ({left:?} vs {right:?})")]
    GridMismatch { left: TimeGrid, right: TimeGrid },
    #[error("sample count {got} does not match grid length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("delay {delay:e} s is not smaller than the grid span {span:e} s")]
    DelayOutOfRange { delay: f64, span: f64 },
    #[error("cutoff {cutoff:e} Hz must lie in (0, {nyquist:e}) Hz")]
    CutoffOutOfRange { cutoff: f64, nyquist: f64 },
    #[error("filter order must be at least 1, got {0}")]
    InvalidFilterOrder(usize),
}
