//! Receive chain: photodetectors, the delay-line interferometer that turns
//! 1PPS phase steps into intensity pulses, pulse regeneration and the RF
//! phase discriminator.

mod detector;
mod discriminator;
mod mzi;
mod regen;

pub use detector::{direct_detect, Band, DetectorSpec};
pub use discriminator::{estimate_tone, phase_discriminate, DiscriminatorSpec, PhaseReading, ToneEstimate};
pub use mzi::{mzi_interfere, BiasLock, MziSpec};
pub use regen::{regenerate_pps, PulseEvent, RegenConfig};

use thiserror::Error;

use crate::optics_chain::OpticsError;
use crate::signal_core::SignalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DemodError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("sample rate {sample_rate:e} Hz cannot represent a {band_high:e} Hz detector band")]
    GridTooCoarse { sample_rate: f64, band_high: f64 },
    #[error("grid span {span:e} s too short, need more than {needed:e} s")]
    SpanTooShort { span: f64, needed: f64 },
    #[error("no usable valid samples")]
    NoValidSamples,
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}
