//! Deterministic simulator for joint 1PPS and RF transfer over a single
//! optical wavelength with round-trip delay stabilization.
//!
//! The crate is layered bottom-up:
//!
//! * [`signal_core`]: sampled signals, fractional delay, filtering, phase wrapping.
//! * [`optics_chain`]: laser, phase and intensity modulation, fiber link and ODL.
//! * [`demodulation`]: direct detection, delay interferometer, pulse regeneration,
//!   RF phase discrimination.
//! * [`control_loop`]: PID, two-stage actuator, the slow-time loop engine and the
//!   GHz-sampled waveform engine.
//! * [`stability_metrics`]: ADEV/MDEV/TDEV, power-law noise synthesis, TIC series.
//! * [`experiment_runner`]: configuration, scenarios and reports.

pub mod control_loop;
pub mod demodulation;
pub mod experiment_runner;
pub mod optics_chain;
pub mod rng;
pub mod signal_core;
pub mod stability_metrics;
