use serde::{Deserialize, Serialize};

use super::LoopError;
use crate::demodulation::{
    direct_detect, mzi_interfere, phase_discriminate, regenerate_pps, DetectorSpec, DiscriminatorSpec, MziSpec,
    PhaseReading, PulseEvent, RegenConfig,
};
use crate::optics_chain::{
    intensity_modulate, intensity_modulate_signal, laser_field, odl_apply_retimed, phase_modulate, pps_phase_waveform,
    propagate_link_retimed, OdlState, PpsWaveform, RfSignalSpec, SaturationEvent, LAMBDA_FORWARD_NM, LAMBDA_RETURN_NM,
};
use crate::signal_core::{RealSignal, Signal, TimeGrid, RETIME_QUANTUM};

/// Settings of the sampled-waveform engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    pub sample_rate: f64,
    /// Samples per RF round-trip window.
    pub samples: usize,
    /// Launch power of both lasers, W.
    pub laser_power: f64,
    /// Local RF reference and forward intensity modulation.
    pub rf: RfSignalSpec,
    /// Remote re-modulation depth of the return carrier.
    pub return_depth: f64,
    pub rf_detector: DetectorSpec,
    pub pulse_detector: DetectorSpec,
    pub mzi: MziSpec,
    /// Duration of the 1PPS phase step, s.
    pub pps_width: f64,
    pub regen: RegenConfig,
    /// Length of a pulse-regeneration window, s.
    pub pulse_window: f64,
    /// Lead of a pulse window ahead of the expected arrival, s.
    pub pulse_lead: f64,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16e9,
            samples: 4096,
            laser_power: 1e-3,
            rf: RfSignalSpec { frequency: 1e9, phase: 0.0, depth: 0.05 },
            return_depth: 0.5,
            rf_detector: DetectorSpec::rf_default(),
            pulse_detector: DetectorSpec::pulse_default(),
            mzi: MziSpec::ideal(10e-9),
            pps_width: 10e-9,
            regen: RegenConfig::default(),
            pulse_window: 400e-9,
            pulse_lead: 150e-9,
        }
    }
}

/// Signals and reading of one RF round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrip {
    /// `V1`: the local RF reference.
    pub reference: RealSignal,
    /// `V2`: the RF recovered at the remote site.
    pub remote: RealSignal,
    /// `V3`: the RF returned to the local site.
    pub returned: RealSignal,
    /// Lag of `V3` behind `V1`: `2ω0·(t_link + t_ODL)` wrapped.
    pub reading: PhaseReading,
    pub saturation: Vec<SaturationEvent>,
}

fn quantize(t: f64) -> f64 {
    (t / RETIME_QUANTUM).round() * RETIME_QUANTUM
}

/// Round trip of the RF tone through the full sampled chain.
///
/// Forward: CW laser at the forward channel, intensity EOM with the RF,
/// ODL, fiber, RF detection at the remote site. Return: a second laser,
/// intensity-modulated by the recovered RF, back through fiber and ODL to
/// the local RF detector. The returned tone is discriminated against the
/// reference over a window starting at `start`.
pub fn waveform_round_trip(
    cfg: &WaveformConfig,
    t_link: f64,
    odl: &OdlState,
    start: f64,
) -> Result<RoundTrip, LoopError> {
    let grid = TimeGrid::new(cfg.sample_rate, quantize(start), cfg.samples)?;
    let rf = cfg.rf;
    let reference =
        Signal::new(grid, (0..grid.len()).map(|i| (grid.tone_phase(rf.frequency, i) + rf.phase).sin()).collect())?;

    let forward = laser_field(grid, cfg.laser_power, 0.0, LAMBDA_FORWARD_NM)?;
    let forward = intensity_modulate(&forward, &rf)?;
    let out = odl_apply_retimed(&forward, odl)?;
    let mut saturation = out.saturation;
    let at_remote = propagate_link_retimed(&out.field, t_link)?;
    let remote = direct_detect(&at_remote, &cfg.rf_detector)?;

    let back = laser_field(*remote.grid(), cfg.laser_power, 0.0, LAMBDA_RETURN_NM)?;
    let back = intensity_modulate_signal(&back, &remote, cfg.return_depth)?;
    let back = propagate_link_retimed(&back, t_link)?;
    let out = odl_apply_retimed(&back, odl)?;
    saturation.extend(out.saturation);
    let returned = direct_detect(&out.field, &cfg.rf_detector)?;

    let reading = phase_discriminate(&reference, &returned, &DiscriminatorSpec::new(rf.frequency))?;
    Ok(RoundTrip { reference, remote, returned, reading, saturation })
}

/// Regenerated 1PPS events at the remote site for a pulse launched at `epoch`.
///
/// The forward carrier is phase-stepped by the 1PPS and, when `with_rf`,
/// also intensity-modulated by the RF; after ODL and fiber the delay-line
/// interferometer and the pulse detector recover the edge. The window opens
/// `pulse_lead` ahead of the nominal arrival.
pub fn waveform_pps(
    cfg: &WaveformConfig,
    t_link: f64,
    odl: &OdlState,
    epoch: f64,
    with_rf: bool,
) -> Result<Vec<PulseEvent>, LoopError> {
    let n = (cfg.pulse_window * cfg.sample_rate).round() as usize;
    let grid = TimeGrid::new(cfg.sample_rate, quantize(epoch - cfg.pulse_lead), n)?;
    let pps = PpsWaveform::new(vec![epoch], cfg.pps_width, std::f64::consts::PI)?;
    let field = laser_field(grid, cfg.laser_power, 0.0, LAMBDA_FORWARD_NM)?;
    let mut field = phase_modulate(&field, &pps_phase_waveform(&pps, grid))?;
    if with_rf {
        field = intensity_modulate(&field, &cfg.rf)?;
    }
    let field = odl_apply_retimed(&field, odl)?.field;
    let field = propagate_link_retimed(&field, t_link)?;
    let intensity = mzi_interfere(&field, &cfg.mzi)?;
    Ok(regenerate_pps(&intensity, &cfg.pulse_detector, &cfg.regen)?)
}
