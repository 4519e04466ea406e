use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::{emit_report, CurvePoint, OutputPaths, ReportFormat, RunReport, RunSummary, RunnerError, ScenarioConfig};
use crate::control_loop::{
    round_trip_phase, simulate_closed_loop, waveform_pps, waveform_round_trip, LoopModel, LoopTrace,
};
use crate::optics_chain::OdlState;
use crate::rng::keyed_normal;
use crate::signal_core::wrap_phase;
use crate::stability_metrics::{
    octave_taus, overlapping_adev, tdev, write_deviation_csv, write_offset_csv, DeviationCurve, PhaseSeries,
};

const STREAM_TIC: u64 = 0x71c;

// Pulse windows launch at this epoch. PPS epochs are whole seconds and the
// RF tone completes whole cycles per second, so every pulse sees the same
// RF phase and one epoch stands for all.
const SPOT_EPOCH: f64 = 1.0;

fn sim_err(e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Simulation(e.to_string())
}

/// Spot-window results of the sampled-waveform engine.
#[derive(Debug, Default)]
struct SpotChecks {
    latencies: Vec<f64>,
    cross_modulation: Option<f64>,
    discriminator: Option<f64>,
}

fn spot_checks(cfg: &ScenarioConfig, trace: &LoopTrace) -> Result<SpotChecks, RunnerError> {
    let wcfg = cfg.waveform_config();
    let carries_rf = cfg.forward_rf().depth > 0.0;
    let k = cfg.waveform.spot_windows;
    let mut out = SpotChecks::default();
    for j in 0..k {
        let i = (j + 1) * trace.len() / (k + 1);
        let (t, t_link, t_odl) = (trace.time[i], trace.t_link[i], trace.t_odl[i]);
        let odl = OdlState::new(t_odl, 0.0, f64::MAX, f64::MAX);

        if carries_rf {
            let rt = waveform_round_trip(&wcfg, t_link, &odl, t).map_err(sim_err)?;
            let err = wrap_phase(rt.reading.phase - round_trip_phase(t_link, t_odl, cfg.rf.frequency)).abs();
            out.discriminator = Some(out.discriminator.map_or(err, |m: f64| m.max(err)));
        }

        let first_edge = |with_rf: bool| -> Result<f64, RunnerError> {
            let events = waveform_pps(&wcfg, t_link, &odl, SPOT_EPOCH, with_rf).map_err(sim_err)?;
            match events.as_slice() {
                [e] if !e.degraded => Ok(e.timestamp),
                _ => Err(RunnerError::Simulation(format!(
                    "expected one clean regenerated pulse at t = {t} s, got {}",
                    events.len()
                ))),
            }
        };
        let ts = first_edge(carries_rf)?;
        out.latencies.push(ts - (SPOT_EPOCH + t_link + t_odl));
        if carries_rf {
            let dev = (ts - first_edge(false)?).abs();
            out.cross_modulation = Some(out.cross_modulation.map_or(dev, |m: f64| m.max(dev)));
        }
    }
    Ok(out)
}

/// Counter offsets at each PPS epoch: total delay, pulse latency and counter
/// jitter. Offsets are formed directly rather than by differencing absolute
/// timestamps, which would round away sub-ps detail.
fn tic_series(cfg: &ScenarioConfig, trace: &LoopTrace, latency: f64) -> Result<PhaseSeries, RunnerError> {
    let step = (cfg.pps.period / cfg.loop_.record_interval).round() as usize;
    let x: Vec<f64> = (0..trace.len())
        .step_by(step)
        .enumerate()
        .map(|(k, i)| {
            trace.static_delay
                + trace.remote_time_offset[i]
                + latency
                + cfg.metrics.tic_jitter * keyed_normal(cfg.seed, STREAM_TIC, k as u64)
        })
        .collect();
    PhaseSeries::new(cfg.pps.period, x).map_err(sim_err)
}

fn points(c: &DeviationCurve) -> Vec<CurvePoint> {
    (0..c.taus.len()).map(|i| CurvePoint { tau_s: c.taus[i], value: c.values[i], n_terms: c.n_terms[i] }).collect()
}

fn write_err(path: &Path, e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunnerError> {
    File::create(path).map(BufWriter::new).map_err(|e| RunnerError::io(path, e))
}

/// Runs one scenario end to end and writes its CSVs and JSON report into
/// `cfg.output_dir`, which is created if needed.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, RunnerError> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;

    let pid = cfg.pid_config();
    let act = cfg.actuator_config();
    let trace = simulate_closed_loop(&cfg.link_process(), &pid, &act, &cfg.loop_config()).map_err(sim_err)?;
    let model = LoopModel::new(pid, act, cfg.rf.frequency).map_err(sim_err)?;

    let spots = spot_checks(cfg, &trace)?;
    let latency = if spots.latencies.is_empty() {
        None
    } else {
        Some(spots.latencies.iter().sum::<f64>() / spots.latencies.len() as f64)
    };
    let spread = latency.map(|_| {
        let lo = spots.latencies.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spots.latencies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    });

    let tic = tic_series(cfg, &trace, latency.unwrap_or(0.0))?.prefiltered(cfg.metrics.bandwidth).map_err(sim_err)?;
    let adev = overlapping_adev(&tic, &octave_taus(tic.tau0(), tic.len(), 2)).map_err(sim_err)?;
    let tdev = tdev(&tic, &octave_taus(tic.tau0(), tic.len(), 3)).map_err(sim_err)?;

    let outputs = OutputPaths::default();
    let p = dir.join(&outputs.trace_csv);
    trace.write_csv(create(&p)?).map_err(|e| write_err(&p, e))?;
    let p = dir.join(&outputs.tic_csv);
    write_offset_csv(&tic, create(&p)?).map_err(|e| write_err(&p, e))?;
    let p = dir.join(&outputs.adev_csv);
    write_deviation_csv(&adev, create(&p)?).map_err(|e| write_err(&p, e))?;
    let p = dir.join(&outputs.tdev_csv);
    write_deviation_csv(&tdev, create(&p)?).map_err(|e| write_err(&p, e))?;

    let s = &trace.summary;
    let omega = TAU * cfg.rf.frequency;
    let drift_frequency = 1.0 / cfg.simulated_drift_period();
    let summary = RunSummary {
        duration_s: s.ticks as f64 * trace.tick_interval,
        ticks: s.ticks,
        truncated: s.truncated,
        saturation_episodes: trace.saturation_events.len(),
        link_drift_pp_s: s.link_variation_pp,
        remote_offset_pp_s: s.remote_offset_pp,
        remote_phase_pp_rad: s.remote_phase_pp,
        remote_phase_pp_equiv_s: s.remote_phase_pp / omega,
        suppression_ratio_db: (s.remote_offset_pp > 0.0 && s.link_variation_pp > 0.0)
            .then(|| 20.0 * (s.link_variation_pp / s.remote_offset_pp).log10()),
        unity_gain_frequency_hz: model.unity_gain_frequency(),
        phase_margin_deg: model.phase_margin_deg(),
        model_suppression_at_drift_db: (drift_frequency < 0.5 * pid.update_rate)
            .then(|| model.suppression_db(drift_frequency))
            .filter(|v| v.is_finite()),
        max_identity_error_rad: s.max_identity_error,
        pulse_latency_s: latency,
        pulse_latency_spread_s: spread,
        cross_modulation_deviation_s: spots.cross_modulation,
        discriminator_crosscheck_rad: spots.discriminator,
        tic_points: tic.len(),
        adev: points(&adev),
        tdev: points(&tdev),
    };
    let report = RunReport {
        scenario: cfg.scenario,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        time_compression: cfg.time_compression,
        compression_note: format!(
            "drift period {} s simulated as {} s (factor {}); loop bandwidth not scaled, so simulated suppression \
             is a lower bound on the uncompressed case",
            cfg.link.drift_period,
            cfg.simulated_drift_period(),
            cfg.time_compression
        ),
        measurement_bandwidth_hz: cfg.metrics.bandwidth,
        summary,
        reference: cfg.reference,
        outputs,
    };
    emit_report(&report, ReportFormat::Json, &dir.join(&report.outputs.report_json))?;
    Ok(report)
}
