//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use tfsim_core::control_loop::{
    round_trip_phase, simulate_closed_loop, waveform_pps, waveform_round_trip, LoopMode, LoopModel, LoopTrace,
    WaveformConfig,
};
use tfsim_core::demodulation::{mzi_interfere, BiasLock, MziSpec};
use tfsim_core::experiment_runner::{run_scenario, Scenario, ScenarioConfig};
use tfsim_core::optics_chain::{
    intensity_modulate, laser_field, phase_modulate, pps_phase_waveform, OdlState, PpsWaveform, RfSignalSpec,
    LAMBDA_FORWARD_NM,
};
use tfsim_core::rng::keyed_normal;
use tfsim_core::signal_core::{wrap_phase, TimeGrid};
use tfsim_core::stability_metrics::{
    gen_power_law_noise, mdev, octave_taus, overlapping_adev, tdev, NoiseKind, PhaseSeries,
};

use common::{adev_by_frequency, interferometer_literal, mdev_by_phase_average, relative, rng, uniform, wfm_adev};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn check(id: u32, name: &str, budget_s: f64, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let secs = start.elapsed().as_secs_f64();
    let pass = o.pass && secs < budget_s;
    println!("{} {id}. {name}: {}; {secs:.2} s (budget {budget_s} s)", if pass { "PASS" } else { "FAIL" }, o.detail);
    pass
}

/// Fractional cycles of an integer-Hz tone after `t` seconds, exact up to
/// the final conversion: `t` is split into its integer mantissa and binary
/// exponent and the product is reduced in 128-bit integers.
fn cycles_frac(freq_hz: u64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let bits = t.abs().to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let (mant, exp) = if exp_bits == 0 {
        (bits & ((1 << 52) - 1), -1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), exp_bits - 1075)
    };
    let prod = u128::from(freq_hz) * u128::from(mant);
    let frac = if exp >= 0 {
        0.0
    } else {
        let shift = (-exp) as u32;
        assert!(shift < 128, "time too small for this oracle");
        let rem = prod & ((1u128 << shift) - 1);
        rem as f64 / 2f64.powi(shift as i32)
    };
    if t < 0.0 && frac != 0.0 {
        1.0 - frac
    } else {
        frac
    }
}

/// `2ω0·(t_link + t_ODL)` wrapped, with each delay reduced exactly.
fn round_trip_oracle(f_hz: u64, t_link: f64, t_odl: f64) -> f64 {
    wrap_phase(TAU * (cycles_frac(2 * f_hz, t_link) + cycles_frac(2 * f_hz, t_odl)))
}

fn interferometer_oracle() -> Outcome {
    let fs = 16e9;
    let n = 1024;
    let grid = TimeGrid::new(fs, 0.0, n).unwrap();
    let mut r = rng(0x0901);
    let cases = 128;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let f0 = uniform(&mut r, 0.2e9, 4e9);
        let k: usize = r.random_range(8..200);
        let tau = k as f64 / fs;
        let step = uniform(&mut r, 0.0, TAU);
        let bias = uniform(&mut r, 0.0, TAU);
        let rf_phase = uniform(&mut r, 0.0, TAU);
        let power = uniform(&mut r, 1e-4, 1e-2);
        let laser_phase = uniform(&mut r, 0.0, TAU);
        let j: usize = r.random_range(k + 40..n - 2 * k - 40);

        let pps = PpsWaveform::new(vec![j as f64 / fs], tau, step).unwrap();
        let field = laser_field(grid, power, laser_phase, LAMBDA_FORWARD_NM).unwrap();
        let field = phase_modulate(&field, &pps_phase_waveform(&pps, grid)).unwrap();
        let rf = RfSignalSpec { frequency: f0, phase: rf_phase, depth: 1.0 };
        let field = intensity_modulate(&field, &rf).unwrap();
        let mzi = MziSpec { path_difference: tau, bias, bias_lock: BiasLock::FixedValue };
        let out = mzi_interfere(&field, &mzi).unwrap();

        // 1 + sin(x + φ0') written as 1 + cos(x + ε)
        let eps = rf_phase - FRAC_PI_2;
        let phi = |i: usize| if (j..j + k).contains(&i) { step } else { 0.0 };
        let idx: Vec<usize> = (0..n).filter(|&i| out.is_valid(i)).collect();
        let expect: Vec<f64> = idx
            .iter()
            .map(|&i| {
                let t = i as f64 / fs;
                power * interferometer_literal(t, TAU * f0, tau, eps, bias, phi(i + k) - phi(i)) / 2.0
            })
            .collect();
        let scale = expect.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (&i, e) in idx.iter().zip(&expect) {
            worst = worst.max((out.samples()[i] - e).abs() / scale);
        }
    }
    outcome(worst <= 1e-9, format!("max deviation {worst:.2e} of window peak over {cases} cases (tol 1e-9)"))
}

fn cw_extinction() -> Outcome {
    let grid = TimeGrid::new(16e9, 0.0, 2048).unwrap();
    let mzi = MziSpec::ideal(10e-9);
    let k = 160;
    let mut worst = 0.0f64;
    for depth in [0.0, 0.05, 0.5, 1.0] {
        let cw = laser_field(grid, 1e-3, 0.3, LAMBDA_FORWARD_NM).unwrap();
        let cw = intensity_modulate(&cw, &RfSignalSpec { frequency: 1e9, phase: 0.4, depth }).unwrap();
        let out = mzi_interfere(&cw, &mzi).unwrap();
        let env = cw.envelope.samples();
        let valid: Vec<usize> = (0..grid.len()).filter(|&i| out.is_valid(i)).collect();
        let arm_peak = valid.iter().map(|&i| 0.25 * (env[i].norm() + env[i + k].norm()).powi(2)).fold(0.0, f64::max);
        let mean = valid.iter().map(|&i| out.samples()[i]).sum::<f64>() / valid.len() as f64;
        worst = worst.max(mean / arm_peak);
    }
    outcome(worst < 1e-6, format!("mean/arm-sum peak {worst:.2e} over IM depths 0..1 (tol 1e-6)"))
}

fn round_trip_algebra() -> Outcome {
    let cfg = WaveformConfig::default();
    let mut r = rng(0x0903);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t_link = uniform(&mut r, 1e-6, 6e-4);
        let odl = OdlState::new(uniform(&mut r, -50e-9, 50e-9), uniform(&mut r, -20e-12, 20e-12), 50e-9, 20e-12);
        let start = uniform(&mut r, 0.0, 1000.0);
        let rt = waveform_round_trip(&cfg, t_link, &odl, start).unwrap();
        // Δφ_err/2 against ω0·(t_ODL + t_link): both halves are only defined mod π
        let half = wrap_phase(rt.reading.phase - round_trip_oracle(1_000_000_000, t_link, odl.total())) / 2.0;
        worst = worst.max(half.abs());
    }
    outcome(
        worst <= 1e-9,
        format!("max |Δφ_err/2 − ω0·(t_ODL + t_link)| mod π = {worst:.2e} rad over 20 delays (tol 1e-9)"),
    )
}

fn scenario_defaults(scenario: Scenario) -> ScenarioConfig {
    ScenarioConfig::defaults(scenario, 1)
}

fn run_loop(cfg: &ScenarioConfig) -> LoopTrace {
    simulate_closed_loop(&cfg.link_process(), &cfg.pid_config(), &cfg.actuator_config(), &cfg.loop_config()).unwrap()
}

fn loop_suppression() -> Outcome {
    let closed = scenario_defaults(Scenario::ClosedLoop);
    let model = LoopModel::new(closed.pid_config(), closed.actuator_config(), closed.rf.frequency).unwrap();
    let ugb = model.unity_gain_frequency().unwrap();
    let f_drift = 1.0 / closed.simulated_drift_period();
    let omega = TAU * closed.rf.frequency;

    let c = run_loop(&closed).summary;
    let residual = c.remote_phase_pp / omega;
    let o = run_loop(&scenario_defaults(Scenario::OpenLoop)).summary;
    let pass_through = o.remote_offset_pp / o.link_variation_pp;
    let model_db = model.suppression_db(ugb / 10.0);

    let pass = f_drift <= ugb / 10.0
        && (c.link_variation_pp - 1800e-12).abs() < 1e-15
        && residual <= 0.2e-12
        && (pass_through - 1.0).abs() <= 0.01
        && !c.truncated;
    outcome(
        pass,
        format!(
            "drift {:.1} ps p-p at {f_drift:.3e} Hz (UGB {ugb:.3} Hz); closed residual {:.3e} ps p-p (tol 0.2 ps); \
             open pass-through {pass_through:.6} (tol 1%); model suppression at UGB/10 {model_db:.1} dB",
            c.link_variation_pp * 1e12,
            residual * 1e12
        ),
    )
}

fn identity_error(trace: &LoopTrace, omega: f64) -> f64 {
    let recorded = (0..trace.len())
        .map(|i| (omega * trace.remote_time_offset[i] - trace.remote_rf_phase[i]).abs())
        .fold(0.0, f64::max);
    recorded.max(trace.summary.max_identity_error)
}

fn stabilization_identity() -> Outcome {
    let noiseless = scenario_defaults(Scenario::ClosedLoop);
    let mut noisy = noiseless.clone();
    noisy.seed = 7;
    noisy.link.random_walk_coeff = 1e-13;
    noisy.link.jitter_psd = 1e-27;
    let omega = TAU * noiseless.rf.frequency;
    let worst = [noiseless, noisy].iter().map(|c| identity_error(&run_loop(c), omega)).fold(0.0, f64::max);
    outcome(
        worst <= 1e-12,
        format!("max |ω0·offset − phase| {worst:.2e} rad over every tick of two closed-loop runs (tol 1e-12)"),
    )
}

fn first_timestamp(cfg: &WaveformConfig, t_link: f64, odl: &OdlState, with_rf: bool) -> f64 {
    let ev = waveform_pps(cfg, t_link, odl, 1.0, with_rf).unwrap();
    assert_eq!(ev.len(), 1, "one pulse per window");
    ev[0].timestamp
}

fn run_in(cfg: &mut ScenarioConfig, dir: &Path) -> tfsim_core::experiment_runner::RunReport {
    cfg.output_dir = dir.to_path_buf();
    run_scenario(cfg).unwrap()
}

fn pulse_timing() -> Outcome {
    let cfg = WaveformConfig::default();
    let mut r = rng(0x0906);
    let mut step_err = 0.0f64;
    for _ in 0..6 {
        let t_link = uniform(&mut r, 1e-6, 6e-4);
        let odl = OdlState::new(uniform(&mut r, -50e-9, 50e-9), uniform(&mut r, -20e-12, 20e-12), 50e-9, 20e-12);
        let a = first_timestamp(&cfg, t_link, &odl, true);
        let b = first_timestamp(&cfg, t_link + 100e-12, &odl, true);
        step_err = step_err.max((b - a - 100e-12).abs());
    }

    // worst RF phase at the pulse edge
    let odl = OdlState::new(0.0, 0.0, 50e-9, 20e-12);
    let mut phase_worst = 0.0f64;
    for k in 0..16 {
        let mut c = cfg;
        c.rf.phase = k as f64 * TAU / 16.0;
        let d = first_timestamp(&c, 538.7e-6, &odl, true) - first_timestamp(&c, 538.7e-6, &odl, false);
        phase_worst = phase_worst.max(d.abs());
    }

    let dir = tempfile::tempdir().unwrap();
    let tf = run_in(&mut scenario_defaults(Scenario::BackToBackTf), &dir.path().join("tf"));
    let t = run_in(&mut scenario_defaults(Scenario::BackToBackT), &dir.path().join("t"));
    let scenario_dev = (tf.summary.pulse_latency_s.unwrap() - t.summary.pulse_latency_s.unwrap()).abs();

    let pass = step_err <= 1e-12 && scenario_dev <= 10e-12 && phase_worst <= 10e-12;
    outcome(
        pass,
        format!(
            "100 ps step reproduced within {:.3} ps (tol 1 ps); back_to_back_tf vs back_to_back_t {:.3} ps, \
             worst over RF phase {:.3} ps (tol 10 ps)",
            step_err * 1e12,
            scenario_dev * 1e12,
            phase_worst * 1e12
        ),
    )
}

fn normal_series(seed: u64, n: usize) -> Vec<f64> {
    (0..n as u64).map(|i| 1e-9 * keyed_normal(seed, 0x0907, i)).collect()
}

fn metrics_oracles() -> Outcome {
    let mut fails = Vec::new();

    // brute force on 1000 points
    let values = normal_series(3, 1000);
    let x = PhaseSeries::new(1.0, values.clone()).unwrap();
    let a = overlapping_adev(&x, &octave_taus(1.0, 1000, 2)).unwrap();
    let m = mdev(&x, &octave_taus(1.0, 1000, 3)).unwrap();
    let mut worst_brute = 0.0f64;
    for (tau, v) in a.taus.iter().zip(&a.values) {
        worst_brute = worst_brute.max(relative(*v, adev_by_frequency(&values, 1.0, *tau as usize)));
    }
    for (tau, v) in m.taus.iter().zip(&m.values) {
        worst_brute = worst_brute.max(relative(*v, mdev_by_phase_average(&values, 1.0, *tau as usize)));
    }
    if worst_brute > 1e-12 {
        fails.push("brute force");
    }

    // TDEV identity, bit for bit
    let t = tdev(&x, &m.taus).unwrap();
    let identity = t.taus == m.taus
        && t.values.iter().zip(m.taus.iter().zip(&m.values)).all(|(tv, (tau, mv))| *tv == tau * mv / 3f64.sqrt());
    if !identity {
        fails.push("TDEV identity");
    }

    // white FM closed form
    let h0 = 1e-22;
    let n = 1 << 16;
    let w = gen_power_law_noise(NoiseKind::Wfm, h0, n, 1.0, 11).unwrap();
    let taus: Vec<f64> = (0..8).map(|k| (1u64 << k) as f64).collect();
    let wa = overlapping_adev(&w, &taus).unwrap();
    let worst_wfm = wa.taus.iter().zip(&wa.values).map(|(tau, v)| relative(*v, wfm_adev(h0, *tau))).fold(0.0, f64::max);
    if worst_wfm > 0.10 {
        fails.push("WFM");
    }

    // ramp immunity: dyadic data keeps every sum exact
    let q = 2f64.powi(-40);
    let ints: Vec<f64> = (0..1000u64).map(|i| (keyed_normal(5, 0x0970, i) * 1e6).round() * q).collect();
    let ramped: Vec<f64> =
        ints.iter().enumerate().map(|(k, v)| v + 3.0 * 2f64.powi(-20) + k as f64 * 5.0 * 2f64.powi(-30)).collect();
    let plain = PhaseSeries::new(1.0, ints).unwrap();
    let tilted = PhaseSeries::new(1.0, ramped).unwrap();
    let ta = octave_taus(1.0, 1000, 2);
    let tm = octave_taus(1.0, 1000, 3);
    let ramp_exact = overlapping_adev(&plain, &ta).unwrap().values == overlapping_adev(&tilted, &ta).unwrap().values
        && mdev(&plain, &tm).unwrap().values == mdev(&tilted, &tm).unwrap().values
        && tdev(&plain, &tm).unwrap().values == tdev(&tilted, &tm).unwrap().values;
    if !ramp_exact {
        fails.push("ramp immunity");
    }

    outcome(
        fails.is_empty(),
        format!(
            "brute-force rel {worst_brute:.2e} (tol 1e-12); TDEV identity {}; WFM rel {worst_wfm:.3} (tol 0.10); \
             ramp immunity {}{}",
            if identity { "exact" } else { "broken" },
            if ramp_exact { "exact" } else { "broken" },
            if fails.is_empty() { String::new() } else { format!("; failed: {}", fails.join(", ")) }
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let files = ["trace.csv", "tic.csv", "adev.csv", "tdev.csv", "report.json"];
    let mut differing = Vec::new();
    for scenario in [Scenario::OpenLoop, Scenario::ClosedLoop, Scenario::BackToBackTf, Scenario::BackToBackT] {
        let mut cfg = ScenarioConfig::defaults(scenario, 42);
        cfg.link.random_walk_coeff = 1e-13;
        cfg.link.jitter_psd = 1e-27;
        let a = dir.path().join(format!("{scenario}-a"));
        let b = dir.path().join(format!("{scenario}-b"));
        run_in(&mut cfg, &a);
        run_in(&mut cfg, &b);
        for f in files {
            if std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap() {
                differing.push(format!("{scenario}/{f}"));
            }
        }
    }
    let detail = if differing.is_empty() {
        "4 scenarios x 5 files byte-identical across repeated runs".to_string()
    } else {
        format!("differing: {}", differing.join(", "))
    };
    outcome(differing.is_empty(), detail)
}

fn cross_engine() -> Outcome {
    let mut cfg = scenario_defaults(Scenario::ClosedLoop);
    cfg.duration = 2.0;
    cfg.pid.update_rate = 1e4;
    cfg.loop_.record_interval = 1e-4;
    cfg.loop_.settle_time = 0.5;
    cfg.link.drift_period = 200.0;
    cfg.link.random_walk_coeff = 1e-12;
    cfg.link.jitter_psd = 1e-27;
    cfg.link.jitter_interval = 1e-4;
    let trace = run_loop(&cfg);
    assert_eq!(trace.mode, LoopMode::Closed);
    let wcfg = cfg.waveform_config();
    let f = cfg.rf.frequency;

    let first = trace.time.iter().position(|&t| t >= 1.0).unwrap();
    let window: Vec<usize> = (first..trace.len()).take_while(|&i| trace.time[i] < 1.001).collect();
    let mut absolute = 0.0f64;
    let mut referenced = 0.0f64;
    let mut base: Option<(f64, f64)> = None;
    for &i in &window {
        let odl = OdlState::new(trace.t_odl[i], 0.0, f64::MAX, f64::MAX);
        let reading = waveform_round_trip(&wcfg, trace.t_link[i], &odl, trace.time[i]).unwrap().reading.phase;
        absolute = absolute.max(wrap_phase(reading - round_trip_phase(trace.t_link[i], trace.t_odl[i], f)).abs());
        let (r0, e0) = *base.get_or_insert((reading, trace.error[i]));
        referenced = referenced.max(wrap_phase((reading - r0) - (trace.error[i] - e0)).abs());
    }
    let pass = window.len() >= 10 && absolute <= 1e-6 && referenced <= 1e-6;
    outcome(
        pass,
        format!(
            "{} ticks over 1 ms at 10 kHz: absolute {absolute:.2e} rad, lock-referenced {referenced:.2e} rad (tol 1e-6)",
            window.len()
        ),
    )
}

fn main() {
    let results = [
        check(1, "interferometer oracle", 10.0, interferometer_oracle),
        check(2, "CW extinction", 1.0, cw_extinction),
        check(3, "round-trip error algebra", 30.0, round_trip_algebra),
        check(4, "loop suppression", 60.0, loop_suppression),
        check(5, "simultaneous stabilization identity", 60.0, stabilization_identity),
        check(6, "pulse-timing fidelity", 60.0, pulse_timing),
        check(7, "metrics oracles", 60.0, metrics_oracles),
        check(8, "determinism", 60.0, determinism),
        check(9, "cross-engine consistency", 30.0, cross_engine),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
