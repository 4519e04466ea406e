mod common;

use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

use tfsim_core::control_loop::{
    delay_to_phase, phase_to_delay, pid_step, round_trip_phase, ActuatorConfig, ActuatorState, PidConfig, PidState,
};
use tfsim_core::demodulation::{mzi_interfere, MziSpec};
use tfsim_core::optics_chain::{
    laser_field, phase_modulate, sample_link_delay, LinkNoiseProcess, ThermalDrift, LAMBDA_FORWARD_NM,
};
use tfsim_core::signal_core::{fractional_delay, tone_phase, unwrap_phase, wrap_phase, Signal, TimeGrid};
use tfsim_core::stability_metrics::{
    adev, gen_power_law_noise, mdev, octave_taus, overlapping_adev, tdev, NoiseKind, PhaseSeries,
};

use common::{adev_by_frequency, adev_nonoverlapping_by_frequency, mdev_by_phase_average, relative};

/// Integers scaled by 2^-40: sums and differences of these stay exact.
fn dyadic_series(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1_000_000i64..1_000_000, len)
        .prop_map(|v| v.into_iter().map(|k| k as f64 * 2f64.powi(-40)).collect())
}

fn curves(x: &PhaseSeries) -> Vec<Vec<f64>> {
    let ta = octave_taus(x.tau0(), x.len(), 2);
    let tm = octave_taus(x.tau0(), x.len(), 3);
    vec![
        overlapping_adev(x, &ta).unwrap().values,
        adev(x, &ta).unwrap().values,
        mdev(x, &tm).unwrap().values,
        tdev(x, &tm).unwrap().values,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrap_lands_in_half_open_interval(phi in -1e6f64..1e6) {
        let w = wrap_phase(phi);
        prop_assert!(w > -PI && w <= PI);
        let k = ((phi - w) / TAU).round();
        prop_assert!((phi - w - k * TAU).abs() <= 1e-9 * phi.abs().max(1.0));
    }

    #[test]
    fn tone_phase_is_a_phase(f in 1.0f64..1e10, t in -1e4f64..1e4) {
        let p = tone_phase(f, t);
        prop_assert!((0.0..TAU).contains(&p));
    }

    #[test]
    fn grid_tone_phase_matches_direct_near_origin(f in 1e6f64..4e9, start in -1e-6f64..1e-6, i in 0usize..4096) {
        let g = TimeGrid::new(16e9, start, 4096).unwrap();
        let d = wrap_phase(g.tone_phase(f, i) - tone_phase(f, g.time(i)));
        prop_assert!(d.abs() < 1e-9);
    }

    #[test]
    fn unwrap_recovers_slow_series(start in -3.0f64..3.0, steps in prop::collection::vec(-3.0f64..3.0, 1..200)) {
        let mut truth = vec![start];
        for s in &steps {
            truth.push(truth.last().unwrap() + s);
        }
        let wrapped: Vec<f64> = truth.iter().map(|&p| wrap_phase(p)).collect();
        let u = unwrap_phase(&wrapped);
        prop_assert!(u.is_clean());
        let shift = truth[0] - u.values[0];
        for (a, b) in truth.iter().zip(&u.values) {
            prop_assert!((a - b - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn delay_phase_round_trip(d in -1e-6f64..1e-6, period in 1e-10f64..1e-8) {
        let back = phase_to_delay(delay_to_phase(d, period), period);
        prop_assert!((back - d).abs() <= 1e-15 * d.abs().max(period));
    }

    #[test]
    fn round_trip_phase_is_twice_the_one_way_phase(t_link in 0.0f64..1e-3, t_odl in -5e-8f64..5e-8) {
        let expect = wrap_phase(2.0 * (tone_phase(1e9, t_link) + tone_phase(1e9, t_odl)));
        prop_assert!(wrap_phase(round_trip_phase(t_link, t_odl, 1e9) - expect).abs() < 1e-12);
    }

    #[test]
    fn link_delay_is_a_pure_function(seed in any::<u64>(), t in 0.0f64..1e5) {
        let p = LinkNoiseProcess {
            static_delay: 5e-4,
            thermal_drift: ThermalDrift { amplitude: 9e-10, period: 8640.0, random_walk_coeff: 1e-13 },
            jitter_psd_level: 1e-27,
            jitter_interval: 1e-3,
            rng_seed: seed,
        };
        prop_assert_eq!(sample_link_delay(&p, t).to_bits(), sample_link_delay(&p, t).to_bits());
    }

    #[test]
    fn integer_delay_is_a_sample_shift(k in 1usize..64, values in prop::collection::vec(-1.0f64..1.0, 256)) {
        let g = TimeGrid::new(1.0, 0.0, values.len()).unwrap();
        let s = Signal::new(g, values.clone()).unwrap();
        let d = fractional_delay(&s, k as f64).unwrap();
        for i in 0..values.len() {
            if d.is_valid(i) {
                prop_assert!((d.samples()[i] - values[i - k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interferometer_output_is_bounded(steps in prop::collection::vec(0.0f64..TAU, 512), tau_samples in 4usize..100) {
        let g = TimeGrid::new(16e9, 0.0, steps.len()).unwrap();
        let f = laser_field(g, 1e-3, 0.0, LAMBDA_FORWARD_NM).unwrap();
        let f = phase_modulate(&f, &Signal::new(g, steps).unwrap()).unwrap();
        let out = mzi_interfere(&f, &MziSpec::ideal(tau_samples as f64 / 16e9)).unwrap();
        for i in 0..out.len() {
            if out.is_valid(i) {
                let v = out.samples()[i];
                prop_assert!((0.0..=1e-3 * (1.0 + 1e-12)).contains(&v));
            }
        }
    }

    #[test]
    fn pid_terms_respect_the_integrator_limit(errors in prop::collection::vec(-10.0f64..10.0, 1..500)) {
        let cfg = PidConfig::for_bandwidth(8.0, 1000.0, 1e9);
        let mut s = PidState::default();
        for e in errors {
            pid_step(&mut s, e, 1e-3, &cfg).unwrap();
            prop_assert!((cfg.ki * s.integral).abs() <= cfg.integrator_limit * (1.0 + 1e-12));
            prop_assert!((cfg.ki2 * s.double_integral).abs() <= cfg.integrator_limit * (1.0 + 1e-12));
        }
    }

    #[test]
    fn actuator_stages_stay_in_range(commands in prop::collection::vec(-1e-7f64..1e-7, 1..300)) {
        let cfg = ActuatorConfig::default();
        let mut a = ActuatorState::new(cfg, 1e-3).unwrap();
        for (i, c) in commands.into_iter().enumerate() {
            let u = a.step(c, i as f64 * 1e-3).unwrap();
            prop_assert!(u.odl.thermal_delay.abs() <= cfg.thermal.range);
            prop_assert!(u.odl.pzt_delay.abs() <= cfg.pzt.range);
        }
    }

    #[test]
    fn deviations_ignore_offset_and_ramp(x in dyadic_series(40..300), a in -1000i64..1000, b in -1000i64..1000) {
        let plain = PhaseSeries::new(1.0, x.clone()).unwrap();
        let shifted: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(k, v)| v + a as f64 * 2f64.powi(-30) + (k as i64 * b) as f64 * 2f64.powi(-40))
            .collect();
        let shifted = PhaseSeries::new(1.0, shifted).unwrap();
        prop_assert_eq!(curves(&plain), curves(&shifted));
    }

    #[test]
    fn deviations_scale_linearly(x in dyadic_series(40..300), p in -8i32..8) {
        let c = 2f64.powi(p);
        let plain = curves(&PhaseSeries::new(1.0, x.clone()).unwrap());
        let scaled = curves(&PhaseSeries::new(1.0, x.iter().map(|v| v * c).collect()).unwrap());
        for (u, v) in plain.iter().zip(&scaled) {
            for (a, b) in u.iter().zip(v) {
                prop_assert!(relative(a * c, *b) < 1e-12);
            }
        }
    }

    #[test]
    fn estimators_match_brute_force(x in prop::collection::vec(-1e-9f64..1e-9, 16..400), tau0 in 0.1f64..10.0) {
        let s = PhaseSeries::new(tau0, x.clone()).unwrap();
        let ta = octave_taus(tau0, x.len(), 2);
        let oa = overlapping_adev(&s, &ta).unwrap();
        let na = adev(&s, &ta).unwrap();
        for (i, &tau) in oa.taus.iter().enumerate() {
            let m = (tau / tau0).round() as usize;
            prop_assert!(relative(oa.values[i], adev_by_frequency(&x, tau0, m)) < 1e-12);
        }
        for (i, &tau) in na.taus.iter().enumerate() {
            let m = (tau / tau0).round() as usize;
            prop_assert!(relative(na.values[i], adev_nonoverlapping_by_frequency(&x, tau0, m)) < 1e-12);
        }
        let md = mdev(&s, &octave_taus(tau0, x.len(), 3)).unwrap();
        for (i, &tau) in md.taus.iter().enumerate() {
            let m = (tau / tau0).round() as usize;
            prop_assert!(relative(md.values[i], mdev_by_phase_average(&x, tau0, m)) < 1e-12);
        }
    }

    #[test]
    fn noise_is_seeded(seed in any::<u64>(), kind in prop::sample::select(NoiseKind::ALL.to_vec())) {
        let a = gen_power_law_noise(kind, 1e-24, 64, 1.0, seed).unwrap();
        let b = gen_power_law_noise(kind, 1e-24, 64, 1.0, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}
