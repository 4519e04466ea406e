use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use super::RunnerError;
use crate::control_loop::{ActuatorConfig, LoopConfig, LoopMode, PidConfig, StageConfig, WaveformConfig};
use crate::demodulation::{Band, BiasLock, DetectorSpec, MziSpec, RegenConfig};
use crate::optics_chain::{fiber_delay, LinkNoiseProcess, RfSignalSpec, ThermalDrift};

/// The four experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Drifting link, loop open.
    OpenLoop,
    /// Drifting link, loop closed.
    ClosedLoop,
    /// Short fiber, no drift, 1PPS and RF both modulated.
    BackToBackTf,
    /// Short fiber, no drift, 1PPS only.
    BackToBackT,
}

impl Scenario {
    pub fn id(self) -> &'static str {
        match self {
            Scenario::OpenLoop => "open_loop",
            Scenario::ClosedLoop => "closed_loop",
            Scenario::BackToBackTf => "back_to_back_tf",
            Scenario::BackToBackT => "back_to_back_t",
        }
    }

    pub fn is_back_to_back(self) -> bool {
        matches!(self, Scenario::BackToBackTf | Scenario::BackToBackT)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    /// Fiber spool lengths, km.
    pub segments_km: Vec<f64>,
    pub group_index: f64,
    /// Fiber length used by the back-to-back scenarios, m.
    pub back_to_back_m: f64,
    /// Peak-to-peak delay drift, s.
    pub drift_pp: f64,
    /// Uncompressed drift period, s.
    pub drift_period: f64,
    /// s/√s.
    pub random_walk_coeff: f64,
    /// One-sided PSD of white delay jitter, s²/Hz.
    pub jitter_psd: f64,
    pub jitter_interval: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            segments_km: vec![50.0, 60.0],
            group_index: 1.468,
            back_to_back_m: 2.0,
            drift_pp: 1800e-12,
            drift_period: 86_400.0,
            random_walk_coeff: 0.0,
            jitter_psd: 0.0,
            jitter_interval: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSection {
    pub frequency: f64,
    pub phase: f64,
    /// Forward IM depth. The pulse leading edge gates the RF ripple, which
    /// moves the regenerated timestamp by up to about `2m / ω0`.
    pub depth: f64,
    pub return_depth: f64,
}

impl Default for RfSection {
    fn default() -> Self {
        Self { frequency: 1e9, phase: 0.0, depth: 0.05, return_depth: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpsSection {
    pub period: f64,
    /// Duration of the π phase step, s.
    pub width: f64,
    pub threshold: f64,
    pub holdoff: f64,
}

impl Default for PpsSection {
    fn default() -> Self {
        Self { period: 1.0, width: 10e-9, threshold: 0.5, holdoff: 1e-6 }
    }
}

/// PID settings. Gains left unset follow from `bandwidth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidSection {
    pub update_rate: f64,
    /// Design crossover for the derived gains, Hz.
    pub bandwidth: f64,
    pub integrator_limit: f64,
    pub kp: Option<f64>,
    pub ki: Option<f64>,
    pub ki2: Option<f64>,
    pub kd: Option<f64>,
}

impl Default for PidSection {
    fn default() -> Self {
        Self { update_rate: 1000.0, bandwidth: 8.0, integrator_limit: 1e-9, kp: None, ki: None, ki2: None, kd: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorSection {
    pub thermal_bandwidth: f64,
    pub thermal_range: f64,
    pub pzt_bandwidth: f64,
    pub pzt_range: f64,
    pub crossover: f64,
}

impl Default for ActuatorSection {
    fn default() -> Self {
        let a = ActuatorConfig::default();
        Self {
            thermal_bandwidth: a.thermal.bandwidth,
            thermal_range: a.thermal.range,
            pzt_bandwidth: a.pzt.bandwidth,
            pzt_range: a.pzt.range,
            crossover: a.crossover,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub rf_low: f64,
    pub rf_high: f64,
    pub rf_noise_density: f64,
    pub pulse_high: f64,
    pub pulse_noise_density: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let (rf, pulse) = (DetectorSpec::rf_default(), DetectorSpec::pulse_default());
        Self {
            rf_low: rf.band.low,
            rf_high: rf.band.high,
            rf_noise_density: rf.noise_density,
            pulse_high: pulse.band.high,
            pulse_noise_density: pulse.noise_density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MziSection {
    pub path_difference: f64,
    pub bias_lock: BiasLock,
    pub bias: f64,
}

impl Default for MziSection {
    fn default() -> Self {
        Self { path_difference: 10e-9, bias_lock: BiasLock::IdealDestructive, bias: PI }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopSection {
    /// Discriminator dead zone, rad.
    pub dead_zone: f64,
    pub record_interval: f64,
    pub settle_time: f64,
    pub max_saturation_time: f64,
}

impl Default for LoopSection {
    fn default() -> Self {
        Self { dead_zone: 0.0, record_interval: 0.1, settle_time: 10.0, max_saturation_time: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformSection {
    pub sample_rate: f64,
    pub samples: usize,
    pub laser_power: f64,
    /// Number of sampled-waveform spot checks spread over the run.
    pub spot_windows: usize,
}

impl Default for WaveformSection {
    fn default() -> Self {
        Self { sample_rate: 16e9, samples: 4096, laser_power: 1e-3, spot_windows: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    /// Measurement bandwidth of the counter prefilter, Hz.
    pub bandwidth: f64,
    /// RMS timing jitter of pulse regeneration plus counter, s.
    pub tic_jitter: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self { bandwidth: 5.0, tic_jitter: 3e-12 }
    }
}

/// Published hardware figures, carried into reports for side-by-side reading.
/// The simulation has no hardware noise floor and does not reproduce them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSection {
    pub adev_1s: f64,
    pub adev_1e4s: f64,
    pub tdev_1s: f64,
    pub tdev_1e4s: f64,
    pub open_loop_pp: f64,
    pub closed_loop_pp: f64,
    pub cross_modulation: f64,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self {
            adev_1s: 1.7e-14,
            adev_1e4s: 5.9e-17,
            tdev_1s: 1.6e-11,
            tdev_1e4s: 9.1e-13,
            open_loop_pp: 1800e-12,
            closed_loop_pp: 0.2e-12,
            cross_modulation: 10e-12,
        }
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// Simulated duration, s (compressed time).
    pub duration: f64,
    /// Drift periods are divided by this factor.
    #[serde(default = "default_compression")]
    pub time_compression: f64,
    /// Output directory; relative paths resolve against the config file.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub rf: RfSection,
    #[serde(default)]
    pub pps: PpsSection,
    #[serde(default)]
    pub pid: PidSection,
    #[serde(default)]
    pub actuator: ActuatorSection,
    #[serde(default)]
    pub detectors: DetectorSection,
    #[serde(default)]
    pub mzi: MziSection,
    #[serde(default, rename = "loop")]
    pub loop_: LoopSection,
    #[serde(default)]
    pub waveform: WaveformSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub reference: ReferenceSection,
}

fn default_compression() -> f64 {
    10.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ScenarioConfig {
    /// Defaults for `scenario`, running one compressed drift period.
    pub fn defaults(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            duration: 8640.0,
            time_compression: default_compression(),
            output_dir: default_output_dir(),
            link: LinkSection::default(),
            rf: RfSection::default(),
            pps: PpsSection::default(),
            pid: PidSection::default(),
            actuator: ActuatorSection::default(),
            detectors: DetectorSection::default(),
            mzi: MziSection::default(),
            loop_: LoopSection::default(),
            waveform: WaveformSection::default(),
            metrics: MetricsSection::default(),
            reference: ReferenceSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RunnerError> {
        toml::from_str(text).map_err(|e| RunnerError::Config(vec![e.to_string()]))
    }

    /// Reads a config file; a relative `output_dir` is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.output_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output_dir = dir.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form of every simulation input; the
    /// output location is excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Every problem with the config, collected before any simulation starts.
    pub fn validate(&self) -> Result<(), RunnerError> {
        let mut errs = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        need(pos(self.time_compression), format!("time_compression must be positive, got {}", self.time_compression));
        let l = &self.link;
        need(
            !l.segments_km.is_empty() && l.segments_km.iter().all(|&k| pos(k)),
            "link.segments_km needs at least one positive length".into(),
        );
        need(
            pos(l.group_index) && l.group_index >= 1.0,
            format!("link.group_index must be >= 1, got {}", l.group_index),
        );
        need(pos(l.back_to_back_m), format!("link.back_to_back_m must be positive, got {}", l.back_to_back_m));
        need(nonneg(l.drift_pp), format!("link.drift_pp must be non-negative, got {}", l.drift_pp));
        need(pos(l.drift_period), format!("link.drift_period must be positive, got {}", l.drift_period));
        need(nonneg(l.random_walk_coeff), "link.random_walk_coeff must be non-negative".into());
        need(nonneg(l.jitter_psd), "link.jitter_psd must be non-negative".into());
        need(pos(l.jitter_interval), "link.jitter_interval must be positive".into());

        let rf = &self.rf;
        need(pos(rf.frequency), format!("rf.frequency must be positive, got {}", rf.frequency));
        need((0.0..=1.0).contains(&rf.depth), format!("rf.depth must lie in [0, 1], got {}", rf.depth));
        need(
            rf.return_depth > 0.0 && rf.return_depth <= 1.0,
            format!("rf.return_depth must lie in (0, 1], got {}", rf.return_depth),
        );
        need(rf.phase.is_finite(), "rf.phase must be finite".into());

        let p = &self.pps;
        need(pos(p.period), format!("pps.period must be positive, got {}", p.period));
        need(pos(p.width) && p.width < 0.5 * p.period, "pps.width must be positive and under half a period".into());
        need(p.threshold > 0.0 && p.threshold < 1.0, format!("pps.threshold must lie in (0, 1), got {}", p.threshold));
        need(nonneg(p.holdoff), "pps.holdoff must be non-negative".into());

        let w = &self.waveform;
        need(pos(w.laser_power), "waveform.laser_power must be positive".into());
        need(w.samples >= 256, format!("waveform.samples must be at least 256, got {}", w.samples));
        need(
            pos(w.sample_rate) && w.sample_rate > 4.0 * rf.frequency && w.sample_rate > 2.0 * self.detectors.rf_high,
            format!("waveform.sample_rate {} too low for the RF tone and detector", w.sample_rate),
        );
        let m = &self.mzi;
        need(pos(m.path_difference), "mzi.path_difference must be positive".into());
        need(m.bias.is_finite(), "mzi.bias must be finite".into());
        need(self.detectors.pulse_high < 0.5 * w.sample_rate, "detectors.pulse_high must be below Nyquist".into());
        need(pos(self.metrics.bandwidth), "metrics.bandwidth must be positive".into());
        need(nonneg(self.metrics.tic_jitter), "metrics.tic_jitter must be non-negative".into());

        let lp = &self.loop_;
        need(lp.dead_zone >= 0.0 && lp.dead_zone < PI, "loop.dead_zone must lie in [0, π)".into());
        need(pos(lp.record_interval), "loop.record_interval must be positive".into());
        need(nonneg(lp.settle_time), "loop.settle_time must be non-negative".into());
        need(pos(lp.max_saturation_time), "loop.max_saturation_time must be positive".into());
        if pos(lp.record_interval) && pos(p.period) {
            let r = p.period / lp.record_interval;
            need(
                r >= 1.0 && (r - r.round()).abs() < 1e-9 * r,
                "pps.period must be a whole multiple of loop.record_interval".into(),
            );
        }
        need(
            pos(self.duration) && self.duration >= 4.0 * p.period,
            format!("duration must cover at least four pulse periods, got {}", self.duration),
        );

        let mut sub = |r: Result<(), String>| {
            if let Err(e) = r {
                errs.push(e);
            }
        };
        sub(self.pid_config().validate().map_err(|e| format!("pid: {e}")));
        sub(self.actuator_config().validate().map_err(|e| format!("actuator: {e}")));
        sub(self.link_process().validate().map_err(|e| format!("link: {e}")));
        sub(self.rf_detector().validate().map_err(|e| format!("detectors: {e}")));
        sub(self.pulse_detector().validate().map_err(|e| format!("detectors: {e}")));
        if pos(self.duration) && pos(self.pid.update_rate) {
            sub(if self.duration > 10.0 / self.pid.update_rate {
                Ok(())
            } else {
                Err("duration must exceed ten control ticks".into())
            });
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(RunnerError::Config(errs))
        }
    }

    pub fn static_delay(&self) -> f64 {
        if self.scenario.is_back_to_back() {
            fiber_delay(self.link.back_to_back_m, self.link.group_index)
        } else {
            let km: f64 = self.link.segments_km.iter().sum();
            fiber_delay(km * 1e3, self.link.group_index)
        }
    }

    /// Drift period in simulated time.
    pub fn simulated_drift_period(&self) -> f64 {
        self.link.drift_period / self.time_compression
    }

    pub fn link_process(&self) -> LinkNoiseProcess {
        let drifting = !self.scenario.is_back_to_back();
        let l = &self.link;
        LinkNoiseProcess {
            static_delay: self.static_delay(),
            thermal_drift: ThermalDrift {
                amplitude: if drifting { 0.5 * l.drift_pp } else { 0.0 },
                period: self.simulated_drift_period(),
                random_walk_coeff: if drifting { l.random_walk_coeff } else { 0.0 },
            },
            jitter_psd_level: if drifting { l.jitter_psd } else { 0.0 },
            jitter_interval: l.jitter_interval,
            rng_seed: self.seed,
        }
    }

    pub fn pid_config(&self) -> PidConfig {
        let p = &self.pid;
        let base = PidConfig::for_bandwidth(p.bandwidth, p.update_rate, self.rf.frequency);
        PidConfig {
            kp: p.kp.unwrap_or(base.kp),
            ki: p.ki.unwrap_or(base.ki),
            ki2: p.ki2.unwrap_or(base.ki2),
            kd: p.kd.unwrap_or(base.kd),
            update_rate: p.update_rate,
            integrator_limit: p.integrator_limit,
        }
    }

    pub fn actuator_config(&self) -> ActuatorConfig {
        let a = &self.actuator;
        ActuatorConfig {
            thermal: StageConfig { bandwidth: a.thermal_bandwidth, range: a.thermal_range },
            pzt: StageConfig { bandwidth: a.pzt_bandwidth, range: a.pzt_range },
            crossover: a.crossover,
        }
    }

    pub fn loop_mode(&self) -> LoopMode {
        match self.scenario {
            Scenario::ClosedLoop => LoopMode::Closed,
            _ => LoopMode::Open,
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            rf_frequency: self.rf.frequency,
            duration: self.duration,
            mode: self.loop_mode(),
            dead_zone: self.loop_.dead_zone,
            record_interval: self.loop_.record_interval,
            settle_time: self.loop_.settle_time,
            max_saturation_time: self.loop_.max_saturation_time,
        }
    }

    /// RF modulation carried by the forward carrier in this scenario.
    pub fn forward_rf(&self) -> RfSignalSpec {
        let depth = if self.scenario == Scenario::BackToBackT { 0.0 } else { self.rf.depth };
        RfSignalSpec { frequency: self.rf.frequency, phase: self.rf.phase, depth }
    }

    fn rf_detector(&self) -> DetectorSpec {
        let d = &self.detectors;
        DetectorSpec {
            band: Band { low: d.rf_low, high: d.rf_high },
            noise_density: d.rf_noise_density,
            noise_seed: self.seed,
            ..DetectorSpec::rf_default()
        }
    }

    fn pulse_detector(&self) -> DetectorSpec {
        let d = &self.detectors;
        DetectorSpec {
            band: Band { low: 0.0, high: d.pulse_high },
            noise_density: d.pulse_noise_density,
            noise_seed: self.seed,
            ..DetectorSpec::pulse_default()
        }
    }

    pub fn waveform_config(&self) -> WaveformConfig {
        let w = &self.waveform;
        WaveformConfig {
            sample_rate: w.sample_rate,
            samples: w.samples,
            laser_power: w.laser_power,
            rf: RfSignalSpec { frequency: self.rf.frequency, phase: self.rf.phase, depth: self.rf.depth },
            return_depth: self.rf.return_depth,
            rf_detector: self.rf_detector(),
            pulse_detector: self.pulse_detector(),
            mzi: MziSpec {
                path_difference: self.mzi.path_difference,
                bias: self.mzi.bias,
                bias_lock: self.mzi.bias_lock,
            },
            pps_width: self.pps.width,
            regen: RegenConfig { threshold: self.pps.threshold, holdoff: self.pps.holdoff, saturation_level: None },
            ..WaveformConfig::default()
        }
    }
}
