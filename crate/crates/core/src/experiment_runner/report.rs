use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use super::{ReferenceSection, RunnerError, Scenario};

/// One point of a deviation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau_s: f64,
    pub value: f64,
    pub n_terms: usize,
}

/// Headline numbers of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub duration_s: f64,
    pub ticks: u64,
    pub truncated: bool,
    pub saturation_episodes: usize,
    /// Peak-to-peak one-way link delay variation, s.
    pub link_drift_pp_s: f64,
    /// Peak-to-peak remote time offset after settling, s.
    pub remote_offset_pp_s: f64,
    /// Peak-to-peak remote RF phase after settling, rad.
    pub remote_phase_pp_rad: f64,
    /// The same expressed as time at the RF frequency, s.
    pub remote_phase_pp_equiv_s: f64,
    /// `20·log10(link drift p-p / remote offset p-p)`; absent when the
    /// residual is exactly zero.
    pub suppression_ratio_db: Option<f64>,
    pub unity_gain_frequency_hz: Option<f64>,
    pub phase_margin_deg: Option<f64>,
    /// Linear-model suppression at the simulated drift frequency, dB.
    pub model_suppression_at_drift_db: Option<f64>,
    /// Largest `|ω0·offset − phase|` over all ticks, rad.
    pub max_identity_error_rad: f64,
    /// Mean regenerated-pulse latency over the spot windows, s.
    pub pulse_latency_s: Option<f64>,
    /// Largest spread of that latency between spot windows, s.
    pub pulse_latency_spread_s: Option<f64>,
    /// Largest |timestamp with RF − timestamp without RF| over spot windows, s.
    pub cross_modulation_deviation_s: Option<f64>,
    /// Largest waveform-vs-slow-engine round-trip phase difference, rad.
    pub discriminator_crosscheck_rad: Option<f64>,
    pub tic_points: usize,
    pub adev: Vec<CurvePoint>,
    pub tdev: Vec<CurvePoint>,
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub trace_csv: String,
    pub tic_csv: String,
    pub adev_csv: String,
    pub tdev_csv: String,
    pub report_json: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            trace_csv: "trace.csv".into(),
            tic_csv: "tic.csv".into(),
            adev_csv: "adev.csv".into(),
            tdev_csv: "tdev.csv".into(),
            report_json: "report.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub config_hash: String,
    pub seed: u64,
    pub time_compression: f64,
    pub compression_note: String,
    /// Equivalent measurement bandwidth applied to the counter series, Hz.
    pub measurement_bandwidth_hz: f64,
    pub summary: RunSummary,
    /// Published hardware figures for comparison; not simulation targets.
    pub reference: ReferenceSection,
    pub outputs: OutputPaths,
}

/// Report file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Text,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Text => "txt",
        }
    }
}

fn ps(v: f64) -> String {
    format!("{:.4} ps", v * 1e12)
}

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(|| "n/a".to_string(), f)
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let s = &self.summary;
        let mut t = String::new();
        let _ = writeln!(t, "scenario: {}", self.scenario);
        let _ = writeln!(t, "config hash: {}", self.config_hash);
        let _ = writeln!(t, "seed: {}", self.seed);
        let _ = writeln!(t, "time compression: {}", self.compression_note);
        let _ = writeln!(
            t,
            "duration: {} s ({} ticks{})",
            s.duration_s,
            s.ticks,
            if s.truncated { ", truncated" } else { "" }
        );
        let _ = writeln!(t, "p-p drift (link): {}", ps(s.link_drift_pp_s));
        let _ = writeln!(t, "p-p remote time offset: {}", ps(s.remote_offset_pp_s));
        let _ = writeln!(
            t,
            "p-p remote RF phase: {:.6e} rad ({} equivalent)",
            s.remote_phase_pp_rad,
            ps(s.remote_phase_pp_equiv_s)
        );
        let _ = writeln!(t, "suppression ratio: {}", opt(s.suppression_ratio_db, |v| format!("{v:.1} dB")));
        let _ = writeln!(
            t,
            "model suppression at drift frequency: {}",
            opt(s.model_suppression_at_drift_db, |v| format!("{v:.1} dB"))
        );
        let _ = writeln!(t, "loop unity-gain frequency: {}", opt(s.unity_gain_frequency_hz, |v| format!("{v:.3} Hz")));
        let _ = writeln!(t, "phase margin: {}", opt(s.phase_margin_deg, |v| format!("{v:.1} deg")));
        let _ = writeln!(t, "saturation episodes: {}", s.saturation_episodes);
        let _ = writeln!(t, "identity error (offset vs phase): {:.3e} rad", s.max_identity_error_rad);
        let _ = writeln!(t, "pulse latency: {}", opt(s.pulse_latency_s, |v| format!("{:.3} ns", v * 1e9)));
        let _ = writeln!(t, "cross-modulation timestamp deviation: {}", opt(s.cross_modulation_deviation_s, ps));
        let _ = writeln!(
            t,
            "discriminator cross-check: {}",
            opt(s.discriminator_crosscheck_rad, |v| format!("{v:.3e} rad"))
        );
        let _ = writeln!(t, "counter series: {} points, bandwidth {} Hz", s.tic_points, self.measurement_bandwidth_hz);
        for (name, curve) in [("ADEV", &s.adev), ("TDEV", &s.tdev)] {
            for p in curve.iter() {
                let _ = writeln!(t, "{name} tau={} s: {:.4e} ({} terms)", p.tau_s, p.value, p.n_terms);
            }
        }
        let r = &self.reference;
        let _ = writeln!(
            t,
            "reference (hardware, not simulated): ADEV 1 s {:.1e}, 1e4 s {:.1e}; TDEV 1 s {:.1e} s, 1e4 s {:.1e} s",
            r.adev_1s, r.adev_1e4s, r.tdev_1s, r.tdev_1e4s
        );
        t
    }
}

/// Writes the report in `format` to `path`, creating parent directories.
pub fn emit_report(report: &RunReport, format: ReportFormat, path: &Path) -> Result<(), RunnerError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
    }
    let body = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => report.to_text(),
    };
    std::fs::write(path, body).map_err(|e| RunnerError::io(path, e))
}
