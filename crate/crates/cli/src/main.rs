//! `tfsim`: run scenarios, batch them, and evaluate or synthesize time-offset series.

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tfsim_core::experiment_runner::{emit_report, run_scenario, ReportFormat, RunReport, RunnerError, ScenarioConfig};
use tfsim_core::stability_metrics::{
    gen_power_law_noise, octave_taus, overlapping_adev, read_offset_csv, tdev, write_deviation_csv, write_offset_csv,
    DeviationCurve, MetricsError, NoiseKind,
};

#[derive(Parser)]
#[command(name = "tfsim", version, about = "Fiber time and RF frequency transfer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (run, batch, metrics) or file (noise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a TOML config.
    Run { config: PathBuf },
    /// Run every *.toml config in a directory in parallel.
    Batch { dir: PathBuf },
    /// ADEV and TDEV of a time_s,offset_s CSV.
    Metrics {
        csv: PathBuf,
        /// Single-pole prefilter bandwidth, Hz.
        #[arg(long)]
        bandwidth: Option<f64>,
    },
    /// Synthesize power-law noise as a time_s,offset_s CSV.
    Noise {
        /// WPM, FPM, WFM, FFM or RWFM.
        kind: String,
        /// h_α of S_y(f) = h_α·f^α.
        level: f64,
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        tau0: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Text => ReportFormat::Text,
        }
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<RunnerError> for Failure {
    fn from(e: RunnerError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

fn metrics_failure(e: MetricsError) -> Failure {
    Failure { code: 3, message: e.to_string() }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure { code: 1, message: format!("{}: {e}", path.display()) }
}

fn load(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ScenarioConfig, RunnerError> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    Ok(cfg)
}

fn finish(report: &RunReport, cfg: &ScenarioConfig, format: Format) -> Result<String, RunnerError> {
    let format = ReportFormat::from(format);
    if format == ReportFormat::Text {
        emit_report(report, format, &cfg.output_dir.join("report.txt"))?;
    }
    Ok(match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => report.to_text(),
    })
}

fn run(cli: &Cli, config: &Path) -> Result<(), Failure> {
    let cfg = load(config, cli.seed, cli.out.clone())?;
    let report = run_scenario(&cfg)?;
    print!("{}", finish(&report, &cfg, cli.format)?);
    Ok(())
}

fn batch(cli: &Cli, dir: &Path) -> Result<(), Failure> {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_failure(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    if configs.is_empty() {
        return Err(Failure { code: 3, message: format!("{}: no .toml configs found", dir.display()) });
    }
    // load and validate all before running any
    let mut loaded = Vec::new();
    for path in &configs {
        let stem = path.file_stem().unwrap_or_default();
        let out = cli.out.as_ref().map(|o| o.join(stem));
        let cfg = load(path, cli.seed, out)?;
        cfg.validate().map_err(|e| Failure { code: 3, message: format!("{}: {e}", path.display()) })?;
        loaded.push((path, cfg));
    }
    let results: Vec<_> = loaded
        .par_iter()
        .map(|(path, cfg)| (path, run_scenario(cfg).and_then(|r| finish(&r, cfg, cli.format))))
        .collect();
    let mut worst: Option<Failure> = None;
    for (path, r) in results {
        match r {
            Ok(body) => {
                println!("== {}", path.display());
                print!("{body}");
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                worst.get_or_insert(Failure::from(e));
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn print_curve(out: &mut impl Write, name: &str, c: &DeviationCurve) -> io::Result<()> {
    for i in 0..c.taus.len() {
        writeln!(out, "{name}\t{:e}\t{:e}\t{}", c.taus[i], c.values[i], c.n_terms[i])?;
    }
    for o in &c.omitted {
        writeln!(out, "{name}\t{:e}\tomitted: {}", o.tau, o.reason)?;
    }
    Ok(())
}

fn metrics(cli: &Cli, csv: &Path, bandwidth: Option<f64>) -> Result<(), Failure> {
    let file = File::open(csv).map_err(|e| io_failure(csv, e))?;
    let mut x = read_offset_csv(file).map_err(metrics_failure)?;
    if x.gap_count() > 0 {
        x = x.gap_tolerant();
    }
    if let Some(b) = bandwidth {
        x = x.prefiltered(b).map_err(metrics_failure)?;
    }
    let adev = overlapping_adev(&x, &octave_taus(x.tau0(), x.len(), 2)).map_err(metrics_failure)?;
    let tdev = tdev(&x, &octave_taus(x.tau0(), x.len(), 3)).map_err(metrics_failure)?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        for (name, c) in [("adev.csv", &adev), ("tdev.csv", &tdev)] {
            let p = dir.join(name);
            let f = File::create(&p).map_err(|e| io_failure(&p, e))?;
            write_deviation_csv(c, BufWriter::new(f)).map_err(|e| io_failure(&p, e))?;
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let body = match cli.format {
        Format::Json => {
            let json = serde_json::json!({ "adev": adev, "tdev": tdev });
            writeln!(out, "{}", serde_json::to_string_pretty(&json).expect("curves serialize"))
        }
        Format::Text => writeln!(out, "kind\ttau_s\tvalue\tn_terms")
            .and_then(|_| print_curve(&mut out, "ADEV", &adev))
            .and_then(|_| print_curve(&mut out, "TDEV", &tdev)),
    };
    body.map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn noise(cli: &Cli, kind: &str, level: f64, n: usize, tau0: f64) -> Result<(), Failure> {
    let kind: NoiseKind = kind.parse().map_err(metrics_failure)?;
    let x = gen_power_law_noise(kind, level, n, tau0, cli.seed.unwrap_or(0)).map_err(metrics_failure)?;
    match &cli.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| io_failure(path, e))?;
            write_offset_csv(&x, BufWriter::new(f)).map_err(|e| io_failure(path, e))
        }
        None => write_offset_csv(&x, io::stdout().lock()).map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Batch { dir } => batch(&cli, dir),
        Command::Metrics { csv, bandwidth } => metrics(&cli, csv, *bandwidth),
        Command::Noise { kind, level, n, tau0 } => noise(&cli, kind, *level, *n, *tau0),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tfsim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
