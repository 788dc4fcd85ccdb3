//! Run configuration and the two run modes.
//!
//! Image mode walks the SNR grid in the outer loop and the input images
//! (lexicographic filename order) in the inner loop, writing each degraded
//! image to `<output>/snr_<value>/<name>` plus one report block and CSV row.
//! Sweep mode estimates BER/FER with random payloads at each grid point and
//! writes `waterfall.csv`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use log::{debug, info, warn};

use crate::channel::ChannelParams;
use crate::codec::CheckNode;
use crate::construction::{bhattacharyya_profile, dump_construction, PolarCode};
use crate::error::{Error, Result};
use crate::link::{monte_carlo_point, StoppingRule};
use crate::pipeline::{transmit_image, ImageJob, RasterImage};
use crate::report::{append_csv, append_report, append_waterfall, ImageReport, WaterfallRow};

pub const REPORT_FILE: &str = "report.txt";
pub const RESULTS_FILE: &str = "results.csv";
pub const WATERFALL_FILE: &str = "waterfall.csv";
pub const CONSTRUCTION_FILE: &str = "construction.txt";
pub const THREADS_ENV: &str = "POLARLINK_THREADS";

/// Slack when deciding whether the last grid point reaches `max`.
const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Image,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub min_snr_db: f64,
    pub max_snr_db: f64,
    pub snr_step_db: f64,
    pub design_snr_db: f64,
    pub input_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub decoder: CheckNode,
    pub stop: StoppingRule,
    /// Worker cap; `None` lets rayon decide.
    pub threads: Option<usize>,
    /// Record wall-clock time per image. Off gives byte-reproducible reports.
    pub timing: bool,
    pub dump_construction: bool,
    pub verbose: bool,
}

impl RunConfig {
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        PolarCode::build(self.n, self.k, self.design_snr_db)?;
        for (param, v) in [
            ("snr-min", self.min_snr_db),
            ("snr-max", self.max_snr_db),
            ("snr-step", self.snr_step_db),
            ("design-snr", self.design_snr_db),
        ] {
            if !v.is_finite() {
                return Err(Error::config(param, "must be finite"));
            }
        }
        if self.snr_step_db <= 0.0 {
            return Err(Error::config("snr-step", "must be positive"));
        }
        if self.min_snr_db > self.max_snr_db {
            return Err(Error::config("snr-min", "exceeds snr-max"));
        }
        if self.mode == Mode::Image && self.input_dir.is_none() {
            return Err(Error::config("input", "required in image mode"));
        }
        if self.stop.max_frames == 0 {
            return Err(Error::config("max-frames", "must be positive"));
        }
        Ok(())
    }

    pub fn snr_grid(&self) -> Vec<f64> {
        snr_grid(self.min_snr_db, self.max_snr_db, self.snr_step_db)
    }
}

/// `min, min + step, ...` up to and including `max`.
pub fn snr_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let count = ((max - min) / step + GRID_EPS).floor() as usize + 1;
    (0..count)
        .map(|i| ((min + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

fn parse_check_node(s: &str) -> std::result::Result<CheckNode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "polarlink",
    version,
    about = "Send images or random payloads through a polar-coded BPSK/AWGN link",
    allow_negative_numbers = true
)]
struct Args {
    /// `image` transmits every PNG in --input; `sweep` writes a waterfall CSV.
    #[arg(long, value_enum, default_value = "image")]
    mode: Mode,
    /// Code length N (power of two).
    #[arg(long)]
    n: usize,
    /// Information bits per frame K.
    #[arg(long)]
    k: usize,
    /// First Eb/N0 point in dB.
    #[arg(long = "snr-min")]
    snr_min: f64,
    /// Last Eb/N0 point in dB (inclusive).
    #[arg(long = "snr-max")]
    snr_max: f64,
    #[arg(long = "snr-step", default_value_t = 1.0)]
    snr_step: f64,
    /// Eb/N0 in dB used for code construction.
    #[arg(long = "design-snr", default_value_t = 2.0)]
    design_snr: f64,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check-node rule: exact or min_sum.
    #[arg(long, default_value = "exact", value_parser = parse_check_node)]
    decoder: CheckNode,
    #[arg(long = "min-frame-errors", default_value_t = 100)]
    min_frame_errors: u64,
    #[arg(long = "max-frames", default_value_t = 100_000)]
    max_frames: u64,
    /// Write `elapsed_ms: n/a` instead of wall-clock time.
    #[arg(long = "no-timing")]
    no_timing: bool,
    /// Write the reliability profile and frozen set to construction.txt.
    #[arg(long = "dump-construction")]
    dump_construction: bool,
    /// Log every packet's error count.
    #[arg(long, short)]
    verbose: bool,
}

/// Parses command-line arguments (including the program name) and
/// validates them.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, ArgsError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(ArgsError::Clap)?;
    let config = RunConfig {
        mode: args.mode,
        n: args.n,
        k: args.k,
        min_snr_db: args.snr_min,
        max_snr_db: args.snr_max,
        snr_step_db: args.snr_step,
        design_snr_db: args.design_snr,
        input_dir: args.input,
        output_dir: args.output,
        seed: args.seed,
        decoder: args.decoder,
        stop: StoppingRule {
            min_frame_errors: args.min_frame_errors,
            max_frames: args.max_frames,
        },
        threads: None,
        timing: !args.no_timing,
        dump_construction: args.dump_construction,
        verbose: args.verbose,
    };
    config.validate().map_err(ArgsError::Invalid)?;
    Ok(config)
}

#[derive(Debug, thiserror::Error)]
pub enum ArgsError {
    /// Unknown or missing flags, malformed values, `--help`, `--version`.
    #[error("{0}")]
    Clap(clap::Error),
    #[error("{0}")]
    Invalid(Error),
}

/// Reads the worker cap from `POLARLINK_THREADS` (unset or 0 = automatic).
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::config(THREADS_ENV, format!("{v:?} is not a count"))),
        },
    }
}

/// Outcome of an image-mode run.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub outputs: Vec<PathBuf>,
    pub failures: Vec<(PathBuf, Error)>,
}

impl RunSummary {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn prepare_output(config: &RunConfig, stale: &[&str]) -> Result<()> {
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for name in stale {
        let path = out.join(name);
        if path.exists() {
            fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

fn build_code(config: &RunConfig) -> Result<PolarCode> {
    let code = PolarCode::build(config.n, config.k, config.design_snr_db)?;
    if config.dump_construction {
        let profile = bhattacharyya_profile(code.log2_len(), config.design_snr_db, code.rate())?;
        let path = config.output_dir.join(CONSTRUCTION_FILE);
        fs::write(&path, dump_construction(&profile, &code)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(code)
}

/// PNG files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Name of the per-SNR output directory.
pub fn snr_dir_name(snr_db: f64) -> String {
    format!("snr_{snr_db}")
}

pub fn run_image_mode(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let input = config
        .input_dir
        .as_deref()
        .ok_or_else(|| Error::config("input", "required in image mode"))?;
    let images = list_images(input)?;
    if images.is_empty() {
        return Err(Error::config(
            "input",
            format!("no PNG images in {}", input.display()),
        ));
    }
    prepare_output(config, &[REPORT_FILE, RESULTS_FILE])?;
    let code = build_code(config)?;
    let report_path = config.output_dir.join(REPORT_FILE);
    let csv_path = config.output_dir.join(RESULTS_FILE);

    with_pool(config.threads, || -> Result<RunSummary> {
        let mut summary = RunSummary::default();
        for (snr_index, snr_db) in config.snr_grid().into_iter().enumerate() {
            let params = ChannelParams::new(snr_db, code.rate(), config.seed)?;
            let snr_dir = config.output_dir.join(snr_dir_name(snr_db));
            fs::create_dir_all(&snr_dir).map_err(|e| Error::io(&snr_dir, e))?;
            info!("SNR {snr_db} dB: sigma {:.5}", params.sigma);

            for (image_index, path) in images.iter().enumerate() {
                let result = process_image(
                    config,
                    &code,
                    &params,
                    path,
                    image_index as u64,
                    snr_index as u64,
                    &snr_dir,
                    &report_path,
                    &csv_path,
                );
                match result {
                    Ok(out) => summary.outputs.push(out),
                    Err(e) => {
                        warn!("skipping {} at {snr_db} dB: {e}", path.display());
                        summary.failures.push((path.clone(), e));
                    }
                }
            }
        }
        Ok(summary)
    })?
}

#[allow(clippy::too_many_arguments)]
fn process_image(
    config: &RunConfig,
    code: &PolarCode,
    params: &ChannelParams,
    path: &Path,
    image_index: u64,
    snr_index: u64,
    snr_dir: &Path,
    report_path: &Path,
    csv_path: &Path,
) -> Result<PathBuf> {
    let image = RasterImage::load(path)?;
    let job = ImageJob::describe(path, &image);
    let sent = transmit_image(&image, code, params, config.decoder, image_index, snr_index)?;

    let name = path.file_name().expect("listed files have names");
    let out_path = snr_dir.join(name);
    sent.degraded.save_png(&out_path)?;

    if config.verbose {
        for (p, r) in sent.packets.iter().enumerate() {
            debug!(
                "{} snr {} packet {p}: bit_errors {}",
                name.to_string_lossy(),
                params.snr_db,
                r.bit_errors
            );
        }
    }

    let report = ImageReport {
        image: name.to_string_lossy().into_owned(),
        width: job.width,
        height: job.height,
        pixel_count: job.pixel_count,
        channels: job.channels,
        total_bits: job.total_bits(),
        packet_count: sent.packet_count,
        n: code.n(),
        k: code.k(),
        rate: code.rate(),
        design_snr_db: code.design_snr_db(),
        snr_db: params.snr_db,
        decoder: config.decoder,
        ber: sent.stats.ber(),
        fer: sent.stats.fer(),
        elapsed: config.timing.then_some(sent.elapsed),
        seed: config.seed,
    };
    append_report(&report, report_path)?;
    append_csv(&report, csv_path)?;
    info!(
        "{} at {} dB: BER {:.3e}, FER {:.3e}, {} packets",
        report.image, params.snr_db, report.ber, report.fer, report.packet_count
    );
    Ok(out_path)
}

/// Runs one Monte Carlo point per grid SNR and writes `waterfall.csv`.
pub fn run_sweep_mode(config: &RunConfig) -> Result<Vec<WaterfallRow>> {
    config.validate()?;
    prepare_output(config, &[WATERFALL_FILE])?;
    let code = build_code(config)?;
    let path = config.output_dir.join(WATERFALL_FILE);

    with_pool(config.threads, || -> Result<Vec<WaterfallRow>> {
        let mut rows = Vec::new();
        for (snr_index, snr_db) in config.snr_grid().into_iter().enumerate() {
            let params = ChannelParams::new(snr_db, code.rate(), config.seed)?;
            let point = monte_carlo_point(
                &code,
                &params,
                config.decoder,
                config.stop,
                snr_index as u64,
            )?;
            let row = WaterfallRow {
                snr_db,
                n: code.n(),
                k: code.k(),
                stats: point.stats,
            };
            append_waterfall(&row, &path)?;
            info!(
                "{snr_db} dB: {} frames, BER {:.3e}, FER {:.3e} ({:?})",
                point.stats.frames,
                point.stats.ber(),
                point.stats.fer(),
                point.stopped_by
            );
            rows.push(row);
        }
        Ok(rows)
    })?
}
