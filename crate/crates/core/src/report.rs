//! Per-image reports (`report.txt`, `results.csv`) and sweep output
//! (`waterfall.csv`).

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use crate::codec::CheckNode;
use crate::error::{Error, Result};
use crate::link::LinkStats;

/// Everything recorded about one image at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageReport {
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub pixel_count: usize,
    pub channels: usize,
    pub total_bits: usize,
    pub packet_count: usize,
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub design_snr_db: f64,
    pub snr_db: f64,
    pub decoder: CheckNode,
    pub ber: f64,
    pub fer: f64,
    /// `None` when timing is disabled for reproducible output.
    pub elapsed: Option<Duration>,
    pub seed: u64,
}

pub const REPORT_KEYS: [&str; 16] = [
    "image",
    "resolution",
    "pixel_count",
    "channels",
    "total_bits",
    "packet_count",
    "n",
    "k",
    "rate",
    "design_snr_db",
    "snr_db",
    "decoder",
    "ber",
    "fer",
    "elapsed_ms",
    "seed",
];

/// Scientific notation with four significant digits, e.g. `1.234e-3`.
pub fn format_rate(x: f64) -> String {
    format!("{x:.3e}")
}

impl ImageReport {
    /// `(key, value)` pairs in report order; shared by text and CSV output.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let values = [
            self.image.clone(),
            format!("{}x{}", self.width, self.height),
            self.pixel_count.to_string(),
            self.channels.to_string(),
            self.total_bits.to_string(),
            self.packet_count.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.rate.to_string(),
            self.design_snr_db.to_string(),
            self.snr_db.to_string(),
            self.decoder.to_string(),
            format_rate(self.ber),
            format_rate(self.fer),
            self.elapsed
                .map_or_else(|| "n/a".to_string(), |d| d.as_millis().to_string()),
            self.seed.to_string(),
        ];
        REPORT_KEYS.into_iter().zip(values).collect()
    }
}

/// One `key: value` line per field.
pub fn render_report(report: &ImageReport) -> String {
    let mut out = String::new();
    for (key, value) in report.fields() {
        out.push_str(key);
        out.push_str(": ");
        out.push_str(&value);
        out.push('\n');
    }
    out
}

/// Appends a rendered block (plus a blank separator line) to `path`.
pub fn append_report(report: &ImageReport, path: &Path) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut block = render_report(report);
    block.push('\n');
    file.write_all(block.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Appends `row` to a CSV file, writing `header` first if the file is new
/// or empty.
pub fn append_csv_row<S: AsRef<str>>(path: &Path, header: &[&str], row: &[S]) -> Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let empty = file.metadata().map_err(|e| Error::io(path, e))?.len() == 0;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    if empty {
        writer.write_record(header).map_err(csv_err)?;
    }
    writer
        .write_record(row.iter().map(AsRef::as_ref))
        .map_err(csv_err)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn append_csv(report: &ImageReport, path: &Path) -> Result<()> {
    let values: Vec<String> = report.fields().into_iter().map(|(_, v)| v).collect();
    append_csv_row(path, &REPORT_KEYS, &values)
}

pub const WATERFALL_HEADER: [&str; 7] = ["snr_db", "N", "K", "rate", "frames", "ber", "fer"];

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterfallRow {
    pub snr_db: f64,
    pub n: usize,
    pub k: usize,
    pub stats: LinkStats,
}

impl WaterfallRow {
    pub fn values(&self) -> [String; 7] {
        [
            self.snr_db.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            (self.k as f64 / self.n as f64).to_string(),
            self.stats.frames.to_string(),
            format_rate(self.stats.ber()),
            format_rate(self.stats.fer()),
        ]
    }
}

pub fn append_waterfall(row: &WaterfallRow, path: &Path) -> Result<()> {
    append_csv_row(path, &WATERFALL_HEADER, &row.values())
}
