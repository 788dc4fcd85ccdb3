//! Image serialization, packetization and reconstruction, and the
//! per-image transmission loop.
//!
//! Pixels are serialized row-major from the top-left corner, channels
//! interleaved per pixel (R, G, B), each 8-bit sample most significant bit
//! first. The final packet is zero-padded and the padding is dropped on
//! reconstruction.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};
use rayon::prelude::*;

use crate::bits::BitVector;
use crate::channel::{ChannelParams, GaussianNoise, SubstreamId};
use crate::codec::{CheckNode, ScDecoder};
use crate::construction::PolarCode;
use crate::error::{Error, Result};
use crate::link::{transmit_packet_with, LinkStats, PacketResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorModel {
    Gray,
    Rgb,
}

impl ColorModel {
    pub fn channels(self) -> usize {
        match self {
            ColorModel::Gray => 1,
            ColorModel::Rgb => 3,
        }
    }
}

/// An 8-bit raster held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub color: ColorModel,
    /// Row-major samples, interleaved per pixel.
    pub data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, color: ColorModel, data: Vec<u8>) -> Result<Self> {
        let needed = width as usize * height as usize * color.channels();
        if data.len() != needed {
            return Err(Error::LengthMismatch {
                what: "pixel data",
                expected: needed,
                actual: data.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            color,
            data,
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn payload_bits(&self) -> usize {
        self.data.len() * 8
    }

    pub fn from_dynamic(img: DynamicImage, path: &Path) -> Result<Self> {
        let (width, height) = (img.width(), img.height());
        match img {
            DynamicImage::ImageLuma8(g) => Self::new(width, height, ColorModel::Gray, g.into_raw()),
            DynamicImage::ImageRgb8(c) => Self::new(width, height, ColorModel::Rgb, c.into_raw()),
            other => Err(Error::UnsupportedImage {
                path: path.to_path_buf(),
                reason: format!(
                    "color type {:?}; only 8-bit grayscale and RGB are supported",
                    other.color()
                ),
            }),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_dynamic(img, path)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let img_err = |source| Error::Image {
            path: path.to_path_buf(),
            source,
        };
        let bad = || Error::UnsupportedImage {
            path: path.to_path_buf(),
            reason: "buffer does not match dimensions".into(),
        };
        match self.color {
            ColorModel::Gray => GrayImage::from_raw(self.width, self.height, self.data.clone())
                .ok_or_else(bad)?
                .save_with_format(path, ImageFormat::Png)
                .map_err(img_err),
            ColorModel::Rgb => RgbImage::from_raw(self.width, self.height, self.data.clone())
                .ok_or_else(bad)?
                .save_with_format(path, ImageFormat::Png)
                .map_err(img_err),
        }
    }
}

/// Dimensions and source of an image queued for transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageJob {
    pub path: PathBuf,
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub pixel_count: usize,
}

impl ImageJob {
    pub fn describe(path: impl Into<PathBuf>, image: &RasterImage) -> Self {
        ImageJob {
            path: path.into(),
            width: image.width,
            height: image.height,
            channels: image.color.channels(),
            pixel_count: image.pixel_count(),
        }
    }

    pub fn total_bits(&self) -> usize {
        self.pixel_count * self.channels * 8
    }
}

/// Serialized pixels of one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBitstream {
    pub payload: BitVector,
}

impl ImageBitstream {
    pub fn packet_count(&self, k: usize) -> usize {
        self.payload.len().div_ceil(k)
    }

    pub fn padded_length(&self, k: usize) -> usize {
        self.packet_count(k) * k
    }
}

pub fn image_to_bits(image: &RasterImage) -> ImageBitstream {
    let bits = image
        .data
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |shift| (byte >> shift) & 1))
        .collect::<Vec<u8>>();
    ImageBitstream {
        payload: BitVector::from_bits(bits),
    }
}

/// Splits a stream into consecutive `k`-bit messages, zero-padding the last.
///
/// # Panics
///
/// Panics if `k` is zero.
pub fn packetize(stream: &ImageBitstream, k: usize) -> Vec<BitVector> {
    assert!(k >= 1, "packet size must be positive");
    stream
        .payload
        .as_slice()
        .chunks(k)
        .map(|chunk| {
            let mut bits = chunk.to_vec();
            bits.resize(k, 0);
            BitVector::from_bits(bits)
        })
        .collect()
}

/// Rebuilds an image of the given shape from the leading bits of `payload`.
pub fn bits_to_image(
    payload: &BitVector,
    width: u32,
    height: u32,
    color: ColorModel,
) -> Result<RasterImage> {
    let samples = width as usize * height as usize * color.channels();
    let needed = samples * 8;
    if payload.len() < needed {
        return Err(Error::PayloadTooShort {
            needed,
            actual: payload.len(),
        });
    }
    let data = payload.as_slice()[..needed]
        .chunks_exact(8)
        .map(|byte| byte.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect();
    RasterImage::new(width, height, color, data)
}

#[derive(Debug, Clone)]
pub struct ImageTransmission {
    pub degraded: RasterImage,
    pub stats: LinkStats,
    pub packet_count: usize,
    pub elapsed: Duration,
    /// Per-packet results in packet order.
    pub packets: Vec<PacketResult>,
}

/// Sends every packet of `image` through the link and reconstructs the
/// received image. Packet `p` uses substream
/// `Packet { image: image_index, snr: snr_index, packet: p }`.
pub fn transmit_image(
    image: &RasterImage,
    code: &PolarCode,
    params: &ChannelParams,
    check_node: CheckNode,
    image_index: u64,
    snr_index: u64,
) -> Result<ImageTransmission> {
    let start = Instant::now();
    let stream = image_to_bits(image);
    let packets = packetize(&stream, code.k());

    let results: Vec<PacketResult> = packets
        .par_iter()
        .enumerate()
        .map_init(
            || ScDecoder::new(code, check_node),
            |decoder, (p, msg)| {
                let id = SubstreamId::Packet {
                    image: image_index,
                    snr: snr_index,
                    packet: p as u64,
                };
                let mut noise = GaussianNoise(id.rng(params.seed));
                transmit_packet_with(decoder, code, msg, params, &mut noise)
            },
        )
        .collect::<Result<_>>()?;

    let mut stats = LinkStats::default();
    let mut decoded = BitVector::zeros(0);
    for r in &results {
        stats.accumulate(r, code.k());
        decoded.extend_from(&r.decoded);
    }
    let degraded = bits_to_image(&decoded, image.width, image.height, image.color)?;
    Ok(ImageTransmission {
        degraded,
        stats,
        packet_count: packets.len(),
        elapsed: start.elapsed(),
        packets: results,
    })
}
