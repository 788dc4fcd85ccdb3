//! Independent oracles shared by the integration tests. Nothing here calls
//! the encoder, decoder or pipeline under test.
#![allow(dead_code)]

use std::path::Path;

use image::{GrayImage, ImageFormat, RgbImage};
use polarlink::channel::SubstreamId;
use polarlink::pipeline::{ColorModel, RasterImage};
use polarlink::PolarCode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `[[1,0],[1,1]]^{(x)n}` built by repeated Kronecker products.
pub fn kron_generator(n: u32) -> Vec<Vec<u8>> {
    let kernel = [[1u8, 0], [1, 1]];
    let mut g = vec![vec![1u8]];
    for _ in 0..n {
        let size = g.len();
        let mut next = vec![vec![0u8; 2 * size]; 2 * size];
        for (bi, krow) in kernel.iter().enumerate() {
            for (bj, &kv) in krow.iter().enumerate() {
                for i in 0..size {
                    for j in 0..size {
                        next[bi * size + i][bj * size + j] = kv & g[i][j];
                    }
                }
            }
        }
        g = next;
    }
    g
}

/// `u * G` over GF(2).
pub fn matrix_encode(u: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
    let n = g.len();
    assert_eq!(u.len(), n);
    (0..n)
        .map(|j| (0..n).fold(0u8, |acc, i| acc ^ (u[i] & g[i][j])))
        .collect()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Sequential MAP decisions: for each `i`, `P(u_i | y, u_0..u_{i-1})` is
/// obtained by summing the channel likelihood over every completion of
/// `u_{i+1..}`. Frozen positions are forced to zero. Returns `u_hat`.
pub fn sequential_posterior_decode(llrs: &[f64], frozen: &[bool]) -> Vec<u8> {
    let n = llrs.len();
    let log2 = n.trailing_zeros();
    let g = kron_generator(log2);
    let log_lik = |u: &[u8]| -> f64 {
        matrix_encode(u, &g)
            .iter()
            .zip(llrs)
            .map(|(&x, &l)| if x == 0 { l / 2.0 } else { -l / 2.0 })
            .sum()
    };
    let mut u_hat = vec![0u8; n];
    for i in 0..n {
        let rest = n - i - 1;
        let mut per_bit = [Vec::new(), Vec::new()];
        for (b, terms) in per_bit.iter_mut().enumerate() {
            for tail in 0..(1usize << rest) {
                let mut u = u_hat.clone();
                u[i] = b as u8;
                for t in 0..rest {
                    u[i + 1 + t] = ((tail >> t) & 1) as u8;
                }
                terms.push(log_lik(&u));
            }
        }
        let llr = log_sum_exp(&per_bit[0]) - log_sum_exp(&per_bit[1]);
        u_hat[i] = if frozen[i] { 0 } else { (llr < 0.0) as u8 };
    }
    u_hat
}

/// Straight-line image transmission: serialize, then per packet draw the
/// noise from the packet substream, encode with the explicit generator,
/// demap, decode with the posterior oracle, and deserialize.
pub fn reference_transmit_image(
    image: &RasterImage,
    code: &PolarCode,
    sigma: f64,
    seed: u64,
    image_index: u64,
    snr_index: u64,
) -> (Vec<u8>, u64, u64) {
    let n = code.n();
    let k = code.k();
    let g = kron_generator(code.log2_len());
    let mut bits = Vec::new();
    for &byte in &image.data {
        for shift in (0..8).rev() {
            bits.push((byte >> shift) & 1);
        }
    }
    let payload_len = bits.len();
    let packets = payload_len.div_ceil(k);
    bits.resize(packets * k, 0);

    let frozen: Vec<bool> = (0..n).map(|i| !code.info_set().contains(&i)).collect();
    let mut decoded_bits = Vec::with_capacity(bits.len());
    let (mut bit_errors, mut frame_errors) = (0u64, 0u64);
    for p in 0..packets {
        let msg = &bits[p * k..(p + 1) * k];
        let mut u = vec![0u8; n];
        for (&pos, &b) in code.info_set().iter().zip(msg) {
            u[pos] = b;
        }
        let x = matrix_encode(&u, &g);
        let mut rng = SubstreamId::Packet {
            image: image_index,
            snr: snr_index,
            packet: p as u64,
        }
        .rng(seed);
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| {
                let s = if b == 0 { 1.0 } else { -1.0 };
                let z: f64 = rng.sample(StandardNormal);
                let y = s + sigma * z;
                (2.0 * y / (sigma * sigma)).clamp(-40.0, 40.0)
            })
            .collect();
        let u_hat = sequential_posterior_decode(&llrs, &frozen);
        let est: Vec<u8> = code.info_set().iter().map(|&i| u_hat[i]).collect();
        let errs = est.iter().zip(msg).filter(|(a, b)| a != b).count() as u64;
        bit_errors += errs;
        frame_errors += (errs > 0) as u64;
        decoded_bits.extend(est);
    }
    let data = decoded_bits[..payload_len]
        .chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| acc * 2 + b))
        .collect();
    (data, bit_errors, frame_errors)
}

/// A blocky label-map-like test image.
pub fn synthetic_map(width: u32, height: u32, color: ColorModel, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let palette: Vec<[u8; 3]> = (0..6).map(|_| rng.random()).collect();
    let mut data = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let class = ((x / 7 + y / 5) as usize + (x * y / 97) as usize) % palette.len();
            match color {
                ColorModel::Gray => data.push(palette[class][0]),
                ColorModel::Rgb => data.extend_from_slice(&palette[class]),
            }
        }
    }
    RasterImage::new(width, height, color, data).unwrap()
}

/// Writes a PNG with the `image` crate directly.
pub fn write_png(image: &RasterImage, path: &Path) {
    match image.color {
        ColorModel::Gray => GrayImage::from_raw(image.width, image.height, image.data.clone())
            .unwrap()
            .save_with_format(path, ImageFormat::Png)
            .unwrap(),
        ColorModel::Rgb => RgbImage::from_raw(image.width, image.height, image.data.clone())
            .unwrap()
            .save_with_format(path, ImageFormat::Png)
            .unwrap(),
    }
}

pub fn read_pixels(path: &Path) -> (u32, u32, Vec<u8>) {
    let img = image::open(path).unwrap();
    (img.width(), img.height(), img.into_bytes())
}
