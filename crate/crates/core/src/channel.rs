//! BPSK over AWGN with LLR demapping, plus the seed substreams that make
//! every packet's noise independent of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bits::BitVector;
use crate::codec::LlrVector;
use crate::construction::check_rate;
use crate::error::{Error, Result};
use crate::LLR_MAX;

/// Noise standard deviation per real dimension for unit-energy BPSK at the
/// given Eb/N0 (dB) and code rate.
pub fn sigma_from_snr(snr_db: f64, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    if !snr_db.is_finite() {
        return Err(Error::config("snr_db", "must be finite"));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// One SNR operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Eb/N0 in dB.
    pub snr_db: f64,
    pub rate: f64,
    pub sigma: f64,
    /// Master seed for all substreams of a run.
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(snr_db: f64, rate: f64, seed: u64) -> Result<Self> {
        Ok(ChannelParams {
            snr_db,
            rate,
            sigma: sigma_from_snr(snr_db, rate)?,
            seed,
        })
    }

    /// Overrides the noise level, e.g. `0.0` for a noiseless channel.
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::NegativeSigma(sigma));
        }
        self.sigma = sigma;
        Ok(self)
    }
}

/// BPSK mapping: 0 -> +1, 1 -> -1.
pub fn bpsk_modulate(bits: &BitVector) -> Vec<f64> {
    bits.iter().map(|b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// A source of standard normal samples.
pub trait NoiseSource {
    fn standard_normal(&mut self) -> f64;
}

/// Standard normal draws from any `rand` generator.
#[derive(Debug)]
pub struct GaussianNoise<R>(pub R);

impl<R: Rng> NoiseSource for GaussianNoise<R> {
    fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }
}

/// Always returns zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn standard_normal(&mut self) -> f64 {
        0.0
    }
}

/// Adds `sigma`-scaled noise to every symbol in place.
pub fn awgn_in_place(symbols: &mut [f64], sigma: f64, noise: &mut impl NoiseSource) -> Result<()> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(());
    }
    for s in symbols {
        *s += sigma * noise.standard_normal();
    }
    Ok(())
}

pub fn awgn(symbols: &[f64], sigma: f64, noise: &mut impl NoiseSource) -> Result<Vec<f64>> {
    let mut out = symbols.to_vec();
    awgn_in_place(&mut out, sigma, noise)?;
    Ok(out)
}

/// `2y / sigma^2`, clamped to `±LLR_MAX`.
pub fn llr_demap(received: &[f64], sigma: f64) -> Result<LlrVector> {
    if sigma == 0.0 {
        return Err(Error::ZeroSigma);
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::NegativeSigma(sigma));
    }
    let scale = 2.0 / (sigma * sigma);
    LlrVector::new(
        received
            .iter()
            .map(|&y| (scale * y).clamp(-LLR_MAX, LLR_MAX))
            .collect(),
    )
}

/// LLRs for a noiseless channel: the sign of each symbol at full confidence.
pub fn noiseless_llrs(received: &[f64]) -> Result<LlrVector> {
    LlrVector::new(
        received
            .iter()
            .map(|&y| if y < 0.0 { -LLR_MAX } else { LLR_MAX })
            .collect(),
    )
}

/// Identifies one independent random stream within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubstreamId {
    /// Packet `packet` of image `image` at SNR grid index `snr`.
    Packet { image: u64, snr: u64, packet: u64 },
    /// Frame `frame` of a random-payload sweep at SNR grid index `snr`.
    Frame { snr: u64, frame: u64 },
}

impl SubstreamId {
    fn words(self) -> [u64; 4] {
        match self {
            SubstreamId::Packet { image, snr, packet } => [1, image, snr, packet],
            SubstreamId::Frame { snr, frame } => [2, 0, snr, frame],
        }
    }

    /// 64-bit seed mixed statelessly from the master seed and this id.
    pub fn derive_seed(self, master: u64) -> u64 {
        self.words()
            .iter()
            .fold(splitmix64(master), |h, &w| splitmix64(h ^ splitmix64(w)))
    }

    pub fn rng(self, master: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive_seed(master))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
