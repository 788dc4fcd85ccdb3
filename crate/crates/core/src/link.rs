//! The per-packet transmit/receive chain and its error accounting.

use rand::Rng;
use rayon::prelude::*;

use crate::bits::BitVector;
use crate::channel::{
    awgn_in_place, bpsk_modulate, llr_demap, noiseless_llrs, ChannelParams, GaussianNoise,
    NoiseSource, SubstreamId,
};
use crate::codec::{encode, CheckNode, ScDecoder};
use crate::construction::PolarCode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketResult {
    pub decoded: BitVector,
    pub bit_errors: usize,
    pub frame_error: bool,
}

impl PacketResult {
    fn compare(msg: &BitVector, decoded: BitVector) -> Self {
        let bit_errors = msg.hamming_distance(&decoded);
        PacketResult {
            decoded,
            bit_errors,
            frame_error: bit_errors > 0,
        }
    }
}

/// Cumulative bit and frame error counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkStats {
    pub frames: u64,
    pub payload_bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
}

impl LinkStats {
    pub fn accumulate(&mut self, result: &PacketResult, k: usize) {
        self.frames += 1;
        self.payload_bits += k as u64;
        self.bit_errors += result.bit_errors as u64;
        self.frame_errors += result.frame_error as u64;
    }

    pub fn merge(&mut self, other: &LinkStats) {
        self.frames += other.frames;
        self.payload_bits += other.payload_bits;
        self.bit_errors += other.bit_errors;
        self.frame_errors += other.frame_errors;
    }

    pub fn ber(&self) -> f64 {
        if self.payload_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.payload_bits as f64
        }
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }
}

/// Runs encode -> BPSK -> AWGN -> demap -> SC decode with the given noise.
///
/// A zero `sigma` bypasses demapping and feeds saturated hard LLRs.
pub fn transmit_packet_with(
    decoder: &mut ScDecoder<'_>,
    code: &PolarCode,
    msg: &BitVector,
    params: &ChannelParams,
    noise: &mut impl NoiseSource,
) -> Result<PacketResult> {
    let x = encode(code, msg)?;
    let mut symbols = bpsk_modulate(&x);
    awgn_in_place(&mut symbols, params.sigma, noise)?;
    receive_packet(decoder, msg, &symbols, params.sigma)
}

/// Demaps and decodes already-received symbols, scoring against `msg`.
pub fn receive_packet(
    decoder: &mut ScDecoder<'_>,
    msg: &BitVector,
    received: &[f64],
    sigma: f64,
) -> Result<PacketResult> {
    let llrs = if sigma == 0.0 {
        noiseless_llrs(received)?
    } else {
        llr_demap(received, sigma)?
    };
    let decoded = decoder.decode(&llrs)?.msg;
    if decoded.len() != msg.len() {
        return Err(Error::LengthMismatch {
            what: "message",
            expected: decoded.len(),
            actual: msg.len(),
        });
    }
    Ok(PacketResult::compare(msg, decoded))
}

/// Transmits one packet with noise from the substream `id` of `params.seed`.
pub fn transmit_packet(
    code: &PolarCode,
    msg: &BitVector,
    params: &ChannelParams,
    check_node: CheckNode,
    id: SubstreamId,
) -> Result<PacketResult> {
    let mut decoder = ScDecoder::new(code, check_node);
    let mut noise = GaussianNoise(id.rng(params.seed));
    transmit_packet_with(&mut decoder, code, msg, params, &mut noise)
}

/// When to stop a Monte Carlo point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoppingRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            min_frame_errors: 100,
            max_frames: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FrameErrors,
    MaxFrames,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub stats: LinkStats,
    pub stopped_by: StopReason,
}

const FRAMES_PER_BATCH: u64 = 512;

/// One random-payload frame on substream `Frame { snr: snr_index, frame }`.
/// The message is drawn first, then the channel noise, from the same stream.
pub fn random_frame(
    decoder: &mut ScDecoder<'_>,
    code: &PolarCode,
    params: &ChannelParams,
    snr_index: u64,
    frame: u64,
) -> Result<PacketResult> {
    let mut rng = SubstreamId::Frame {
        snr: snr_index,
        frame,
    }
    .rng(params.seed);
    let msg: BitVector = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
    transmit_packet_with(decoder, code, &msg, params, &mut GaussianNoise(rng))
}

/// Estimates BER/FER at one SNR point with uniformly random messages.
///
/// Frames are simulated in parallel batches but counted strictly in frame
/// order, so the result does not depend on the number of worker threads.
pub fn monte_carlo_point(
    code: &PolarCode,
    params: &ChannelParams,
    check_node: CheckNode,
    stop: StoppingRule,
    snr_index: u64,
) -> Result<PointResult> {
    let mut stats = LinkStats::default();
    let mut next = 0u64;
    while next < stop.max_frames {
        if stop.min_frame_errors > 0 && stats.frame_errors >= stop.min_frame_errors {
            return Ok(PointResult {
                stats,
                stopped_by: StopReason::FrameErrors,
            });
        }
        let end = (next + FRAMES_PER_BATCH).min(stop.max_frames);
        let batch: Vec<(usize, bool)> = (next..end)
            .into_par_iter()
            .map_init(
                || ScDecoder::new(code, check_node),
                |dec, frame| {
                    random_frame(dec, code, params, snr_index, frame)
                        .map(|r| (r.bit_errors, r.frame_error))
                },
            )
            .collect::<Result<_>>()?;
        for (bit_errors, frame_error) in batch {
            stats.frames += 1;
            stats.payload_bits += code.k() as u64;
            stats.bit_errors += bit_errors as u64;
            stats.frame_errors += frame_error as u64;
            if stop.min_frame_errors > 0 && stats.frame_errors >= stop.min_frame_errors {
                return Ok(PointResult {
                    stats,
                    stopped_by: StopReason::FrameErrors,
                });
            }
        }
        next = end;
    }
    Ok(PointResult {
        stats,
        stopped_by: StopReason::MaxFrames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ZeroNoise;
    use rand::SeedableRng;

    fn random_msg(k: usize, seed: u64) -> BitVector {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..k).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn high_snr_is_error_free() {
        let code = PolarCode::build(64, 32, 2.0).unwrap();
        let params = ChannelParams::new(100.0, code.rate(), 5).unwrap();
        for p in 0..20 {
            let msg = random_msg(32, p);
            let id = SubstreamId::Packet { image: 0, snr: 0, packet: p };
            let r = transmit_packet(&code, &msg, &params, CheckNode::Exact, id).unwrap();
            assert_eq!(r.decoded, msg);
            assert_eq!(r.bit_errors, 0);
            assert!(!r.frame_error);
        }
    }

    #[test]
    fn zero_noise_stub_matches_noiseless() {
        let code = PolarCode::build(32, 20, 2.0).unwrap();
        let params = ChannelParams::new(-5.0, code.rate(), 0).unwrap();
        let mut dec = ScDecoder::new(&code, CheckNode::MinSum);
        for s in 0..10 {
            let msg = random_msg(20, s);
            let r = transmit_packet_with(&mut dec, &code, &msg, &params, &mut ZeroNoise).unwrap();
            assert_eq!(r.decoded, msg);
            let silent = params.with_sigma(0.0).unwrap();
            let r0 = transmit_packet_with(&mut dec, &code, &msg, &silent, &mut ZeroNoise).unwrap();
            assert_eq!(r0, r);
        }
    }

    #[test]
    fn stubbed_received_symbols() {
        let profile = crate::construction::ReliabilityProfile {
            design_snr_db: 0.0,
            z: vec![0.75, 0.25],
        };
        let code = PolarCode::from_profile(&profile, 2).unwrap();
        let mut dec = ScDecoder::new(&code, CheckNode::MinSum);
        let msg = BitVector::from_bits(vec![0, 1]);
        let r = receive_packet(&mut dec, &msg, &[0.5, 1.5], 1.0).unwrap();
        assert_eq!(r.decoded.as_slice(), &[0, 0]);
        assert_eq!(r.bit_errors, 1);
        assert!(r.frame_error);
    }

    #[test]
    fn accumulate_arithmetic() {
        let clean = PacketResult {
            decoded: BitVector::zeros(4),
            bit_errors: 0,
            frame_error: false,
        };
        let mut s = LinkStats::default();
        s.accumulate(&clean, 4);
        assert_eq!((s.ber(), s.fer()), (0.0, 0.0));

        let three = PacketResult {
            decoded: BitVector::zeros(250),
            bit_errors: 3,
            frame_error: true,
        };
        let mut s = LinkStats::default();
        s.accumulate(&three, 250);
        assert!((s.ber() - 0.012).abs() < 1e-15);
        assert_eq!(s.fer(), 1.0);

        let one = PacketResult {
            decoded: BitVector::zeros(4),
            bit_errors: 1,
            frame_error: true,
        };
        let mut s = LinkStats::default();
        s.accumulate(&clean, 4);
        s.accumulate(&one, 4);
        assert_eq!(s.ber(), 0.125);
        assert_eq!(s.fer(), 0.5);
        assert_eq!(s.payload_bits, 8);
    }

    #[test]
    fn merge_is_additive() {
        let a = LinkStats { frames: 2, payload_bits: 8, bit_errors: 1, frame_errors: 1 };
        let b = LinkStats { frames: 3, payload_bits: 12, bit_errors: 4, frame_errors: 2 };
        let mut m = a;
        m.merge(&b);
        assert_eq!(m, LinkStats { frames: 5, payload_bits: 20, bit_errors: 5, frame_errors: 3 });
    }

    #[test]
    fn monte_carlo_noiseless_runs_to_max_frames() {
        let code = PolarCode::build(16, 8, 2.0).unwrap();
        let params = ChannelParams::new(100.0, code.rate(), 1).unwrap();
        let stop = StoppingRule { min_frame_errors: 10, max_frames: 100 };
        let r = monte_carlo_point(&code, &params, CheckNode::Exact, stop, 0).unwrap();
        assert_eq!(r.stats.frames, 100);
        assert_eq!(r.stats.fer(), 0.0);
        assert_eq!(r.stopped_by, StopReason::MaxFrames);
    }

    #[test]
    fn monte_carlo_stops_on_errors() {
        let code = PolarCode::build(16, 16, 2.0).unwrap();
        let params = ChannelParams::new(-10.0, 1.0, 1).unwrap();
        let stop = StoppingRule { min_frame_errors: 25, max_frames: 10_000 };
        let r = monte_carlo_point(&code, &params, CheckNode::Exact, stop, 0).unwrap();
        assert_eq!(r.stats.frame_errors, 25);
        assert_eq!(r.stopped_by, StopReason::FrameErrors);
        assert!(r.stats.frames < 100);
    }

    #[test]
    fn monte_carlo_is_deterministic_across_pools() {
        let code = PolarCode::build(8, 4, 2.0).unwrap();
        let params = ChannelParams::new(3.0, code.rate(), 77).unwrap();
        let stop = StoppingRule { min_frame_errors: 40, max_frames: 5_000 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo_point(&code, &params, CheckNode::Exact, stop, 2).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(4));
        assert_eq!(a, run(3));

        // sequential re-run of the same frames
        let mut dec = ScDecoder::new(&code, CheckNode::Exact);
        let mut s = LinkStats::default();
        for f in 0..a.stats.frames {
            s.accumulate(&random_frame(&mut dec, &code, &params, 2, f).unwrap(), 4);
        }
        assert_eq!(s, a.stats);
    }

    #[test]
    fn ber_never_exceeds_fer() {
        let code = PolarCode::build(32, 16, 2.0).unwrap();
        for snr in [-2.0, 0.0, 2.0] {
            let params = ChannelParams::new(snr, code.rate(), 3).unwrap();
            let stop = StoppingRule { min_frame_errors: 0, max_frames: 300 };
            let r = monte_carlo_point(&code, &params, CheckNode::MinSum, stop, 0).unwrap();
            assert!(r.stats.ber() <= r.stats.fer());
            assert!(r.stats.bit_errors <= r.stats.payload_bits);
        }
    }
}
