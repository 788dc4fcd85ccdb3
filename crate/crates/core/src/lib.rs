//! Polar-coded link simulator.
//!
//! Images (or random payloads) are split into `K`-bit messages, polar encoded
//! to `N` bits, BPSK modulated, passed through an AWGN channel, demapped to
//! LLRs and recovered with a successive-cancellation decoder. Per-image
//! reports and waterfall sweeps record the resulting BER and FER.
//!
//! Module map:
//!
//! - [`construction`]: Bhattacharyya reliabilities and information-set selection.
//! - [`codec`]: butterfly encoder and SC decoder.
//! - [`channel`]: BPSK mapping, AWGN, LLR demapping and seed substreams.
//! - [`link`]: the per-packet chain, error accounting and Monte Carlo points.
//! - [`pipeline`]: image serialization, packetization and reconstruction.
//! - [`report`]: text and CSV reports.
//! - [`app`]: run configuration, argument parsing and the two run modes.

pub mod app;
pub mod bits;
pub mod channel;
pub mod codec;
pub mod construction;
pub mod error;
pub mod link;
pub mod pipeline;
pub mod report;

pub use bits::BitVector;
pub use channel::{ChannelParams, SubstreamId};
pub use codec::{CheckNode, LlrVector, ScDecoder};
pub use construction::{PolarCode, ReliabilityProfile};
pub use error::{Error, Result};
pub use link::{LinkStats, PacketResult, StopReason, StoppingRule};

/// Magnitude at which LLRs are clamped throughout the receive chain.
pub const LLR_MAX: f64 = 40.0;
