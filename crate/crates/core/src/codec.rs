//! Polar encoding and successive-cancellation decoding.
//!
//! The working kernel is `F = [[1, 0], [1, 1]]` and codewords are
//! `x = u * F^{(x)n}` over GF(2), both vectors in natural index order. The
//! matrix printed as `[[1, 1], [1, 0]]` is the same kernel with its two
//! input rows swapped, so codes built on it differ from these only by the
//! input index complement `i -> N - 1 - i`.

use std::str::FromStr;

use crate::bits::BitVector;
use crate::construction::PolarCode;
use crate::error::{Error, Result};
use crate::LLR_MAX;

/// The 2x2 binary kernel, `x = u * KERNEL` for a pair of bits.
pub const KERNEL: [[u8; 2]; 2] = [[1, 0], [1, 1]];

/// Log-likelihood ratios `ln P(0|y) / P(1|y)`, one per code bit.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// Wraps a vector, rejecting NaN and infinite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLlr { index });
        }
        Ok(LlrVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hard_decisions(&self) -> BitVector {
        self.0.iter().map(|&l| hard_decision(l)).collect()
    }
}

#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// Check-node rule used for the left-branch LLR update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckNode {
    #[default]
    Exact,
    MinSum,
}

impl CheckNode {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            CheckNode::Exact => check_node_exact(a, b),
            CheckNode::MinSum => check_node_min_sum(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckNode::Exact => "exact",
            CheckNode::MinSum => "min_sum",
        }
    }
}

impl std::fmt::Display for CheckNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckNode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CheckNode::Exact),
            "min_sum" | "min-sum" | "minsum" => Ok(CheckNode::MinSum),
            other => Err(Error::config("decoder", format!("unknown variant {other:?}"))),
        }
    }
}

/// `2 atanh(tanh(a/2) tanh(b/2))` with inputs clamped to `±LLR_MAX`.
///
/// Evaluated as `sgn(a)sgn(b)min(|a|,|b|) + ln(1+e^-|a+b|) - ln(1+e^-|a-b|)`,
/// which is the same function without the `atanh(±1)` overflow.
#[inline]
pub fn check_node_exact(a: f64, b: f64) -> f64 {
    let a = a.clamp(-LLR_MAX, LLR_MAX);
    let b = b.clamp(-LLR_MAX, LLR_MAX);
    let min_sum = check_node_min_sum(a, b);
    min_sum + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[inline]
pub fn check_node_min_sum(a: f64, b: f64) -> f64 {
    let mag = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

/// Variable-node update given the left-branch partial sum bit.
#[inline]
fn variable_node(a: f64, b: f64, left_bit: u8) -> f64 {
    if left_bit == 0 {
        b + a
    } else {
        b - a
    }
}

/// In-place butterfly `v <- v * F^{(x)n}`.
///
/// # Panics
///
/// Panics if the length is not a power of two.
pub fn butterfly(v: &mut [u8]) {
    let len = v.len();
    assert!(len.is_power_of_two(), "length {len} is not a power of two");
    let mut half = 1;
    while half < len {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (l, h) in lo.iter_mut().zip(hi.iter()) {
                *l ^= *h;
            }
        }
        half *= 2;
    }
}

/// Encodes a full `N`-bit input vector `u` (no frozen handling).
pub fn encode_full(u: &BitVector) -> Result<BitVector> {
    if !u.len().is_power_of_two() {
        return Err(Error::config(
            "N",
            format!("{} is not a power of two", u.len()),
        ));
    }
    let mut x = u.clone();
    butterfly(x.as_mut_slice());
    Ok(x)
}

/// Places `msg` on the information set (frozen bits zero) and encodes.
pub fn encode(code: &PolarCode, msg: &BitVector) -> Result<BitVector> {
    let mut u = BitVector::zeros(code.n());
    scatter(code, msg, &mut u)?;
    butterfly(u.as_mut_slice());
    Ok(u)
}

fn scatter(code: &PolarCode, msg: &BitVector, u: &mut BitVector) -> Result<()> {
    if msg.len() != code.k() {
        return Err(Error::LengthMismatch {
            what: "message",
            expected: code.k(),
            actual: msg.len(),
        });
    }
    for (&pos, bit) in code.info_set().iter().zip(msg.iter()) {
        u.set(pos, bit);
    }
    Ok(())
}

/// Output of [`ScDecoder::decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// Estimated message, gathered from the information set.
    pub msg: BitVector,
    /// Estimated full input vector.
    pub u_hat: BitVector,
}

/// Successive-cancellation decoder with reusable scratch buffers.
///
/// One instance per worker; `decode` takes `&mut self`.
#[derive(Debug, Clone)]
pub struct ScDecoder<'a> {
    code: &'a PolarCode,
    check_node: CheckNode,
    llr_scratch: Vec<f64>,
    partial_sums: Vec<u8>,
    u_hat: Vec<u8>,
}

impl<'a> ScDecoder<'a> {
    pub fn new(code: &'a PolarCode, check_node: CheckNode) -> Self {
        let n = code.n();
        ScDecoder {
            code,
            check_node,
            llr_scratch: vec![0.0; n],
            partial_sums: vec![0; n],
            u_hat: vec![0; n],
        }
    }

    pub fn decode(&mut self, llrs: &LlrVector) -> Result<Decoded> {
        self.decode_slice(llrs.as_slice())
    }

    /// Like [`decode`](Self::decode) but on a raw slice, validated here.
    pub fn decode_slice(&mut self, llrs: &[f64]) -> Result<Decoded> {
        let n = self.code.n();
        if llrs.len() != n {
            return Err(Error::LengthMismatch {
                what: "LLR vector",
                expected: n,
                actual: llrs.len(),
            });
        }
        if let Some(index) = llrs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLlr { index });
        }
        sc_node(
            llrs,
            &mut self.llr_scratch,
            &mut self.partial_sums,
            &mut self.u_hat,
            self.code.frozen_mask(),
            self.check_node,
        );
        let u_hat = BitVector::from_bits(self.u_hat.clone());
        let msg = self.code.info_set().iter().map(|&i| self.u_hat[i]).collect();
        Ok(Decoded { msg, u_hat })
    }
}

/// Decodes one subtree. `llrs` are the channel LLRs of this node, `bits`
/// receives the node's re-encoded codeword, `u_hat` and `frozen` cover the
/// node's input positions.
fn sc_node(
    llrs: &[f64],
    scratch: &mut [f64],
    bits: &mut [u8],
    u_hat: &mut [u8],
    frozen: &[bool],
    check_node: CheckNode,
) {
    let len = llrs.len();
    if len == 1 {
        let bit = if frozen[0] { 0 } else { hard_decision(llrs[0]) };
        u_hat[0] = bit;
        bits[0] = bit;
        return;
    }
    let half = len / 2;
    let (child, rest) = scratch.split_at_mut(half);
    let (l_lo, l_hi) = llrs.split_at(half);
    let (bits_lo, bits_hi) = bits.split_at_mut(half);
    let (u_lo, u_hi) = u_hat.split_at_mut(half);
    let (f_lo, f_hi) = frozen.split_at(half);

    if f_lo.iter().all(|&f| f) {
        u_lo.fill(0);
        bits_lo.fill(0);
    } else {
        for ((c, &a), &b) in child.iter_mut().zip(l_lo).zip(l_hi) {
            *c = check_node.apply(a, b);
        }
        sc_node(child, rest, bits_lo, u_lo, f_lo, check_node);
    }

    for (((c, &a), &b), &s) in child.iter_mut().zip(l_lo).zip(l_hi).zip(bits_lo.iter()) {
        *c = variable_node(a, b, s);
    }
    sc_node(child, rest, bits_hi, u_hi, f_hi, check_node);

    for (lo, &hi) in bits_lo.iter_mut().zip(bits_hi.iter()) {
        *lo ^= hi;
    }
}

/// One-shot SC decode; allocates its own scratch.
pub fn sc_decode(code: &PolarCode, llrs: &LlrVector, check_node: CheckNode) -> Result<Decoded> {
    ScDecoder::new(code, check_node).decode(llrs)
}
