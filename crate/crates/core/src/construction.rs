//! Code construction: Bhattacharyya reliabilities of the synthetic channels
//! and the resulting information/frozen split.
//!
//! The recurrence starts from `z0 = exp(-R * Eb/N0)` and replaces every
//! parameter `z` by the pair `(2z - z^2, z^2)`, the degraded ("minus") child
//! at the lower index of the pair. After `n` doublings entry `i` has seen the
//! minus/plus transforms selected by the bits of `i`, most significant bit
//! first, which is the natural-order layout used by [`crate::codec`].

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest supported `log2(N)`.
pub const MAX_LOG2_LEN: u32 = 24;

/// Bhattacharyya parameters of the `2^n` synthetic channels, natural order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    pub design_snr_db: f64,
    pub z: Vec<f64>,
}

impl ReliabilityProfile {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Initial Bhattacharyya parameter of a BPSK/AWGN channel at the given
/// Eb/N0 and code rate.
pub fn initial_parameter(design_snr_db: f64, rate: f64) -> f64 {
    (-rate * 10f64.powf(design_snr_db / 10.0)).exp()
}

/// Runs the polarization recurrence `n` times from `z0`.
pub fn polarize(n: u32, z0: f64) -> Result<Vec<f64>> {
    if n > MAX_LOG2_LEN {
        return Err(Error::config("n", format!("{n} exceeds {MAX_LOG2_LEN}")));
    }
    let mut z = Vec::with_capacity(1 << n);
    z.push(z0);
    for _ in 0..n {
        z = z
            .iter()
            .flat_map(|&p| [2.0 * p - p * p, p * p])
            .collect();
    }
    Ok(z)
}

pub fn bhattacharyya_profile(n: u32, design_snr_db: f64, rate: f64) -> Result<ReliabilityProfile> {
    check_rate(rate)?;
    if !design_snr_db.is_finite() {
        return Err(Error::config("design_snr_db", "must be finite"));
    }
    let z = polarize(n, initial_parameter(design_snr_db, rate))?;
    Ok(ReliabilityProfile { design_snr_db, z })
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(Error::config("rate", format!("{rate} is outside (0, 1]")))
    }
}

/// A polar code `P(N, K)` with its information and frozen sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    log2_len: u32,
    k: usize,
    design_snr_db: f64,
    info_set: Vec<usize>,
    frozen_set: Vec<usize>,
    frozen_mask: Vec<bool>,
}

impl PolarCode {
    /// Builds `P(N, K)` from a Bhattacharyya profile designed at
    /// `design_snr_db` (Eb/N0, dB) for rate `K/N`.
    pub fn build(n_len: usize, k: usize, design_snr_db: f64) -> Result<Self> {
        let log2_len = check_length(n_len)?;
        check_k(n_len, k)?;
        let profile = bhattacharyya_profile(log2_len, design_snr_db, k as f64 / n_len as f64)?;
        Self::from_profile(&profile, k)
    }

    /// Selects the `k` most reliable (smallest `z`) positions of a profile.
    /// Ties go to the higher index.
    pub fn from_profile(profile: &ReliabilityProfile, k: usize) -> Result<Self> {
        let n_len = profile.len();
        let log2_len = check_length(n_len)?;
        check_k(n_len, k)?;

        let mut order: Vec<usize> = (0..n_len).collect();
        order.sort_by(|&a, &b| profile.z[a].total_cmp(&profile.z[b]).then(b.cmp(&a)));

        let mut frozen_mask = vec![true; n_len];
        for &i in &order[..k] {
            frozen_mask[i] = false;
        }
        let info_set = (0..n_len).filter(|&i| !frozen_mask[i]).collect();
        let frozen_set = (0..n_len).filter(|&i| frozen_mask[i]).collect();

        Ok(PolarCode {
            log2_len,
            k,
            design_snr_db: profile.design_snr_db,
            info_set,
            frozen_set,
            frozen_mask,
        })
    }

    /// Code length `N`.
    pub fn n(&self) -> usize {
        1 << self.log2_len
    }

    pub fn log2_len(&self) -> u32 {
        self.log2_len
    }

    /// Information bits per frame `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    pub fn design_snr_db(&self) -> f64 {
        self.design_snr_db
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen_mask[i]
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }
}

fn check_length(n_len: usize) -> Result<u32> {
    if n_len < 2 || !n_len.is_power_of_two() {
        return Err(Error::config(
            "N",
            format!("{n_len} is not a power of two >= 2"),
        ));
    }
    let log2_len = n_len.trailing_zeros();
    if log2_len > MAX_LOG2_LEN {
        return Err(Error::config("N", format!("{n_len} exceeds 2^{MAX_LOG2_LEN}")));
    }
    Ok(log2_len)
}

fn check_k(n_len: usize, k: usize) -> Result<()> {
    if k == 0 || k > n_len {
        return Err(Error::config("K", format!("{k} is outside [1, N = {n_len}]")));
    }
    Ok(())
}

/// Diagnostic listing of the construction, one `index z frozen` line per
/// synthetic channel.
pub fn dump_construction(profile: &ReliabilityProfile, code: &PolarCode) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# N={} K={} design_snr_db={}",
        code.n(),
        code.k(),
        profile.design_snr_db
    );
    let _ = writeln!(out, "# index z frozen");
    for (i, z) in profile.z.iter().enumerate() {
        let _ = writeln!(out, "{i} {z:.6e} {}", code.is_frozen(i) as u8);
    }
    out
}
