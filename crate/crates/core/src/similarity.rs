//! Jaccard similarity, exact and estimated from fixed-width bit signatures.

use crate::error::{Error, Result};
use crate::hashing::{derive_seed, mix64};
use crate::ItemId;

/// Default signature width in bits.
pub const DEFAULT_SIGNATURE_BITS: usize = 1024;

const SIGNATURE_NAMESPACE: u64 = 0x6E6E_4746_0000_0003;

/// Sizes of the intersection and union of two sorted, duplicate-free lists.
#[inline]
pub fn overlap(p: &[ItemId], q: &[ItemId]) -> (usize, usize) {
    let (mut i, mut j, mut inter) = (0, 0, 0);
    while i < p.len() && j < q.len() {
        match p[i].cmp(&q[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (inter, p.len() + q.len() - inter)
}

#[inline]
fn ratio(inter: usize, union: usize) -> f64 {
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// `|p ∩ q| / |p ∪ q|` over sorted, duplicate-free profiles; 0 for two empty sets.
#[inline]
pub fn jaccard(p: &[ItemId], q: &[ItemId]) -> f64 {
    let (inter, union) = overlap(p, q);
    ratio(inter, union)
}

/// Profile compressed into `L` bits, one hashed bit per item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldFingerSig {
    words: Box<[u64]>,
    popcount: u32,
}

impl GoldFingerSig {
    pub fn bits(&self) -> usize {
        self.words.len() * 64
    }

    pub fn popcount(&self) -> u32 {
        self.popcount
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_set(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }
}

/// Checks that `bits` is a power of two in `64..=8192`.
pub fn check_signature_width(bits: usize) -> Result<()> {
    if !bits.is_power_of_two() || !(64..=8192).contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "signature width must be a power of two in 64..=8192, got {bits}"
        )));
    }
    Ok(())
}

/// Per-run salt for signature bits, kept apart from the clustering hashes.
pub fn signature_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, SIGNATURE_NAMESPACE, 0)
}

/// Sets bit `hash(i) mod bits` for each item `i` of the profile.
pub fn gf_encode(profile: &[ItemId], bits: usize, seed: u64) -> Result<GoldFingerSig> {
    check_signature_width(bits)?;
    let mut words = vec![0u64; bits / 64].into_boxed_slice();
    let mask = bits as u64 - 1;
    for &item in profile {
        let bit = (mix64(u64::from(item) ^ seed) & mask) as usize;
        words[bit / 64] |= 1 << (bit % 64);
    }
    let popcount = words.iter().map(|w| w.count_ones()).sum();
    Ok(GoldFingerSig { words, popcount })
}

/// `popcount(a & b) / popcount(a | b)`; 0 when both are empty.
pub fn gf_jaccard(a: &GoldFingerSig, b: &GoldFingerSig) -> Result<f64> {
    if a.words.len() != b.words.len() {
        return Err(Error::WidthMismatch {
            left: a.bits(),
            right: b.bits(),
        });
    }
    Ok(gf_jaccard_unchecked(a, b))
}

/// [`gf_jaccard`] for signatures already known to share a width.
#[inline]
pub fn gf_jaccard_unchecked(a: &GoldFingerSig, b: &GoldFingerSig) -> f64 {
    let inter: u32 = a
        .words
        .iter()
        .zip(b.words.iter())
        .map(|(x, y)| (x & y).count_ones())
        .sum();
    // |a ∪ b| = |a| + |b| - |a ∩ b|
    let union = a.popcount + b.popcount - inter;
    ratio(inter as usize, union as usize)
}
