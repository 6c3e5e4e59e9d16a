//! Seeded item hashes and the user-level min-hashes built on them.
//!
//! A [`HashFamily`] holds `t` generative functions `h_f : items -> [1, b]`.
//! The user hash is the minimum of `h_f` over the user's items, optionally
//! restricted to values above the last index of an [`ExclusionChain`] when
//! an oversized cluster is split.
//!
//! Per-function seeds are derived from the master seed with splitmix64, one
//! namespace per use (generative functions, MinHash, signatures, folds, ...),
//! so every random choice in a run traces back to a single `--seed`.

use crate::error::{Error, Result};
use crate::ItemId;

const GENERATIVE_NAMESPACE: u64 = 0x6E6E_4652_4800_0001;
const MINHASH_NAMESPACE: u64 = 0x6E6E_4D48_0000_0002;

/// splitmix64 step: bijective avalanche mix of a 64-bit value.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for `(namespace, index)` from `master`.
pub fn derive_seed(master: u64, namespace: u64, index: u64) -> u64 {
    mix64(mix64(master ^ mix64(namespace)) ^ index)
}

#[inline(always)]
fn lookup3_final(mut a: u32, mut b: u32, mut c: u32) -> u32 {
    c ^= b;
    c = c.wrapping_sub(b.rotate_left(14));
    a ^= c;
    a = a.wrapping_sub(c.rotate_left(11));
    b ^= a;
    b = b.wrapping_sub(a.rotate_left(25));
    c ^= b;
    c = c.wrapping_sub(b.rotate_left(16));
    a ^= c;
    a = a.wrapping_sub(c.rotate_left(4));
    b ^= a;
    b = b.wrapping_sub(a.rotate_left(14));
    c ^= b;
    c = c.wrapping_sub(b.rotate_left(24));
    c
}

/// Bob Jenkins' lookup3 `hashword2` specialised to a single 32-bit key,
/// with the 64-bit seed split across the two init values.
#[inline]
pub fn jenkins32(key: u32, seed: u64) -> u32 {
    let init = 0xdead_beef_u32.wrapping_add(4).wrapping_add(seed as u32);
    let a = init.wrapping_add(key);
    let b = init;
    let c = init.wrapping_add((seed >> 32) as u32);
    lookup3_final(a, b, c)
}

/// Maps a 32-bit hash onto `[1, b]` by multiply-shift.
#[inline]
fn to_bucket(h: u32, b: u32) -> u32 {
    ((u64::from(h) * u64::from(b)) >> 32) as u32 + 1
}

/// `t` seeded generative functions with range `[1, b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    b: u32,
    master_seed: u64,
    seeds: Vec<u64>,
    minhash_seeds: Vec<u64>,
}

impl HashFamily {
    pub fn new(t: usize, b: u32, master_seed: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParameter(
                "need at least one hash function (t >= 1)".into(),
            ));
        }
        if b == 0 {
            return Err(Error::InvalidParameter(
                "bucket count b must be at least 1".into(),
            ));
        }
        let seeds = (0..t as u64)
            .map(|f| derive_seed(master_seed, GENERATIVE_NAMESPACE, f))
            .collect();
        let minhash_seeds = (0..t as u64)
            .map(|f| derive_seed(master_seed, MINHASH_NAMESPACE, f))
            .collect();
        Ok(HashFamily {
            b,
            master_seed,
            seeds,
            minhash_seeds,
        })
    }

    pub fn t(&self) -> usize {
        self.seeds.len()
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// `h_func(item)`, always in `[1, b]`.
    #[inline]
    pub fn item_hash(&self, item: ItemId, func: usize) -> u32 {
        to_bucket(jenkins32(item, self.seeds[func]), self.b)
    }

    /// Hash values of items `0..n_items` under function `func`.
    pub fn table(&self, func: usize, n_items: usize) -> ItemHashes {
        ItemHashes {
            b: self.b,
            values: (0..n_items as u32)
                .map(|i| self.item_hash(i, func))
                .collect(),
        }
    }

    /// Full-range 64-bit hash standing in for a random permutation of items.
    #[inline]
    pub fn permutation_rank(&self, item: ItemId, func: usize) -> u64 {
        mix64(u64::from(item) ^ self.minhash_seeds[func])
    }
}

/// Materialised values of one generative function over the item universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemHashes {
    b: u32,
    values: Vec<u32>,
}

impl ItemHashes {
    /// Explicit hash values, e.g. to replay a hand-written function.
    pub fn from_values(b: u32, values: Vec<u32>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v == 0 || v > b) {
            return Err(Error::InvalidParameter(format!(
                "hash value {v} outside [1, {b}]"
            )));
        }
        Ok(ItemHashes { b, values })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    #[inline]
    pub fn get(&self, item: ItemId) -> u32 {
        self.values[item as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Bucket indices excluded along a split lineage, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExclusionChain(Vec<u32>);

impl ExclusionChain {
    pub fn new() -> Self {
        ExclusionChain(Vec::new())
    }

    pub fn from_indices(indices: Vec<u32>) -> Result<Self> {
        if indices.first() == Some(&0) || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "exclusion chain {indices:?} must be strictly increasing and 1-based"
            )));
        }
        Ok(ExclusionChain(indices))
    }

    /// Only hash values strictly above this bound are considered (0 = none excluded).
    pub fn bound(&self) -> u32 {
        self.0.last().copied().unwrap_or(0)
    }

    /// Chain extended by `eta`, which must exceed the current bound.
    pub fn extended(&self, eta: u32) -> Self {
        debug_assert!(eta > self.bound());
        let mut v = self.0.clone();
        v.push(eta);
        ExclusionChain(v)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for ExclusionChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Minimum hash value above `bound` over the profile, if any.
#[inline]
pub fn frh_above(profile: &[ItemId], hashes: &ItemHashes, bound: u32) -> Option<u32> {
    profile
        .iter()
        .map(|&i| hashes.get(i))
        .filter(|&h| h > bound)
        .min()
}

/// FastRandomHash of a profile under one generative function, ignoring
/// every value up to the chain's last index. `None` when nothing is left.
pub fn frh(profile: &[ItemId], hashes: &ItemHashes, chain: &ExclusionChain) -> Option<u32> {
    frh_above(profile, hashes, chain.bound())
}

/// Classic MinHash: minimum permutation rank over the profile.
///
/// Returns `u64::MAX` for an empty profile.
pub fn minhash(profile: &[ItemId], func: usize, family: &HashFamily) -> u64 {
    profile
        .iter()
        .map(|&i| family.permutation_rank(i, func))
        .min()
        .unwrap_or(u64::MAX)
}
