//! FastRandomHash clustering with recursive splitting of oversized buckets.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hashing::{frh_above, ExclusionChain, HashFamily, ItemHashes};
use crate::UserId;

/// Default maximum cluster size before splitting.
pub const DEFAULT_MAX_CLUSTER: usize = 2000;

/// A group of users sharing a FastRandomHash value.
///
/// `(func, chain, bucket)` is unique within a run. Members are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cluster {
    pub func: usize,
    pub chain: ExclusionChain,
    /// 1-based hash value that formed the cluster.
    pub bucket: u32,
    pub members: Vec<UserId>,
    /// Larger than the size cap but admits no further split.
    pub terminal: bool,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Orders by `(func, chain, bucket)`.
    pub fn identity_cmp(&self, other: &Cluster) -> Ordering {
        self.func
            .cmp(&other.func)
            .then_with(|| self.chain.cmp(&other.chain))
            .then(self.bucket.cmp(&other.bucket))
    }

    /// Stable 64-bit digest of the identity, for per-cluster seeding.
    pub fn identity_key(&self) -> u64 {
        use crate::hashing::mix64;
        let mut h = mix64(self.func as u64 ^ 0xC1);
        for &eta in self.chain.as_slice() {
            h = mix64(h ^ u64::from(eta));
        }
        mix64(h ^ (u64::from(self.bucket) << 32) ^ self.chain.len() as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringConfig {
    /// Size cap N: larger clusters are split.
    pub max_size: usize,
    pub family: HashFamily,
}

impl ClusteringConfig {
    pub fn new(t: usize, b: u32, max_size: usize, seed: u64) -> Result<Self> {
        if max_size == 0 {
            return Err(Error::InvalidParameter(
                "maximum cluster size N must be at least 1".into(),
            ));
        }
        Ok(ClusteringConfig {
            max_size,
            family: HashFamily::new(t, b, seed)?,
        })
    }
}

/// Groups users by FastRandomHash under each function, without splitting.
///
/// Returns, for every function, its non-empty buckets in ascending order.
pub fn cluster_all(ds: &Dataset, family: &HashFamily) -> Vec<Vec<Cluster>> {
    (0..family.t())
        .into_par_iter()
        .map(|func| {
            let hashes = family.table(func, ds.n_items());
            bucket_users(ds, &hashes, 0, &all_users(ds))
                .into_iter()
                .map(|(bucket, members)| Cluster {
                    func,
                    chain: ExclusionChain::new(),
                    bucket,
                    members,
                    terminal: false,
                })
                .collect()
        })
        .collect()
}

fn all_users(ds: &Dataset) -> Vec<UserId> {
    (0..ds.n_users() as UserId).collect()
}

/// Partitions `users` by their hash above `bound`; users without one are
/// returned under bucket 0. Buckets ascend and members stay sorted.
fn bucket_users(
    ds: &Dataset,
    hashes: &ItemHashes,
    bound: u32,
    users: &[UserId],
) -> Vec<(u32, Vec<UserId>)> {
    let mut keyed: Vec<(u32, UserId)> = users
        .iter()
        .map(|&u| (frh_above(ds.profile(u), hashes, bound).unwrap_or(0), u))
        .collect();
    keyed.sort_unstable();
    let mut out: Vec<(u32, Vec<UserId>)> = Vec::new();
    for (h, u) in keyed {
        match out.last_mut() {
            Some((last, members)) if *last == h => members.push(u),
            _ => out.push((h, vec![u])),
        }
    }
    out
}

/// Splits a cluster larger than `max_size` until every emitted cluster fits
/// or cannot be refined further. Smaller clusters are returned unchanged.
///
/// Members are re-hashed ignoring values up to the cluster's bucket. Users
/// with no such value, and users alone in their new group, stay in the
/// residual cluster, which keeps the parent's identity. A residual still
/// over the cap is tagged terminal: re-hashing it would reproduce it.
pub fn split_recursive(
    cluster: Cluster,
    ds: &Dataset,
    hashes: &ItemHashes,
    max_size: usize,
) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut stack = vec![cluster];
    while let Some(c) = stack.pop() {
        if c.len() <= max_size {
            out.push(Cluster {
                terminal: false,
                ..c
            });
            continue;
        }
        let chain = c.chain.extended(c.bucket);
        let mut residual = Vec::new();
        for (h, members) in bucket_users(ds, hashes, c.bucket, &c.members) {
            if h == 0 || members.len() == 1 {
                residual.extend(members);
            } else {
                stack.push(Cluster {
                    func: c.func,
                    chain: chain.clone(),
                    bucket: h,
                    members,
                    terminal: false,
                });
            }
        }
        if !residual.is_empty() {
            residual.sort_unstable();
            let terminal = residual.len() > max_size;
            if terminal {
                log::debug!(
                    "cluster func={} chain={} bucket={} keeps {} users unsplit",
                    c.func,
                    c.chain,
                    c.bucket,
                    residual.len()
                );
            }
            out.push(Cluster {
                members: residual,
                terminal,
                ..c
            });
        }
    }
    out.sort_by(Cluster::identity_cmp);
    out
}

/// Full clustering step: bucket under every function, then split.
/// Leaf clusters are returned in identity order.
pub fn build_clusters(ds: &Dataset, cfg: &ClusteringConfig) -> Vec<Cluster> {
    let family = &cfg.family;
    let mut leaves: Vec<Cluster> = (0..family.t())
        .into_par_iter()
        .flat_map_iter(|func| {
            let hashes = family.table(func, ds.n_items());
            bucket_users(ds, &hashes, 0, &all_users(ds))
                .into_iter()
                .flat_map(|(bucket, members)| {
                    let c = Cluster {
                        func,
                        chain: ExclusionChain::new(),
                        bucket,
                        members,
                        terminal: false,
                    };
                    split_recursive(c, ds, &hashes, cfg.max_size)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    leaves.sort_by(Cluster::identity_cmp);
    leaves
}

/// Summary of a clustering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStats {
    pub clusters: usize,
    pub terminal: usize,
    pub singletons: usize,
    pub max_size: usize,
    pub mean_size: f64,
    /// `(upper bound, count)` over power-of-two size classes `(ub/2, ub]`.
    pub size_histogram: Vec<(usize, usize)>,
}

impl ClusterStats {
    pub fn of(clusters: &[Cluster]) -> Self {
        let mut hist: Vec<(usize, usize)> = Vec::new();
        for c in clusters {
            let ub = c.len().next_power_of_two();
            match hist.iter_mut().find(|(b, _)| *b == ub) {
                Some((_, n)) => *n += 1,
                None => hist.push((ub, 1)),
            }
        }
        hist.sort_unstable();
        let total: usize = clusters.iter().map(Cluster::len).sum();
        ClusterStats {
            clusters: clusters.len(),
            terminal: clusters.iter().filter(|c| c.terminal).count(),
            singletons: clusters.iter().filter(|c| c.len() == 1).count(),
            max_size: clusters.iter().map(Cluster::len).max().unwrap_or(0),
            mean_size: if clusters.is_empty() {
                0.0
            } else {
                total as f64 / clusters.len() as f64
            },
            size_histogram: hist,
        }
    }
}

/// One line per cluster: `func bucket chain size`.
pub fn dump_clusters(clusters: &[Cluster]) -> String {
    let mut s = String::new();
    for c in clusters {
        let _ = writeln!(s, "{} {} {} {}", c.func, c.bucket, c.chain, c.len());
    }
    s
}
