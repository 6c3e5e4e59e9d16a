//! Reference constructions: exact brute force, full-dataset greedy search
//! and MinHash LSH bucketing.

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{Cluster, ClusterStats};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hashing::{minhash, ExclusionChain, HashFamily};
use crate::knn::{
    greedy_knn, GreedyParams, KnnGraph, Neighbor, Neighborhood, OracleMode, SimilarityOracle,
};
use crate::merge::merge_partials;
use crate::pipeline::{make_oracle, timed, BuildRun};
use crate::scheduler::{run_all, ScheduleParams, DEFAULT_RHO};
use crate::UserId;

/// Default number of MinHash functions.
pub const DEFAULT_LSH_FUNCTIONS: usize = 10;

/// Rows evaluated per parallel block of the full brute force.
const BRUTE_BLOCK: usize = 64;

/// Exact top-k over all users, evaluating each unordered pair once.
///
/// Same result as [`crate::knn::brute_force_knn`] over `0..n`, with row
/// blocks evaluated on the rayon pool.
pub fn brute_force_all(n_users: usize, oracle: &SimilarityOracle, k: usize) -> Result<KnnGraph> {
    if n_users < 2 {
        return Err(Error::TooFewUsers(n_users));
    }
    let mut hoods: Vec<Neighborhood> = (0..n_users).map(|_| Neighborhood::new(k)).collect();
    for lo in (0..n_users).step_by(BRUTE_BLOCK) {
        let hi = (lo + BRUTE_BLOCK).min(n_users);
        let block: Vec<Vec<f64>> = (lo..hi)
            .into_par_iter()
            .map(|a| {
                (a + 1..n_users)
                    .map(|b| oracle.similarity(a as UserId, b as UserId))
                    .collect()
            })
            .collect();
        for (a, sims) in (lo..hi).zip(block) {
            for (off, sim) in sims.into_iter().enumerate() {
                let b = a + 1 + off;
                hoods[a].insert(Neighbor::new(b as UserId, sim));
                hoods[b].insert(Neighbor::new(a as UserId, sim));
            }
        }
    }
    Ok(KnnGraph::full(
        k,
        hoods.into_iter().map(Neighborhood::into_vec).collect(),
    ))
}

pub fn run_bruteforce(ds: &Dataset, mode: OracleMode, k: usize, seed: u64) -> Result<BuildRun> {
    let mut phases = Vec::new();
    let oracle = timed(&mut phases, "encode", || make_oracle(ds, mode, seed))?;
    let graph = timed(&mut phases, "solve", || {
        brute_force_all(ds.n_users(), &oracle, k)
    })?;
    Ok(BuildRun::single(graph, oracle.calls(), phases))
}

/// Greedy search over the whole dataset, candidates evaluated in parallel.
pub fn run_greedy_full(
    ds: &Dataset,
    mode: OracleMode,
    k: usize,
    params: &GreedyParams,
) -> Result<BuildRun> {
    let mut phases = Vec::new();
    let oracle = timed(&mut phases, "encode", || make_oracle(ds, mode, params.seed))?;
    let users: Vec<UserId> = (0..ds.n_users() as UserId).collect();
    let p = GreedyParams {
        parallel: true,
        ..*params
    };
    let out = timed(&mut phases, "solve", || greedy_knn(&users, &oracle, k, &p))?;
    log::info!(
        "greedy: {} iterations, updates {:?}",
        out.iterations,
        out.updates
    );
    let mut run = BuildRun::single(out.graph, oracle.calls(), phases);
    run.updates = out.updates;
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LshParams {
    /// Number of MinHash functions.
    pub functions: usize,
    pub k: usize,
    pub rho: usize,
    pub greedy: GreedyParams,
    pub oracle: OracleMode,
    pub seed: u64,
    pub workers: usize,
}

impl Default for LshParams {
    fn default() -> Self {
        LshParams {
            functions: DEFAULT_LSH_FUNCTIONS,
            k: crate::pipeline::DEFAULT_K,
            rho: DEFAULT_RHO,
            greedy: GreedyParams::default(),
            oracle: crate::pipeline::C2Params::default().oracle,
            seed: 0,
            workers: 1,
        }
    }
}

/// Buckets users by MinHash value under each function.
///
/// Bucket numbers are 1-based ranks of the distinct MinHash values within
/// a function, so every bucket has a `(func, bucket)` identity.
pub fn lsh_buckets(ds: &Dataset, family: &HashFamily) -> Vec<Cluster> {
    (0..family.t())
        .into_par_iter()
        .flat_map_iter(|func| {
            let mut keyed: Vec<(u64, UserId)> = (0..ds.n_users() as UserId)
                .map(|u| (minhash(ds.profile(u), func, family), u))
                .collect();
            keyed.sort_unstable();
            let mut out: Vec<Cluster> = Vec::new();
            let mut last = None;
            for (h, u) in keyed {
                if last == Some(h) {
                    out.last_mut().expect("bucket opened").members.push(u);
                } else {
                    last = Some(h);
                    out.push(Cluster {
                        func,
                        chain: ExclusionChain::new(),
                        bucket: out.len() as u32 + 1,
                        members: vec![u],
                        terminal: false,
                    });
                }
            }
            out
        })
        .collect()
}

/// MinHash LSH: bucket, solve each bucket with the hybrid rule, merge.
/// Single-user buckets are skipped and counted.
pub fn run_lsh(ds: &Dataset, params: &LshParams) -> Result<BuildRun> {
    let mut phases = Vec::new();
    let oracle = timed(&mut phases, "encode", || {
        make_oracle(ds, params.oracle, params.seed)
    })?;
    // The bucket range is unused by MinHash; 1 keeps the family valid.
    let family = HashFamily::new(params.functions, 1, params.seed)?;
    let buckets = timed(&mut phases, "cluster", || lsh_buckets(ds, &family));
    let cluster_stats = ClusterStats::of(&buckets);
    if cluster_stats.singletons > 0 {
        log::warn!(
            "{} of {} LSH buckets hold a single user",
            cluster_stats.singletons,
            cluster_stats.clusters
        );
    }
    let sched = ScheduleParams {
        k: params.k,
        rho: params.rho,
        greedy: params.greedy,
        workers: params.workers,
        seed: params.seed,
    };
    let out = timed(&mut phases, "solve", || run_all(buckets, &oracle, &sched))?;
    let graph = timed(&mut phases, "merge", || {
        merge_partials(out.partials.iter().map(|(_, g)| g), ds.n_users(), params.k)
    })?;
    Ok(BuildRun {
        graph,
        evaluations: oracle.calls(),
        phases,
        cluster_stats: Some(cluster_stats),
        schedule: Some(out.stats),
        audit: out.audit,
        updates: Vec::new(),
    })
}
