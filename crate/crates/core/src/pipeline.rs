//! The cluster, solve, merge pipeline and the result type shared with the
//! baselines.

use std::time::Instant;

use serde::Serialize;

use crate::clustering::{build_clusters, ClusterStats, ClusteringConfig, DEFAULT_MAX_CLUSTER};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{GreedyParams, KnnGraph, OracleMode, SimilarityOracle};
use crate::merge::merge_partials;
use crate::scheduler::{run_all, JobAudit, ScheduleParams, ScheduleStats, DEFAULT_RHO};
use crate::similarity::{signature_seed, DEFAULT_SIGNATURE_BITS};

pub const DEFAULT_K: usize = 30;
pub const DEFAULT_B: u32 = 4096;
pub const DEFAULT_T: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C2Params {
    pub k: usize,
    pub b: u32,
    pub t: usize,
    /// Maximum cluster size N.
    pub max_cluster: usize,
    pub rho: usize,
    pub greedy: GreedyParams,
    pub oracle: OracleMode,
    pub seed: u64,
    pub workers: usize,
}

impl Default for C2Params {
    fn default() -> Self {
        C2Params {
            k: DEFAULT_K,
            b: DEFAULT_B,
            t: DEFAULT_T,
            max_cluster: DEFAULT_MAX_CLUSTER,
            rho: DEFAULT_RHO,
            greedy: GreedyParams::default(),
            oracle: OracleMode::GoldFinger {
                bits: DEFAULT_SIGNATURE_BITS,
            },
            seed: 0,
            workers: 1,
        }
    }
}

/// Wall-clock time of one named phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase {
    pub name: &'static str,
    pub seconds: f64,
}

/// Output of any graph construction run.
#[derive(Debug, Clone)]
pub struct BuildRun {
    pub graph: KnnGraph,
    /// Similarity evaluations, initialization included.
    pub evaluations: u64,
    pub phases: Vec<Phase>,
    pub cluster_stats: Option<ClusterStats>,
    pub schedule: Option<ScheduleStats>,
    pub audit: Vec<JobAudit>,
    /// Per-iteration update counts for full-dataset greedy runs.
    pub updates: Vec<u64>,
}

impl BuildRun {
    pub fn seconds(&self) -> f64 {
        self.phases.iter().map(|p| p.seconds).sum()
    }

    pub(crate) fn single(graph: KnnGraph, evaluations: u64, phases: Vec<Phase>) -> Self {
        BuildRun {
            graph,
            evaluations,
            phases,
            cluster_stats: None,
            schedule: None,
            audit: Vec::new(),
            updates: Vec::new(),
        }
    }
}

/// Times `f` under `name`.
pub(crate) fn timed<T>(phases: &mut Vec<Phase>, name: &'static str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    phases.push(Phase {
        name,
        seconds: start.elapsed().as_secs_f64(),
    });
    out
}

/// Builds the similarity oracle for `mode`, salting signatures from `seed`.
pub fn make_oracle(ds: &Dataset, mode: OracleMode, seed: u64) -> Result<SimilarityOracle<'_>> {
    SimilarityOracle::new(ds, mode, signature_seed(seed))
}

/// Runs clustering, per-cluster solving and merging.
pub fn build_c2(ds: &Dataset, params: &C2Params) -> Result<BuildRun> {
    if params.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut phases = Vec::new();
    let oracle = timed(&mut phases, "encode", || {
        make_oracle(ds, params.oracle, params.seed)
    })?;
    let cfg = ClusteringConfig::new(params.t, params.b, params.max_cluster, params.seed)?;
    let clusters = timed(&mut phases, "cluster", || build_clusters(ds, &cfg));
    let cluster_stats = ClusterStats::of(&clusters);
    log::info!(
        "{} clusters, largest {}, {} terminal",
        cluster_stats.clusters,
        cluster_stats.max_size,
        cluster_stats.terminal
    );
    let sched = ScheduleParams {
        k: params.k,
        rho: params.rho,
        greedy: params.greedy,
        workers: params.workers,
        seed: params.seed,
    };
    let out = timed(&mut phases, "solve", || run_all(clusters, &oracle, &sched))?;
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
