//! Largest-first parallel execution of per-cluster KNN jobs.

use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::clustering::Cluster;
use crate::error::{Error, Result};
use crate::hashing::derive_seed;
use crate::knn::{brute_force_knn, greedy_knn, GreedyParams, KnnGraph, SimilarityOracle};

/// Default hybrid-switch factor.
pub const DEFAULT_RHO: usize = 5;

const CLUSTER_SEED_NAMESPACE: u64 = 0x6E6E_4746_0000_0005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Brute,
    Greedy,
}

/// Brute force iff `size < rho * k^2`, or when the cluster is too small
/// for greedy search (`size <= k + 1`) and brute force is exact and cheaper.
pub fn choose_solver(cluster_size: usize, rho: usize, k: usize) -> Solver {
    if cluster_size < rho.saturating_mul(k).saturating_mul(k) || cluster_size <= k + 1 {
        Solver::Brute
    } else {
        Solver::Greedy
    }
}

/// Per-cluster record of how a job was solved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobAudit {
    pub func: usize,
    pub bucket: u32,
    pub chain: String,
    pub size: usize,
    pub solver: Solver,
    pub evaluations: u64,
    pub iterations: usize,
    /// Position in dequeue order.
    pub dequeued: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleStats {
    pub workers: usize,
    pub jobs: usize,
    pub brute_jobs: usize,
    pub greedy_jobs: usize,
    pub skipped_singletons: usize,
    pub evaluations: u64,
    pub seconds: f64,
}

pub struct ScheduleOutput {
    /// Partial graphs in cluster identity order; skipped clusters absent.
    pub partials: Vec<(Cluster, KnnGraph)>,
    /// Audits in cluster identity order.
    pub audit: Vec<JobAudit>,
    pub stats: ScheduleStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub k: usize,
    pub rho: usize,
    pub greedy: GreedyParams,
    pub workers: usize,
    /// Mixed with each cluster's identity to seed its greedy run.
    pub seed: u64,
}

/// Order of service: size descending, then identity ascending.
pub fn queue_order(clusters: &[Cluster]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by(|&a, &b| {
        clusters[b]
            .len()
            .cmp(&clusters[a].len())
            .then_with(|| clusters[a].identity_cmp(&clusters[b]))
    });
    order
}

/// Solves every cluster of two or more users on `workers` threads pulling
/// from one shared largest-first queue.
///
/// Each job is deterministic given its cluster, so the output does not
/// depend on the worker count or on which worker ran which job.
pub fn run_all(
    clusters: Vec<Cluster>,
    oracle: &SimilarityOracle,
    params: &ScheduleParams,
) -> Result<ScheduleOutput> {
    if params.workers == 0 {
        return Err(Error::InvalidParameter(
            "worker count must be at least 1".into(),
        ));
    }
    if params.rho == 0 || params.k == 0 {
        return Err(Error::InvalidParameter(
            "rho and k must be at least 1".into(),
        ));
    }
    let start = Instant::now();
    let mut skipped = 0;
    let mut queue = Vec::with_capacity(clusters.len());
    for idx in queue_order(&clusters) {
        if clusters[idx].len() < 2 {
            let c = &clusters[idx];
            log::debug!(
                "skipping cluster func={} chain={} bucket={} with {} user(s)",
                c.func,
                c.chain,
                c.bucket,
                c.len()
            );
            skipped += 1;
        } else {
            queue.push(idx);
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} single-user cluster(s)");
    }
    queue.reverse();

    type Slot = Option<Result<(KnnGraph, JobAudit)>>;
    let queue = Mutex::new((queue, 0usize));
    let results: Mutex<Vec<Slot>> = Mutex::new((0..clusters.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..params.workers {
            scope.spawn(|| loop {
                let (idx, dequeued) = {
                    let mut q = queue.lock().unwrap_or_else(|e| e.into_inner());
                    let Some(idx) = q.0.pop() else { break };
                    q.1 += 1;
                    (idx, q.1 - 1)
                };
                let out = solve_one(&clusters[idx], oracle, params, dequeued);
                results.lock().unwrap_or_else(|e| e.into_inner())[idx] = Some(out);
            });
        }
    });

    let results = results.into_inner().unwrap_or_else(|e| e.into_inner());
    let mut partials = Vec::new();
    let mut audit = Vec::new();
    for (cluster, slot) in clusters.into_iter().zip(results) {
        if let Some(res) = slot {
            let (graph, a) = res?;
            audit.push(a);
            partials.push((cluster, graph));
        }
    }
    let stats = ScheduleStats {
        workers: params.workers,
        jobs: audit.len(),
        brute_jobs: audit.iter().filter(|a| a.solver == Solver::Brute).count(),
        greedy_jobs: audit.iter().filter(|a| a.solver == Solver::Greedy).count(),
        skipped_singletons: skipped,
        evaluations: audit.iter().map(|a| a.evaluations).sum(),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(ScheduleOutput {
        partials,
        audit,
        stats,
    })
}

fn solve_one(
    cluster: &Cluster,
    oracle: &SimilarityOracle,
    params: &ScheduleParams,
    dequeued: usize,
) -> Result<(KnnGraph, JobAudit)> {
    let solver = choose_solver(cluster.len(), params.rho, params.k);
    let out = match solver {
        Solver::Brute => brute_force_knn(&cluster.members, oracle, params.k)?,
        Solver::Greedy => {
            let greedy = GreedyParams {
                seed: derive_seed(params.seed, CLUSTER_SEED_NAMESPACE, cluster.identity_key()),
                parallel: false,
                ..params.greedy
            };
            greedy_knn(&cluster.members, oracle, params.k, &greedy)?
        }
    };
    let audit = JobAudit {
        func: cluster.func,
        bucket: cluster.bucket,
        chain: cluster.chain.to_string(),
        size: cluster.len(),
        solver,
        evaluations: out.evaluations,
        iterations: out.iterations,
        dequeued,
    };
    Ok((out.graph, audit))
}
