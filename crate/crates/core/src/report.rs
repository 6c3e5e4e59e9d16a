//! Versioned, machine-readable run reports.

use serde::Serialize;

use crate::clustering::ClusterStats;
use crate::dataset::Dataset;
use crate::pipeline::{BuildRun, Phase};
use crate::scheduler::{JobAudit, ScheduleStats};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub source: String,
    pub fingerprint: String,
    pub users: usize,
    pub items: usize,
    pub ratings: usize,
    pub dropped_users: usize,
}

impl DatasetInfo {
    pub fn of(ds: &Dataset, source: impl Into<String>) -> Self {
        DatasetInfo {
            source: source.into(),
            fingerprint: ds.fingerprint(),
            users: ds.n_users(),
            items: ds.n_items(),
            ratings: ds.n_ratings(),
            dropped_users: ds.dropped_users(),
        }
    }
}

/// Report of one graph construction, optionally evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub version: u32,
    pub dataset: DatasetInfo,
    pub algorithm: String,
    /// Every parameter of the run, seed included.
    pub params: serde_json::Value,
    pub build_seconds: f64,
    pub phases: Vec<Phase>,
    pub quality: Option<f64>,
    pub recall: Option<f64>,
    pub oracle_invocations: u64,
    pub edges: usize,
    pub cluster_stats: Option<ClusterStats>,
    pub schedule: Option<ScheduleStats>,
    pub greedy_updates: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub audit: Vec<JobAudit>,
}

impl RunReport {
    pub fn new(
        info: DatasetInfo,
        algorithm: &str,
        params: serde_json::Value,
        run: &BuildRun,
    ) -> Self {
        RunReport {
            version: REPORT_VERSION,
            dataset: info,
            algorithm: algorithm.to_string(),
            params,
            build_seconds: run.seconds(),
            phases: run.phases.clone(),
            quality: None,
            recall: None,
            oracle_invocations: run.evaluations,
            edges: run.graph.edge_count(),
            cluster_stats: run.cluster_stats.clone(),
            schedule: run.schedule.clone(),
            greedy_updates: run.updates.clone(),
            audit: Vec::new(),
        }
    }
}
