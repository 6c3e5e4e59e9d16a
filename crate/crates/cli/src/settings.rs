//! Run parameters: flags override a key=value config file, which overrides
//! the built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use c2knn::baselines::{LshParams, DEFAULT_LSH_FUNCTIONS};
use c2knn::clustering::DEFAULT_MAX_CLUSTER;
use c2knn::pipeline::{DEFAULT_B, DEFAULT_K, DEFAULT_T};
use c2knn::scheduler::DEFAULT_RHO;
use c2knn::similarity::DEFAULT_SIGNATURE_BITS;
use c2knn::{C2Params, GreedyParams, GreedyVariant, InputFormat, OracleMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    C2,
    Bruteforce,
    Hyrec,
    Nndescent,
    Lsh,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::C2 => "c2",
            Algo::Bruteforce => "bruteforce",
            Algo::Hyrec => "hyrec",
            Algo::Nndescent => "nndescent",
            Algo::Lsh => "lsh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Hyrec,
    Nndescent,
}

impl From<Variant> for GreedyVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Hyrec => GreedyVariant::Hyrec,
            Variant::Nndescent => GreedyVariant::NnDescent,
        }
    }
}

/// Dataset ingestion flags.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Ratings file (user,item,rating[,timestamp]) or dataset snapshot.
    #[arg(long, short)]
    pub input: std::path::PathBuf,
    /// Ratings delimiter: csv, tsv or auto.
    #[arg(long)]
    pub format: Option<String>,
    /// Ratings strictly above this are positive.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Minimum raw ratings per user.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_profile: Option<u64>,
}

/// Algorithm parameters shared by build-like commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Key=value file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Neighborhood size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,
    /// Buckets per hash function.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub b: Option<u32>,
    /// Number of hash functions.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub t: Option<u64>,
    /// Maximum cluster size before splitting.
    #[arg(long = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub n_max: Option<u64>,
    /// Brute force below rho*k^2 users.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rho: Option<u64>,
    /// Greedy convergence threshold.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: Option<u64>,
    /// Local search used on large clusters.
    #[arg(long, value_enum)]
    pub greedy: Option<Variant>,
    /// Number of MinHash functions for lsh.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub lsh_t: Option<u64>,
    /// Signature width in bits.
    #[arg(long)]
    pub bits: Option<u64>,
    /// Use exact Jaccard instead of signatures.
    #[arg(long)]
    pub exact_sim: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

/// Fully resolved parameters, recorded verbatim in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub k: usize,
    pub b: u32,
    pub t: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub rho: usize,
    pub delta: f64,
    pub max_iters: usize,
    pub greedy: Variant,
    pub lsh_t: usize,
    pub bits: usize,
    pub exact_sim: bool,
    pub seed: u64,
    pub threads: usize,
    pub format: String,
    pub threshold: f64,
    pub min_profile: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            k: DEFAULT_K,
            b: DEFAULT_B,
            t: DEFAULT_T,
            n_max: DEFAULT_MAX_CLUSTER,
            rho: DEFAULT_RHO,
            delta: 0.001,
            max_iters: 30,
            greedy: Variant::Hyrec,
            lsh_t: DEFAULT_LSH_FUNCTIONS,
            bits: DEFAULT_SIGNATURE_BITS,
            exact_sim: false,
            seed: 0,
            threads: 1,
            format: "auto".into(),
            threshold: 3.0,
            min_profile: 20,
        }
    }
}

/// Error raised for bad user input; mapped to the usage exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parses `key = value` lines; `#` starts a comment. Keys may use `-` or `_`.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "{}:{}: expected key=value",
                path.display(),
                i + 1
            )));
        };
        map.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(map)
}

fn apply_config(s: &mut Settings, map: &BTreeMap<String, String>) -> Result<()> {
    fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| usage(format!("config: bad value {v:?} for {key}")))
    }
    for (key, v) in map {
        match key.as_str() {
            "k" => s.k = parse(key, v)?,
            "b" => s.b = parse(key, v)?,
            "t" => s.t = parse(key, v)?,
            "N" | "n" | "max_cluster" => s.n_max = parse(key, v)?,
            "rho" => s.rho = parse(key, v)?,
            "delta" => s.delta = parse(key, v)?,
            "max_iters" => s.max_iters = parse(key, v)?,
            "greedy" => {
                s.greedy = Variant::from_str(v, true)
                    .map_err(|_| usage(format!("config: bad greedy {v:?}")))?
            }
            "lsh_t" => s.lsh_t = parse(key, v)?,
            "bits" => s.bits = parse(key, v)?,
            "exact_sim" => s.exact_sim = parse(key, v)?,
            "seed" => s.seed = parse(key, v)?,
            "threads" => s.threads = parse(key, v)?,
            "format" => s.format = v.clone(),
            "threshold" => s.threshold = parse(key, v)?,
            "min_profile" => s.min_profile = parse(key, v)?,
            other => return Err(usage(format!("config: unknown key {other:?}"))),
        }
    }
    Ok(())
}

impl Settings {
    pub fn resolve(params: &ParamArgs, input: Option<&InputArgs>) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(path) = &params.config {
            apply_config(&mut s, &read_config(path)?)?;
        }
        macro_rules! take {
            ($field:ident, $src:expr) => {
                if let Some(v) = $src {
                    s.$field = v as _;
                }
            };
        }
        take!(k, params.k);
        take!(b, params.b);
        take!(t, params.t);
        take!(n_max, params.n_max);
        take!(rho, params.rho);
        take!(delta, params.delta);
        take!(max_iters, params.max_iters);
        take!(lsh_t, params.lsh_t);
        take!(bits, params.bits);
        take!(seed, params.seed);
        take!(threads, params.threads);
        if let Some(g) = params.greedy {
            s.greedy = g;
        }
        s.exact_sim |= params.exact_sim;
        if let Some(inp) = input {
            if let Some(f) = &inp.format {
                s.format = f.clone();
            }
            take!(threshold, inp.threshold);
            take!(min_profile, inp.min_profile);
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k", self.k),
            ("b", self.b as usize),
            ("t", self.t),
            ("N", self.n_max),
            ("rho", self.rho),
            ("max_iters", self.max_iters),
            ("lsh_t", self.lsh_t),
            ("threads", self.threads),
            ("min_profile", self.min_profile),
        ];
        for (name, v) in positive {
            if v == 0 {
                bail!(usage(format!("{name} must be at least 1")));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            bail!(usage(format!(
                "delta must be a non-negative number, got {}",
                self.delta
            )));
        }
        if !self.exact_sim {
            c2knn::similarity::check_signature_width(self.bits)
                .map_err(|e| usage(e.to_string()))?;
        }
        self.input_format()?;
        Ok(())
    }

    pub fn input_format(&self) -> Result<InputFormat> {
        self.format
            .parse()
            .map_err(|e: c2knn::Error| usage(e.to_string()))
    }

    pub fn oracle(&self) -> OracleMode {
        if self.exact_sim {
            OracleMode::ExactJaccard
        } else {
            OracleMode::GoldFinger { bits: self.bits }
        }
    }

    pub fn greedy_params(&self, variant: GreedyVariant) -> GreedyParams {
        GreedyParams {
            variant,
            delta: self.delta,
            max_iters: self.max_iters,
            seed: self.seed,
            parallel: false,
        }
    }

    pub fn c2(&self) -> C2Params {
        C2Params {
            k: self.k,
            b: self.b,
            t: self.t,
            max_cluster: self.n_max,
            rho: self.rho,
            greedy: self.greedy_params(self.greedy.into()),
            oracle: self.oracle(),
            seed: self.seed,
            workers: self.threads,
        }
    }

    pub fn lsh(&self) -> LshParams {
        LshParams {
            functions: self.lsh_t,
            k: self.k,
            rho: self.rho,
            greedy: self.greedy_params(self.greedy.into()),
            oracle: self.oracle(),
            seed: self.seed,
            workers: self.threads,
        }
    }
}
