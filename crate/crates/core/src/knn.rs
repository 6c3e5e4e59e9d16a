//! KNN graph storage, similarity oracles and the per-cluster solvers
//! (exact brute force, Hyrec and NNDescent local search).

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::similarity::{self, GoldFingerSig};
use crate::UserId;

/// A neighbor and its similarity to the owning user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: UserId,
    pub sim: f64,
}

impl Neighbor {
    pub fn new(id: UserId, sim: f64) -> Self {
        Neighbor { id, sim }
    }

    /// Neighborhood order: similarity descending, then id ascending.
    #[inline]
    pub fn rank_cmp(&self, other: &Neighbor) -> Ordering {
        other.sim.total_cmp(&self.sim).then(self.id.cmp(&other.id))
    }
}

/// The `k` best neighbors seen so far, kept sorted by [`Neighbor::rank_cmp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    k: usize,
    items: Vec<Neighbor>,
}

impl Neighborhood {
    pub fn new(k: usize) -> Self {
        Neighborhood {
            k,
            items: Vec::with_capacity(k),
        }
    }

    /// Offers a candidate. Returns true if it entered the neighborhood.
    #[inline]
    pub fn insert(&mut self, candidate: Neighbor) -> bool {
        if self.k == 0 {
            return false;
        }
        if self.items.len() == self.k {
            let worst = self.items[self.k - 1];
            if candidate.rank_cmp(&worst) != Ordering::Less {
                return false;
            }
        }
        if self.items.iter().any(|n| n.id == candidate.id) {
            return false;
        }
        let pos = self
            .items
            .partition_point(|n| n.rank_cmp(&candidate) == Ordering::Less);
        self.items.insert(pos, candidate);
        self.items.truncate(self.k);
        true
    }

    pub fn contains(&self, id: UserId) -> bool {
        self.items.iter().any(|n| n.id == id)
    }

    pub fn as_slice(&self) -> &[Neighbor] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Lowest similarity held, if full.
    pub fn floor(&self) -> Option<f64> {
        (self.items.len() == self.k).then(|| self.items[self.k - 1].sim)
    }

    pub fn into_vec(self) -> Vec<Neighbor> {
        self.items
    }
}

/// Neighbor lists for a sorted set of users.
///
/// Graphs over a whole dataset list users `0..n`; partial graphs produced
/// for a cluster list only that cluster's members. Neighbor ids are always
/// global user ids.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    k: usize,
    users: Vec<UserId>,
    rows: Vec<Vec<Neighbor>>,
}

impl KnnGraph {
    /// Graph over `users` (sorted ascending) with the given rows.
    pub fn from_rows(k: usize, users: Vec<UserId>, rows: Vec<Vec<Neighbor>>) -> Result<Self> {
        if users.len() != rows.len() {
            return Err(Error::format("graph", "row count differs from user count"));
        }
        if users.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::format("graph", "users must be strictly increasing"));
        }
        Ok(KnnGraph { k, users, rows })
    }

    /// Full graph over users `0..rows.len()`.
    pub fn full(k: usize, rows: Vec<Vec<Neighbor>>) -> Self {
        let users = (0..rows.len() as UserId).collect();
        KnnGraph { k, users, rows }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn rows(&self) -> &[Vec<Neighbor>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Neighbors of a global user id, if the user is in this graph.
    pub fn neighbors(&self, user: UserId) -> Option<&[Neighbor]> {
        let idx = match self.users.get(user as usize) {
            Some(&u) if u == user => user as usize,
            _ => self.users.binary_search(&user).ok()?,
        };
        Some(&self.rows[idx])
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &[Neighbor])> {
        self.users
            .iter()
            .copied()
            .zip(self.rows.iter().map(Vec::as_slice))
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Checks every structural invariant; returns the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (u, row) in self.iter() {
            if row.len() > self.k {
                return Err(format!("user {u}: {} neighbors > k={}", row.len(), self.k));
            }
            if row.iter().any(|n| n.id == u) {
                return Err(format!("user {u} is its own neighbor"));
            }
            if row
                .windows(2)
                .any(|w| w[0].rank_cmp(&w[1]) != Ordering::Less)
            {
                return Err(format!("user {u}: neighbors not strictly ordered"));
            }
            let mut ids: Vec<UserId> = row.iter().map(|n| n.id).collect();
            ids.sort_unstable();
            if ids.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("user {u}: duplicate neighbor"));
            }
        }
        Ok(())
    }
}

/// How pair similarities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    ExactJaccard,
    GoldFinger { bits: usize },
}

enum Backend<'a> {
    Exact(&'a Dataset),
    GoldFinger(Vec<GoldFingerSig>),
}

/// Symmetric pair similarity over a dataset with an invocation counter.
pub struct SimilarityOracle<'a> {
    mode: OracleMode,
    backend: Backend<'a>,
    calls: AtomicU64,
}

impl<'a> SimilarityOracle<'a> {
    pub fn exact(ds: &'a Dataset) -> Self {
        SimilarityOracle {
            mode: OracleMode::ExactJaccard,
            backend: Backend::Exact(ds),
            calls: AtomicU64::new(0),
        }
    }

    /// Encodes every profile into a `bits`-wide signature.
    pub fn goldfinger(ds: &'a Dataset, bits: usize, seed: u64) -> Result<Self> {
        similarity::check_signature_width(bits)?;
        let sigs = ds
            .profiles()
            .par_iter()
            .map(|p| similarity::gf_encode(p, bits, seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(SimilarityOracle {
            mode: OracleMode::GoldFinger { bits },
            backend: Backend::GoldFinger(sigs),
            calls: AtomicU64::new(0),
        })
    }

    pub fn new(ds: &'a Dataset, mode: OracleMode, seed: u64) -> Result<Self> {
        match mode {
            OracleMode::ExactJaccard => Ok(Self::exact(ds)),
            OracleMode::GoldFinger { bits } => Self::goldfinger(ds, bits, seed),
        }
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    #[inline]
    pub fn similarity(&self, u: UserId, v: UserId) -> f64 {
        self.calls.fetch_add(1, AtomicOrdering::Relaxed);
        match &self.backend {
            Backend::Exact(ds) => similarity::jaccard(ds.profile(u), ds.profile(v)),
            Backend::GoldFinger(sigs) => {
                similarity::gf_jaccard_unchecked(&sigs[u as usize], &sigs[v as usize])
            }
        }
    }

    /// Total evaluations since construction (or the last reset).
    pub fn calls(&self) -> u64 {
        self.calls.load(AtomicOrdering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, AtomicOrdering::Relaxed);
    }
}

/// Result of one solver run.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub graph: KnnGraph,
    /// Similarity evaluations made by this run.
    pub evaluations: u64,
    /// Local-search iterations performed (0 for brute force).
    pub iterations: usize,
    /// Neighborhood entries changed in each iteration.
    pub updates: Vec<u64>,
}

/// Exact top-k within `users` (sorted ascending), evaluating every
/// unordered pair once.
pub fn brute_force_knn(
    users: &[UserId],
    oracle: &SimilarityOracle,
    k: usize,
) -> Result<SolveOutcome> {
    if users.len() < 2 {
        return Err(Error::TooFewUsers(users.len()));
    }
    let n = users.len();
    let mut hoods: Vec<Neighborhood> = (0..n).map(|_| Neighborhood::new(k)).collect();
    let mut evaluations = 0u64;
    for a in 0..n {
        let (head, tail) = hoods.split_at_mut(a + 1);
        let ha = &mut head[a];
        for (off, hb) in tail.iter_mut().enumerate() {
            let b = a + 1 + off;
            let sim = oracle.similarity(users[a], users[b]);
            evaluations += 1;
            ha.insert(Neighbor::new(users[b], sim));
            hb.insert(Neighbor::new(users[a], sim));
        }
    }
    let rows = hoods.into_iter().map(Neighborhood::into_vec).collect();
    Ok(SolveOutcome {
        graph: KnnGraph::from_rows(k, users.to_vec(), rows)?,
        evaluations,
        iterations: 0,
        updates: Vec::new(),
    })
}

/// Local-search flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GreedyVariant {
    /// Compare each user with its neighbors' neighbors.
    Hyrec,
    /// Compare each user's neighbors with one another.
    NnDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreedyParams {
    pub variant: GreedyVariant,
    pub delta: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Evaluate candidate pairs on the rayon pool.
    pub parallel: bool,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams {
            variant: GreedyVariant::Hyrec,
            delta: 0.001,
            max_iters: 30,
            seed: 0,
            parallel: false,
        }
    }
}

/// Greedy refinement of a seeded random initial graph over `users`.
///
/// Each user draws `k` distinct random neighbors; every initial similarity
/// is offered to both endpoints. Falls back to brute force when
/// `|users| <= k + 1`. See [`greedy_refine`] for the iteration rule.
pub fn greedy_knn(
    users: &[UserId],
    oracle: &SimilarityOracle,
    k: usize,
    params: &GreedyParams,
) -> Result<SolveOutcome> {
    let n = users.len();
    if n <= k + 1 || k == 0 {
        return brute_force_knn(users, oracle, k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut hoods: Vec<Neighborhood> = (0..n).map(|_| Neighborhood::new(k)).collect();
    let mut evaluations = 0u64;
    for u in 0..n {
        for j in sample(&mut rng, n - 1, k) {
            let v = if j >= u { j + 1 } else { j };
            let sim = oracle.similarity(users[u], users[v]);
            evaluations += 1;
            hoods[u].insert(Neighbor::new(v as UserId, sim));
            hoods[v].insert(Neighbor::new(u as UserId, sim));
        }
    }
    let mut out = refine_local(users, hoods, oracle, k, params)?;
    out.evaluations += evaluations;
    Ok(out)
}

/// Greedy iterations starting from `initial` instead of a random graph.
///
/// Each iteration gathers the candidate pairs proposed by the variant on
/// the graph as it stood at the start of the iteration, drops pairs that
/// are already linked in either direction, evaluates each remaining
/// unordered pair once, and offers the result to both endpoints in pair
/// order. The outcome is the same whether candidates are evaluated in
/// parallel or not. Stops once an iteration changes at most
/// `delta * k * |users|` entries or after `max_iters` iterations.
pub fn greedy_refine(
    initial: KnnGraph,
    oracle: &SimilarityOracle,
    params: &GreedyParams,
) -> Result<SolveOutcome> {
    let k = initial.k();
    let users = initial.users().to_vec();
    let local = |id: UserId| {
        users
            .binary_search(&id)
            .map(|i| i as UserId)
            .map_err(|_| Error::UnknownUser {
                id,
                n_users: users.len(),
            })
    };
    let mut hoods = Vec::with_capacity(users.len());
    for (u, row) in initial.iter() {
        let mut h = Neighborhood::new(k);
        for nb in row {
            if nb.id == u {
                return Err(Error::format("graph", "user listed as its own neighbor"));
            }
            h.insert(Neighbor::new(local(nb.id)?, nb.sim));
        }
        hoods.push(h);
    }
    refine_local(&users, hoods, oracle, k, params)
}

/// Iterates on neighborhoods held in local ids (indices into `users`).
fn refine_local(
    users: &[UserId],
    mut hoods: Vec<Neighborhood>,
    oracle: &SimilarityOracle,
    k: usize,
    params: &GreedyParams,
) -> Result<SolveOutcome> {
    let n = users.len();
    let threshold = params.delta * k as f64 * n as f64;
    let mut evaluations = 0u64;
    let mut updates = Vec::new();
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        let before: Vec<Vec<UserId>> = hoods
            .iter()
            .map(|h| {
                let mut ids: Vec<UserId> = h.as_slice().iter().map(|n| n.id).collect();
                ids.sort_unstable();
                ids
            })
            .collect();

        let pairs = candidate_pairs(&before, params.variant, params.parallel);
        let eval =
            |&(a, b): &(UserId, UserId)| oracle.similarity(users[a as usize], users[b as usize]);
        let sims: Vec<f64> = if params.parallel {
            pairs.par_iter().map(eval).collect()
        } else {
            pairs.iter().map(eval).collect()
        };
        evaluations += pairs.len() as u64;

        for (&(a, b), &sim) in pairs.iter().zip(&sims) {
            hoods[a as usize].insert(Neighbor::new(b, sim));
            hoods[b as usize].insert(Neighbor::new(a, sim));
        }

        let changed: u64 = hoods
            .iter()
            .zip(&before)
            .map(|(h, old)| {
                h.as_slice()
                    .iter()
                    .filter(|n| old.binary_search(&n.id).is_err())
                    .count() as u64
            })
            .sum();
        updates.push(changed);
        log::trace!(
            "greedy iteration {iterations}: {} pairs, {changed} updates",
            pairs.len()
        );
        if changed as f64 <= threshold {
            break;
        }
    }

    let rows = hoods
        .into_iter()
        .map(|h| {
            h.into_vec()
                .into_iter()
                .map(|nb| Neighbor::new(users[nb.id as usize], nb.sim))
                .collect()
        })
        .collect();
    Ok(SolveOutcome {
        graph: KnnGraph::from_rows(k, users.to_vec(), rows)?,
        evaluations,
        iterations,
        updates,
    })
}

/// Sorted, deduplicated unordered pairs `(a, b)`, `a < b`, proposed by one
/// iteration and not already linked in either direction.
fn candidate_pairs(
    adj: &[Vec<UserId>],
    variant: GreedyVariant,
    parallel: bool,
) -> Vec<(UserId, UserId)> {
    let linked = |a: UserId, b: UserId| {
        adj[a as usize].binary_search(&b).is_ok() || adj[b as usize].binary_search(&a).is_ok()
    };
    let propose = |u: usize| -> Vec<(UserId, UserId)> {
        let mut out = Vec::new();
        let row = &adj[u];
        match variant {
            GreedyVariant::Hyrec => {
                let u = u as UserId;
                for &v in row {
                    for &w in &adj[v as usize] {
                        if w != u && !linked(u, w) {
                            out.push((u.min(w), u.max(w)));
                        }
                    }
                }
            }
            GreedyVariant::NnDescent => {
                for (i, &a) in row.iter().enumerate() {
                    for &b in &row[i + 1..] {
                        if !linked(a, b) {
                            out.push((a.min(b), a.max(b)));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    };

    let mut pairs: Vec<(UserId, UserId)> = if parallel {
        (0..adj.len())
            .into_par_iter()
            .flat_map_iter(propose)
            .collect()
    } else {
        (0..adj.len()).flat_map(propose).collect()
    };
    if parallel {
        pairs.par_sort_unstable();
    } else {
        pairs.sort_unstable();
    }
    pairs.dedup();
    pairs
}
