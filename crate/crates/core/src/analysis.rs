//! Monte Carlo checks of the co-clustering probability bounds.
//!
//! Generative functions are modeled as independent uniform assignments of
//! items to `[1, b]`. Each trial draws a fresh assignment from a generator
//! seeded by `(seed, trial)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hashing::derive_seed;
use crate::similarity::jaccard;
use crate::ItemId;

const TRIAL_NAMESPACE: u64 = 0x6E6E_4746_0000_0007;

/// Trials per parallel task; fixes the reduction shape.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub trials: usize,
    pub ell_union: usize,
    pub b: u32,
    pub jaccard: f64,
    /// Mean collision density κ/ℓ∪.
    pub mean_density: f64,
    pub max_density: f64,
    /// Empirical frequency of equal FastRandomHash values.
    pub p_hat: f64,
    /// `J - mean κ/ℓ∪`.
    pub lower_bound: f64,
    /// `J + 3 mean κ/ℓ∪`, remainder term excluded.
    pub upper_bound: f64,
    /// Trials whose conditional co-hash probability leaves
    /// `[J - κ/ℓ∪, J + 3κ/ℓ∪]`.
    pub violations: usize,
    /// Largest excess of a violating trial beyond its bound.
    pub max_violation: f64,
    /// Trials whose conditional probability lies in `interval`, if given.
    pub interval: Option<(f64, f64)>,
    pub in_interval: usize,
}

impl Theorem1Report {
    pub fn violation_rate(&self) -> f64 {
        self.violations as f64 / self.trials as f64
    }

    pub fn interval_rate(&self) -> f64 {
        self.in_interval as f64 / self.trials as f64
    }

    /// Monte Carlo standard error of `p_hat`.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

#[derive(Default, Clone, Copy)]
struct T1Acc {
    equal: usize,
    density_sum: f64,
    density_max: f64,
    violations: usize,
    max_violation: f64,
    in_interval: usize,
}

/// Samples `trials` random generative functions over `P1 ∪ P2`.
///
/// For each one it records κ = ℓ∪ − |h(P1 ∪ P2)|, whether the two minima
/// agree, and the conditional probability
/// `|h(P1) ∩ h(P2)| / |h(P1 ∪ P2)|` that the minimum over the union's hash
/// values is shared, which the per-trial bounds are checked against.
/// `interval`, when given, is an absolute interval for that probability.
pub fn check_theorem1(
    p1: &[ItemId],
    p2: &[ItemId],
    b: u32,
    trials: usize,
    seed: u64,
    interval: Option<(f64, f64)>,
) -> Result<Theorem1Report> {
    if p1.is_empty() || p2.is_empty() {
        return Err(Error::InvalidParameter("profiles must be non-empty".into()));
    }
    if b == 0 || trials == 0 {
        return Err(Error::InvalidParameter(
            "b and trials must be positive".into(),
        ));
    }
    // Union as (item, in_p1, in_p2).
    let mut union: Vec<(ItemId, bool, bool)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < p1.len() || j < p2.len() {
        match (p1.get(i), p2.get(j)) {
            (Some(&a), Some(&c)) if a == c => {
                union.push((a, true, true));
                i += 1;
                j += 1;
            }
            (Some(&a), Some(&c)) if a < c => {
                union.push((a, true, false));
                i += 1;
            }
            (Some(&a), None) => {
                union.push((a, true, false));
                i += 1;
            }
            (_, Some(&c)) => {
                union.push((c, false, true));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let ell = union.len();
    let jac = jaccard(p1, p2);

    let chunks = trials.div_ceil(CHUNK);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = T1Acc::default();
            // in1/in2 per bucket, reset between trials via the touched list
            let mut marks = vec![0u8; b as usize + 1];
            let mut touched = Vec::with_capacity(ell);
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, TRIAL_NAMESPACE, trial as u64));
                let (mut min1, mut min2) = (u32::MAX, u32::MAX);
                for &(_, a, c2) in &union {
                    let h = rng.random_range(1..=b);
                    if marks[h as usize] == 0 {
                        touched.push(h);
                    }
                    if a {
                        marks[h as usize] |= 1;
                        min1 = min1.min(h);
                    }
                    if c2 {
                        marks[h as usize] |= 2;
                        min2 = min2.min(h);
                    }
                }
                let distinct = touched.len();
                let shared = touched.iter().filter(|&&h| marks[h as usize] == 3).count();
                for &h in &touched {
                    marks[h as usize] = 0;
                }
                touched.clear();

                let density = (ell - distinct) as f64 / ell as f64;
                let p_h = shared as f64 / distinct as f64;
                acc.equal += usize::from(min1 == min2);
                acc.density_sum += density;
                acc.density_max = acc.density_max.max(density);
                let excess = (jac - density - p_h).max(p_h - (jac + 3.0 * density));
                if excess > 1e-12 {
                    acc.violations += 1;
                    acc.max_violation = acc.max_violation.max(excess);
                }
                if let Some((lo, hi)) = interval {
                    acc.in_interval += usize::from(lo <= p_h && p_h <= hi);
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T1Acc::default(), |a, x| T1Acc {
            equal: a.equal + x.equal,
            density_sum: a.density_sum + x.density_sum,
            density_max: a.density_max.max(x.density_max),
            violations: a.violations + x.violations,
            max_violation: a.max_violation.max(x.max_violation),
            in_interval: a.in_interval + x.in_interval,
        });

    let mean_density = acc.density_sum / trials as f64;
    Ok(Theorem1Report {
        trials,
        ell_union: ell,
        b,
        jaccard: jac,
        mean_density,
        max_density: acc.density_max,
        p_hat: acc.equal as f64 / trials as f64,
        lower_bound: jac - mean_density,
        upper_bound: jac + 3.0 * mean_density,
        violations: acc.violations,
        max_violation: acc.max_violation,
        interval,
        in_interval: acc.in_interval,
    })
}

/// Exact probability that two profiles get equal FastRandomHash values,
/// by enumerating all `b^ℓ∪` assignments of the union's items.
pub fn exact_equal_probability(p1: &[ItemId], p2: &[ItemId], b: u32) -> Result<f64> {
    let mut union: Vec<ItemId> = p1.iter().chain(p2).copied().collect();
    union.sort_unstable();
    union.dedup();
    let ell = union.len() as u32;
    let total = (b as u64)
        .checked_pow(ell)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| {
            Error::InvalidParameter(format!("{b}^{ell} assignments are too many to enumerate"))
        })?;
    let in1: Vec<bool> = union.iter().map(|i| p1.binary_search(i).is_ok()).collect();
    let in2: Vec<bool> = union.iter().map(|i| p2.binary_search(i).is_ok()).collect();
    let mut equal = 0u64;
    for code in 0..total {
        let (mut rest, mut m1, mut m2) = (code, u32::MAX, u32::MAX);
        for idx in 0..union.len() {
            let h = (rest % b as u64) as u32 + 1;
            rest /= b as u64;
            if in1[idx] {
                m1 = m1.min(h);
            }
            if in2[idx] {
                m2 = m2.min(h);
            }
        }
        equal += u64::from(m1 == m2);
    }
    Ok(equal as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub ell_union: usize,
    pub b: u32,
    pub d: f64,
    /// `(1 + d)(ℓ∪ − 1) / (2b)`.
    pub threshold: f64,
    /// Lower bound on `P[κ/ℓ∪ < threshold]`.
    pub bound: f64,
    pub trials: usize,
    /// Empirical frequency of `κ/ℓ∪ < threshold`; exact when `b = 1`.
    pub frequency: f64,
    pub std_error: f64,
}

/// `1 − (e^d / (1+d)^(1+d))^(ℓ(ℓ−1)/(2b))`.
pub fn theorem2_bound(ell_union: usize, b: u32, d: f64) -> f64 {
    let mu = ell_union as f64 * (ell_union as f64 - 1.0) / (2.0 * f64::from(b));
    let log_base = d - (1.0 + d) * (1.0 + d).ln();
    1.0 - (mu * log_base).exp()
}

/// Throws `ell_union` distinct items into `[1, b]` per trial and counts how
/// often the collision density stays below the threshold.
pub fn check_theorem2(
    ell_union: usize,
    b: u32,
    d: f64,
    trials: usize,
    seed: u64,
) -> Result<Theorem2Report> {
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "d must be positive, got {d}"
        )));
    }
    if ell_union == 0 || b == 0 {
        return Err(Error::InvalidParameter(
            "ell_union and b must be positive".into(),
        ));
    }
    let threshold = (1.0 + d) * (ell_union as f64 - 1.0) / (2.0 * f64::from(b));
    let bound = theorem2_bound(ell_union, b, d);
    let below = |kappa: usize| (kappa as f64 / ell_union as f64) < threshold;
    if b == 1 {
        return Ok(Theorem2Report {
            ell_union,
            b,
            d,
            threshold,
            bound,
            trials: 0,
            frequency: if below(ell_union - 1) { 1.0 } else { 0.0 },
            std_error: 0.0,
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let chunks = trials.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut seen = vec![false; b as usize + 1];
            let mut touched = Vec::with_capacity(ell_union);
            let mut hits = 0;
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, TRIAL_NAMESPACE ^ 2, trial as u64));
                for _ in 0..ell_union {
                    let h = rng.random_range(1..=b) as usize;
                    if !seen[h] {
                        seen[h] = true;
                        touched.push(h);
                    }
                }
                let kappa = ell_union - touched.len();
                debug_assert!(kappa < ell_union);
                hits += usize::from(below(kappa));
                for &h in &touched {
                    seen[h] = false;
                }
                touched.clear();
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let frequency = hits as f64 / trials as f64;
    Ok(Theorem2Report {
        ell_union,
        b,
        d,
        threshold,
        bound,
        trials,
        frequency,
        std_error: (frequency * (1.0 - frequency) / trials as f64).sqrt(),
    })
}

/// Two sorted profiles of `size1` and `size2` items sharing `shared` items.
pub fn profile_pair(size1: usize, size2: usize, shared: usize) -> (Vec<ItemId>, Vec<ItemId>) {
    let shared = shared.min(size1).min(size2);
    let p1: Vec<ItemId> = (0..size1 as ItemId).collect();
    let p2: Vec<ItemId> = (size1 - shared..size1 + size2 - shared)
        .map(|i| i as ItemId)
        .collect();
    (p1, p2)
}
